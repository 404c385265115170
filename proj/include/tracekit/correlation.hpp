#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tracekit {

enum class ColumnKind { Numerical, Nominal };

struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::Numerical;
};

// Column-oriented table with per-cell missingness. All columns share one row
// count; nominal columns hold labels, numerical columns hold reals.
class DataTable {
public:
    void add_numeric(std::string name, std::vector<std::optional<double>> values);
    void add_nominal(std::string name, std::vector<std::optional<std::string>> labels);

    std::size_t rows() const { return rows_; }
    bool has_column(const std::string& name) const;
    bool is_numeric(const std::string& name) const;
    const std::vector<std::optional<double>>& numeric(const std::string& name) const;
    // Nominal view of a column; numeric columns are formatted to label text.
    std::vector<std::optional<std::string>> nominal(const std::string& name) const;

private:
    struct Column {
        std::string name;
        bool numeric = false;
        std::vector<std::optional<double>> values;
        std::vector<std::optional<std::string>> labels;
    };
    const Column& find(const std::string& name) const;

    std::vector<Column> columns_;
    std::size_t rows_ = 0;
    bool empty_ = true;
};

enum class CellMethod : std::uint8_t {
    Diagonal,   // fixed 1
    Pearson,    // numerical x numerical
    Ratio,      // numerical x nominal (correlation ratio)
    Absent,     // nominal x nominal: no method defined
    Undefined,  // not computable (zero variance / no overlapping rows)
};

const char* cell_method_name(CellMethod method);

struct CorrelationMatrix {
    std::vector<std::string> labels;
    std::vector<std::optional<double>> values;  // n*n, row-major
    std::vector<CellMethod> methods;            // n*n

    std::size_t size() const { return labels.size(); }
    std::optional<double> at(std::size_t i, std::size_t j) const {
        return values[i * size() + j];
    }
    CellMethod method_at(std::size_t i, std::size_t j) const {
        return methods[i * size() + j];
    }
};

// Product-moment coefficient in [-1, 1]. Throws std::invalid_argument on
// length mismatch or fewer than two points, std::domain_error when either
// input has zero variance.
double pearson_r(std::span<const double> x, std::span<const double> y);

// eta = sqrt(between-group variance / total variance), in [0, 1]. Population
// (1/n) variances; zero total variance yields 0.
double correlation_ratio(std::span<const std::string> categories, std::span<const double> y);

// Mixed-type matrix: Pearson between numerical pairs, correlation ratio for
// numerical-nominal pairs, nominal-nominal left absent. Cells are computed
// over pairwise-complete rows; undefined correlations become null cells.
CorrelationMatrix correlation_matrix(const DataTable& table,
                                     const std::vector<ColumnSpec>& specs);

struct StrongPair {
    std::string first;
    std::string second;
    double value = 0;
};

// Off-diagonal cells with |value| strictly above the threshold, each
// unordered pair once, strongest first.
std::vector<StrongPair> strong_pairs(const CorrelationMatrix& matrix,
                                     double threshold = 0.5);

std::string matrix_csv(const CorrelationMatrix& matrix);
std::string matrix_json(const CorrelationMatrix& matrix);
std::string strong_pairs_csv(const std::vector<StrongPair>& pairs);

}  // namespace tracekit
