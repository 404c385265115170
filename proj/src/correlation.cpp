#include "tracekit/correlation.hpp"

#include "tracekit/csv.hpp"
#include "tracekit/error.hpp"
#include "tracekit/kernels.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace tracekit {

void DataTable::add_numeric(std::string name, std::vector<std::optional<double>> values) {
    if (has_column(name)) throw ConfigError("duplicate column '" + name + "'");
    if (!empty_ && values.size() != rows_)
        throw ConfigError("column '" + name + "' length mismatch");
    rows_ = values.size();
    empty_ = false;
    columns_.push_back({std::move(name), true, std::move(values), {}});
}

void DataTable::add_nominal(std::string name, std::vector<std::optional<std::string>> labels) {
    if (has_column(name)) throw ConfigError("duplicate column '" + name + "'");
    if (!empty_ && labels.size() != rows_)
        throw ConfigError("column '" + name + "' length mismatch");
    rows_ = labels.size();
    empty_ = false;
    columns_.push_back({std::move(name), false, {}, std::move(labels)});
}

bool DataTable::has_column(const std::string& name) const {
    for (const Column& c : columns_)
        if (c.name == name) return true;
    return false;
}

const DataTable::Column& DataTable::find(const std::string& name) const {
    for (const Column& c : columns_)
        if (c.name == name) return c;
    throw ConfigError("no such column '" + name + "'");
}

bool DataTable::is_numeric(const std::string& name) const { return find(name).numeric; }

const std::vector<std::optional<double>>& DataTable::numeric(const std::string& name) const {
    const Column& c = find(name);
    if (!c.numeric) throw ConfigError("column '" + name + "' is not numerical");
    return c.values;
}

std::vector<std::optional<std::string>> DataTable::nominal(const std::string& name) const {
    const Column& c = find(name);
    if (!c.numeric) return c.labels;
    std::vector<std::optional<std::string>> out(c.values.size());
    for (std::size_t i = 0; i < c.values.size(); ++i)
        if (c.values[i]) out[i] = format_double(*c.values[i]);
    return out;
}

const char* cell_method_name(CellMethod method) {
    switch (method) {
        case CellMethod::Diagonal: return "unity-diagonal";
        case CellMethod::Pearson: return "pearson";
        case CellMethod::Ratio: return "ratio";
        case CellMethod::Absent: return "absent";
        case CellMethod::Undefined: return "undefined";
    }
    return "?";
}

namespace {

std::optional<double> pearson_impl(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0 || syy == 0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double ratio_impl(std::span<const std::string> categories, std::span<const double> y) {
    const std::size_t n = y.size();
    double mean = 0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(n);

    std::map<std::string_view, std::pair<double, std::size_t>> groups;  // sum, count
    for (std::size_t i = 0; i < n; ++i) {
        auto& g = groups[categories[i]];
        g.first += y[i];
        g.second += 1;
    }

    double between = 0;
    for (const auto& [label, g] : groups) {
        const double group_mean = g.first / static_cast<double>(g.second);
        between += static_cast<double>(g.second) * (group_mean - mean) * (group_mean - mean);
    }
    double total = 0;
    for (double v : y) total += (v - mean) * (v - mean);
    if (total == 0) return 0.0;
    return std::clamp(std::sqrt(between / total), 0.0, 1.0);
}

}  // namespace

double pearson_r(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("pearson_r: length mismatch");
    if (x.size() < 2) throw std::invalid_argument("pearson_r: need at least two points");
    auto r = pearson_impl(x, y);
    if (!r) throw std::domain_error("undefined correlation: zero variance input");
    return *r;
}

double correlation_ratio(std::span<const std::string> categories, std::span<const double> y) {
    if (categories.size() != y.size())
        throw std::invalid_argument("correlation_ratio: length mismatch");
    if (y.size() < 2) throw std::invalid_argument("correlation_ratio: need at least two points");
    return ratio_impl(categories, y);
}

CorrelationMatrix correlation_matrix(const DataTable& table,
                                     const std::vector<ColumnSpec>& specs) {
    const std::size_t n = specs.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j)
            if (specs[i].name == specs[j].name)
                throw ConfigError("duplicate column '" + specs[i].name + "' in matrix request");
        if (!table.has_column(specs[i].name))
            throw ConfigError("no such column '" + specs[i].name + "'");
        if (specs[i].kind == ColumnKind::Numerical && !table.is_numeric(specs[i].name))
            throw ConfigError("column '" + specs[i].name + "' is not numerical");
    }

    // Materialize the requested view once.
    std::vector<const std::vector<std::optional<double>>*> numeric(n, nullptr);
    std::vector<std::vector<std::optional<std::string>>> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (specs[i].kind == ColumnKind::Numerical)
            numeric[i] = &table.numeric(specs[i].name);
        else
            labels[i] = table.nominal(specs[i].name);
    }

    CorrelationMatrix matrix;
    matrix.labels.reserve(n);
    for (const ColumnSpec& s : specs) matrix.labels.push_back(s.name);
    matrix.values.assign(n * n, std::nullopt);
    matrix.methods.assign(n * n, CellMethod::Absent);
    for (std::size_t i = 0; i < n; ++i) {
        matrix.values[i * n + i] = 1.0;
        matrix.methods[i * n + i] = CellMethod::Diagonal;
    }

    struct Task {
        std::size_t i, j;
    };
    std::vector<Task> tasks;
    tasks.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) tasks.push_back({i, j});

    std::vector<std::optional<double>> cell_values(tasks.size());
    std::vector<CellMethod> cell_methods(tasks.size(), CellMethod::Absent);
    const std::size_t rows = table.rows();

    // Cells are independent; computed in parallel, assembled deterministically.
    kernels::for_index(tasks.size(), [&](std::size_t t) {
        const std::size_t i = tasks[t].i;
        const std::size_t j = tasks[t].j;
        const bool num_i = specs[i].kind == ColumnKind::Numerical;
        const bool num_j = specs[j].kind == ColumnKind::Numerical;
        if (num_i && num_j) {
            std::vector<double> x, y;
            x.reserve(rows);
            y.reserve(rows);
            for (std::size_t r = 0; r < rows; ++r) {
                const auto& a = (*numeric[i])[r];
                const auto& b = (*numeric[j])[r];
                if (a && b) {
                    x.push_back(*a);
                    y.push_back(*b);
                }
            }
            cell_methods[t] = CellMethod::Pearson;
            if (x.size() >= 2) cell_values[t] = pearson_impl(x, y);
            if (!cell_values[t]) cell_methods[t] = CellMethod::Undefined;
        } else if (num_i != num_j) {
            const std::size_t nom = num_i ? j : i;
            const std::size_t num = num_i ? i : j;
            std::vector<std::string> cats;
            std::vector<double> y;
            for (std::size_t r = 0; r < rows; ++r) {
                const auto& c = labels[nom][r];
                const auto& v = (*numeric[num])[r];
                if (c && v) {
                    cats.push_back(*c);
                    y.push_back(*v);
                }
            }
            if (!cats.empty()) {
                cell_values[t] = ratio_impl(cats, y);
                cell_methods[t] = CellMethod::Ratio;
            } else {
                cell_methods[t] = CellMethod::Undefined;
            }
        }  // nominal x nominal stays Absent
    });

    for (std::size_t t = 0; t < tasks.size(); ++t) {
        const std::size_t i = tasks[t].i;
        const std::size_t j = tasks[t].j;
        matrix.values[i * n + j] = cell_values[t];
        matrix.values[j * n + i] = cell_values[t];
        matrix.methods[i * n + j] = cell_methods[t];
        matrix.methods[j * n + i] = cell_methods[t];
    }
    return matrix;
}

std::vector<StrongPair> strong_pairs(const CorrelationMatrix& matrix, double threshold) {
    std::vector<StrongPair> pairs;
    const std::size_t n = matrix.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            auto v = matrix.at(i, j);
            if (v && std::abs(*v) > threshold)
                pairs.push_back({matrix.labels[i], matrix.labels[j], *v});
        }
    std::sort(pairs.begin(), pairs.end(), [](const StrongPair& a, const StrongPair& b) {
        if (std::abs(a.value) != std::abs(b.value)) return std::abs(a.value) > std::abs(b.value);
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
    });
    return pairs;
}

std::string matrix_csv(const CorrelationMatrix& matrix) {
    std::ostringstream out;
    CsvWriter writer(out);
    const std::size_t n = matrix.size();
    std::vector<std::string> row;
    row.push_back("");
    for (const auto& l : matrix.labels) row.push_back(l);
    writer.write_row(row);
    for (std::size_t i = 0; i < n; ++i) {
        row.clear();
        row.push_back(matrix.labels[i]);
        for (std::size_t j = 0; j < n; ++j) {
            auto v = matrix.at(i, j);
            row.push_back(v ? format_double(*v) : std::string());
        }
        writer.write_row(row);
    }
    return out.str();
}

std::string matrix_json(const CorrelationMatrix& matrix) {
    nlohmann::ordered_json j;
    j["labels"] = matrix.labels;
    const std::size_t n = matrix.size();
    auto& values = j["values"] = nlohmann::ordered_json::array();
    auto& methods = j["methods"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < n; ++i) {
        nlohmann::ordered_json vrow = nlohmann::ordered_json::array();
        nlohmann::ordered_json mrow = nlohmann::ordered_json::array();
        for (std::size_t k = 0; k < n; ++k) {
            auto v = matrix.at(i, k);
            if (v)
                vrow.push_back(*v);
            else
                vrow.push_back(nullptr);
            mrow.push_back(cell_method_name(matrix.method_at(i, k)));
        }
        values.push_back(std::move(vrow));
        methods.push_back(std::move(mrow));
    }
    return j.dump(2) + "\n";
}

std::string strong_pairs_csv(const std::vector<StrongPair>& pairs) {
    std::ostringstream out;
    CsvWriter writer(out);
    writer.write_row({"first", "second", "value"});
    for (const StrongPair& p : pairs)
        writer.write_row({p.first, p.second, format_double(p.value)});
    return out.str();
}

}  // namespace tracekit
