#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tracekit {

// Shortest text that parses back to the same bits.
std::string format_double(double value);
std::string format_int(std::int64_t value);

std::optional<double> parse_double(std::string_view text);
std::optional<std::int64_t> parse_int(std::string_view text);

// Splits one record into fields. Supports RFC-4180 style quoting ("" escapes
// a quote inside a quoted field). Embedded newlines are not supported; inputs
// are read line by line.
std::vector<std::string> split_csv_line(std::string_view line, char delimiter);

// Quotes a field when it contains the delimiter, a quote, or leading/trailing
// whitespace.
std::string csv_escape(std::string_view field, char delimiter);

class CsvWriter {
public:
    CsvWriter(std::ostream& out, char delimiter = ',') : out_(out), delimiter_(delimiter) {}
    void write_row(const std::vector<std::string>& fields);

private:
    std::ostream& out_;
    char delimiter_;
};

struct CsvFile {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // 1-based file line of each row
};

// Reads the whole stream; the first non-empty line is the header.
// Throws DataError when the stream has no header line.
CsvFile read_csv(std::istream& in, char delimiter = ',');

}  // namespace tracekit
