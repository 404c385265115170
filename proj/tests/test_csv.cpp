#include "tracekit/csv.hpp"
#include "tracekit/error.hpp"
#include "tracekit/time_util.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace tracekit;

TEST_CASE("double formatting round-trips bit-exactly") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 1000; ++i) {
        const double v = std::bit_cast<double>(rng() & 0x7fefffffffffffffULL);  // finite
        auto parsed = parse_double(format_double(v));
        REQUIRE(parsed.has_value());
        CHECK(std::bit_cast<std::uint64_t>(*parsed) == std::bit_cast<std::uint64_t>(v));
    }
}

TEST_CASE("csv quoting round-trips awkward fields") {
    const std::vector<std::string> fields = {"plain", "with,comma", "with\"quote", " padded ", ""};
    std::ostringstream out;
    CsvWriter writer(out);
    writer.write_row(fields);
    std::string line = out.str();
    line.pop_back();  // newline
    CHECK(split_csv_line(line, ',') == fields);
}

TEST_CASE("read_csv yields header and line numbers") {
    std::istringstream in("a,b\n1,2\n\n3,4\n");
    CsvFile file = read_csv(in);
    CHECK(file.header == std::vector<std::string>{"a", "b"});
    REQUIRE(file.rows.size() == 2);
    CHECK(file.line_numbers == std::vector<std::size_t>{2, 4});
}

TEST_CASE("read_csv without a header is a configuration error") {
    std::istringstream in("");
    CHECK_THROWS_AS(read_csv(in), ConfigError);
}

TEST_CASE("timestamps parse as epoch or ISO-8601") {
    CHECK(parse_timestamp("1420070400") == 1420070400);
    CHECK(parse_timestamp("-60") == -60);
    CHECK(parse_timestamp("1970-01-01") == 0);
    CHECK(parse_timestamp("1970-01-02T00:00:00") == 86400);
    CHECK(parse_timestamp("2015-01-01 00:00:00Z") == 1420070400);
    CHECK(parse_timestamp("2015-01-31T23:00:00") == 1422745200);
    CHECK_FALSE(parse_timestamp("not-a-time").has_value());
    CHECK_FALSE(parse_timestamp("2015-13-01").has_value());
    CHECK_FALSE(parse_timestamp("100.5").has_value());
}

TEST_CASE("civil conversions invert each other") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 2000; ++i) {
        const std::int64_t day = static_cast<std::int64_t>(rng() % 40000) - 10000;
        CivilDate c = civil_from_days(day);
        CHECK(days_from_civil(c.year, c.month, c.day) == day);
    }
    CHECK(days_from_civil(2015, 1, 1) == 16436);
    CHECK(format_day(0) == "1970-01-01");
}
