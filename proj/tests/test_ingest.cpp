#include "tracekit/ingest.hpp"

#include "tracekit/error.hpp"
#include "helpers/fixtures.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace tracekit;

namespace {

JobParseResult parse_jobs(const std::string& text, const Schema& schema = {}) {
    std::istringstream in(text);
    return parse_job_traces(in, schema);
}

GpuParseResult parse_gpus(const std::string& text, const Schema& schema = {}) {
    std::istringstream in(text);
    return parse_gpu_events(in, schema);
}

const char* kJobHeader =
    "node_count,max_rss,start_time,end_time,alps_exit,command,gpu_maxmem,gpu_summem,"
    "gpu_secs,stime,utime\n";

}  // namespace

TEST_CASE("well-formed job row is accepted") {
    auto result = parse_jobs(std::string(kJobHeader) +
                             "4,1000,100,880,0,/proj/chm045/a.out,500,2000,10,1,2\n");
    REQUIRE(result.rows.size() == 1);
    CHECK(result.report.rows_rejected == 0);
    const JobTrace& t = result.rows[0];
    CHECK(t.node_count == 4);
    CHECK(t.start_time == 100);
    CHECK(t.end_time == 880);
    CHECK(t.alps_exit == 0);
    CHECK(t.gpu_secs == 10.0);
    CHECK(t.command == "/proj/chm045/a.out");
}

TEST_CASE("row ending before it starts is rejected with a reason") {
    auto result = parse_jobs(std::string(kJobHeader) + "4,1000,100,50,0,/a,500,2000,10,1,2\n");
    CHECK(result.rows.empty());
    REQUIRE(result.report.rejection_reasons.size() == 1);
    CHECK(result.report.rejection_reasons[0].first == 2);
    CHECK(result.report.rejection_reasons[0].second == "end_time precedes start_time");
}

TEST_CASE("missing cells stay missing instead of becoming zero") {
    auto result = parse_jobs(std::string(kJobHeader) + ",,100,880,0,/a,,NA,10,,\n");
    REQUIRE(result.rows.size() == 1);
    const JobTrace& t = result.rows[0];
    CHECK_FALSE(t.node_count.has_value());
    CHECK_FALSE(t.max_rss.has_value());
    CHECK_FALSE(t.gpu_summem.has_value());
    CHECK_FALSE(t.stime.has_value());
    CHECK(t.gpu_secs == 10.0);
}

TEST_CASE("schema maps custom column names and rejects unknown ones") {
    const std::string text = "nodes,begin,finish\n3,100,200\n";
    Schema schema{{"node_count", "nodes"}, {"start_time", "begin"}, {"end_time", "finish"}};
    auto result = parse_jobs(text, schema);
    REQUIRE(result.rows.size() == 1);
    CHECK(result.rows[0].node_count == 3);
    CHECK_FALSE(result.rows[0].max_rss.has_value());

    CHECK_THROWS_AS(parse_jobs(text, Schema{{"node_count", "missing_col"}}), ConfigError);
    CHECK_THROWS_AS(parse_jobs(text, Schema{{"not_a_field", "nodes"}}), ConfigError);
}

TEST_CASE("ISO timestamps are converted at parse") {
    auto result =
        parse_jobs(std::string(kJobHeader) + "1,1,2015-01-01T00:00:00,2015-01-01 01:00:00,0,/a,1,1,1,1,1\n");
    REQUIRE(result.rows.size() == 1);
    CHECK(result.rows[0].start_time == 1420070400);
    CHECK(result.rows[0].end_time == 1420074000);
}

TEST_CASE("corrupted fixture rows are rejected exactly per the generator log") {
    auto file = fixtures::corrupted_job_file(1000, 27, 99);
    REQUIRE(file.corrupted_lines.size() == 37);
    auto result = parse_jobs(file.csv);
    CHECK(result.report.rows_read == 1000);
    CHECK(result.report.rows_rejected == 37);
    CHECK(result.report.rows_accepted == 963);
    std::vector<std::size_t> rejected_lines;
    for (const auto& [line, reason] : result.report.rejection_reasons)
        rejected_lines.push_back(line);
    CHECK(rejected_lines == file.corrupted_lines);
}

TEST_CASE("rejection counts always balance") {
    std::mt19937_64 rng(5);
    for (int round = 0; round < 10; ++round) {
        auto file = fixtures::corrupted_job_file(100, 1 + rng() % 9, rng());
        auto result = parse_jobs(file.csv);
        CHECK(result.report.rows_read ==
              result.report.rows_accepted + result.report.rows_rejected);
    }
}

TEST_CASE("gpu events parse with sentinel removes") {
    auto result = parse_gpus("sn,insert,remove\nG1,1000,2000\nG2,1000,\nG3,1000,NA\n");
    REQUIRE(result.rows.size() == 3);
    CHECK(result.rows[0].remove == 2000);
    CHECK_FALSE(result.rows[1].remove.has_value());
    CHECK_FALSE(result.rows[2].remove.has_value());
}

TEST_CASE("gpu event removed before insertion is rejected") {
    auto result = parse_gpus("sn,insert,remove\nG1,1000,500\n");
    CHECK(result.rows.empty());
    REQUIRE(result.report.rejection_reasons.size() == 1);
    CHECK(result.report.rejection_reasons[0].second == "remove precedes insert");
}

TEST_CASE("gpu time lag shifts both ends") {
    std::istringstream in("sn,insert,remove\nG1,1000,2000\n");
    ParseOptions options;
    options.gpu_time_lag = -250;
    auto result = parse_gpu_events(in, {}, options);
    REQUIRE(result.rows.size() == 1);
    CHECK(result.rows[0].insert == 750);
    CHECK(result.rows[0].remove == 1750);
}

TEST_CASE("accepted job rows round-trip bit-equal through serialization") {
    std::mt19937_64 rng(17);
    std::vector<JobTrace> rows;
    for (int i = 0; i < 200; ++i) {
        JobTrace t = fixtures::random_trace(rng);
        // knock out random fields to cover missingness
        if (rng() % 3 == 0) t.max_rss.reset();
        if (rng() % 5 == 0) t.stime.reset();
        if (rng() % 7 == 0) t.command.reset();
        rows.push_back(t);
    }
    std::ostringstream out;
    write_job_traces(out, rows);
    auto reparsed = parse_jobs(out.str());
    CHECK(reparsed.report.rows_rejected == 0);
    CHECK(reparsed.rows == rows);

    std::ostringstream out2;
    write_job_traces(out2, reparsed.rows);
    CHECK(out2.str() == out.str());
}

TEST_CASE("gpu events round-trip through serialization") {
    std::vector<GpuEvent> events{{"G1", 100, 500}, {"G2", 250, std::nullopt}};
    std::ostringstream out;
    write_gpu_events(out, events);
    auto reparsed = parse_gpus(out.str());
    CHECK(reparsed.rows == events);
}
