#include <doctest.h>

#include <cmath>
#include <sstream>
#include <thread>

#include "latarb/common/csv.hpp"
#include "latarb/common/error.hpp"
#include "latarb/common/hash.hpp"
#include "latarb/common/numfmt.hpp"
#include "latarb/common/parallel.hpp"
#include "latarb/common/stats.hpp"
#include "latarb/common/time.hpp"

using namespace latarb;

TEST_CASE("timestamps parse and format in UTC") {
    CHECK(parse_timestamp("1970-01-01T00:00:00Z") == 0);
    CHECK(parse_timestamp("2019-01-02T00:01:00Z") == 1546387260);
    CHECK(parse_timestamp("2019-01-02 00:01:00") == 1546387260);
    CHECK(format_timestamp(1546387260) == "2019-01-02T00:01:00Z");
    CHECK(parse_date("2019-01-02") == 17898);
    CHECK(format_date(17898) == "2019-01-02");
    CHECK(format_date(-1) == "1969-12-31");
    CHECK_THROWS_AS(parse_timestamp("2019-13-02T00:00:00Z"), Error);
    CHECK_THROWS_AS(parse_timestamp("2019-02-30T00:00:00Z"), Error);
    CHECK_THROWS_AS(parse_timestamp("yesterday"), Error);
    CHECK_THROWS_AS(parse_date("2019-1-2"), Error);
}

TEST_CASE("minute buckets close on the minute") {
    CHECK(minute_bucket(120) == 2);
    CHECK(minute_bucket(121) == 3);
    CHECK(minute_bucket(179) == 3);
    CHECK(minute_bucket(-30) == 0);
    CHECK(day_of(-1) == -1);
    CHECK(floor_div(-1441, 1440) == -2);
}

TEST_CASE("doubles round-trip through text") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0015, 123456.789})
        CHECK(parse_double(format_double(v)) == v);
    CHECK(format_double(0.0) == "0");
    CHECK(format_double(-0.0) == "0");
    CHECK(format_double(std::nan("")) == "");
    CHECK(std::isnan(parse_double("")));
    CHECK(parse_double("+2.5") == 2.5);
    CHECK_THROWS_AS(parse_double("2.5x"), Error);
    CHECK_THROWS_AS(parse_double("abc"), Error);
}

TEST_CASE("csv reader handles quotes and rejects ragged rows") {
    std::istringstream in("a,b\n1,\"x,y\"\n\n2,\"he said \"\"hi\"\"\"\n");
    auto t = csv::read(in, "mem");
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][1] == "x,y");
    CHECK(t.rows[1][1] == "he said \"hi\"");
    CHECK(t.lines[1] == 4);
    CHECK(t.column("b") == 1);
    CHECK_THROWS_AS(t.column("c"), Error);

    std::istringstream bad("a,b\n1,2,3\n");
    CHECK_THROWS_AS(csv::read(bad, "mem"), Error);

    std::ostringstream out;
    csv::write_row(out, {"plain", "with,comma", "q\"uote"});
    CHECK(out.str() == "plain,\"with,comma\",\"q\"\"uote\"\n");
}

TEST_CASE("FNV-1a matches published test vectors") {
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
    CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("summary statistics") {
    std::vector<double> xs{3, 1, 4, 1, 5, 9, 2, 6};
    CHECK(mean(xs) == doctest::Approx(31.0 / 8.0));
    // numpy.var(xs, ddof=1)
    CHECK(sample_variance(xs) == doctest::Approx(52.875 / 7.0));
    CHECK(median(xs) == 3.5);
    std::vector<double> sorted{1, 1, 2, 3, 4, 5, 6, 9};
    // numpy.quantile(xs, [0.01, 0.99]) with the default linear method
    CHECK(quantile_sorted(sorted, 0.01) == doctest::Approx(1.0));
    CHECK(quantile_sorted(sorted, 0.99) == doctest::Approx(8.79));
    CHECK(quantile_sorted(sorted, 0.5) == 3.5);

    CompensatedSum s;
    s.add(1.0);
    for (int i = 0; i < 1000; ++i) s.add(1e-16);
    CHECK(s.value() == doctest::Approx(1.0 + 1e-13).epsilon(1e-15));
}

TEST_CASE("parallel_for covers every index and rethrows the lowest failure") {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);

    auto run = [] {
        parallel_for(100, 3, [](std::size_t i) {
            if (i == 17 || i == 80) fail(ErrorCode::internal, "boom " + std::to_string(i));
        });
    };
    CHECK_THROWS_WITH_AS(run(), "boom 17", Error);
}

TEST_CASE("validation errors map to exit code 1") {
    CHECK(is_validation_error(ErrorCode::invalid_argument));
    CHECK(is_validation_error(ErrorCode::stale_artifact));
    CHECK(is_validation_error(ErrorCode::schema_mismatch));
    CHECK_FALSE(is_validation_error(ErrorCode::no_convergence));
    CHECK_FALSE(is_validation_error(ErrorCode::insufficient_depth));
    CHECK(std::string(error_code_name(ErrorCode::not_nested)) == "not_nested");
}
