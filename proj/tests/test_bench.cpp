#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "gkt/bench.hpp"
#include "gkt/error.hpp"

using namespace gkt::bench;

TEST_CASE("one size gives two rows") {
    BenchConfig c;
    c.sizes = {1};
    c.prime_bits = 16;
    c.trials = 30;
    c.batch = 4;
    auto rows = run_bench(c);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].op == BenchOp::compose);
    CHECK(rows[1].op == BenchOp::extract);
    for (const auto& r : rows) {
        CHECK(r.group_size == 1);
        CHECK(r.prime_bits == 16);
        CHECK(r.trials == 30);
        CHECK(r.mean_micros >= 0);
        CHECK(r.stddev_micros >= 0);
    }
}

TEST_CASE("rows follow the order of sizes") {
    BenchConfig c;
    c.sizes = {5, 2, 9};
    c.trials = 30;
    c.batch = 2;
    auto rows = run_bench(c);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0].group_size == 5);
    CHECK(rows[2].group_size == 2);
    CHECK(rows[4].group_size == 9);
}

TEST_CASE("invalid configurations") {
    BenchConfig c;
    c.trials = 30;
    CHECK_THROWS_AS(run_bench(c), gkt::Error);
    c.sizes = {0};
    CHECK_THROWS_AS(run_bench(c), gkt::Error);
    c.sizes = {3};
    c.trials = 29;
    CHECK_THROWS_AS(run_bench(c), gkt::Error);
}

TEST_CASE("CSV layout") {
    std::vector<BenchRow> rows{{10, 64, BenchOp::compose, 1.5, 0.25, 30}, {10, 64, BenchOp::extract, 0.125, 0.0, 30}};
    std::ostringstream out;
    write_csv(rows, out);
    CHECK(out.str() ==
          "group_size,prime_bits,op,mean_micros,stddev_micros,trials\n"
          "10,64,compose,1.5000,0.2500,30\n"
          "10,64,extract,0.1250,0.0000,30\n");
}

TEST_CASE("trend check tolerates one small inversion") {
    auto row = [](double mean, double sd) { return BenchRow{1, 64, BenchOp::compose, mean, sd, 30}; };
    CHECK(monotone_within_noise({row(1, 0.1), row(2, 0.1), row(3, 0.1)}));
    CHECK(monotone_within_noise({row(1, 0.1), row(2, 0.5), row(1.8, 0.1), row(3, 0.1)}));
    CHECK_FALSE(monotone_within_noise({row(1, 0.1), row(2, 0.1), row(1.5, 0.1), row(3, 0.1)}));
    CHECK_FALSE(monotone_within_noise({row(1, 1), row(2, 1), row(1.9, 1), row(3, 1), row(2.9, 1)}));
}
