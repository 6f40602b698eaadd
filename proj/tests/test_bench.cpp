#include <doctest.h>

#include "hierpose/bench.hpp"

using namespace hierpose;

TEST_CASE("bench_decode reports one row per person count") {
    SceneSpec spec;
    spec.seed = 3;
    spec.image_size = 256;
    EncoderConfig enc;
    enc.input_size = 256;
    const BenchResult result = bench_decode({1, 2, 4}, spec, 30, enc);
    REQUIRE(result.rows.size() == 3);
    CHECK(result.map_size == 64);
    CHECK(result.repetitions == 30);
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        CHECK(result.rows[i].median_ms > 0.0);
        CHECK(result.rows[i].p95_ms >= result.rows[i].median_ms);
    }
    CHECK(result.rows[0].n_persons == 1);
    CHECK(result.rows[2].n_persons == 4);

    SUBCASE("csv output carries the header and rows") {
        const std::string csv = bench_to_csv(result);
        CHECK(csv.find("n_persons,median_ms,p95_ms\n") == 0);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    }
}

TEST_CASE("repetition floor is enforced") {
    SceneSpec spec;
    CHECK_THROWS_AS(bench_decode({1}, spec, 5), std::invalid_argument);
}

TEST_CASE("normalized slope of a flat series is ~0") {
    BenchResult r;
    r.rows = {{1, 2.0, 2.2}, {10, 2.0, 2.3}, {30, 2.0, 2.4}};
    CHECK(r.normalized_slope_per_person() == doctest::Approx(0.0));
    r.rows = {{1, 2.0, 2.2}, {10, 2.9, 3.0}, {30, 4.9, 5.0}};
    CHECK(r.normalized_slope_per_person() == doctest::Approx(0.05).epsilon(0.01));
}
