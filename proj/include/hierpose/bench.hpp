#pragma once

#include <vector>

#include "hierpose/decoder.hpp"
#include "hierpose/synth.hpp"

namespace hierpose {

struct BenchRow {
    int n_persons = 0;
    double median_ms = 0.0;
    double p95_ms = 0.0;
};

struct BenchResult {
    std::vector<BenchRow> rows;
    int map_size = 0;
    HierarchyScheme scheme = HierarchyScheme::HM2;
    int repetitions = 0;
    double timer_resolution_ms = 0.0;
    bool timer_flagged = false;  // resolution coarser than 1% of some median

    /// Least-squares slope of median time vs person count, normalized by the
    /// smallest-count median.
    double normalized_slope_per_person() const;
};

/// Times decode_people on perfect maps, single-threaded, for each person
/// count. Warmup iterations run before measurement; repetitions must be >= 30.
BenchResult bench_decode(const std::vector<int>& person_counts, const SceneSpec& base_spec,
                         int repetitions = 30, const EncoderConfig& encoder_config = {},
                         const DecodeConfig& decode_config = {});

std::string bench_to_csv(const BenchResult& result);

}  // namespace hierpose
