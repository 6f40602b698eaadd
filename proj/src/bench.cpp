#include "hierpose/bench.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>
#include <stdexcept>

namespace hierpose {

namespace {

using Clock = std::chrono::steady_clock;

double timer_resolution_ms() {
    double finest = 1e9;
    for (int i = 0; i < 1000; ++i) {
        const auto t0 = Clock::now();
        auto t1 = Clock::now();
        while (t1 == t0) t1 = Clock::now();
        finest = std::min(
            finest, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return finest;
}

double percentile(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    const double pos = q * (static_cast<double>(values.size()) - 1.0);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace

double BenchResult::normalized_slope_per_person() const {
    if (rows.size() < 2) return 0.0;
    double base = rows.front().median_ms;
    for (const BenchRow& row : rows) base = std::min(base, row.median_ms);
    if (base <= 0.0) return 0.0;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(rows.size());
    for (const BenchRow& row : rows) {
        const double x = row.n_persons;
        const double y = row.median_ms / base;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) return 0.0;
    return (n * sxy - sx * sy) / denom;
}

BenchResult bench_decode(const std::vector<int>& person_counts, const SceneSpec& base_spec,
                         int repetitions, const EncoderConfig& encoder_config,
                         const DecodeConfig& decode_config) {
    if (repetitions < 30)
        throw std::invalid_argument("bench_decode: repetitions must be >= 30");
    BenchResult result;
    result.scheme = HierarchyScheme::HM2;
    result.repetitions = repetitions;
    result.map_size = encoder_config.input_size / encoder_config.stride;
    result.timer_resolution_ms = timer_resolution_ms();

    constexpr int kWarmup = 5;
    std::vector<PredictionMaps> maps;
    maps.reserve(person_counts.size());
    for (int n : person_counts) {
        SceneSpec spec = base_spec;
        spec.n_persons = n;
        spec.seed = base_spec.seed + static_cast<std::uint64_t>(n);
        maps.push_back(perfect_maps(generate_scene(spec), result.scheme, encoder_config));
    }
    std::size_t guard = 0;  // keeps the decode from being optimized out
    for (const PredictionMaps& m : maps)
        for (int i = 0; i < kWarmup; ++i) guard += decode_people(m, decode_config).size();
    // samples interleave the person counts so clock drift cancels in ratios
    std::vector<std::vector<double>> samples(person_counts.size());
    for (int i = 0; i < repetitions; ++i) {
        for (std::size_t j = 0; j < maps.size(); ++j) {
            const auto t0 = Clock::now();
            guard += decode_people(maps[j], decode_config).size();
            const auto t1 = Clock::now();
            samples[j].push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        }
    }
    (void)guard;
    for (std::size_t j = 0; j < person_counts.size(); ++j) {
        BenchRow row;
        row.n_persons = person_counts[j];
        row.median_ms = percentile(samples[j], 0.5);
        row.p95_ms = percentile(samples[j], 0.95);
        result.rows.push_back(row);
        if (result.timer_resolution_ms > 0.01 * row.median_ms) result.timer_flagged = true;
    }
    return result;
}

std::string bench_to_csv(const BenchResult& result) {
    std::ostringstream out;
    out << "n_persons,median_ms,p95_ms\n";
    for (const BenchRow& row : result.rows) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f\n", row.n_persons, row.median_ms,
                      row.p95_ms);
        out << buf;
    }
    return out.str();
}

}  // namespace hierpose
