#pragma once

#include <filesystem>
#include <vector>

#include "hierpose/bench.hpp"
#include "hierpose/evaluator.hpp"

namespace hierpose {

/// Pose overlay: one circle per keypoint, colored by part, plus the person box.
void write_pose_overlay_svg(const std::filesystem::path& path,
                            const std::vector<PoseResult>& results, int image_size,
                            double min_score = 0.0);

/// Decode-time line chart (median ms vs person count).
void write_bench_chart_svg(const std::filesystem::path& path, const BenchResult& result);

}  // namespace hierpose
