#pragma once

#include <array>
#include <span>
#include <vector>

#include "hierpose/maps.hpp"

namespace hierpose {

struct DecodeConfig {
    int max_people = 100;             // K person-center peaks
    double center_threshold = 0.1;    // person-center peak score floor
    double keypoint_threshold = 0.1;  // keypoint/part-center peak score floor
    int max_peaks_per_channel = 100;
    double box_margin = 0.0;            // containment expansion, input pixels
    double fallback_score_factor = 0.5;  // score for keypoints without a detection
};

struct Peak {
    int x = 0;
    int y = 0;
    float score = 0.0f;
};

enum class KeypointSource { Regressed = 0, Detected, Fallback };

const char* to_string(KeypointSource source);

struct DecodedKeypoint {
    double x = 0.0;
    double y = 0.0;
    double score = 0.0;
    KeypointSource source = KeypointSource::Regressed;
};

struct DecodedPerson {
    double score = 0.0;
    Box box;  // input pixels
    std::array<DecodedKeypoint, kNumKeypoints> keypoints{};
};

/// Cells that are maxima of their 3x3 neighborhood with score >= threshold,
/// sorted by score descending, ties broken by row-major cell order, top-K.
std::vector<Peak> extract_peaks(const Tensor& heatmap, int channel, int max_peaks,
                                double threshold);

struct MatchedPoint {
    Vec2 point;           // map cells
    double score = 0.0;   // peak score when detected
    bool detected = false;
};

/// For each regressed point, the nearest detected peak (L2) lying inside the
/// box wins and replaces the coordinates; equidistant candidates break by
/// row-major cell order. Without a qualifying peak the regressed point is kept.
/// All quantities in map cells.
std::vector<MatchedPoint> match_regressed_detected(std::span<const Vec2> regressed,
                                                   std::span<const Peak> detected,
                                                   const Box& box_cells,
                                                   double margin_cells = 0.0);

/// Full decode: person centers from heatmap peaks, sub-cell refinement from
/// the center offsets, boxes from the size branch, body-branch keypoints by
/// regression matched against detections, part keypoints from offsets gathered
/// at the matched part centers (regressed fallback when the center peak is
/// missing). Output coordinates in input pixels, persons ordered by score.
std::vector<DecodedPerson> decode_people(const PredictionMaps& pred,
                                         const DecodeConfig& config = {});

}  // namespace hierpose
