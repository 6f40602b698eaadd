#include "hierpose/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hierpose {

const char* to_string(KeypointSource source) {
    switch (source) {
        case KeypointSource::Regressed: return "regressed";
        case KeypointSource::Detected: return "detected";
        case KeypointSource::Fallback: return "fallback";
    }
    return "?";
}

std::vector<Peak> extract_peaks(const Tensor& heatmap, int channel, int max_peaks,
                                double threshold) {
    const int w = heatmap.width();
    const int h = heatmap.height();
    std::vector<Peak> peaks;
    const auto plane = heatmap.plane(channel);
    // separable 3x3 max; a peak is a cell equal to its neighborhood maximum,
    // so plateaus count on every plateau cell
    thread_local std::vector<float> row_max;
    row_max.assign(static_cast<std::size_t>(h) * w, 0.0f);
    for (int y = 0; y < h; ++y) {
        const float* src = plane.data() + static_cast<std::size_t>(y) * w;
        float* dst = row_max.data() + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            float m = src[x];
            if (x > 0) m = std::max(m, src[x - 1]);
            if (x + 1 < w) m = std::max(m, src[x + 1]);
            dst[x] = m;
        }
    }
    for (int y = 0; y < h; ++y) {
        const float* src = plane.data() + static_cast<std::size_t>(y) * w;
        const float* mid = row_max.data() + static_cast<std::size_t>(y) * w;
        const float* up = y > 0 ? mid - w : mid;
        const float* down = y + 1 < h ? mid + w : mid;
        for (int x = 0; x < w; ++x) {
            const float v = src[x];
            if (v < threshold) continue;
            if (v == std::max({up[x], mid[x], down[x]})) peaks.push_back({x, y, v});
        }
    }
    std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });
    if (static_cast<int>(peaks.size()) > max_peaks)
        peaks.resize(static_cast<std::size_t>(max_peaks));
    return peaks;
}

namespace {

MatchedPoint match_one(Vec2 reg, std::span<const Peak> detected, const Box& box_cells,
                       double margin_cells, bool row_sorted = false) {
    MatchedPoint best{reg, 0.0, false};
    double best_d2 = 0.0;
    int best_y = 0, best_x = 0;
    const double x0 = box_cells.x0() - margin_cells, x1 = box_cells.x1() + margin_cells;
    const double y0 = box_cells.y0() - margin_cells, y1 = box_cells.y1() + margin_cells;
    std::size_t begin = 0;
    std::size_t end = detected.size();
    if (row_sorted) {
        // candidates sorted by (y, x): restrict the scan to the box's y band
        begin = static_cast<std::size_t>(
            std::lower_bound(detected.begin(), detected.end(), y0,
                             [](const Peak& p, double y) { return p.y < y; }) -
            detected.begin());
    }
    for (std::size_t i = begin; i < end; ++i) {
        const Peak& peak = detected[i];
        if (row_sorted && peak.y > y1) break;
        if (peak.x < x0 || peak.x > x1 || peak.y < y0 || peak.y > y1) continue;
        const double dx = reg.x - peak.x, dy = reg.y - peak.y;
        const double d2 = dx * dx + dy * dy;
        const bool better =
            !best.detected || d2 < best_d2 ||
            (d2 == best_d2 && (peak.y < best_y || (peak.y == best_y && peak.x < best_x)));
        if (better) {
            best = {{static_cast<double>(peak.x), static_cast<double>(peak.y)}, peak.score,
                    true};
            best_d2 = d2;
            best_y = peak.y;
            best_x = peak.x;
        }
    }
    return best;
}

}  // namespace

std::vector<MatchedPoint> match_regressed_detected(std::span<const Vec2> regressed,
                                                   std::span<const Peak> detected,
                                                   const Box& box_cells, double margin_cells) {
    std::vector<MatchedPoint> matched;
    matched.reserve(regressed.size());
    for (const Vec2& reg : regressed)
        matched.push_back(match_one(reg, detected, box_cells, margin_cells));
    return matched;
}

namespace {

const Tensor* part_offset_tensor(const PredictionMaps& maps, BoxedPart part) {
    switch (part) {
        case BoxedPart::Face: return &maps.face_kp_offsets;
        case BoxedPart::LeftHand:
        case BoxedPart::RightHand: return &maps.hand_kp_offsets;
        case BoxedPart::LeftFoot:
        case BoxedPart::RightFoot: return &maps.foot_kp_offsets;
    }
    return nullptr;
}

}  // namespace

std::vector<DecodedPerson> decode_people(const PredictionMaps& pred,
                                         const DecodeConfig& config) {
    const int map_size = pred.map_size();
    if (pred.person_center_heatmap.width() != map_size ||
        pred.body_kp_heatmaps.channels() != pred.body_channels())
        throw std::invalid_argument("decode_people: maps inconsistent with their scheme");
    const double r = pred.stride;
    const int body_channels = pred.body_channels();

    const std::vector<Peak> centers = extract_peaks(pred.person_center_heatmap, 0,
                                                    config.max_people, config.center_threshold);
    // top-K per channel stays score-ordered; matching scans a row-sorted copy
    std::vector<std::vector<Peak>> channel_peaks(static_cast<std::size_t>(body_channels));
    for (int c = 0; c < body_channels; ++c) {
        channel_peaks[static_cast<std::size_t>(c)] = extract_peaks(
            pred.body_kp_heatmaps, c, config.max_peaks_per_channel, config.keypoint_threshold);
        std::sort(channel_peaks[static_cast<std::size_t>(c)].begin(),
                  channel_peaks[static_cast<std::size_t>(c)].end(),
                  [](const Peak& a, const Peak& b) {
                      return a.y != b.y ? a.y < b.y : a.x < b.x;
                  });
    }

    std::vector<DecodedPerson> people;
    people.reserve(centers.size());
    std::vector<Vec2> regressed(static_cast<std::size_t>(body_channels));
    std::vector<MatchedPoint> matched(static_cast<std::size_t>(body_channels));

    for (const Peak& center_peak : centers) {
        const int cx = center_peak.x;
        const int cy = center_peak.y;
        DecodedPerson person;
        person.score = center_peak.score;
        const Vec2 center{cx + pred.person_center_offset.at(0, cy, cx),
                          cy + pred.person_center_offset.at(1, cy, cx)};
        const Box box_cells{center, pred.person_wh.at(0, cy, cx), pred.person_wh.at(1, cy, cx)};
        person.box = {center * r, box_cells.w * r, box_cells.h * r};
        const double margin_cells = config.box_margin / r;

        for (int c = 0; c < body_channels; ++c) {
            regressed[static_cast<std::size_t>(c)] = {
                cx + pred.body_kp_offsets.at(2 * c, cy, cx),
                cy + pred.body_kp_offsets.at(2 * c + 1, cy, cx)};
            matched[static_cast<std::size_t>(c)] =
                match_one(regressed[static_cast<std::size_t>(c)],
                          channel_peaks[static_cast<std::size_t>(c)], box_cells, margin_cells,
                          /*row_sorted=*/true);
        }

        const double fallback_score = person.score * config.fallback_score_factor;
        for (int k = 0; k < kNumKeypoints; ++k) {
            const int direct = direct_body_channel(pred.scheme, k);
            if (direct < 0) continue;
            const MatchedPoint& m = matched[static_cast<std::size_t>(direct)];
            DecodedKeypoint& out = person.keypoints[static_cast<std::size_t>(k)];
            out.x = m.point.x * r;
            out.y = m.point.y * r;
            out.score = m.detected ? m.score : fallback_score;
            out.source = m.detected ? KeypointSource::Detected : KeypointSource::Regressed;
        }

        for (BoxedPart part : kAllBoxedParts) {
            if (!scheme_uses_part_offsets(pred.scheme, part)) continue;
            const auto channel = part_center_channel(pred.scheme, part);
            const MatchedPoint& center_est = matched[static_cast<std::size_t>(*channel)];
            const int gx = std::clamp(static_cast<int>(std::floor(center_est.point.x)), 0,
                                      map_size - 1);
            const int gy = std::clamp(static_cast<int>(std::floor(center_est.point.y)), 0,
                                      map_size - 1);
            const Tensor* offsets = part_offset_tensor(pred, part);
            const auto [begin, count] = part_index_range(part);
            const KeypointSource source =
                center_est.detected ? KeypointSource::Regressed : KeypointSource::Fallback;
            for (int k = begin; k < begin + count; ++k) {
                const int pair = part_offset_pair_index(part, k);
                DecodedKeypoint& out = person.keypoints[static_cast<std::size_t>(k)];
                out.x = (gx + offsets->at(2 * pair, gy, gx)) * r;
                out.y = (gy + offsets->at(2 * pair + 1, gy, gx)) * r;
                out.score = fallback_score;
                out.source = source;
            }
        }
        people.push_back(std::move(person));
    }
    return people;
}

}  // namespace hierpose
