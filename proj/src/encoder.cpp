#include "hierpose/encoder.hpp"

#include <cmath>
#include <stdexcept>

namespace hierpose {

int gaussian_radius(double box_w, double box_h, double min_overlap) {
    if (min_overlap <= 0.0 || min_overlap >= 1.0)
        throw std::invalid_argument("min_overlap must lie in (0, 1)");
    const double w = box_w, h = box_h, o = min_overlap;

    // both corners move inward/outward, plain IoU bound
    const double b1 = h + w;
    const double c1 = w * h * (1.0 - o) / (1.0 + o);
    const double r1 = (b1 - std::sqrt(std::max(0.0, b1 * b1 - 4.0 * c1))) / 2.0;

    // shrunk box inside the original
    const double a2 = 4.0;
    const double b2 = 2.0 * (h + w);
    const double c2 = (1.0 - o) * w * h;
    const double r2 = (b2 - std::sqrt(std::max(0.0, b2 * b2 - 4.0 * a2 * c2))) / (2.0 * a2);

    // grown box containing the original
    const double a3 = 4.0 * o;
    const double b3 = -2.0 * o * (h + w);
    const double c3 = (o - 1.0) * w * h;
    const double r3 = (b3 + std::sqrt(std::max(0.0, b3 * b3 - 4.0 * a3 * c3))) / (2.0 * a3);

    const double r = std::min({r1, r2, r3});
    return std::max(1, static_cast<int>(std::floor(r)));
}

void render_gaussian(Tensor& heatmap, int channel, Vec2 center_cells, int radius,
                     int* out_of_bounds) {
    const int w = heatmap.width();
    const int h = heatmap.height();
    const int cx = static_cast<int>(std::floor(center_cells.x));
    const int cy = static_cast<int>(std::floor(center_cells.y));
    if (cx < 0 || cx >= w || cy < 0 || cy >= h) {
        if (out_of_bounds != nullptr) ++*out_of_bounds;
        return;
    }
    const double sigma = radius / 3.0;
    const double denom = 2.0 * sigma * sigma;
    for (int dy = -radius; dy <= radius; ++dy) {
        const int y = cy + dy;
        if (y < 0 || y >= h) continue;
        for (int dx = -radius; dx <= radius; ++dx) {
            const int x = cx + dx;
            if (x < 0 || x >= w) continue;
            const auto v = static_cast<float>(std::exp(-(dx * dx + dy * dy) / denom));
            float& cell = heatmap.at(channel, y, x);
            cell = std::max(cell, v);
        }
    }
    heatmap.at(channel, cy, cx) = 1.0f;
}

namespace {

struct CellRef {
    int x = 0;
    int y = 0;
    bool in_bounds = false;
};

CellRef cell_of(Vec2 map_point, int map_size) {
    CellRef c;
    c.x = static_cast<int>(std::floor(map_point.x));
    c.y = static_cast<int>(std::floor(map_point.y));
    c.in_bounds = c.x >= 0 && c.x < map_size && c.y >= 0 && c.y < map_size;
    return c;
}

/// Writes one offset pair plus its mask bit, reporting overwrites of an
/// already-masked cell as an anchor collision.
void write_pair(Tensor& offsets, Tensor& mask, int pair, CellRef cell, Vec2 value,
                EncodeDiagnostics& diag) {
    if (mask.at(pair, cell.y, cell.x) != 0.0f) ++diag.anchor_collisions;
    offsets.at(2 * pair, cell.y, cell.x) = static_cast<float>(value.x);
    offsets.at(2 * pair + 1, cell.y, cell.x) = static_cast<float>(value.y);
    mask.at(pair, cell.y, cell.x) = 1.0f;
}

Tensor* part_offset_tensor(PredictionMaps& maps, BoxedPart part) {
    switch (part) {
        case BoxedPart::Face: return &maps.face_kp_offsets;
        case BoxedPart::LeftHand:
        case BoxedPart::RightHand: return &maps.hand_kp_offsets;
        case BoxedPart::LeftFoot:
        case BoxedPart::RightFoot: return &maps.foot_kp_offsets;
    }
    return nullptr;
}

Tensor* part_offset_mask(TargetMasks& masks, BoxedPart part) {
    switch (part) {
        case BoxedPart::Face: return &masks.face_kp_offsets_mask;
        case BoxedPart::LeftHand:
        case BoxedPart::RightHand: return &masks.hand_kp_offsets_mask;
        case BoxedPart::LeftFoot:
        case BoxedPart::RightFoot: return &masks.foot_kp_offsets_mask;
    }
    return nullptr;
}

}  // namespace

TargetMaps encode_targets(std::span<const WholeBodyAnnotation> annotations,
                          HierarchyScheme scheme, const EncoderConfig& config) {
    TargetMaps target;
    target.maps = make_prediction_maps(scheme, config.input_size, config.stride);
    target.masks = make_target_masks(scheme, config.input_size, config.stride);
    PredictionMaps& maps = target.maps;
    TargetMasks& masks = target.masks;
    EncodeDiagnostics& diag = target.diagnostics;
    const int map_size = maps.map_size();
    const double r = config.stride;

    for (const WholeBodyAnnotation& ann : annotations) {
        const Vec2 center = ann.person_box.center / r;
        const CellRef ccell = cell_of(center, map_size);
        if (!ccell.in_bounds) {
            ++diag.out_of_bounds_peaks;
            continue;
        }
        const int center_radius =
            gaussian_radius(ann.person_box.w / r, ann.person_box.h / r, config.min_overlap);
        render_gaussian(maps.person_center_heatmap, 0, center, center_radius,
                        &diag.out_of_bounds_peaks);
        write_pair(maps.person_center_offset, masks.person_center_offset_mask, 0, ccell,
                   {center.x - ccell.x, center.y - ccell.y}, diag);
        write_pair(maps.person_wh, masks.person_wh_mask, 0, ccell,
                   {ann.person_box.w / r, ann.person_box.h / r}, diag);

        for (int k = 0; k < kNumKeypoints; ++k) {
            const Keypoint& kp = ann.keypoints[static_cast<std::size_t>(k)];
            if (!kp.labeled() || kp.v < config.min_visibility) continue;
            const Vec2 p{kp.x / r, kp.y / r};
            if (p.x < 0.0 || p.x >= map_size || p.y < 0.0 || p.y >= map_size) {
                ++diag.out_of_bounds_keypoints;
                continue;
            }
            const int direct = direct_body_channel(scheme, k);
            if (direct >= 0) {
                write_pair(maps.body_kp_offsets, masks.body_kp_offsets_mask, direct, ccell,
                           {p.x - ccell.x, p.y - ccell.y}, diag);
                render_gaussian(maps.body_kp_heatmaps, direct, p, config.keypoint_peak_radius,
                                &diag.out_of_bounds_peaks);
            } else {
                const BoxedPart part = *part_of_keypoint(k);
                const PartBox& box = ann.part_box(part);
                if (!box.valid) {
                    ++diag.invalid_part_skips;
                    continue;
                }
                const CellRef acell = cell_of(box.center / r, map_size);
                if (!acell.in_bounds) {
                    ++diag.out_of_bounds_keypoints;
                    continue;
                }
                write_pair(*part_offset_tensor(maps, part), *part_offset_mask(masks, part),
                           part_offset_pair_index(part, k), acell,
                           {p.x - acell.x, p.y - acell.y}, diag);
            }
        }

        for (BoxedPart part : kAllBoxedParts) {
            const auto channel = part_center_channel(scheme, part);
            if (!channel.has_value()) continue;
            const PartBox& box = ann.part_box(part);
            if (!box.valid) {
                ++diag.invalid_part_skips;
                continue;
            }
            const Vec2 pc = box.center / r;
            const CellRef pcell = cell_of(pc, map_size);
            if (!pcell.in_bounds) {
                ++diag.out_of_bounds_peaks;
                continue;
            }
            write_pair(maps.body_kp_offsets, masks.body_kp_offsets_mask, *channel, ccell,
                       {pc.x - ccell.x, pc.y - ccell.y}, diag);
            const int part_radius = gaussian_radius(box.w / r, box.h / r, config.min_overlap);
            render_gaussian(maps.body_kp_heatmaps, *channel, pc, part_radius,
                            &diag.out_of_bounds_peaks);
        }

        const PartBox& face = ann.part_box(BoxedPart::Face);
        if (face.valid) {
            const CellRef fcell = cell_of(face.center / r, map_size);
            if (fcell.in_bounds)
                write_pair(maps.face_box_wh, masks.face_box_wh_mask, 0, fcell,
                           {face.w / r, face.h / r}, diag);
        }
    }
    return target;
}

}  // namespace hierpose
