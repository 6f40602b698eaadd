#pragma once

#include <span>

#include "hierpose/maps.hpp"

namespace hierpose {

struct EncoderConfig {
    int input_size = 512;
    int stride = 4;
    double min_overlap = 0.7;      // IoU bound for the gaussian radius
    int keypoint_peak_radius = 2;  // fixed radius for direct keypoint peaks
    int min_visibility = 1;        // keypoints with v >= this are encoded
};

struct EncodeDiagnostics {
    int out_of_bounds_keypoints = 0;
    int out_of_bounds_peaks = 0;
    int anchor_collisions = 0;  // later person overwrote an occupied regression cell
    int invalid_part_skips = 0;

    EncodeDiagnostics& operator+=(const EncodeDiagnostics& d) {
        out_of_bounds_keypoints += d.out_of_bounds_keypoints;
        out_of_bounds_peaks += d.out_of_bounds_peaks;
        anchor_collisions += d.anchor_collisions;
        invalid_part_skips += d.invalid_part_skips;
        return *this;
    }
};

struct TargetMaps {
    PredictionMaps maps;
    TargetMasks masks;
    EncodeDiagnostics diagnostics;

    PredictionMaps to_predictions() const { return maps; }
};

/// Smallest of the three minimum-IoU-preserving corner-displacement radii,
/// floored and clamped to >= 1. Box size in map cells.
int gaussian_radius(double box_w, double box_h, double min_overlap);

/// Writes exp(-(dx^2+dy^2)/(2*sigma^2)) with sigma = radius/3 in the
/// (2r+1)^2 neighborhood of the truncated center cell, max-combined with the
/// existing values; the center cell becomes exactly 1. A center outside the
/// grid is a no-op counted in *out_of_bounds.
void render_gaussian(Tensor& heatmap, int channel, Vec2 center_cells, int radius,
                     int* out_of_bounds = nullptr);

/// Encodes one image's annotations into branch targets under the scheme.
/// Keypoints with v = 0 never contribute; keypoints whose part box is invalid
/// are skipped with the mask left unset.
TargetMaps encode_targets(std::span<const WholeBodyAnnotation> annotations,
                          HierarchyScheme scheme, const EncoderConfig& config = {});

}  // namespace hierpose
