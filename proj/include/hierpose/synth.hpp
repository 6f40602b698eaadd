#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hierpose/encoder.hpp"

namespace hierpose {

/// Parametric scene generator. Generation is a pure function of the spec
/// (seed included); no other entropy sources.
struct SceneSpec {
    std::uint64_t seed = 0;
    int n_persons = 1;
    int image_size = 512;
    double min_person_height = 120.0;  // person box height range, pixels
    double max_person_height = 280.0;
    double face_scale = 0.16;  // part sizes as fractions of person height
    double hand_scale = 0.085;
    double foot_scale = 0.06;
    double missing_foot_rate = 0.0;  // probability a foot drops to 1-2 labeled keypoints
    /// Keypoints snap to this pixel grid so that integer-cell detections
    /// reproduce them exactly; person box centers stay continuous.
    int coord_lattice = 4;
    /// Same-type anchor cells of different persons keep at least this
    /// Chebyshev distance (in lattice cells).
    int min_anchor_cell_separation = 5;
    bool allow_anchor_collisions = false;
};

/// Places seeded articulated figures. Throws std::runtime_error when the
/// image cannot host n_persons without anchor-cell collisions.
std::vector<WholeBodyAnnotation> generate_scene(const SceneSpec& spec);

/// encode_targets output reinterpreted as predictions (masks dropped).
PredictionMaps perfect_maps(std::span<const WholeBodyAnnotation> scene, HierarchyScheme scheme,
                            const EncoderConfig& config = {});

/// Synthetic prediction noise. A zero spec makes perturb_maps the identity.
///
/// Mechanisms, in application order:
///  1. anchor scatter: every part instance's offset group shifts coherently by
///     a gaussian draw (sigma = anchor_scatter cells for its part kind) —
///     models regression against unreliably placed part centers;
///  2. per-entry offset noise with sigma = offset_noise_frac * |offset| *
///     part multiplier — regression error grows with the anchor distance;
///  3. dilation: regression entries are replicated into a (2*dilation_radius+1)^2
///     neighborhood with cell-shift compensation, mimicking dense conv output;
///  4. heatmap jitter: each peak re-rendered displaced by rounded gaussian
///     cells (clamped to the dilation radius).
struct NoiseSpec {
    double offset_noise_frac = 0.0;
    double heatmap_jitter_cells = 0.0;
    double body_mult = 1.0;  // per-part offset noise multipliers
    double foot_mult = 1.0;
    double face_mult = 1.0;
    double hand_mult = 1.0;
    double face_anchor_scatter = 0.0;  // cells
    double hand_anchor_scatter = 0.0;
    double foot_anchor_scatter = 0.0;
    int dilation_radius = 2;

    bool is_zero() const {
        return offset_noise_frac == 0.0 && heatmap_jitter_cells == 0.0 &&
               face_anchor_scatter == 0.0 && hand_anchor_scatter == 0.0 &&
               foot_anchor_scatter == 0.0;
    }
};

PredictionMaps perturb_maps(const PredictionMaps& maps, const NoiseSpec& noise,
                            std::uint64_t seed);

}  // namespace hierpose
