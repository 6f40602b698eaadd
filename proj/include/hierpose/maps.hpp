#pragma once

#include <filesystem>
#include <vector>

#include "hierpose/layout.hpp"
#include "hierpose/tensor.hpp"

namespace hierpose {

/// The eight branch tensors (plus the HM1-only foot branch), shared between
/// training targets and inference predictions. All maps are [C, H, W] with
/// H = W = input_size / stride.
///
/// Offset values are stored in output-map units: the value at an anchor's
/// integer cell is keypoint/stride - anchor_cell.
struct PredictionMaps {
    HierarchyScheme scheme = HierarchyScheme::HM2;
    int input_size = 512;
    int stride = 4;

    Tensor person_center_heatmap;  // [1, H, W]
    Tensor person_center_offset;   // [2, H, W]  sub-cell residual of the center
    Tensor person_wh;              // [2, H, W]  box size in map units
    Tensor body_kp_offsets;        // [2B, H, W]
    Tensor body_kp_heatmaps;       // [B, H, W]
    Tensor hand_kp_offsets;        // [84, H, W]  (empty under Baseline)
    Tensor face_kp_offsets;        // [136, H, W] (empty under Baseline)
    Tensor face_box_wh;            // [2, H, W]   face box size in map units
    Tensor foot_kp_offsets;        // [12, H, W]  (HM1 only, empty otherwise)

    int map_size() const { return input_size / stride; }
    int body_channels() const { return body_branch_count(scheme); }

    std::vector<const Tensor*> tensor_list() const;
    std::vector<Tensor*> tensor_list();
};

/// Per-pair regression masks; one channel per (keypoint, anchor) pair, so a
/// mask tensor has half the channels of its offset tensor.
struct TargetMasks {
    Tensor person_center_offset_mask;  // [1, H, W]
    Tensor person_wh_mask;             // [1, H, W]
    Tensor body_kp_offsets_mask;       // [B, H, W]
    Tensor hand_kp_offsets_mask;       // [42, H, W]
    Tensor face_kp_offsets_mask;       // [68, H, W]
    Tensor face_box_wh_mask;           // [1, H, W]
    Tensor foot_kp_offsets_mask;       // [6, H, W]

    std::vector<const Tensor*> tensor_list() const;
    std::vector<Tensor*> tensor_list();
};

/// Zero-initialized maps with the scheme's channel layout.
PredictionMaps make_prediction_maps(HierarchyScheme scheme, int input_size, int stride);
TargetMasks make_target_masks(HierarchyScheme scheme, int input_size, int stride);

/// Dump I/O. Maps are stored with a leading "meta" tensor carrying
/// (scheme, stride, input_size); masks ride along when present.
void write_maps(const std::filesystem::path& path, const PredictionMaps& maps,
                const TargetMasks* masks = nullptr);
PredictionMaps read_maps(const std::filesystem::path& path, TargetMasks* masks_out = nullptr);

}  // namespace hierpose
