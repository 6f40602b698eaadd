#pragma once

#include <span>
#include <string>
#include <vector>

#include "hierpose/encoder.hpp"

namespace hierpose {

struct LossConfig {
    bool normalize_offsets = true;  // divide L1 terms by the masked pair count
    double heatmap_eps = 1e-7;      // heatmap predictions clamped to [eps, 1-eps]
    double size_scale = 0.1;        // scale on the two size branches
    double heatmap_weight = 1.0;    // unit branch weights; knobs for experiments
    double offset_weight = 1.0;
    double size_weight = 1.0;
};

struct LossTerm {
    double value = 0.0;
    std::vector<double> grad;  // d value / d pred, pred's layout
};

// Double-precision cores. Gradient checks drive these directly so that the
// finite-difference step is not quantized by float32 storage.
//
// Focal: value = -(1/N) * sum over pixels of
//   (1-p)^2 * log(p)            where target == 1
//   (1-y)^4 * p^2 * log(1-p)    elsewhere
// with N = max(1, #target==1). Predictions must lie strictly inside (0, 1).
LossTerm focal_loss_core(std::span<const double> pred, std::span<const double> target);

// Masked L1 over (x, y) pairs; mask holds one entry per pair, plane_size is
// H*W of one channel plane. Normalizer = max(1, masked pair count) when
// normalize is set, 1 otherwise. Subgradient at 0 is 0.
LossTerm offset_l1_core(std::span<const double> pred, std::span<const double> target,
                        std::span<const float> pair_mask, std::size_t plane_size,
                        bool normalize);

// scale * offset_l1_core, gradient scaled accordingly.
LossTerm size_l1_core(std::span<const double> pred, std::span<const double> target,
                      std::span<const float> pair_mask, std::size_t plane_size,
                      bool normalize, double scale);

struct BranchLoss {
    double value = 0.0;
    Tensor grad;
};

/// Tensor-level wrappers. Shapes must match (throws std::invalid_argument).
BranchLoss focal_loss(const Tensor& pred, const Tensor& target, double eps = 1e-7);
BranchLoss offset_l1_loss(const Tensor& pred, const Tensor& target, const Tensor& pair_mask,
                          bool normalize = true);
BranchLoss size_l1_loss(const Tensor& pred, const Tensor& target, const Tensor& pair_mask,
                        bool normalize = true, double scale = 0.1);

struct LossReport {
    BranchLoss person_center;
    BranchLoss person_offset;
    BranchLoss person_wh;
    BranchLoss body_kp_offsets;
    BranchLoss body_kp_heatmaps;
    BranchLoss hand_kp_offsets;
    BranchLoss face_kp_offsets;
    BranchLoss face_box_wh;
    BranchLoss foot_kp_offsets;  // HM1 only; zero elsewhere
    double total = 0.0;
};

/// Focal on the two heatmap branches, masked L1 on the offset branches,
/// 0.1-scaled L1 on the two size branches; total is the plain sum.
LossReport total_loss(const PredictionMaps& pred, const TargetMaps& target,
                      const LossConfig& config = {});

struct GradCheckResult {
    std::string branch;
    double max_rel_err = 0.0;
    int points_checked = 0;
    bool pass = true;
};

/// Central finite differences against the analytic gradients, per branch.
/// Sampled points keep heatmap predictions inside [0.05, 0.95] and offset
/// residuals at least 0.05 from the L1 kink.
std::vector<GradCheckResult> gradcheck_losses(const PredictionMaps& pred,
                                              const TargetMaps& target,
                                              int points_per_branch = 100,
                                              std::uint64_t seed = 0,
                                              double fd_step = 1e-5, double tolerance = 1e-4);

/// Seeded random predictions compatible with gradcheck sampling: heatmap cells
/// uniform in [0.05, 0.95], offset cells displaced from the target by at least
/// 0.05 on masked entries.
PredictionMaps random_gradcheck_predictions(const TargetMaps& target, std::uint64_t seed);

}  // namespace hierpose
