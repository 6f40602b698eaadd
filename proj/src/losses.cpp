#include "hierpose/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hierpose/rng.hpp"

namespace hierpose {

namespace {

std::vector<double> to_double(const Tensor& t) {
    return {t.data.begin(), t.data.end()};
}

Tensor grad_like(const Tensor& pred, const std::vector<double>& grad) {
    Tensor g(pred.name + "_grad", pred.dims);
    for (std::size_t i = 0; i < grad.size(); ++i) g.data[i] = static_cast<float>(grad[i]);
    return g;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(what) + ": shape mismatch between '" + a.name +
                                    "' and '" + b.name + "'");
}

}  // namespace

LossTerm focal_loss_core(std::span<const double> pred, std::span<const double> target) {
    if (pred.size() != target.size())
        throw std::invalid_argument("focal_loss: pred/target size mismatch");
    LossTerm out;
    out.grad.assign(pred.size(), 0.0);
    std::size_t peaks = 0;
    for (double y : target)
        if (y == 1.0) ++peaks;
    const double n = static_cast<double>(std::max<std::size_t>(1, peaks));
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double p = pred[i];
        const double y = target[i];
        if (y == 1.0) {
            const double q = 1.0 - p;
            sum += q * q * std::log(p);
            out.grad[i] = (2.0 * q * std::log(p) - q * q / p) / n;
        } else {
            const double w = std::pow(1.0 - y, 4.0);
            sum += w * p * p * std::log(1.0 - p);
            out.grad[i] = -w * (2.0 * p * std::log(1.0 - p) - p * p / (1.0 - p)) / n;
        }
    }
    out.value = -sum / n;
    return out;
}

LossTerm offset_l1_core(std::span<const double> pred, std::span<const double> target,
                        std::span<const float> pair_mask, std::size_t plane_size,
                        bool normalize) {
    if (pred.size() != target.size())
        throw std::invalid_argument("offset_l1: pred/target size mismatch");
    if (pair_mask.size() * 2 != pred.size())
        throw std::invalid_argument("offset_l1: mask must hold one entry per pair");
    LossTerm out;
    out.grad.assign(pred.size(), 0.0);
    std::size_t pairs = 0;
    for (float m : pair_mask)
        if (m != 0.0f) ++pairs;
    const double norm = normalize ? static_cast<double>(std::max<std::size_t>(1, pairs)) : 1.0;
    double sum = 0.0;
    const std::size_t mask_channels = pair_mask.size() / std::max<std::size_t>(1, plane_size);
    for (std::size_t pc = 0; pc < mask_channels; ++pc) {
        for (std::size_t cell = 0; cell < plane_size; ++cell) {
            if (pair_mask[pc * plane_size + cell] == 0.0f) continue;
            for (int axis = 0; axis < 2; ++axis) {
                const std::size_t i = (2 * pc + axis) * plane_size + cell;
                const double d = pred[i] - target[i];
                sum += std::abs(d);
                out.grad[i] = (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) / norm;
            }
        }
    }
    out.value = sum / norm;
    return out;
}

LossTerm size_l1_core(std::span<const double> pred, std::span<const double> target,
                      std::span<const float> pair_mask, std::size_t plane_size,
                      bool normalize, double scale) {
    LossTerm out = offset_l1_core(pred, target, pair_mask, plane_size, normalize);
    out.value *= scale;
    for (double& g : out.grad) g *= scale;
    return out;
}

BranchLoss focal_loss(const Tensor& pred, const Tensor& target, double eps) {
    require_same_shape(pred, target, "focal_loss");
    std::vector<double> p = to_double(pred);
    for (double& v : p) v = std::clamp(v, eps, 1.0 - eps);
    const LossTerm term = focal_loss_core(p, to_double(target));
    return {term.value, grad_like(pred, term.grad)};
}

BranchLoss offset_l1_loss(const Tensor& pred, const Tensor& target, const Tensor& pair_mask,
                          bool normalize) {
    require_same_shape(pred, target, "offset_l1_loss");
    if (pair_mask.channels() * 2 != pred.channels())
        throw std::invalid_argument("offset_l1_loss: mask/pred channel mismatch");
    const std::size_t plane = static_cast<std::size_t>(pred.height()) * pred.width();
    const LossTerm term =
        offset_l1_core(to_double(pred), to_double(target), pair_mask.data, plane, normalize);
    return {term.value, grad_like(pred, term.grad)};
}

BranchLoss size_l1_loss(const Tensor& pred, const Tensor& target, const Tensor& pair_mask,
                        bool normalize, double scale) {
    BranchLoss out = offset_l1_loss(pred, target, pair_mask, normalize);
    out.value *= scale;
    for (float& g : out.grad.data) g *= static_cast<float>(scale);
    return out;
}

LossReport total_loss(const PredictionMaps& pred, const TargetMaps& target,
                      const LossConfig& config) {
    if (pred.scheme != target.maps.scheme)
        throw std::invalid_argument("total_loss: scheme mismatch");
    const auto pred_tensors = pred.tensor_list();
    const auto target_tensors = target.maps.tensor_list();
    for (std::size_t i = 0; i < pred_tensors.size(); ++i)
        require_same_shape(*pred_tensors[i], *target_tensors[i], "total_loss");

    LossReport report;
    auto weigh = [](BranchLoss loss, double w) {
        loss.value *= w;
        for (float& g : loss.grad.data) g *= static_cast<float>(w);
        return loss;
    };
    report.person_center =
        weigh(focal_loss(pred.person_center_heatmap, target.maps.person_center_heatmap,
                         config.heatmap_eps),
              config.heatmap_weight);
    report.body_kp_heatmaps =
        weigh(focal_loss(pred.body_kp_heatmaps, target.maps.body_kp_heatmaps,
                         config.heatmap_eps),
              config.heatmap_weight);
    report.person_offset =
        weigh(offset_l1_loss(pred.person_center_offset, target.maps.person_center_offset,
                             target.masks.person_center_offset_mask, config.normalize_offsets),
              config.offset_weight);
    report.body_kp_offsets =
        weigh(offset_l1_loss(pred.body_kp_offsets, target.maps.body_kp_offsets,
                             target.masks.body_kp_offsets_mask, config.normalize_offsets),
              config.offset_weight);
    report.hand_kp_offsets =
        weigh(offset_l1_loss(pred.hand_kp_offsets, target.maps.hand_kp_offsets,
                             target.masks.hand_kp_offsets_mask, config.normalize_offsets),
              config.offset_weight);
    report.face_kp_offsets =
        weigh(offset_l1_loss(pred.face_kp_offsets, target.maps.face_kp_offsets,
                             target.masks.face_kp_offsets_mask, config.normalize_offsets),
              config.offset_weight);
    report.foot_kp_offsets =
        weigh(offset_l1_loss(pred.foot_kp_offsets, target.maps.foot_kp_offsets,
                             target.masks.foot_kp_offsets_mask, config.normalize_offsets),
              config.offset_weight);
    report.person_wh = weigh(size_l1_loss(pred.person_wh, target.maps.person_wh,
                                          target.masks.person_wh_mask,
                                          config.normalize_offsets, config.size_scale),
                             config.size_weight);
    report.face_box_wh = weigh(size_l1_loss(pred.face_box_wh, target.maps.face_box_wh,
                                            target.masks.face_box_wh_mask,
                                            config.normalize_offsets, config.size_scale),
                               config.size_weight);
    report.total = report.person_center.value + report.person_offset.value +
                   report.person_wh.value + report.body_kp_offsets.value +
                   report.body_kp_heatmaps.value + report.hand_kp_offsets.value +
                   report.face_kp_offsets.value + report.face_box_wh.value +
                   report.foot_kp_offsets.value;
    return report;
}

namespace {

struct BranchSpec {
    std::string name;
    const Tensor* pred = nullptr;
    const Tensor* target = nullptr;
    const Tensor* mask = nullptr;  // null for focal branches
    double scale = 1.0;            // size branches carry 0.1
};

std::vector<BranchSpec> branch_table(const PredictionMaps& pred, const TargetMaps& target,
                                     double size_scale) {
    return {
        {"person_center", &pred.person_center_heatmap, &target.maps.person_center_heatmap,
         nullptr, 1.0},
        {"person_offset", &pred.person_center_offset, &target.maps.person_center_offset,
         &target.masks.person_center_offset_mask, 1.0},
        {"person_wh", &pred.person_wh, &target.maps.person_wh, &target.masks.person_wh_mask,
         size_scale},
        {"body_kp_offsets", &pred.body_kp_offsets, &target.maps.body_kp_offsets,
         &target.masks.body_kp_offsets_mask, 1.0},
        {"body_kp_heatmaps", &pred.body_kp_heatmaps, &target.maps.body_kp_heatmaps, nullptr,
         1.0},
        {"hand_kp_offsets", &pred.hand_kp_offsets, &target.maps.hand_kp_offsets,
         &target.masks.hand_kp_offsets_mask, 1.0},
        {"face_kp_offsets", &pred.face_kp_offsets, &target.maps.face_kp_offsets,
         &target.masks.face_kp_offsets_mask, 1.0},
        {"face_box_wh", &pred.face_box_wh, &target.maps.face_box_wh,
         &target.masks.face_box_wh_mask, size_scale},
        {"foot_kp_offsets", &pred.foot_kp_offsets, &target.maps.foot_kp_offsets,
         &target.masks.foot_kp_offsets_mask, 1.0},
    };
}

}  // namespace

std::vector<GradCheckResult> gradcheck_losses(const PredictionMaps& pred,
                                              const TargetMaps& target, int points_per_branch,
                                              std::uint64_t seed, double fd_step,
                                              double tolerance) {
    std::vector<GradCheckResult> results;
    Rng rng(seed);
    for (const BranchSpec& branch : branch_table(pred, target, 0.1)) {
        GradCheckResult res;
        res.branch = branch.name;
        if (branch.pred->empty()) {
            results.push_back(res);
            continue;
        }
        std::vector<double> p = to_double(*branch.pred);
        const std::vector<double> t = to_double(*branch.target);
        const std::size_t plane =
            static_cast<std::size_t>(branch.pred->height()) * branch.pred->width();
        const bool is_focal = branch.mask == nullptr;

        auto evaluate = [&](const std::vector<double>& x) {
            if (is_focal) return focal_loss_core(x, t).value;
            return size_l1_core(x, t, branch.mask->data, plane, true, branch.scale).value;
        };
        LossTerm analytic;
        if (is_focal) {
            analytic = focal_loss_core(p, t);
        } else {
            analytic = size_l1_core(p, t, branch.mask->data, plane, true, branch.scale);
        }

        std::vector<std::size_t> eligible;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (is_focal) {
                if (p[i] >= 0.05 && p[i] <= 0.95) eligible.push_back(i);
            } else {
                const std::size_t pair_channel = i / plane / 2;
                const std::size_t cell = i % plane;
                if (branch.mask->data[pair_channel * plane + cell] == 0.0f) continue;
                if (std::abs(p[i] - t[i]) >= 0.05) eligible.push_back(i);
            }
        }
        for (std::size_t i = eligible.size(); i > 1; --i)
            std::swap(eligible[i - 1],
                      eligible[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1))]);
        const std::size_t n = std::min<std::size_t>(eligible.size(),
                                                    static_cast<std::size_t>(points_per_branch));
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t i = eligible[j];
            const double saved = p[i];
            p[i] = saved + fd_step;
            const double hi = evaluate(p);
            p[i] = saved - fd_step;
            const double lo = evaluate(p);
            p[i] = saved;
            const double fd = (hi - lo) / (2.0 * fd_step);
            const double a = analytic.grad[i];
            // the denominator floor keeps near-zero gradients (where
            // differencing the full branch sum is cancellation-limited) on an
            // absolute scale instead of a meaningless relative one
            const double rel =
                std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-3});
            res.max_rel_err = std::max(res.max_rel_err, rel);
            ++res.points_checked;
        }
        res.pass = res.max_rel_err < tolerance;
        results.push_back(res);
    }
    return results;
}

PredictionMaps random_gradcheck_predictions(const TargetMaps& target, std::uint64_t seed) {
    PredictionMaps pred =
        make_prediction_maps(target.maps.scheme, target.maps.input_size, target.maps.stride);
    Rng rng(seed);
    auto fill_heatmap = [&](Tensor& t) {
        for (float& v : t.data) v = static_cast<float>(rng.uniform(0.05, 0.95));
    };
    fill_heatmap(pred.person_center_heatmap);
    fill_heatmap(pred.body_kp_heatmaps);
    struct Pair {
        Tensor* out;
        const Tensor* base;
    };
    for (auto [out, base] : {Pair{&pred.person_center_offset, &target.maps.person_center_offset},
                             Pair{&pred.person_wh, &target.maps.person_wh},
                             Pair{&pred.body_kp_offsets, &target.maps.body_kp_offsets},
                             Pair{&pred.hand_kp_offsets, &target.maps.hand_kp_offsets},
                             Pair{&pred.face_kp_offsets, &target.maps.face_kp_offsets},
                             Pair{&pred.face_box_wh, &target.maps.face_box_wh},
                             Pair{&pred.foot_kp_offsets, &target.maps.foot_kp_offsets}}) {
        for (std::size_t i = 0; i < out->data.size(); ++i) {
            const double shift = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.1, 1.5);
            out->data[i] = base->data[i] + static_cast<float>(shift);
        }
    }
    return pred;
}

}  // namespace hierpose
