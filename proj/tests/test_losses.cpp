#include <doctest.h>

#include <cmath>

#include "hierpose/losses.hpp"
#include "hierpose/rng.hpp"
#include "hierpose/synth.hpp"

using namespace hierpose;

namespace {

Tensor single(const char* name, float v) {
    Tensor t(name, {1, 1, 1});
    t.data[0] = v;
    return t;
}

TargetMaps tiny_targets(HierarchyScheme scheme = HierarchyScheme::HM2) {
    SceneSpec spec;
    spec.seed = 11;
    spec.n_persons = 2;
    spec.image_size = 128;
    spec.min_person_height = 50;
    spec.max_person_height = 100;
    EncoderConfig config;
    config.input_size = 128;
    return encode_targets(generate_scene(spec), scheme, config);
}

}  // namespace

TEST_CASE("focal loss closed forms") {
    SUBCASE("single pixel, target 1, pred 0.5: -(0.5)^2 ln 0.5") {
        const BranchLoss loss = focal_loss(single("p", 0.5f), single("t", 1.0f));
        CHECK(loss.value == doctest::Approx(0.25 * std::log(2.0)).epsilon(1e-9));
        CHECK(loss.value == doctest::Approx(0.173287).epsilon(1e-5));
    }
    SUBCASE("single pixel, target 0, pred 0.5: (1)^4 (0.5)^2 (-ln 0.5)") {
        const BranchLoss loss = focal_loss(single("p", 0.5f), single("t", 0.0f));
        CHECK(loss.value == doctest::Approx(0.25 * std::log(2.0)).epsilon(1e-9));
    }
    SUBCASE("perfect one-hot prediction is ~0 (bounded by the clamp eps)") {
        Tensor target("t", {1, 8, 8});
        target.at(0, 3, 3) = 1.0f;
        Tensor pred = target;
        pred.name = "p";
        const BranchLoss loss = focal_loss(pred, target);
        CHECK(loss.value >= 0.0);
        CHECK(loss.value < 1e-6);
    }
    SUBCASE("matching a soft tail still pays the focal background term") {
        Tensor target("t", {1, 8, 8});
        target.at(0, 3, 3) = 1.0f;
        target.at(0, 3, 4) = 0.6f;
        Tensor pred = target;
        pred.name = "p";
        // independent evaluation of the one nonzero background term
        const double expected = std::pow(1.0 - 0.6, 4.0) * 0.36 * (-std::log(1.0 - 0.6));
        const BranchLoss loss = focal_loss(pred, target);
        CHECK(loss.value == doctest::Approx(expected).epsilon(1e-5));
    }
    SUBCASE("gaussian-softened negatives are penalty-reduced") {
        // same wrong pred, higher target tail -> smaller penalty
        const double hard = focal_loss(single("p", 0.5f), single("t", 0.0f)).value;
        const double soft = focal_loss(single("p", 0.5f), single("t", 0.8f)).value;
        CHECK(soft < hard);
        CHECK(soft == doctest::Approx(std::pow(0.2, 4.0) * 0.25 * std::log(2.0)).epsilon(1e-9));
    }
    SUBCASE("permutation equivariance") {
        Tensor pred("p", {1, 2, 3});
        Tensor target("t", {1, 2, 3});
        pred.data = {0.2f, 0.7f, 0.4f, 0.9f, 0.1f, 0.55f};
        target.data = {1.0f, 0.0f, 0.3f, 0.0f, 1.0f, 0.8f};
        const BranchLoss base = focal_loss(pred, target);
        std::vector<int> perm = {3, 0, 5, 1, 4, 2};
        Tensor pred_p = pred, target_p = target;
        for (std::size_t i = 0; i < perm.size(); ++i) {
            pred_p.data[i] = pred.data[static_cast<std::size_t>(perm[i])];
            target_p.data[i] = target.data[static_cast<std::size_t>(perm[i])];
        }
        const BranchLoss permuted = focal_loss(pred_p, target_p);
        CHECK(permuted.value == doctest::Approx(base.value).epsilon(1e-12));
        for (std::size_t i = 0; i < perm.size(); ++i)
            CHECK(permuted.grad.data[i] ==
                  doctest::Approx(base.grad.data[static_cast<std::size_t>(perm[i])]));
    }
    SUBCASE("shape mismatch throws") {
        CHECK_THROWS_AS(focal_loss(single("p", 0.5f), Tensor("t", {1, 2, 2})),
                        std::invalid_argument);
    }
}

TEST_CASE("offset L1 loss") {
    Tensor pred("p", {2, 1, 1});
    Tensor target("t", {2, 1, 1});
    Tensor mask("m", {1, 1, 1});
    SUBCASE("one masked keypoint, pred (11.5,-14) vs target (11,-14) -> 0.5") {
        pred.data = {11.5f, -14.0f};
        target.data = {11.0f, -14.0f};
        mask.data = {1.0f};
        const BranchLoss loss = offset_l1_loss(pred, target, mask);
        CHECK(loss.value == doctest::Approx(0.5));
        CHECK(loss.grad.data[0] == doctest::Approx(1.0));
        CHECK(loss.grad.data[1] == doctest::Approx(0.0));  // subgradient at 0
    }
    SUBCASE("pred equal to target is 0") {
        pred.data = {3.0f, 4.0f};
        target.data = {3.0f, 4.0f};
        mask.data = {1.0f};
        CHECK(offset_l1_loss(pred, target, mask).value == 0.0);
    }
    SUBCASE("unmasked entries contribute nothing") {
        pred.data = {100.0f, -50.0f};
        target.data = {0.0f, 0.0f};
        mask.data = {0.0f};
        const BranchLoss loss = offset_l1_loss(pred, target, mask);
        CHECK(loss.value == 0.0);
        CHECK(loss.grad.data[0] == 0.0f);
    }
    SUBCASE("normalization by masked keypoint count") {
        Tensor pred2("p", {2, 1, 2});
        Tensor target2("t", {2, 1, 2});
        Tensor mask2("m", {1, 1, 2});
        pred2.data = {1.0f, 3.0f, 0.0f, 0.0f};
        target2.data = {0.0f, 1.0f, 0.0f, 0.0f};
        mask2.data = {1.0f, 1.0f};
        CHECK(offset_l1_loss(pred2, target2, mask2).value == doctest::Approx(3.0 / 2.0));
        CHECK(offset_l1_loss(pred2, target2, mask2, false).value == doctest::Approx(3.0));
    }
}

TEST_CASE("size L1 loss is scaled by 0.1") {
    Tensor pred("p", {2, 1, 1});
    Tensor target("t", {2, 1, 1});
    Tensor mask("m", {1, 1, 1});
    pred.data = {10.0f, 20.0f};
    target.data = {12.0f, 19.0f};
    mask.data = {1.0f};
    const BranchLoss loss = size_l1_loss(pred, target, mask);
    CHECK(loss.value == doctest::Approx(0.3));
    SUBCASE("pred equal to target is 0") {
        pred.data = target.data;
        CHECK(size_l1_loss(pred, target, mask).value == 0.0);
    }
    SUBCASE("L1 homogeneity: doubling the residual doubles the loss") {
        Tensor pred2 = pred;
        pred2.data = {14.0f, 17.0f};  // residual (2,-2) doubled from (1,-1)
        Tensor pred1 = pred;
        pred1.data = {13.0f, 18.0f};
        CHECK(size_l1_loss(pred2, target, mask).value ==
              doctest::Approx(2.0 * size_l1_loss(pred1, target, mask).value));
    }
}

TEST_CASE("total loss") {
    const TargetMaps target = tiny_targets();
    SUBCASE("perfect prediction: regression branches vanish, heatmaps keep the tail term") {
        const LossReport report = total_loss(target.to_predictions(), target);
        CHECK(report.person_offset.value == 0.0);
        CHECK(report.person_wh.value == 0.0);
        CHECK(report.body_kp_offsets.value == 0.0);
        CHECK(report.hand_kp_offsets.value == 0.0);
        CHECK(report.face_kp_offsets.value == 0.0);
        CHECK(report.face_box_wh.value == 0.0);
        // the focal background term at soft gaussian pixels: independently
        // summed here, -(1-y)^4 y^2 log(1-y) over tail cells, per heatmap
        auto tail_sum = [](const Tensor& hm) {
            double peaks = 0.0, sum = 0.0;
            for (float v : hm.data)
                if (v == 1.0f) peaks += 1.0;
            for (float v : hm.data) {
                const double y = v;
                if (y > 0.0 && y < 1.0)
                    sum += std::pow(1.0 - y, 4.0) * y * y * (-std::log1p(-y));
            }
            return sum / std::max(1.0, peaks);
        };
        CHECK(report.person_center.value ==
              doctest::Approx(tail_sum(target.maps.person_center_heatmap)).epsilon(1e-4));
        CHECK(report.body_kp_heatmaps.value ==
              doctest::Approx(tail_sum(target.maps.body_kp_heatmaps)).epsilon(1e-4));
        CHECK(report.total ==
              doctest::Approx(report.person_center.value + report.body_kp_heatmaps.value)
                  .epsilon(1e-6));
    }
    SUBCASE("total equals the sum of the branch entries") {
        const PredictionMaps pred = random_gradcheck_predictions(target, 5);
        const LossReport r = total_loss(pred, target);
        const double sum = r.person_center.value + r.person_offset.value + r.person_wh.value +
                           r.body_kp_offsets.value + r.body_kp_heatmaps.value +
                           r.hand_kp_offsets.value + r.face_kp_offsets.value +
                           r.face_box_wh.value + r.foot_kp_offsets.value;
        CHECK(r.total == doctest::Approx(sum).epsilon(1e-12));
        CHECK(r.total > 0.0);
    }
    SUBCASE("zeroing one branch changes only that branch plus the total") {
        PredictionMaps pred = target.to_predictions();
        const LossReport before = total_loss(pred, target);
        std::fill(pred.person_wh.data.begin(), pred.person_wh.data.end(), 0.0f);
        const LossReport after = total_loss(pred, target);
        CHECK(after.person_wh.value > before.person_wh.value);
        CHECK(after.person_center.value == doctest::Approx(before.person_center.value));
        CHECK(after.body_kp_offsets.value == doctest::Approx(before.body_kp_offsets.value));
        CHECK(after.total == doctest::Approx(before.total + after.person_wh.value -
                                             before.person_wh.value));
    }
    SUBCASE("scheme mismatch throws") {
        const TargetMaps hm1 = tiny_targets(HierarchyScheme::HM1);
        CHECK_THROWS_AS(total_loss(target.to_predictions(), hm1), std::invalid_argument);
    }
    SUBCASE("all branch losses are non-negative") {
        const PredictionMaps pred = random_gradcheck_predictions(target, 9);
        const LossReport r = total_loss(pred, target);
        for (double v : {r.person_center.value, r.person_offset.value, r.person_wh.value,
                         r.body_kp_offsets.value, r.body_kp_heatmaps.value,
                         r.hand_kp_offsets.value, r.face_kp_offsets.value, r.face_box_wh.value,
                         r.foot_kp_offsets.value})
            CHECK(v >= 0.0);
    }
}

TEST_CASE("analytic gradients match finite differences") {
    for (HierarchyScheme scheme :
         {HierarchyScheme::Baseline, HierarchyScheme::HM1, HierarchyScheme::HM2}) {
        CAPTURE(to_string(scheme));
        const TargetMaps target = tiny_targets(scheme);
        const PredictionMaps pred = random_gradcheck_predictions(target, 42);
        const auto results = gradcheck_losses(pred, target, 100, 7);
        for (const GradCheckResult& r : results) {
            CAPTURE(r.branch);
            CHECK(r.pass);
            if (r.points_checked > 0) CHECK(r.max_rel_err < 1e-4);
        }
        // the three loss families all get exercised somewhere
        int checked = 0;
        for (const GradCheckResult& r : results) checked += r.points_checked;
        CHECK(checked >= 300);
    }
}

TEST_CASE("gradcheck rejects a corrupted gradient") {
    // sanity that the checker can fail: bias one analytic gradient by hand
    const TargetMaps target = tiny_targets();
    std::vector<double> pred = {0.5, 0.3};
    std::vector<double> tgt = {1.0, 0.0};
    const LossTerm term = focal_loss_core(pred, tgt);
    const double h = 1e-5;
    std::vector<double> hi = pred, lo = pred;
    hi[0] += h;
    lo[0] -= h;
    const double fd = (focal_loss_core(hi, tgt).value - focal_loss_core(lo, tgt).value) /
                      (2.0 * h);
    CHECK(std::abs(term.grad[0] - fd) / std::abs(fd) < 1e-8);
    CHECK(std::abs((term.grad[0] * 1.01) - fd) / std::abs(fd) > 1e-4);
}
