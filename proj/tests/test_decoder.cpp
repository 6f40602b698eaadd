#include <doctest.h>

#include <cmath>

#include "hierpose/decoder.hpp"
#include "hierpose/encoder.hpp"
#include "hierpose/synth.hpp"

using namespace hierpose;

namespace {

std::vector<WholeBodyAnnotation> small_scene(std::uint64_t seed, int persons,
                                             double missing_foot_rate = 0.0) {
    SceneSpec spec;
    spec.seed = seed;
    spec.n_persons = persons;
    spec.image_size = 512;
    spec.missing_foot_rate = missing_foot_rate;
    return generate_scene(spec);
}

double max_labeled_kp_error(const std::vector<WholeBodyAnnotation>& scene,
                            const std::vector<DecodedPerson>& people) {
    double worst = 0.0;
    REQUIRE(people.size() == scene.size());
    for (const WholeBodyAnnotation& gt : scene) {
        // match decoded person by box center proximity
        const DecodedPerson* best = nullptr;
        double best_d = 1e18;
        for (const DecodedPerson& person : people) {
            const double d = dist(person.box.center, gt.person_box.center);
            if (d < best_d) {
                best_d = d;
                best = &person;
            }
        }
        REQUIRE(best != nullptr);
        for (int k = 0; k < kNumKeypoints; ++k) {
            const Keypoint& kp = gt.keypoints[static_cast<std::size_t>(k)];
            if (!kp.labeled()) continue;
            const DecodedKeypoint& dk = best->keypoints[static_cast<std::size_t>(k)];
            worst = std::max({worst, std::abs(dk.x - kp.x), std::abs(dk.y - kp.y)});
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("extract_peaks") {
    Tensor hm("h", {1, 16, 16});
    SUBCASE("single gaussian peak") {
        render_gaussian(hm, 0, {10, 10}, 3);
        const auto peaks = extract_peaks(hm, 0, 10, 0.3);
        REQUIRE(peaks.size() == 1);
        CHECK(peaks[0].x == 10);
        CHECK(peaks[0].y == 10);
        CHECK(peaks[0].score == 1.0f);
    }
    SUBCASE("equal scores break ties by row-major cell order") {
        hm.at(0, 2, 9) = 0.8f;
        hm.at(0, 5, 5) = 0.8f;
        const auto peaks = extract_peaks(hm, 0, 10, 0.1);
        REQUIRE(peaks.size() == 2);
        CHECK(peaks[0].y == 2);
        CHECK(peaks[0].x == 9);
        CHECK(peaks[1].y == 5);
        CHECK(peaks[1].x == 5);
    }
    SUBCASE("score ordering dominates") {
        hm.at(0, 2, 9) = 0.5f;
        hm.at(0, 5, 5) = 0.9f;
        const auto peaks = extract_peaks(hm, 0, 10, 0.1);
        REQUIRE(peaks.size() == 2);
        CHECK(peaks[0].y == 5);
    }
    SUBCASE("threshold above a uniform map returns nothing") {
        std::fill(hm.data.begin(), hm.data.end(), 0.25f);
        CHECK(extract_peaks(hm, 0, 10, 0.3).empty());
    }
    SUBCASE("top-k caps the list") {
        for (int i = 0; i < 8; ++i) hm.at(0, 2 * i, 2 * i) = 0.5f + 0.05f * i;
        const auto peaks = extract_peaks(hm, 0, 3, 0.1);
        CHECK(peaks.size() == 3);
        CHECK(peaks[0].score >= peaks[1].score);
        CHECK(peaks[1].score >= peaks[2].score);
    }
}

TEST_CASE("match_regressed_detected") {
    const Box box{{40.0, 40.0}, 20.0, 20.0};
    SUBCASE("unique candidate inside the box replaces coordinates") {
        const Peak peak{41, 40, 0.9f};
        const Vec2 reg{40.0, 40.0};
        const auto matched = match_regressed_detected({&reg, 1}, {&peak, 1}, box);
        REQUIRE(matched.size() == 1);
        CHECK(matched[0].detected);
        CHECK(matched[0].point.x == 41.0);
        CHECK(matched[0].point.y == 40.0);
        CHECK(matched[0].score == doctest::Approx(0.9));
    }
    SUBCASE("candidate outside the box is rejected") {
        const Peak peak{80, 40, 0.9f};
        const Vec2 reg{40.0, 40.0};
        const auto matched = match_regressed_detected({&reg, 1}, {&peak, 1}, box);
        CHECK(!matched[0].detected);
        CHECK(matched[0].point.x == 40.0);
    }
    SUBCASE("box margin rescues near-boundary candidates") {
        const Peak peak{51, 40, 0.9f};
        const Vec2 reg{40.0, 40.0};
        CHECK(!match_regressed_detected({&reg, 1}, {&peak, 1}, box, 0.0)[0].detected);
        CHECK(match_regressed_detected({&reg, 1}, {&peak, 1}, box, 2.0)[0].detected);
    }
    SUBCASE("equidistant candidates break by row-major cell order") {
        const std::array<Peak, 2> peaks = {Peak{41, 40, 0.5f}, Peak{39, 40, 0.9f}};
        const Vec2 reg{40.0, 40.0};
        const auto matched =
            match_regressed_detected({&reg, 1}, {peaks.data(), peaks.size()}, box);
        REQUIRE(matched[0].detected);
        CHECK(matched[0].point.x == 39.0);  // same row, lower x wins
    }
    SUBCASE("nearest wins regardless of score") {
        const std::array<Peak, 2> peaks = {Peak{45, 40, 0.99f}, Peak{41, 41, 0.2f}};
        const Vec2 reg{40.0, 40.0};
        const auto matched =
            match_regressed_detected({&reg, 1}, {peaks.data(), peaks.size()}, box);
        CHECK(matched[0].point.x == 41.0);
        CHECK(matched[0].score == doctest::Approx(0.2));
    }
}

TEST_CASE("decode round-trips perfect maps") {
    for (HierarchyScheme scheme :
         {HierarchyScheme::Baseline, HierarchyScheme::HM1, HierarchyScheme::HM2}) {
        CAPTURE(to_string(scheme));
        const auto scene = small_scene(3, 4);
        const PredictionMaps maps = perfect_maps(scene, scheme);
        const auto people = decode_people(maps);
        REQUIRE(people.size() == scene.size());
        CHECK(max_labeled_kp_error(scene, people) < 1e-3);
        // boxes round-trip too
        for (const WholeBodyAnnotation& gt : scene) {
            double best = 1e18;
            for (const DecodedPerson& p : people)
                best = std::min(
                    best, std::max({std::abs(p.box.center.x - gt.person_box.center.x),
                                    std::abs(p.box.center.y - gt.person_box.center.y),
                                    std::abs(p.box.w - gt.person_box.w),
                                    std::abs(p.box.h - gt.person_box.h)}));
            CHECK(best < 1e-3);
        }
    }
}

TEST_CASE("decode with missing foot annotations still round-trips labeled keypoints") {
    const auto scene = small_scene(9, 3, 0.5);
    for (HierarchyScheme scheme : {HierarchyScheme::HM1, HierarchyScheme::HM2}) {
        CAPTURE(to_string(scheme));
        const auto people = decode_people(perfect_maps(scene, scheme));
        CHECK(max_labeled_kp_error(scene, people) < 1e-3);
    }
}

TEST_CASE("suppressed part-center peak falls back to the regressed center") {
    const auto scene = small_scene(5, 1);
    PredictionMaps maps = perfect_maps(scene, HierarchyScheme::HM2);
    const auto face_channel = part_center_channel(HierarchyScheme::HM2, BoxedPart::Face);
    REQUIRE(face_channel.has_value());
    auto plane = maps.body_kp_heatmaps.plane(*face_channel);
    std::fill(plane.begin(), plane.end(), 0.0f);

    const auto people = decode_people(maps);
    REQUIRE(people.size() == 1);
    double worst = 0.0;
    for (int k = kFaceBegin; k < kFaceBegin + kFaceCount; ++k) {
        const DecodedKeypoint& dk = people[0].keypoints[static_cast<std::size_t>(k)];
        CHECK(dk.source == KeypointSource::Fallback);
        const Keypoint& gt = scene[0].keypoints[static_cast<std::size_t>(k)];
        worst = std::max({worst, std::abs(dk.x - gt.x), std::abs(dk.y - gt.y)});
    }
    CHECK(worst < 1e-3);  // regressed fallback center lands on the same cell
    // hands were untouched
    CHECK(people[0].keypoints[kLeftHandBegin].source == KeypointSource::Regressed);
}

TEST_CASE("empty maps decode to an empty person list") {
    const PredictionMaps maps = make_prediction_maps(HierarchyScheme::HM2, 128, 4);
    CHECK(decode_people(maps).empty());
}

TEST_CASE("keypoint sources and scores") {
    const auto scene = small_scene(7, 1);
    const PredictionMaps maps = perfect_maps(scene, HierarchyScheme::HM2);
    const auto people = decode_people(maps);
    REQUIRE(people.size() == 1);
    const DecodedPerson& person = people[0];
    CHECK(person.score == doctest::Approx(1.0));
    for (int k = 0; k < kBodyCount; ++k) {
        const DecodedKeypoint& dk = person.keypoints[static_cast<std::size_t>(k)];
        CHECK(dk.source == KeypointSource::Detected);
        CHECK(dk.score == doctest::Approx(1.0));
    }
    for (int k = kFaceBegin; k < kFaceBegin + kFaceCount; ++k) {
        const DecodedKeypoint& dk = person.keypoints[static_cast<std::size_t>(k)];
        CHECK(dk.source == KeypointSource::Regressed);
        CHECK(dk.score == doctest::Approx(0.5));  // person score * fallback factor
    }
    SUBCASE("detected keypoints stay inside the person box") {
        for (const DecodedKeypoint& dk : person.keypoints)
            if (dk.source == KeypointSource::Detected)
                CHECK(person.box.contains({dk.x, dk.y}, 1e-9));
    }
}

TEST_CASE("lowering the center threshold never removes a person") {
    const auto scene = small_scene(13, 5);
    PredictionMaps maps = perfect_maps(scene, HierarchyScheme::HM2);
    // replace the gaussian field with isolated spikes of distinct strengths
    // so the thresholds bite cleanly
    const auto peaks = extract_peaks(maps.person_center_heatmap, 0, 100, 0.5);
    REQUIRE(peaks.size() == 5);
    std::fill(maps.person_center_heatmap.data.begin(), maps.person_center_heatmap.data.end(),
              0.0f);
    const float strengths[] = {1.0f, 0.4f, 0.9f, 0.2f, 0.8f};
    for (std::size_t i = 0; i < peaks.size(); ++i)
        maps.person_center_heatmap.at(0, peaks[i].y, peaks[i].x) = strengths[i];

    DecodeConfig high;
    high.center_threshold = 0.45;
    DecodeConfig low;
    low.center_threshold = 0.1;
    const auto few = decode_people(maps, high);
    const auto many = decode_people(maps, low);
    CHECK(few.size() == 3);
    CHECK(many.size() == 5);
    for (const DecodedPerson& p : few) {
        bool found = false;
        for (const DecodedPerson& q : many)
            found = found || (q.box.center.x == p.box.center.x &&
                              q.box.center.y == p.box.center.y && q.score == p.score);
        CHECK(found);
    }
}

TEST_CASE("decode is deterministic") {
    const auto scene = small_scene(21, 6);
    const PredictionMaps maps = perfect_maps(scene, HierarchyScheme::HM2);
    const auto a = decode_people(maps);
    const auto b = decode_people(maps);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].score == b[i].score);
        for (int k = 0; k < kNumKeypoints; ++k) {
            CHECK(a[i].keypoints[static_cast<std::size_t>(k)].x ==
                  b[i].keypoints[static_cast<std::size_t>(k)].x);
            CHECK(a[i].keypoints[static_cast<std::size_t>(k)].y ==
                  b[i].keypoints[static_cast<std::size_t>(k)].y);
        }
    }
}

TEST_CASE("scheme/shape mismatch raises a contract error") {
    PredictionMaps maps = make_prediction_maps(HierarchyScheme::HM2, 128, 4);
    maps.body_kp_heatmaps = Tensor("body_kp_heatmaps", {22, 32, 32});
    CHECK_THROWS_AS(decode_people(maps), std::invalid_argument);
}
