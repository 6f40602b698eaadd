#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "hierpose/errors.hpp"
#include "hierpose/maps.hpp"
#include "hierpose/tensor.hpp"

using namespace hierpose;

namespace {

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("tensor dump round-trips") {
    Tensor a("alpha", {2, 3, 4});
    for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] = static_cast<float>(i) * 0.5f;
    Tensor b("beta", {5});
    b.data = {1.0f, -2.0f, 3.25f, 0.0f, 9.0f};
    const auto path = temp_file("hierpose_dump_roundtrip.hprt");
    write_tensor_dump(path, std::array{a, b});
    const auto back = read_tensor_dump(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].name == "alpha");
    CHECK(back[0].dims == a.dims);
    CHECK(back[0].data == a.data);
    CHECK(back[1].name == "beta");
    CHECK(back[1].data == b.data);
    std::filesystem::remove(path);
}

TEST_CASE("tensor dump header") {
    const auto path = temp_file("hierpose_dump_header.hprt");
    write_tensor_dump(path, {});
    std::ifstream in(path, std::ios::binary);
    char magic[4];
    in.read(magic, 4);
    CHECK(std::string(magic, 4) == "HPRT");
    std::uint16_t version = 0;
    in.read(reinterpret_cast<char*>(&version), 2);
    CHECK(version == kTensorDumpVersion);
    std::filesystem::remove(path);

    SUBCASE("bad magic rejected") {
        std::ofstream bad(path, std::ios::binary);
        bad << "NOPE0000";
        bad.close();
        CHECK_THROWS(read_tensor_dump(path));
        std::filesystem::remove(path);
    }
    SUBCASE("missing file raises an I/O error") {
        CHECK_THROWS_AS(read_tensor_dump(temp_file("hierpose_no_such_file.hprt")), IoError);
    }
}

TEST_CASE("prediction maps shapes per scheme") {
    const PredictionMaps hm2 = make_prediction_maps(HierarchyScheme::HM2, 512, 4);
    CHECK(hm2.map_size() == 128);
    CHECK(hm2.person_center_heatmap.channels() == 1);
    CHECK(hm2.person_center_offset.channels() == 2);
    CHECK(hm2.person_wh.channels() == 2);
    CHECK(hm2.body_kp_offsets.channels() == 52);
    CHECK(hm2.body_kp_heatmaps.channels() == 26);
    CHECK(hm2.hand_kp_offsets.channels() == 84);
    CHECK(hm2.face_kp_offsets.channels() == 136);
    CHECK(hm2.face_box_wh.channels() == 2);
    CHECK(hm2.foot_kp_offsets.channels() == 0);

    const PredictionMaps baseline = make_prediction_maps(HierarchyScheme::Baseline, 512, 4);
    CHECK(baseline.body_kp_offsets.channels() == 266);
    CHECK(baseline.body_kp_heatmaps.channels() == 133);
    CHECK(baseline.hand_kp_offsets.empty());
    CHECK(baseline.face_kp_offsets.empty());

    const PredictionMaps hm1 = make_prediction_maps(HierarchyScheme::HM1, 512, 4);
    CHECK(hm1.body_kp_offsets.channels() == 44);
    CHECK(hm1.foot_kp_offsets.channels() == 12);

    CHECK_THROWS_AS(make_prediction_maps(HierarchyScheme::HM2, 510, 4), std::invalid_argument);
}

TEST_CASE("maps dump carries meta and masks") {
    PredictionMaps maps = make_prediction_maps(HierarchyScheme::HM1, 64, 4);
    maps.person_wh.at(0, 3, 5) = 7.0f;
    TargetMasks masks = make_target_masks(HierarchyScheme::HM1, 64, 4);
    masks.person_wh_mask.at(0, 3, 5) = 1.0f;
    const auto path = temp_file("hierpose_maps_dump.hprt");
    write_maps(path, maps, &masks);

    TargetMasks masks_back;
    const PredictionMaps back = read_maps(path, &masks_back);
    CHECK(back.scheme == HierarchyScheme::HM1);
    CHECK(back.stride == 4);
    CHECK(back.input_size == 64);
    CHECK(back.person_wh.at(0, 3, 5) == 7.0f);
    CHECK(back.foot_kp_offsets.channels() == 12);
    CHECK(masks_back.person_wh_mask.at(0, 3, 5) == 1.0f);
    std::filesystem::remove(path);
}
