#include "hierpose/maps.hpp"

#include <stdexcept>

namespace hierpose {

namespace {

std::vector<std::uint32_t> chw(int c, int hw) {
    return {static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(hw),
            static_cast<std::uint32_t>(hw)};
}

}  // namespace

std::vector<const Tensor*> PredictionMaps::tensor_list() const {
    return {&person_center_heatmap, &person_center_offset, &person_wh,
            &body_kp_offsets,       &body_kp_heatmaps,     &hand_kp_offsets,
            &face_kp_offsets,       &face_box_wh,          &foot_kp_offsets};
}

std::vector<Tensor*> PredictionMaps::tensor_list() {
    return {&person_center_heatmap, &person_center_offset, &person_wh,
            &body_kp_offsets,       &body_kp_heatmaps,     &hand_kp_offsets,
            &face_kp_offsets,       &face_box_wh,          &foot_kp_offsets};
}

std::vector<const Tensor*> TargetMasks::tensor_list() const {
    return {&person_center_offset_mask, &person_wh_mask,       &body_kp_offsets_mask,
            &hand_kp_offsets_mask,      &face_kp_offsets_mask, &face_box_wh_mask,
            &foot_kp_offsets_mask};
}

std::vector<Tensor*> TargetMasks::tensor_list() {
    return {&person_center_offset_mask, &person_wh_mask,       &body_kp_offsets_mask,
            &hand_kp_offsets_mask,      &face_kp_offsets_mask, &face_box_wh_mask,
            &foot_kp_offsets_mask};
}

PredictionMaps make_prediction_maps(HierarchyScheme scheme, int input_size, int stride) {
    if (stride <= 0 || input_size % stride != 0)
        throw std::invalid_argument("input_size must be divisible by stride");
    PredictionMaps m;
    m.scheme = scheme;
    m.input_size = input_size;
    m.stride = stride;
    const int s = m.map_size();
    const int b = body_branch_count(scheme);
    const bool part_offsets = scheme != HierarchyScheme::Baseline;
    const bool foot_offsets = scheme == HierarchyScheme::HM1;
    m.person_center_heatmap = Tensor("person_center_heatmap", chw(1, s));
    m.person_center_offset = Tensor("person_center_offset", chw(2, s));
    m.person_wh = Tensor("person_wh", chw(2, s));
    m.body_kp_offsets = Tensor("body_kp_offsets", chw(2 * b, s));
    m.body_kp_heatmaps = Tensor("body_kp_heatmaps", chw(b, s));
    m.hand_kp_offsets = Tensor("hand_kp_offsets", chw(part_offsets ? 2 * 2 * kHandCount : 0, s));
    m.face_kp_offsets = Tensor("face_kp_offsets", chw(part_offsets ? 2 * kFaceCount : 0, s));
    m.face_box_wh = Tensor("face_box_wh", chw(2, s));
    m.foot_kp_offsets = Tensor("foot_kp_offsets", chw(foot_offsets ? 2 * kFootCount : 0, s));
    return m;
}

TargetMasks make_target_masks(HierarchyScheme scheme, int input_size, int stride) {
    TargetMasks masks;
    const int s = input_size / stride;
    const int b = body_branch_count(scheme);
    const bool part_offsets = scheme != HierarchyScheme::Baseline;
    const bool foot_offsets = scheme == HierarchyScheme::HM1;
    masks.person_center_offset_mask = Tensor("person_center_offset_mask", chw(1, s));
    masks.person_wh_mask = Tensor("person_wh_mask", chw(1, s));
    masks.body_kp_offsets_mask = Tensor("body_kp_offsets_mask", chw(b, s));
    masks.hand_kp_offsets_mask =
        Tensor("hand_kp_offsets_mask", chw(part_offsets ? 2 * kHandCount : 0, s));
    masks.face_kp_offsets_mask =
        Tensor("face_kp_offsets_mask", chw(part_offsets ? kFaceCount : 0, s));
    masks.face_box_wh_mask = Tensor("face_box_wh_mask", chw(1, s));
    masks.foot_kp_offsets_mask =
        Tensor("foot_kp_offsets_mask", chw(foot_offsets ? kFootCount : 0, s));
    return masks;
}

void write_maps(const std::filesystem::path& path, const PredictionMaps& maps,
                const TargetMasks* masks) {
    std::vector<Tensor> out;
    Tensor meta("meta", {3});
    meta.data = {static_cast<float>(static_cast<int>(maps.scheme)),
                 static_cast<float>(maps.stride), static_cast<float>(maps.input_size)};
    out.push_back(std::move(meta));
    for (const Tensor* t : maps.tensor_list()) out.push_back(*t);
    if (masks != nullptr)
        for (const Tensor* t : masks->tensor_list()) out.push_back(*t);
    write_tensor_dump(path, out);
}

PredictionMaps read_maps(const std::filesystem::path& path, TargetMasks* masks_out) {
    std::vector<Tensor> tensors = read_tensor_dump(path);
    const Tensor* meta = nullptr;
    for (const Tensor& t : tensors)
        if (t.name == "meta") meta = &t;
    if (meta == nullptr || meta->data.size() != 3)
        throw std::runtime_error("maps dump is missing its meta tensor: " + path.string());
    const int scheme_id = static_cast<int>(meta->data[0]);
    if (scheme_id < 0 || scheme_id > 2)
        throw std::runtime_error("maps dump has an unknown scheme id: " + path.string());
    PredictionMaps maps = make_prediction_maps(static_cast<HierarchyScheme>(scheme_id),
                                               static_cast<int>(meta->data[2]),
                                               static_cast<int>(meta->data[1]));
    TargetMasks masks =
        make_target_masks(maps.scheme, maps.input_size, maps.stride);
    auto fill = [&](std::vector<Tensor*> slots) {
        for (Tensor* slot : slots)
            for (Tensor& t : tensors)
                if (t.name == slot->name) {
                    if (t.dims != slot->dims)
                        throw std::runtime_error("tensor '" + t.name +
                                                 "' has unexpected shape in " + path.string());
                    *slot = std::move(t);
                }
    };
    fill(maps.tensor_list());
    if (masks_out != nullptr) {
        fill(masks.tensor_list());
        *masks_out = std::move(masks);
    }
    return maps;
}

}  // namespace hierpose
