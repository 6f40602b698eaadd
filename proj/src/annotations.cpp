#include "hierpose/annotations.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <json.hpp>

namespace hierpose {

using nlohmann::json;

namespace {

std::string record_tag(const json& record, std::size_t index) {
    std::string tag = "annotation #" + std::to_string(index);
    if (record.is_object() && record.contains("image_id"))
        tag += " (image_id " + record["image_id"].dump() + ")";
    return tag;
}

void read_triplets(const json& arr, std::span<Keypoint> out, int expected,
                   const std::string& field, const std::string& tag) {
    if (!arr.is_array() || static_cast<int>(arr.size()) != expected * 3)
        throw ValidationError("field '" + field + "' of " + tag + " must hold " +
                              std::to_string(expected * 3) + " numbers, got " +
                              std::to_string(arr.size()));
    for (int i = 0; i < expected; ++i) {
        out[static_cast<std::size_t>(i)] = {arr[3 * i].get<double>(),
                                            arr[3 * i + 1].get<double>(),
                                            arr[3 * i + 2].get<int>()};
    }
}

PartBox box_from_xywh(const json& arr) {
    PartBox box;
    if (!arr.is_array() || arr.size() != 4) return box;
    const double x = arr[0].get<double>(), y = arr[1].get<double>();
    const double w = arr[2].get<double>(), h = arr[3].get<double>();
    box.center = {x + w / 2.0, y + h / 2.0};
    box.w = w;
    box.h = h;
    box.valid = w >= 0.0 && h >= 0.0;
    return box;
}

WholeBodyAnnotation parse_record(const json& record, std::size_t index,
                                 const LoadOptions& options) {
    const std::string tag = record_tag(record, index);
    WholeBodyAnnotation ann;
    ann.image_id = record.value("image_id", std::int64_t{0});

    if (!record.contains("bbox"))
        throw ValidationError("missing 'bbox' in " + tag);
    const json& bbox = record["bbox"];
    if (!bbox.is_array() || bbox.size() != 4)
        throw ValidationError("'bbox' of " + tag + " must be [x, y, w, h]");
    const double bw = bbox[2].get<double>(), bh = bbox[3].get<double>();
    if (bw <= 0.0 || bh <= 0.0)
        throw ValidationError("person box of " + tag + " must have positive size");
    ann.person_box = {{bbox[0].get<double>() + bw / 2.0, bbox[1].get<double>() + bh / 2.0},
                      bw, bh};

    const bool has_flat = record.contains("keypoints_133");
    const bool want_flat = options.format == AnnotationFormat::Flat ||
                           (options.format == AnnotationFormat::Auto && has_flat);
    std::span<Keypoint> kps(ann.keypoints);
    if (want_flat) {
        if (!has_flat) throw ValidationError("missing 'keypoints_133' in " + tag);
        read_triplets(record["keypoints_133"], kps, kNumKeypoints, "keypoints_133", tag);
    } else {
        for (const char* field : {"keypoints", "foot_kpts", "face_kpts", "lefthand_kpts",
                                  "righthand_kpts"})
            if (!record.contains(field))
                throw ValidationError(std::string("missing '") + field + "' in " + tag);
        read_triplets(record["keypoints"], kps.subspan(kBodyBegin, kBodyCount), kBodyCount,
                      "keypoints", tag);
        read_triplets(record["foot_kpts"], kps.subspan(kFootBegin, kFootCount), kFootCount,
                      "foot_kpts", tag);
        read_triplets(record["face_kpts"], kps.subspan(kFaceBegin, kFaceCount), kFaceCount,
                      "face_kpts", tag);
        read_triplets(record["lefthand_kpts"], kps.subspan(kLeftHandBegin, kHandCount),
                      kHandCount, "lefthand_kpts", tag);
        read_triplets(record["righthand_kpts"], kps.subspan(kRightHandBegin, kHandCount),
                      kHandCount, "righthand_kpts", tag);
    }
    for (const Keypoint& kp : ann.keypoints)
        if (kp.v < 0 || kp.v > 2)
            throw ValidationError("visibility flag outside {0,1,2} in " + tag);

    ann = derive_part_boxes(std::move(ann));
    if (options.use_shipped_part_boxes) {
        if (record.contains("face_box"))
            ann.part_box(BoxedPart::Face) = box_from_xywh(record["face_box"]);
        if (record.contains("lefthand_box"))
            ann.part_box(BoxedPart::LeftHand) = box_from_xywh(record["lefthand_box"]);
        if (record.contains("righthand_box"))
            ann.part_box(BoxedPart::RightHand) = box_from_xywh(record["righthand_box"]);
    }
    return ann;
}

json triplets_to_json(std::span<const Keypoint> kps) {
    json arr = json::array();
    for (const Keypoint& kp : kps) {
        arr.push_back(kp.x);
        arr.push_back(kp.y);
        arr.push_back(kp.v);
    }
    return arr;
}

}  // namespace

std::vector<ImageAnnotations> load_dataset(const std::filesystem::path& path,
                                           const LoadOptions& options) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open annotation file: " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("malformed annotation JSON in " + path.string() + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("annotations") || !doc["annotations"].is_array())
        throw ParseError("annotation JSON must hold an 'annotations' array: " + path.string());

    std::map<std::int64_t, ImageAnnotations> by_image;
    if (doc.contains("images") && doc["images"].is_array()) {
        for (const json& img : doc["images"]) {
            ImageAnnotations ia;
            ia.image_id = img.value("id", std::int64_t{0});
            ia.width = img.value("width", 0);
            ia.height = img.value("height", 0);
            by_image[ia.image_id] = std::move(ia);
        }
    }
    const json& records = doc["annotations"];
    for (std::size_t i = 0; i < records.size(); ++i) {
        WholeBodyAnnotation ann = parse_record(records[i], i, options);
        auto it = by_image.find(ann.image_id);
        if (it == by_image.end()) {
            ImageAnnotations ia;
            ia.image_id = ann.image_id;
            it = by_image.emplace(ann.image_id, std::move(ia)).first;
        }
        it->second.persons.push_back(std::move(ann));
    }
    std::vector<ImageAnnotations> images;
    images.reserve(by_image.size());
    for (auto& [id, ia] : by_image) images.push_back(std::move(ia));
    return images;
}

void save_dataset(const std::filesystem::path& path,
                  const std::vector<ImageAnnotations>& images) {
    json doc;
    doc["images"] = json::array();
    doc["annotations"] = json::array();
    for (const ImageAnnotations& ia : images) {
        doc["images"].push_back(
            {{"id", ia.image_id}, {"width", ia.width}, {"height", ia.height}});
        for (const WholeBodyAnnotation& ann : ia.persons) {
            std::span<const Keypoint> kps(ann.keypoints);
            json rec;
            rec["image_id"] = ann.image_id;
            rec["bbox"] = {ann.person_box.x0(), ann.person_box.y0(), ann.person_box.w,
                           ann.person_box.h};
            rec["keypoints"] = triplets_to_json(kps.subspan(kBodyBegin, kBodyCount));
            rec["foot_kpts"] = triplets_to_json(kps.subspan(kFootBegin, kFootCount));
            rec["face_kpts"] = triplets_to_json(kps.subspan(kFaceBegin, kFaceCount));
            rec["lefthand_kpts"] = triplets_to_json(kps.subspan(kLeftHandBegin, kHandCount));
            rec["righthand_kpts"] = triplets_to_json(kps.subspan(kRightHandBegin, kHandCount));
            doc["annotations"].push_back(std::move(rec));
        }
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << doc.dump(2) << "\n";
}

}  // namespace hierpose
