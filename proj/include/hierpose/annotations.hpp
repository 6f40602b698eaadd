#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "hierpose/errors.hpp"
#include "hierpose/layout.hpp"

namespace hierpose {

struct ImageAnnotations {
    std::int64_t image_id = 0;
    int width = 0;
    int height = 0;
    std::vector<WholeBodyAnnotation> persons;
};

enum class AnnotationFormat { Auto, Split, Flat };

struct LoadOptions {
    AnnotationFormat format = AnnotationFormat::Auto;
    /// Use face/hand box fields shipped in the record instead of re-deriving
    /// hulls from keypoints, when present.
    bool use_shipped_part_boxes = false;
};

/// Loads annotation JSON. Two record forms are accepted:
///   split: "keypoints" (51 numbers), "foot_kpts" (18), "face_kpts" (204),
///          "lefthand_kpts" (63), "righthand_kpts" (63), "bbox" [x,y,w,h]
///   flat:  "keypoints_133" (399 numbers), "bbox"
/// Coordinates are input-image pixels; triplets are (x, y, v).
/// Every returned annotation carries derived part boxes.
std::vector<ImageAnnotations> load_dataset(const std::filesystem::path& path,
                                           const LoadOptions& options = {});

/// Writes the split form. Inverse of load_dataset up to part-box re-derivation.
void save_dataset(const std::filesystem::path& path,
                  const std::vector<ImageAnnotations>& images);

}  // namespace hierpose
