#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "hierpose/geometry.hpp"

namespace hierpose {

// 133-keypoint whole-body layout:
//   body  0..16   (17)
//   foot  17..22  (6; left 17..19, right 20..22)
//   face  23..90  (68)
//   left hand  91..111  (21)
//   right hand 112..132 (21)
inline constexpr int kNumKeypoints = 133;
inline constexpr int kBodyBegin = 0;
inline constexpr int kBodyCount = 17;
inline constexpr int kFootBegin = 17;
inline constexpr int kFootCount = 6;
inline constexpr int kLeftFootBegin = 17;
inline constexpr int kRightFootBegin = 20;
inline constexpr int kFaceBegin = 23;
inline constexpr int kFaceCount = 68;
inline constexpr int kLeftHandBegin = 91;
inline constexpr int kRightHandBegin = 112;
inline constexpr int kHandCount = 21;

/// Parts that carry a derived bounding box.
enum class BoxedPart { Face = 0, LeftHand, RightHand, LeftFoot, RightFoot };
inline constexpr int kNumBoxedParts = 5;
inline constexpr std::array<BoxedPart, 5> kAllBoxedParts = {
    BoxedPart::Face, BoxedPart::LeftHand, BoxedPart::RightHand, BoxedPart::LeftFoot,
    BoxedPart::RightFoot};

/// Regression anchor of a keypoint under a hierarchy scheme.
enum class Anchor {
    PersonCenter = 0,
    FaceCenter,
    LeftHandCenter,
    RightHandCenter,
    LeftFootCenter,
    RightFootCenter
};

/// Which anchor each keypoint regresses to.
///   Baseline: all 133 keypoints to the person center (133 body-branch channels).
///   HM1: body to person center; foot/face/hand to their part centers
///        (22 body-branch channels: 17 body + 5 part centers).
///   HM2: body and foot to the person center; face/hand to part centers
///        (26 body-branch channels: 17 body + 6 foot + 3 part centers).
enum class HierarchyScheme { Baseline = 0, HM1, HM2 };

const char* to_string(HierarchyScheme scheme);
std::optional<HierarchyScheme> parse_scheme(const std::string& name);

struct Keypoint {
    double x = 0.0;
    double y = 0.0;
    int v = 0;  // 0 unlabeled, 1 labeled not visible, 2 labeled visible

    bool labeled() const { return v > 0; }
};

struct PartBox {
    Vec2 center;
    double w = 0.0;
    double h = 0.0;
    bool valid = false;  // false when the part has no labeled keypoints
};

struct WholeBodyAnnotation {
    std::array<Keypoint, kNumKeypoints> keypoints{};
    Box person_box;
    std::array<PartBox, kNumBoxedParts> part_boxes{};
    std::int64_t image_id = 0;

    const PartBox& part_box(BoxedPart p) const { return part_boxes[static_cast<int>(p)]; }
    PartBox& part_box(BoxedPart p) { return part_boxes[static_cast<int>(p)]; }
};

/// [begin, count) keypoint index range of a boxed part.
std::pair<int, int> part_index_range(BoxedPart part);

/// Boxed part owning keypoint k, or nullopt for body keypoints.
std::optional<BoxedPart> part_of_keypoint(int k);

/// Anchor assignment. Total and deterministic; throws std::out_of_range for k >= 133.
Anchor anchor_of(HierarchyScheme scheme, int k);

/// Number of body-branch channels (direct keypoints + part-center pseudo-keypoints).
int body_branch_count(HierarchyScheme scheme);

/// Body-branch channel of keypoint k when it is anchored at the person center,
/// -1 when the keypoint regresses from a part center under this scheme.
int direct_body_channel(HierarchyScheme scheme, int k);

/// Body-branch channel of a part-center pseudo-keypoint, nullopt when the part
/// has no center channel under this scheme (all parts under Baseline; feet under HM2).
std::optional<int> part_center_channel(HierarchyScheme scheme, BoxedPart part);

/// True when the scheme stores this part's keypoints in a part-offset tensor.
bool scheme_uses_part_offsets(HierarchyScheme scheme, BoxedPart part);

/// Channel pair index of keypoint k inside its part-offset tensor
/// (face tensor: 0..67; hand tensor: left 0..20, right 21..41; foot tensor: left 0..2, right 3..5).
int part_offset_pair_index(BoxedPart part, int k);

/// Tight extreme-keypoint hull over the part's labeled keypoints.
/// valid = false when none are labeled; a single labeled keypoint yields a
/// zero-area but valid box.
PartBox derive_part_box(std::span<const Keypoint> keypoints, int begin, int count);

/// Fills all five part boxes from the annotation's keypoints. Idempotent.
WholeBodyAnnotation derive_part_boxes(WholeBodyAnnotation annotation);

}  // namespace hierpose
