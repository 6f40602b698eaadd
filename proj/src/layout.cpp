#include "hierpose/layout.hpp"

#include <limits>
#include <stdexcept>

namespace hierpose {

const char* to_string(HierarchyScheme scheme) {
    switch (scheme) {
        case HierarchyScheme::Baseline: return "baseline";
        case HierarchyScheme::HM1: return "hm1";
        case HierarchyScheme::HM2: return "hm2";
    }
    return "?";
}

std::optional<HierarchyScheme> parse_scheme(const std::string& name) {
    if (name == "baseline") return HierarchyScheme::Baseline;
    if (name == "hm1") return HierarchyScheme::HM1;
    if (name == "hm2") return HierarchyScheme::HM2;
    return std::nullopt;
}

std::pair<int, int> part_index_range(BoxedPart part) {
    switch (part) {
        case BoxedPart::Face: return {kFaceBegin, kFaceCount};
        case BoxedPart::LeftHand: return {kLeftHandBegin, kHandCount};
        case BoxedPart::RightHand: return {kRightHandBegin, kHandCount};
        case BoxedPart::LeftFoot: return {kLeftFootBegin, 3};
        case BoxedPart::RightFoot: return {kRightFootBegin, 3};
    }
    return {0, 0};
}

std::optional<BoxedPart> part_of_keypoint(int k) {
    if (k >= kLeftFootBegin && k < kRightFootBegin) return BoxedPart::LeftFoot;
    if (k >= kRightFootBegin && k < kFaceBegin) return BoxedPart::RightFoot;
    if (k >= kFaceBegin && k < kLeftHandBegin) return BoxedPart::Face;
    if (k >= kLeftHandBegin && k < kRightHandBegin) return BoxedPart::LeftHand;
    if (k >= kRightHandBegin && k < kNumKeypoints) return BoxedPart::RightHand;
    return std::nullopt;
}

static Anchor center_anchor_of_part(BoxedPart part) {
    switch (part) {
        case BoxedPart::Face: return Anchor::FaceCenter;
        case BoxedPart::LeftHand: return Anchor::LeftHandCenter;
        case BoxedPart::RightHand: return Anchor::RightHandCenter;
        case BoxedPart::LeftFoot: return Anchor::LeftFootCenter;
        case BoxedPart::RightFoot: return Anchor::RightFootCenter;
    }
    return Anchor::PersonCenter;
}

Anchor anchor_of(HierarchyScheme scheme, int k) {
    if (k < 0 || k >= kNumKeypoints)
        throw std::out_of_range("anchor_of: keypoint index " + std::to_string(k) +
                                " outside 0..132");
    const auto part = part_of_keypoint(k);
    if (!part.has_value()) return Anchor::PersonCenter;  // body keypoint
    switch (scheme) {
        case HierarchyScheme::Baseline:
            return Anchor::PersonCenter;
        case HierarchyScheme::HM1:
            return center_anchor_of_part(*part);
        case HierarchyScheme::HM2:
            if (*part == BoxedPart::LeftFoot || *part == BoxedPart::RightFoot)
                return Anchor::PersonCenter;  // feet treated as body keypoints
            return center_anchor_of_part(*part);
    }
    return Anchor::PersonCenter;
}

int body_branch_count(HierarchyScheme scheme) {
    switch (scheme) {
        case HierarchyScheme::Baseline: return kNumKeypoints;        // 133
        case HierarchyScheme::HM1: return kBodyCount + 5;            // 22
        case HierarchyScheme::HM2: return kBodyCount + kFootCount + 3;  // 26
    }
    return 0;
}

int direct_body_channel(HierarchyScheme scheme, int k) {
    if (k < 0 || k >= kNumKeypoints) return -1;
    switch (scheme) {
        case HierarchyScheme::Baseline:
            return k;
        case HierarchyScheme::HM1:
            return k < kBodyCount ? k : -1;
        case HierarchyScheme::HM2:
            return k < kBodyCount + kFootCount ? k : -1;
    }
    return -1;
}

std::optional<int> part_center_channel(HierarchyScheme scheme, BoxedPart part) {
    const int p = static_cast<int>(part);
    switch (scheme) {
        case HierarchyScheme::Baseline:
            return std::nullopt;
        case HierarchyScheme::HM1:
            // face, lhand, rhand, lfoot, rfoot appended after the 17 body channels
            return kBodyCount + p;
        case HierarchyScheme::HM2:
            if (part == BoxedPart::LeftFoot || part == BoxedPart::RightFoot)
                return std::nullopt;
            return kBodyCount + kFootCount + p;  // face, lhand, rhand after the 23 direct
    }
    return std::nullopt;
}

bool scheme_uses_part_offsets(HierarchyScheme scheme, BoxedPart part) {
    switch (scheme) {
        case HierarchyScheme::Baseline:
            return false;
        case HierarchyScheme::HM1:
            return true;
        case HierarchyScheme::HM2:
            return part == BoxedPart::Face || part == BoxedPart::LeftHand ||
                   part == BoxedPart::RightHand;
    }
    return false;
}

int part_offset_pair_index(BoxedPart part, int k) {
    const auto [begin, count] = part_index_range(part);
    if (k < begin || k >= begin + count)
        throw std::out_of_range("part_offset_pair_index: keypoint not in part");
    switch (part) {
        case BoxedPart::Face: return k - begin;
        case BoxedPart::LeftHand: return k - begin;
        case BoxedPart::RightHand: return kHandCount + (k - begin);
        case BoxedPart::LeftFoot: return k - begin;
        case BoxedPart::RightFoot: return 3 + (k - begin);
    }
    return 0;
}

PartBox derive_part_box(std::span<const Keypoint> keypoints, int begin, int count) {
    double minx = std::numeric_limits<double>::max();
    double miny = std::numeric_limits<double>::max();
    double maxx = std::numeric_limits<double>::lowest();
    double maxy = std::numeric_limits<double>::lowest();
    bool any = false;
    for (int i = begin; i < begin + count; ++i) {
        const Keypoint& kp = keypoints[static_cast<std::size_t>(i)];
        if (!kp.labeled()) continue;
        any = true;
        minx = std::min(minx, kp.x);
        miny = std::min(miny, kp.y);
        maxx = std::max(maxx, kp.x);
        maxy = std::max(maxy, kp.y);
    }
    PartBox box;
    if (!any) return box;
    box.valid = true;
    box.center = {(minx + maxx) / 2.0, (miny + maxy) / 2.0};
    box.w = maxx - minx;
    box.h = maxy - miny;
    return box;
}

WholeBodyAnnotation derive_part_boxes(WholeBodyAnnotation annotation) {
    for (BoxedPart part : kAllBoxedParts) {
        const auto [begin, count] = part_index_range(part);
        annotation.part_box(part) = derive_part_box(annotation.keypoints, begin, count);
    }
    return annotation;
}

}  // namespace hierpose
