#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hierpose/annotations.hpp"
#include "hierpose/decoder.hpp"

namespace hierpose {

/// Per-keypoint OKS falloff constants.
struct SigmaTable {
    std::array<double, kNumKeypoints> sigma{};

    /// The public COCO WholeBody evaluation constants.
    static SigmaTable coco_wholebody();
    static SigmaTable from_json(const std::filesystem::path& path);
    void validate() const;  // throws unless all 133 entries are positive
};

enum class EvalPart { Body = 0, Foot, Face, Hand, WholeBody };
inline constexpr std::array<EvalPart, 5> kAllEvalParts = {
    EvalPart::Body, EvalPart::Foot, EvalPart::Face, EvalPart::Hand, EvalPart::WholeBody};

const char* to_string(EvalPart part);

/// [begin, count) keypoint range scored by a part column.
std::pair<int, int> eval_part_range(EvalPart part);

/// One detection, as carried by the results JSON.
struct PoseResult {
    std::int64_t image_id = 0;
    double score = 0.0;
    Box box;
    std::array<DecodedKeypoint, kNumKeypoints> keypoints{};
};

void write_results_json(const std::filesystem::path& path,
                        const std::vector<PoseResult>& results);
std::vector<PoseResult> read_results_json(const std::filesystem::path& path);

/// Mean over the part's labeled ground-truth keypoints of
/// exp(-d_i^2 / (2 s^2 sigma_i^2)) with s^2 the ground-truth person-box area.
/// Returns nullopt when the part has no labeled keypoints (pair skipped).
std::optional<double> oks(const std::array<DecodedKeypoint, kNumKeypoints>& pred,
                          const WholeBodyAnnotation& gt, EvalPart part,
                          const SigmaTable& sigmas);

struct EvalConfig {
    std::vector<double> oks_thresholds = {0.50, 0.55, 0.60, 0.65, 0.70,
                                          0.75, 0.80, 0.85, 0.90, 0.95};
    int max_dets = 20;  // detections kept per image, by score
};

struct PartMetrics {
    double ap = 0.0;
    double ar = 0.0;
    bool defined = false;  // false when the part has no scoreable ground truth
};

struct EvalReport {
    std::array<PartMetrics, 5> parts{};  // Body, Foot, Face, Hand, WholeBody
    PartMetrics wholebody_mean;          // arithmetic mean of the five columns

    const PartMetrics& part(EvalPart p) const { return parts[static_cast<int>(p)]; }
};

/// COCO-protocol matching (greedy by score, each ground truth matched at most
/// once per threshold) over the OKS thresholds; AP is 101-point interpolated,
/// AR is recall at max_dets.
PartMetrics evaluate_keypoint_ap(const std::vector<PoseResult>& results,
                                 const std::vector<ImageAnnotations>& gts, EvalPart part,
                                 const SigmaTable& sigmas, const EvalConfig& config = {});

EvalReport evaluate_keypoints(const std::vector<PoseResult>& results,
                              const std::vector<ImageAnnotations>& gts,
                              const SigmaTable& sigmas, const EvalConfig& config = {});

std::string format_report_table(const EvalReport& report);

struct ScoredBox {
    std::int64_t image_id = 0;
    Box box;
    double score = 0.0;
};

struct BoxApResult {
    double ap = 0.0;
    double ap50 = 0.0;
    double ap75 = 0.0;
    double ap_m = 0.0;
    double ap_l = 0.0;
    bool defined = false;    // any scoreable ground truth at all
    bool m_defined = false;  // ground truth present in the medium slice
    bool l_defined = false;
};

/// COCO-protocol box AP at IoU 0.50:0.05:0.95 plus the AP50/AP75 slices and
/// the medium/large ground-truth-area slices (COCO breakpoints 32^2, 96^2).
BoxApResult evaluate_box_ap(const std::vector<ScoredBox>& detections,
                            const std::vector<ScoredBox>& ground_truth, int max_dets = 100);

/// Axis-aligned hull over face keypoints whose score clears the threshold;
/// box score is the mean qualifying keypoint score. Nullopt when no keypoint
/// qualifies.
std::optional<ScoredBox> face_box_from_keypoints(const PoseResult& person,
                                                 double kp_score_threshold = 0.2);

}  // namespace hierpose
