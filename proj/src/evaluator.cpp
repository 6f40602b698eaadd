#include "hierpose/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hierpose {

using nlohmann::json;

SigmaTable SigmaTable::coco_wholebody() {
    SigmaTable t;
    const double values[kNumKeypoints] = {
        // body
        0.026, 0.025, 0.025, 0.035, 0.035, 0.079, 0.079, 0.072, 0.072, 0.062, 0.062, 0.107,
        0.107, 0.087, 0.087, 0.089, 0.089,
        // foot
        0.068, 0.066, 0.066, 0.092, 0.094, 0.094,
        // face
        0.042, 0.043, 0.044, 0.043, 0.040, 0.035, 0.031, 0.025, 0.020, 0.023, 0.029, 0.032,
        0.037, 0.038, 0.043, 0.041, 0.045, 0.013, 0.012, 0.011, 0.011, 0.012, 0.012, 0.011,
        0.011, 0.013, 0.015, 0.009, 0.007, 0.007, 0.007, 0.012, 0.009, 0.008, 0.016, 0.010,
        0.017, 0.011, 0.009, 0.011, 0.009, 0.007, 0.013, 0.008, 0.011, 0.012, 0.010, 0.034,
        0.008, 0.008, 0.009, 0.008, 0.008, 0.007, 0.010, 0.008, 0.009, 0.009, 0.009, 0.007,
        0.007, 0.008, 0.011, 0.008, 0.008, 0.008, 0.010, 0.008,
        // left hand
        0.029, 0.022, 0.035, 0.037, 0.047, 0.026, 0.025, 0.024, 0.035, 0.018, 0.024, 0.022,
        0.026, 0.017, 0.021, 0.021, 0.032, 0.020, 0.019, 0.022, 0.031,
        // right hand
        0.029, 0.022, 0.035, 0.037, 0.047, 0.026, 0.025, 0.024, 0.035, 0.018, 0.024, 0.022,
        0.026, 0.017, 0.021, 0.021, 0.032, 0.020, 0.019, 0.022, 0.031};
    std::copy(std::begin(values), std::end(values), t.sigma.begin());
    return t;
}

SigmaTable SigmaTable::from_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open sigma table: " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("malformed sigma table " + path.string() + ": " + e.what());
    }
    if (!doc.contains("sigmas") || !doc["sigmas"].is_array() ||
        doc["sigmas"].size() != kNumKeypoints)
        throw std::runtime_error("sigma table must hold a 'sigmas' array of 133 values: " +
                                 path.string());
    SigmaTable t;
    for (int i = 0; i < kNumKeypoints; ++i)
        t.sigma[static_cast<std::size_t>(i)] = doc["sigmas"][i].get<double>();
    t.validate();
    return t;
}

void SigmaTable::validate() const {
    for (double s : sigma)
        if (!(s > 0.0)) throw std::runtime_error("sigma table entries must be positive");
}

const char* to_string(EvalPart part) {
    switch (part) {
        case EvalPart::Body: return "body";
        case EvalPart::Foot: return "foot";
        case EvalPart::Face: return "face";
        case EvalPart::Hand: return "hand";
        case EvalPart::WholeBody: return "whole-body";
    }
    return "?";
}

std::pair<int, int> eval_part_range(EvalPart part) {
    switch (part) {
        case EvalPart::Body: return {kBodyBegin, kBodyCount};
        case EvalPart::Foot: return {kFootBegin, kFootCount};
        case EvalPart::Face: return {kFaceBegin, kFaceCount};
        case EvalPart::Hand: return {kLeftHandBegin, 2 * kHandCount};
        case EvalPart::WholeBody: return {0, kNumKeypoints};
    }
    return {0, 0};
}

void write_results_json(const std::filesystem::path& path,
                        const std::vector<PoseResult>& results) {
    json doc;
    doc["results"] = json::array();
    for (const PoseResult& r : results) {
        json rec;
        rec["image_id"] = r.image_id;
        rec["score"] = r.score;
        rec["box"] = {r.box.x0(), r.box.y0(), r.box.w, r.box.h};
        json kps = json::array();
        for (const DecodedKeypoint& kp : r.keypoints) {
            kps.push_back(kp.x);
            kps.push_back(kp.y);
            kps.push_back(kp.score);
        }
        rec["keypoints_133"] = std::move(kps);
        doc["results"].push_back(std::move(rec));
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << doc.dump(2) << "\n";
}

std::vector<PoseResult> read_results_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open results file: " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("malformed results JSON " + path.string() + ": " + e.what());
    }
    if (!doc.contains("results") || !doc["results"].is_array())
        throw std::runtime_error("results JSON must hold a 'results' array: " + path.string());
    std::vector<PoseResult> results;
    for (const json& rec : doc["results"]) {
        PoseResult r;
        r.image_id = rec.value("image_id", std::int64_t{0});
        r.score = rec.value("score", 0.0);
        const json& b = rec.at("box");
        r.box = {{b[0].get<double>() + b[2].get<double>() / 2.0,
                  b[1].get<double>() + b[3].get<double>() / 2.0},
                 b[2].get<double>(), b[3].get<double>()};
        const json& kps = rec.at("keypoints_133");
        if (kps.size() != 3 * kNumKeypoints)
            throw std::runtime_error("keypoints_133 must hold 399 numbers: " + path.string());
        for (int k = 0; k < kNumKeypoints; ++k) {
            DecodedKeypoint& kp = r.keypoints[static_cast<std::size_t>(k)];
            kp.x = kps[3 * k].get<double>();
            kp.y = kps[3 * k + 1].get<double>();
            kp.score = kps[3 * k + 2].get<double>();
        }
        results.push_back(std::move(r));
    }
    return results;
}

std::optional<double> oks(const std::array<DecodedKeypoint, kNumKeypoints>& pred,
                          const WholeBodyAnnotation& gt, EvalPart part,
                          const SigmaTable& sigmas) {
    const auto [begin, count] = eval_part_range(part);
    const double s2 = gt.person_box.area();
    double sum = 0.0;
    int n = 0;
    for (int k = begin; k < begin + count; ++k) {
        const Keypoint& g = gt.keypoints[static_cast<std::size_t>(k)];
        if (!g.labeled()) continue;
        const DecodedKeypoint& p = pred[static_cast<std::size_t>(k)];
        const double dx = p.x - g.x;
        const double dy = p.y - g.y;
        const double s = sigmas.sigma[static_cast<std::size_t>(k)];
        sum += std::exp(-(dx * dx + dy * dy) / (2.0 * s2 * s * s));
        ++n;
    }
    if (n == 0) return std::nullopt;
    return sum / n;
}

namespace {

// One detection instance inside one image, with its similarity row against
// the image's ground truths. COCO-style greedy matching consumes these in
// score order per threshold.
struct DetRow {
    double score = 0.0;
    std::int64_t image_id = 0;
    std::size_t index = 0;  // insertion order, the deterministic tie-break
    std::vector<double> sim;
    bool ignore_area = false;
};

struct ImageInstances {
    std::vector<DetRow> dets;        // sorted by score desc, capped at max_dets
    std::vector<bool> gt_ignore;     // skipped ground truths
};

struct Judgement {
    double score = 0.0;
    std::int64_t image_id = 0;
    std::size_t index = 0;
    bool tp = false;
    bool ignored = false;
};

/// Greedy per-image matching at one threshold. Each ground truth is consumed
/// at most once; a detection prefers the best similarity >= threshold and
/// never trades a real match for an ignored one.
void match_image(const ImageInstances& img, double threshold, std::vector<Judgement>& out,
                 std::size_t* matched_real) {
    std::vector<bool> used(img.gt_ignore.size(), false);
    for (const DetRow& det : img.dets) {
        double best = threshold - 1e-10;
        int m = -1;
        for (std::size_t g = 0; g < img.gt_ignore.size(); ++g) {
            if (used[g]) continue;
            if (m >= 0 && !img.gt_ignore[static_cast<std::size_t>(m)] && img.gt_ignore[g])
                break;  // remaining candidates are all ignored; keep the real match
            if (det.sim[g] < best) continue;
            best = det.sim[g];
            m = static_cast<int>(g);
        }
        Judgement j{det.score, det.image_id, det.index, false, false};
        if (m >= 0) {
            used[static_cast<std::size_t>(m)] = true;
            if (img.gt_ignore[static_cast<std::size_t>(m)]) {
                j.ignored = true;
            } else {
                j.tp = true;
                if (matched_real != nullptr) ++*matched_real;
            }
        } else if (det.ignore_area) {
            j.ignored = true;
        }
        out.push_back(j);
    }
}

double ap_101(std::vector<Judgement> judged, std::size_t n_gt) {
    std::sort(judged.begin(), judged.end(), [](const Judgement& a, const Judgement& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.image_id != b.image_id) return a.image_id < b.image_id;
        return a.index < b.index;
    });
    std::vector<double> precision;
    std::vector<double> recall;
    std::size_t tp = 0, fp = 0;
    for (const Judgement& j : judged) {
        if (j.ignored) continue;
        j.tp ? ++tp : ++fp;
        precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
        recall.push_back(static_cast<double>(tp) / static_cast<double>(n_gt));
    }
    for (std::size_t i = precision.size(); i > 1; --i)
        precision[i - 2] = std::max(precision[i - 2], precision[i - 1]);
    double ap = 0.0;
    std::size_t pos = 0;
    for (int r = 0; r <= 100; ++r) {
        const double rt = r / 100.0;
        while (pos < recall.size() && recall[pos] < rt) ++pos;
        if (pos < precision.size()) ap += precision[pos];
    }
    return ap / 101.0;
}

/// Shared COCO-protocol accumulation over thresholds.
PartMetrics protocol_metrics(const std::vector<ImageInstances>& images,
                             const std::vector<double>& thresholds) {
    std::size_t n_gt = 0;
    for (const ImageInstances& img : images)
        for (bool ig : img.gt_ignore)
            if (!ig) ++n_gt;
    PartMetrics metrics;
    if (n_gt == 0) return metrics;  // undefined-marked, not zero
    metrics.defined = true;
    double ap_sum = 0.0, ar_sum = 0.0;
    for (double t : thresholds) {
        std::vector<Judgement> judged;
        std::size_t matched = 0;
        for (const ImageInstances& img : images) match_image(img, t, judged, &matched);
        ap_sum += ap_101(std::move(judged), n_gt);
        ar_sum += static_cast<double>(matched) / static_cast<double>(n_gt);
    }
    metrics.ap = ap_sum / thresholds.size();
    metrics.ar = ar_sum / thresholds.size();
    return metrics;
}

template <typename T>
std::map<std::int64_t, std::vector<const T*>> group_by_image(const std::vector<T>& items) {
    std::map<std::int64_t, std::vector<const T*>> grouped;
    for (const T& item : items) grouped[item.image_id].push_back(&item);
    return grouped;
}

}  // namespace

PartMetrics evaluate_keypoint_ap(const std::vector<PoseResult>& results,
                                 const std::vector<ImageAnnotations>& gts, EvalPart part,
                                 const SigmaTable& sigmas, const EvalConfig& config) {
    auto dets_by_image = group_by_image(results);
    std::vector<ImageInstances> images;
    for (const ImageAnnotations& gt_img : gts) {
        ImageInstances img;
        const auto it = dets_by_image.find(gt_img.image_id);
        std::vector<std::pair<const PoseResult*, std::size_t>> dets;
        if (it != dets_by_image.end())
            for (std::size_t i = 0; i < it->second.size(); ++i)
                dets.emplace_back(it->second[i], i);
        std::stable_sort(dets.begin(), dets.end(),
                         [](const auto& a, const auto& b) { return a.first->score > b.first->score; });
        if (static_cast<int>(dets.size()) > config.max_dets)
            dets.resize(static_cast<std::size_t>(config.max_dets));

        // ignored ground truths (no labeled part keypoints) sort last so the
        // greedy matcher prefers real matches
        std::vector<const WholeBodyAnnotation*> gt_sorted;
        gt_sorted.reserve(gt_img.persons.size());
        for (const WholeBodyAnnotation& gt : gt_img.persons) gt_sorted.push_back(&gt);
        auto is_ignored = [&](const WholeBodyAnnotation* gt) {
            const auto [begin, count] = eval_part_range(part);
            for (int k = begin; k < begin + count; ++k)
                if (gt->keypoints[static_cast<std::size_t>(k)].labeled()) return false;
            return true;
        };
        std::stable_sort(gt_sorted.begin(), gt_sorted.end(),
                         [&](const WholeBodyAnnotation* a, const WholeBodyAnnotation* b) {
                             return is_ignored(a) < is_ignored(b);
                         });
        img.gt_ignore.reserve(gt_sorted.size());
        for (const WholeBodyAnnotation* gt : gt_sorted) img.gt_ignore.push_back(is_ignored(gt));
        for (const auto& [det, index] : dets) {
            DetRow row;
            row.score = det->score;
            row.image_id = gt_img.image_id;
            row.index = index;
            row.sim.reserve(gt_sorted.size());
            for (const WholeBodyAnnotation* gt : gt_sorted)
                row.sim.push_back(oks(det->keypoints, *gt, part, sigmas).value_or(-1.0));
            img.dets.push_back(std::move(row));
        }
        images.push_back(std::move(img));
        dets_by_image.erase(gt_img.image_id);
    }
    // detections on images without ground truth count as plain false positives
    for (const auto& [image_id, dets] : dets_by_image) {
        ImageInstances img;
        for (std::size_t i = 0; i < dets.size() &&
                                static_cast<int>(i) < config.max_dets; ++i)
            img.dets.push_back({dets[i]->score, image_id, i, {}, false});
        images.push_back(std::move(img));
    }
    return protocol_metrics(images, config.oks_thresholds);
}

EvalReport evaluate_keypoints(const std::vector<PoseResult>& results,
                              const std::vector<ImageAnnotations>& gts,
                              const SigmaTable& sigmas, const EvalConfig& config) {
    EvalReport report;
    for (EvalPart part : kAllEvalParts)
        report.parts[static_cast<int>(part)] =
            evaluate_keypoint_ap(results, gts, part, sigmas, config);
    bool all_defined = true;
    double ap = 0.0, ar = 0.0;
    for (const PartMetrics& m : report.parts) {
        all_defined = all_defined && m.defined;
        ap += m.ap;
        ar += m.ar;
    }
    report.wholebody_mean.defined = all_defined;
    report.wholebody_mean.ap = ap / report.parts.size();
    report.wholebody_mean.ar = ar / report.parts.size();
    return report;
}

std::string format_report_table(const EvalReport& report) {
    std::ostringstream out;
    auto row = [&](const char* name, const PartMetrics& m) {
        out << name;
        for (std::size_t i = std::string(name).size(); i < 16; ++i) out << ' ';
        if (m.defined) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%8.3f %8.3f", m.ap, m.ar);
            out << buf;
        } else {
            out << "       -        -";
        }
        out << "\n";
    };
    out << "part                  AP       AR\n";
    for (EvalPart part : kAllEvalParts) row(to_string(part), report.part(part));
    row("wholebody-mean", report.wholebody_mean);
    return out.str();
}

BoxApResult evaluate_box_ap(const std::vector<ScoredBox>& detections,
                            const std::vector<ScoredBox>& ground_truth, int max_dets) {
    const std::vector<double> thresholds = {0.50, 0.55, 0.60, 0.65, 0.70,
                                            0.75, 0.80, 0.85, 0.90, 0.95};
    constexpr double kMediumLo = 32.0 * 32.0;
    constexpr double kMediumHi = 96.0 * 96.0;

    auto build = [&](double area_lo, double area_hi) {
        auto dets_by_image = group_by_image(detections);
        auto gts_by_image = group_by_image(ground_truth);
        std::vector<ImageInstances> images;
        std::vector<std::int64_t> image_ids;
        for (const auto& [id, unused] : gts_by_image) image_ids.push_back(id);
        for (const auto& [id, unused] : dets_by_image)
            if (gts_by_image.find(id) == gts_by_image.end()) image_ids.push_back(id);
        for (std::int64_t id : image_ids) {
            ImageInstances img;
            std::vector<const ScoredBox*> gts;
            if (auto it = gts_by_image.find(id); it != gts_by_image.end()) gts = it->second;
            // ignored ground truths sort last so real matches are preferred
            std::stable_sort(gts.begin(), gts.end(), [&](const ScoredBox* a, const ScoredBox* b) {
                const bool ia = a->box.area() < area_lo || a->box.area() >= area_hi;
                const bool ib = b->box.area() < area_lo || b->box.area() >= area_hi;
                return ia < ib;
            });
            for (const ScoredBox* gt : gts)
                img.gt_ignore.push_back(gt->box.area() < area_lo || gt->box.area() >= area_hi);
            std::vector<std::pair<const ScoredBox*, std::size_t>> dets;
            if (auto it = dets_by_image.find(id); it != dets_by_image.end())
                for (std::size_t i = 0; i < it->second.size(); ++i)
                    dets.emplace_back(it->second[i], i);
            std::stable_sort(dets.begin(), dets.end(), [](const auto& a, const auto& b) {
                return a.first->score > b.first->score;
            });
            if (static_cast<int>(dets.size()) > max_dets)
                dets.resize(static_cast<std::size_t>(max_dets));
            for (const auto& [det, index] : dets) {
                DetRow row;
                row.score = det->score;
                row.image_id = id;
                row.index = index;
                row.ignore_area =
                    det->box.area() < area_lo || det->box.area() >= area_hi;
                for (const ScoredBox* gt : gts) row.sim.push_back(box_iou(det->box, gt->box));
                img.dets.push_back(std::move(row));
            }
            images.push_back(std::move(img));
        }
        return images;
    };

    auto ap_over = [&](const std::vector<ImageInstances>& images,
                       const std::vector<double>& ts) {
        return protocol_metrics(images, ts);
    };

    const auto all = build(0.0, 1e18);
    BoxApResult result;
    const PartMetrics main = ap_over(all, thresholds);
    result.defined = main.defined;
    result.ap = main.ap;
    result.ap50 = ap_over(all, {0.50}).ap;
    result.ap75 = ap_over(all, {0.75}).ap;
    const PartMetrics medium = ap_over(build(kMediumLo, kMediumHi), thresholds);
    const PartMetrics large = ap_over(build(kMediumHi, 1e18), thresholds);
    result.ap_m = medium.ap;
    result.m_defined = medium.defined;
    result.ap_l = large.ap;
    result.l_defined = large.defined;
    return result;
}

std::optional<ScoredBox> face_box_from_keypoints(const PoseResult& person,
                                                 double kp_score_threshold) {
    double minx = 0.0, miny = 0.0, maxx = 0.0, maxy = 0.0, score_sum = 0.0;
    int n = 0;
    for (int k = kFaceBegin; k < kFaceBegin + kFaceCount; ++k) {
        const DecodedKeypoint& kp = person.keypoints[static_cast<std::size_t>(k)];
        if (kp.score <= kp_score_threshold) continue;
        if (n == 0) {
            minx = maxx = kp.x;
            miny = maxy = kp.y;
        } else {
            minx = std::min(minx, kp.x);
            miny = std::min(miny, kp.y);
            maxx = std::max(maxx, kp.x);
            maxy = std::max(maxy, kp.y);
        }
        score_sum += kp.score;
        ++n;
    }
    if (n == 0) return std::nullopt;
    ScoredBox box;
    box.image_id = person.image_id;
    box.box = Box::from_corners(minx, miny, maxx, maxy);
    box.score = score_sum / n;
    return box;
}

}  // namespace hierpose
