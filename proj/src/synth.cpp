#include "hierpose/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hierpose/rng.hpp"

namespace hierpose {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Template pose in unit-height coordinates, origin mid-body, y down.
// Realism is a non-goal; only geometry and scale ratios matter.
constexpr std::array<Vec2, kBodyCount> kBodyTemplate = {{
    {0.000, -0.400},   // nose
    {0.030, -0.425},   // left eye
    {-0.030, -0.425},  // right eye
    {0.060, -0.410},   // left ear
    {-0.060, -0.410},  // right ear
    {0.155, -0.270},   // left shoulder
    {-0.155, -0.270},  // right shoulder
    {0.215, -0.105},   // left elbow
    {-0.215, -0.105},  // right elbow
    {0.255, 0.060},    // left wrist
    {-0.255, 0.060},   // right wrist
    {0.095, 0.050},    // left hip
    {-0.095, 0.050},   // right hip
    {0.110, 0.265},    // left knee
    {-0.110, 0.265},   // right knee
    {0.120, 0.440},    // left ankle
    {-0.120, 0.440},   // right ankle
}};

void place_foot(std::span<Vec2> kps, int begin, Vec2 ankle, double side, double foot_len) {
    kps[static_cast<std::size_t>(begin)] = ankle + Vec2{0.90 * foot_len * side, 0.050};
    kps[static_cast<std::size_t>(begin) + 1] = ankle + Vec2{0.65 * foot_len * side, 0.058};
    kps[static_cast<std::size_t>(begin) + 2] = ankle + Vec2{-0.25 * foot_len * side, 0.048};
}

void place_face(std::span<Vec2> kps, Vec2 head, double face_size) {
    const double rx = 0.50 * face_size;
    const double ry = 0.62 * face_size;
    int i = kFaceBegin;
    // jaw, 17 points from left temple through the chin to the right temple
    for (int j = 0; j < 17; ++j) {
        const double t = kPi * j / 16.0;
        kps[static_cast<std::size_t>(i++)] =
            head + Vec2{-rx * std::cos(t), 0.72 * ry * std::sin(t) + 0.18 * face_size};
    }
    // brows, 5 points each
    for (int side = 0; side < 2; ++side) {
        const double s = side == 0 ? -1.0 : 1.0;
        for (int j = 0; j < 5; ++j) {
            const double t = j / 4.0;
            const double x = s * rx * (0.20 + 0.52 * t);
            const double y = -0.52 * ry - 0.10 * ry * std::sin(kPi * t);
            kps[static_cast<std::size_t>(i++)] = head + Vec2{x, y};
        }
    }
    // nose bridge and nostril row
    for (int j = 0; j < 4; ++j)
        kps[static_cast<std::size_t>(i++)] = head + Vec2{0.0, ry * (-0.34 + 0.14 * j)};
    for (int j = 0; j < 5; ++j)
        kps[static_cast<std::size_t>(i++)] = head + Vec2{rx * (-0.18 + 0.09 * j), 0.20 * ry};
    // eyes, 6 points each
    for (int side = 0; side < 2; ++side) {
        const double s = side == 0 ? -1.0 : 1.0;
        const Vec2 c = head + Vec2{s * 0.42 * rx, -0.28 * ry};
        for (int j = 0; j < 6; ++j) {
            const double t = 2.0 * kPi * j / 6.0;
            kps[static_cast<std::size_t>(i++)] =
                c + Vec2{0.16 * rx * std::cos(t), 0.10 * ry * std::sin(t)};
        }
    }
    // mouth, 12 outer + 8 inner
    const Vec2 mouth = head + Vec2{0.0, 0.48 * ry};
    for (int j = 0; j < 12; ++j) {
        const double t = 2.0 * kPi * j / 12.0;
        kps[static_cast<std::size_t>(i++)] =
            mouth + Vec2{0.42 * rx * std::cos(t), 0.22 * ry * std::sin(t)};
    }
    for (int j = 0; j < 8; ++j) {
        const double t = 2.0 * kPi * j / 8.0;
        kps[static_cast<std::size_t>(i++)] =
            mouth + Vec2{0.24 * rx * std::cos(t), 0.10 * ry * std::sin(t)};
    }
}

void place_hand(std::span<Vec2> kps, int begin, Vec2 wrist, double side, double hand_len) {
    Vec2 dir{0.55 * side, 1.0};
    dir = dir / dir.norm();
    kps[static_cast<std::size_t>(begin)] = wrist + dir * (0.10 * hand_len);
    int i = begin + 1;
    for (int finger = 0; finger < 5; ++finger) {
        const double spread = (-0.62 + 0.31 * finger) * side;
        const double c = std::cos(spread), s = std::sin(spread);
        const Vec2 fdir{dir.x * c - dir.y * s, dir.x * s + dir.y * c};
        for (int joint = 0; joint < 4; ++joint) {
            const double d = (0.35 + 0.20 * joint) * hand_len;
            kps[static_cast<std::size_t>(i++)] = wrist + fdir * d;
        }
    }
}

void rotate_about(std::span<Vec2> kps, std::span<const int> indices, Vec2 pivot, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    for (int idx : indices) {
        Vec2& p = kps[static_cast<std::size_t>(idx)];
        const Vec2 d = p - pivot;
        p = pivot + Vec2{d.x * c - d.y * s, d.x * s + d.y * c};
    }
}

std::vector<int> span_indices(int begin, int count) {
    std::vector<int> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = begin + i;
    return out;
}

std::vector<int> join(std::vector<int> a, const std::vector<int>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

struct AnchorCells {
    // one entry per anchor kind: person + the five part centers
    std::array<std::optional<std::pair<int, int>>, 6> cells{};
};

bool too_close(const AnchorCells& a, const AnchorCells& b, int min_sep) {
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        if (!a.cells[i] || !b.cells[i]) continue;
        const auto [ax, ay] = *a.cells[i];
        const auto [bx, by] = *b.cells[i];
        if (std::max(std::abs(ax - bx), std::abs(ay - by)) < min_sep) return true;
    }
    return false;
}

}  // namespace

std::vector<WholeBodyAnnotation> generate_scene(const SceneSpec& spec) {
    if (spec.n_persons < 0 || spec.image_size <= 0 || spec.coord_lattice <= 0)
        throw std::invalid_argument("generate_scene: malformed scene spec");
    Rng rng(spec.seed);
    const double lattice = spec.coord_lattice;
    const double pad = 2.0 * lattice;

    std::vector<WholeBodyAnnotation> scene;
    std::vector<AnchorCells> placed;
    for (int person = 0; person < spec.n_persons; ++person) {
        bool ok = false;
        for (int attempt = 0; attempt < 500 && !ok; ++attempt) {
            const double h =
                std::min(rng.uniform(spec.min_person_height, spec.max_person_height),
                         0.85 * spec.image_size);
            std::array<Vec2, kNumKeypoints> kps{};
            for (int k = 0; k < kBodyCount; ++k)
                kps[static_cast<std::size_t>(k)] = kBodyTemplate[static_cast<std::size_t>(k)];
            place_foot(kps, kLeftFootBegin, kps[15], 1.0, spec.foot_scale);
            place_foot(kps, kRightFootBegin, kps[16], -1.0, spec.foot_scale);
            place_face(kps, {0.0, -0.415}, spec.face_scale);
            place_hand(kps, kLeftHandBegin, kps[9], 1.0, spec.hand_scale);
            place_hand(kps, kRightHandBegin, kps[10], -1.0, spec.hand_scale);

            const auto lhand = span_indices(kLeftHandBegin, kHandCount);
            const auto rhand = span_indices(kRightHandBegin, kHandCount);
            rotate_about(kps, join({7, 9}, lhand), kps[5], rng.uniform(-0.45, 0.45));
            rotate_about(kps, join({9}, lhand), kps[7], rng.uniform(-0.35, 0.35));
            rotate_about(kps, join({8, 10}, rhand), kps[6], rng.uniform(-0.45, 0.45));
            rotate_about(kps, join({10}, rhand), kps[8], rng.uniform(-0.35, 0.35));
            rotate_about(kps, {std::array{13, 15, 17, 18, 19}}, kps[11],
                         rng.uniform(-0.18, 0.18));
            rotate_about(kps, {std::array{15, 17, 18, 19}}, kps[13], rng.uniform(-0.15, 0.15));
            rotate_about(kps, {std::array{14, 16, 20, 21, 22}}, kps[12],
                         rng.uniform(-0.18, 0.18));
            rotate_about(kps, {std::array{16, 20, 21, 22}}, kps[14], rng.uniform(-0.15, 0.15));

            double minx = 1e18, miny = 1e18, maxx = -1e18, maxy = -1e18;
            for (Vec2& p : kps) {
                p = p * h + Vec2{rng.normal(0.0, 0.008 * h), rng.normal(0.0, 0.008 * h)};
                minx = std::min(minx, p.x);
                miny = std::min(miny, p.y);
                maxx = std::max(maxx, p.x);
                maxy = std::max(maxy, p.y);
            }
            const double lo_x = pad - minx, hi_x = spec.image_size - pad - maxx;
            const double lo_y = pad - miny, hi_y = spec.image_size - pad - maxy;
            if (lo_x > hi_x || lo_y > hi_y) continue;
            const Vec2 shift{rng.uniform(lo_x, hi_x), rng.uniform(lo_y, hi_y)};

            WholeBodyAnnotation ann;
            for (int k = 0; k < kNumKeypoints; ++k) {
                const Vec2 p = kps[static_cast<std::size_t>(k)] + shift;
                ann.keypoints[static_cast<std::size_t>(k)] = {
                    std::round(p.x / lattice) * lattice, std::round(p.y / lattice) * lattice, 2};
            }
            for (int foot = 0; foot < 2; ++foot) {
                if (rng.uniform() >= spec.missing_foot_rate) continue;
                const int begin = foot == 0 ? kLeftFootBegin : kRightFootBegin;
                const int keep = 1 + (rng.uniform() < 0.5 ? 1 : 0);
                std::array<int, 3> order = {0, 1, 2};
                for (int i = 2; i > 0; --i)
                    std::swap(order[static_cast<std::size_t>(i)],
                              order[static_cast<std::size_t>(rng.uniform_int(0, i))]);
                for (int i = keep; i < 3; ++i)
                    ann.keypoints[static_cast<std::size_t>(begin + order[static_cast<std::size_t>(i)])]
                        .v = 0;
            }
            ann = derive_part_boxes(std::move(ann));

            double bminx = 1e18, bminy = 1e18, bmaxx = -1e18, bmaxy = -1e18;
            for (const Keypoint& kp : ann.keypoints) {
                if (!kp.labeled()) continue;
                bminx = std::min(bminx, kp.x);
                bminy = std::min(bminy, kp.y);
                bmaxx = std::max(bmaxx, kp.x);
                bmaxy = std::max(bmaxy, kp.y);
            }
            const double hull_w = bmaxx - bminx, hull_h = bmaxy - bminy;
            ann.person_box = Box::from_corners(bminx - hull_w * rng.uniform(0.02, 0.06),
                                               bminy - hull_h * rng.uniform(0.02, 0.06),
                                               bmaxx + hull_w * rng.uniform(0.02, 0.06),
                                               bmaxy + hull_h * rng.uniform(0.02, 0.06));

            AnchorCells anchors;
            auto cell = [&](Vec2 p) {
                return std::pair<int, int>{static_cast<int>(std::floor(p.x / lattice)),
                                           static_cast<int>(std::floor(p.y / lattice))};
            };
            anchors.cells[0] = cell(ann.person_box.center);
            for (BoxedPart part : kAllBoxedParts) {
                const PartBox& box = ann.part_box(part);
                if (box.valid)
                    anchors.cells[static_cast<std::size_t>(part) + 1] = cell(box.center);
            }
            bool collides = false;
            if (!spec.allow_anchor_collisions)
                for (const AnchorCells& other : placed)
                    if (too_close(anchors, other, spec.min_anchor_cell_separation)) {
                        collides = true;
                        break;
                    }
            if (collides) continue;
            placed.push_back(anchors);
            scene.push_back(std::move(ann));
            ok = true;
        }
        if (!ok)
            throw std::runtime_error(
                "generate_scene: could not place " + std::to_string(spec.n_persons) +
                " persons in a " + std::to_string(spec.image_size) +
                "px image without anchor-cell collisions (placed " +
                std::to_string(scene.size()) + ")");
    }
    return scene;
}

PredictionMaps perfect_maps(std::span<const WholeBodyAnnotation> scene, HierarchyScheme scheme,
                            const EncoderConfig& config) {
    return encode_targets(scene, scheme, config).to_predictions();
}

namespace {

enum class PartKind { Body, Foot, Face, Hand };

double part_multiplier(const NoiseSpec& noise, PartKind kind) {
    switch (kind) {
        case PartKind::Body: return noise.body_mult;
        case PartKind::Foot: return noise.foot_mult;
        case PartKind::Face: return noise.face_mult;
        case PartKind::Hand: return noise.hand_mult;
    }
    return 1.0;
}

PartKind body_channel_kind(HierarchyScheme scheme, int channel) {
    const int direct_limit = scheme == HierarchyScheme::Baseline ? kNumKeypoints
                             : scheme == HierarchyScheme::HM1    ? kBodyCount
                                                                 : kBodyCount + kFootCount;
    if (channel < direct_limit) {
        const auto part = part_of_keypoint(channel);
        if (!part.has_value()) return PartKind::Body;
        switch (*part) {
            case BoxedPart::Face: return PartKind::Face;
            case BoxedPart::LeftHand:
            case BoxedPart::RightHand: return PartKind::Hand;
            case BoxedPart::LeftFoot:
            case BoxedPart::RightFoot: return PartKind::Foot;
        }
    }
    // part-center pseudo channel
    for (BoxedPart part : kAllBoxedParts)
        if (part_center_channel(scheme, part) == channel) switch (part) {
                case BoxedPart::Face: return PartKind::Face;
                case BoxedPart::LeftHand:
                case BoxedPart::RightHand: return PartKind::Hand;
                case BoxedPart::LeftFoot:
                case BoxedPart::RightFoot: return PartKind::Foot;
            }
    return PartKind::Body;
}

/// Coherent shift of all pairs in [pair_begin, pair_end) at cells where the
/// group has nonzero support.
void scatter_anchor_group(Tensor& t, int pair_begin, int pair_end, double sigma, Rng& rng) {
    if (t.empty() || sigma <= 0.0) return;
    const int h = t.height(), w = t.width();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            bool active = false;
            for (int p = pair_begin; p < pair_end && !active; ++p)
                active = t.at(2 * p, y, x) != 0.0f || t.at(2 * p + 1, y, x) != 0.0f;
            if (!active) continue;
            const float dx = static_cast<float>(rng.normal(0.0, sigma));
            const float dy = static_cast<float>(rng.normal(0.0, sigma));
            for (int p = pair_begin; p < pair_end; ++p) {
                t.at(2 * p, y, x) += dx;
                t.at(2 * p + 1, y, x) += dy;
            }
        }
    }
}

template <typename MultOf>
void noisify_pairs(Tensor& t, double frac, MultOf mult_of, Rng& rng) {
    if (t.empty() || frac <= 0.0) return;
    const int pairs = t.channels() / 2;
    const int h = t.height(), w = t.width();
    for (int p = 0; p < pairs; ++p) {
        const double mult = mult_of(p);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                float& ox = t.at(2 * p, y, x);
                float& oy = t.at(2 * p + 1, y, x);
                if (ox == 0.0f && oy == 0.0f) continue;
                const double sigma = frac * std::hypot(ox, oy) * mult;
                ox += static_cast<float>(rng.normal(0.0, sigma));
                oy += static_cast<float>(rng.normal(0.0, sigma));
            }
        }
    }
}

std::vector<std::pair<int, int>> support_cells(const Tensor& t) {
    std::vector<std::pair<int, int>> cells;
    if (t.empty()) return cells;
    const int c = t.channels(), h = t.height(), w = t.width();
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < c; ++ch)
                if (t.at(ch, y, x) != 0.0f) {
                    cells.emplace_back(x, y);
                    break;
                }
    return cells;
}

/// Replicates each anchor cell's values into its neighborhood, nearest anchor
/// winning. Positional tensors get the cell-shift compensation so a gather at
/// any replicated cell reconstructs the same points.
void dilate_group(std::span<const std::pair<int, int>> anchors, int radius,
                  std::span<Tensor* const> positional, std::span<Tensor* const> plain) {
    if (anchors.empty() || radius <= 0) return;
    int h = 0, w = 0;
    std::vector<const Tensor*> sources;
    std::vector<Tensor> copies;
    for (const Tensor* t : positional) {
        if (t->empty()) continue;
        h = t->height();
        w = t->width();
    }
    for (Tensor* t : plain)
        if (!t->empty()) {
            h = t->height();
            w = t->width();
        }
    if (h == 0) return;
    std::vector<Tensor> positional_src, plain_src;
    for (Tensor* t : positional) positional_src.push_back(*t);
    for (Tensor* t : plain) plain_src.push_back(*t);
    std::vector<char> claimed(static_cast<std::size_t>(h) * w, 0);
    for (auto [x, y] : anchors) claimed[static_cast<std::size_t>(y) * w + x] = 1;
    for (int ring = 1; ring <= radius; ++ring) {
        for (auto [ax, ay] : anchors) {
            for (int dy = -ring; dy <= ring; ++dy) {
                for (int dx = -ring; dx <= ring; ++dx) {
                    if (std::max(std::abs(dx), std::abs(dy)) != ring) continue;
                    const int x = ax + dx, y = ay + dy;
                    if (x < 0 || x >= w || y < 0 || y >= h) continue;
                    char& c = claimed[static_cast<std::size_t>(y) * w + x];
                    if (c) continue;
                    c = 1;
                    for (std::size_t i = 0; i < positional_src.size(); ++i) {
                        Tensor& dst = *positional[i];
                        if (dst.empty()) continue;
                        const Tensor& src = positional_src[i];
                        const int pairs = dst.channels() / 2;
                        for (int p = 0; p < pairs; ++p) {
                            dst.at(2 * p, y, x) = src.at(2 * p, ay, ax) + static_cast<float>(ax - x);
                            dst.at(2 * p + 1, y, x) =
                                src.at(2 * p + 1, ay, ax) + static_cast<float>(ay - y);
                        }
                    }
                    for (std::size_t i = 0; i < plain_src.size(); ++i) {
                        Tensor& dst = *plain[i];
                        if (dst.empty()) continue;
                        const Tensor& src = plain_src[i];
                        for (int ch = 0; ch < dst.channels(); ++ch)
                            dst.at(ch, y, x) = src.at(ch, ay, ax);
                    }
                }
            }
        }
    }
}

void jitter_heatmap(Tensor& hm, double jitter, int max_shift, Rng& rng) {
    if (hm.empty() || jitter <= 0.0) return;
    const int h = hm.height(), w = hm.width();
    Tensor fresh("jitter", {1, static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(w)});
    for (int c = 0; c < hm.channels(); ++c) {
        std::vector<std::pair<int, int>> peaks;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (hm.at(c, y, x) == 1.0f) peaks.emplace_back(x, y);
        std::fill(fresh.data.begin(), fresh.data.end(), 0.0f);
        for (auto [x, y] : peaks) {
            const int dx = std::clamp(static_cast<int>(std::lround(rng.normal(0.0, jitter))),
                                      -max_shift, max_shift);
            const int dy = std::clamp(static_cast<int>(std::lround(rng.normal(0.0, jitter))),
                                      -max_shift, max_shift);
            const int nx = std::clamp(x + dx, 0, w - 1);
            const int ny = std::clamp(y + dy, 0, h - 1);
            render_gaussian(fresh, 0, {static_cast<double>(nx), static_cast<double>(ny)}, 2);
        }
        std::copy(fresh.data.begin(), fresh.data.end(), hm.plane(c).begin());
    }
}

}  // namespace

PredictionMaps perturb_maps(const PredictionMaps& maps, const NoiseSpec& noise,
                            std::uint64_t seed) {
    PredictionMaps out = maps;
    if (noise.is_zero()) return out;
    Rng rng(seed);
    const HierarchyScheme scheme = out.scheme;

    scatter_anchor_group(out.face_kp_offsets, 0, kFaceCount, noise.face_anchor_scatter, rng);
    scatter_anchor_group(out.hand_kp_offsets, 0, kHandCount, noise.hand_anchor_scatter, rng);
    scatter_anchor_group(out.hand_kp_offsets, kHandCount, 2 * kHandCount,
                         noise.hand_anchor_scatter, rng);
    scatter_anchor_group(out.foot_kp_offsets, 0, 3, noise.foot_anchor_scatter, rng);
    scatter_anchor_group(out.foot_kp_offsets, 3, kFootCount, noise.foot_anchor_scatter, rng);

    const double f = noise.offset_noise_frac;
    noisify_pairs(out.person_center_offset, f,
                  [&](int) { return noise.body_mult; }, rng);
    noisify_pairs(out.person_wh, f, [&](int) { return noise.body_mult; }, rng);
    noisify_pairs(out.body_kp_offsets, f,
                  [&](int p) { return part_multiplier(noise, body_channel_kind(scheme, p)); },
                  rng);
    noisify_pairs(out.hand_kp_offsets, f, [&](int) { return noise.hand_mult; }, rng);
    noisify_pairs(out.face_kp_offsets, f, [&](int) { return noise.face_mult; }, rng);
    noisify_pairs(out.foot_kp_offsets, f, [&](int) { return noise.foot_mult; }, rng);
    noisify_pairs(out.face_box_wh, f, [&](int) { return noise.face_mult; }, rng);

    const int d = noise.dilation_radius;
    {
        const auto person_anchors = support_cells(out.person_wh);
        std::array<Tensor*, 2> positional = {&out.person_center_offset, &out.body_kp_offsets};
        std::array<Tensor*, 1> plain = {&out.person_wh};
        dilate_group(person_anchors, d, positional, plain);
    }
    {
        const auto face_anchors = !out.face_kp_offsets.empty()
                                      ? support_cells(out.face_kp_offsets)
                                      : support_cells(out.face_box_wh);
        std::array<Tensor*, 1> positional = {&out.face_kp_offsets};
        std::array<Tensor*, 1> plain = {&out.face_box_wh};
        dilate_group(face_anchors, d, positional, plain);
    }
    {
        const auto hand_anchors = support_cells(out.hand_kp_offsets);
        std::array<Tensor*, 1> positional = {&out.hand_kp_offsets};
        dilate_group(hand_anchors, d, positional, {});
    }
    {
        const auto foot_anchors = support_cells(out.foot_kp_offsets);
        std::array<Tensor*, 1> positional = {&out.foot_kp_offsets};
        dilate_group(foot_anchors, d, positional, {});
    }

    jitter_heatmap(out.person_center_heatmap, noise.heatmap_jitter_cells, d, rng);
    jitter_heatmap(out.body_kp_heatmaps, noise.heatmap_jitter_cells, d, rng);
    return out;
}

}  // namespace hierpose
