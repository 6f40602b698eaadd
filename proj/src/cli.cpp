#include "hierpose/cli.hpp"

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>

#include "hierpose/annotations.hpp"
#include "hierpose/bench.hpp"
#include "hierpose/decoder.hpp"
#include "hierpose/encoder.hpp"
#include "hierpose/errors.hpp"
#include "hierpose/evaluator.hpp"
#include "hierpose/losses.hpp"
#include "hierpose/svg.hpp"
#include "hierpose/synth.hpp"

namespace hierpose::cli {

using nlohmann::json;

namespace {

std::string fnv1a64_hex(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open input for digest: " + path.string());
    std::uint64_t hash = 14695981039346656037ull;
    char buf[1 << 14];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 1099511628211ull;
        }
        if (!in) break;
    }
    char out[32];
    std::snprintf(out, sizeof(out), "fnv1a64:%016llx", static_cast<unsigned long long>(hash));
    return out;
}

/// Named references into a command's option variables, used both to apply
/// --config overrides and to emit the manifest's config block.
class Bindings {
public:
    template <typename T>
    void bind(const std::string& name, T* value) {
        getters_.emplace_back(name, [value]() { return json(*value); });
        setters_[name] = [value](const json& v) { *value = v.get<T>(); };
    }

    json to_json() const {
        json out = json::object();
        for (const auto& [name, get] : getters_) out[name] = get();
        return out;
    }

    void apply(const json& overrides) const {
        for (const auto& [key, value] : overrides.items()) {
            const auto it = setters_.find(key);
            if (it == setters_.end())
                throw ValidationError("config override names unknown option '" + key + "'");
            it->second(value);
        }
    }

private:
    std::vector<std::pair<std::string, std::function<json()>>> getters_;
    std::map<std::string, std::function<void(const json&)>> setters_;
};

/// --config accepts either a bare config object or a manifest file (its
/// "config" block is used), and overrides any flag.
void apply_config_file(const Bindings& bindings, const std::string& config_path) {
    if (config_path.empty()) return;
    std::ifstream in(config_path);
    if (!in) throw IoError("cannot open config file: " + config_path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("malformed config JSON " + config_path + ": " + e.what());
    }
    if (doc.is_object() && doc.contains("config")) doc = doc["config"];
    if (!doc.is_object()) throw ValidationError("config must be a JSON object: " + config_path);
    bindings.apply(doc);
}

void write_manifest(const std::filesystem::path& artifact, const std::string& command,
                    const json& config,
                    const std::vector<std::filesystem::path>& inputs) {
    json manifest;
    manifest["artifact_version"] = kArtifactVersion;
    manifest["command"] = command;
    manifest["config"] = config;
    manifest["inputs"] = json::object();
    for (const auto& input : inputs)
        manifest["inputs"][input.string()] = fnv1a64_hex(input);
    manifest["output"] = artifact.string();
    const std::filesystem::path path = artifact.string() + ".manifest.json";
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << manifest.dump(2) << "\n";
}

HierarchyScheme scheme_or_throw(const std::string& name) {
    const auto scheme = parse_scheme(name);
    if (!scheme.has_value())
        throw ValidationError("unknown scheme '" + name + "' (expected baseline|hm1|hm2)");
    return *scheme;
}

json metrics_json(const PartMetrics& m) {
    return {{"ap", m.ap}, {"ar", m.ar}, {"defined", m.defined}};
}

// ---------------------------------------------------------------------------
// synth

struct SynthOptions {
    std::uint64_t seed = 0;
    int persons = 1;
    int image_size = 512;
    std::int64_t image_id = 1;
    double min_height = 120.0;
    double max_height = 280.0;
    double missing_foot_rate = 0.0;
    int lattice = 4;
    std::string out = "scene.json";
    std::string dump_targets;
    std::string dump_pred;
    std::string scheme = "hm2";
    int stride = 4;
    double noise_offset_frac = 0.0;
    double noise_peak_jitter = 0.0;
    double noise_face_scatter = 0.0;
    double noise_hand_scatter = 0.0;
    double noise_foot_scatter = 0.0;
    double noise_foot_mult = 1.0;
    int noise_dilation = 2;
    std::uint64_t noise_seed = 1;

    void bind(Bindings& b) {
        b.bind("seed", &seed);
        b.bind("persons", &persons);
        b.bind("image_size", &image_size);
        b.bind("image_id", &image_id);
        b.bind("min_height", &min_height);
        b.bind("max_height", &max_height);
        b.bind("missing_foot_rate", &missing_foot_rate);
        b.bind("lattice", &lattice);
        b.bind("out", &out);
        b.bind("dump_targets", &dump_targets);
        b.bind("dump_pred", &dump_pred);
        b.bind("scheme", &scheme);
        b.bind("stride", &stride);
        b.bind("noise_offset_frac", &noise_offset_frac);
        b.bind("noise_peak_jitter", &noise_peak_jitter);
        b.bind("noise_face_scatter", &noise_face_scatter);
        b.bind("noise_hand_scatter", &noise_hand_scatter);
        b.bind("noise_foot_scatter", &noise_foot_scatter);
        b.bind("noise_foot_mult", &noise_foot_mult);
        b.bind("noise_dilation", &noise_dilation);
        b.bind("noise_seed", &noise_seed);
    }
};

int cmd_synth(const SynthOptions& opt, const json& config) {
    SceneSpec spec;
    spec.seed = opt.seed;
    spec.n_persons = opt.persons;
    spec.image_size = opt.image_size;
    spec.min_person_height = opt.min_height;
    spec.max_person_height = opt.max_height;
    spec.missing_foot_rate = opt.missing_foot_rate;
    spec.coord_lattice = opt.lattice;
    auto scene = generate_scene(spec);
    for (WholeBodyAnnotation& ann : scene) ann.image_id = opt.image_id;

    ImageAnnotations image;
    image.image_id = opt.image_id;
    image.width = opt.image_size;
    image.height = opt.image_size;
    image.persons = scene;
    save_dataset(opt.out, {image});
    write_manifest(opt.out, "synth", config, {});
    std::cout << "synth: " << scene.size() << " persons -> " << opt.out << "\n";

    if (!opt.dump_targets.empty() || !opt.dump_pred.empty()) {
        EncoderConfig enc;
        enc.input_size = opt.image_size;
        enc.stride = opt.stride;
        const HierarchyScheme scheme = scheme_or_throw(opt.scheme);
        const TargetMaps targets = encode_targets(scene, scheme, enc);
        if (!opt.dump_targets.empty()) {
            write_maps(opt.dump_targets, targets.maps, &targets.masks);
            write_manifest(opt.dump_targets, "synth", config, {opt.out});
        }
        if (!opt.dump_pred.empty()) {
            NoiseSpec noise;
            noise.offset_noise_frac = opt.noise_offset_frac;
            noise.heatmap_jitter_cells = opt.noise_peak_jitter;
            noise.face_anchor_scatter = opt.noise_face_scatter;
            noise.hand_anchor_scatter = opt.noise_hand_scatter;
            noise.foot_anchor_scatter = opt.noise_foot_scatter;
            noise.foot_mult = opt.noise_foot_mult;
            noise.dilation_radius = opt.noise_dilation;
            const PredictionMaps pred =
                perturb_maps(targets.to_predictions(), noise, opt.noise_seed);
            write_maps(opt.dump_pred, pred, nullptr);
            write_manifest(opt.dump_pred, "synth", config, {opt.out});
        }
    }
    return 0;
}

// ---------------------------------------------------------------------------
// encode

struct EncodeOptions {
    std::string in = "scene.json";
    std::string out = "targets.hprt";
    std::string scheme = "hm2";
    int stride = 4;
    int input_size = 512;
    int image_index = 0;
    int min_visibility = 1;

    void bind(Bindings& b) {
        b.bind("in", &in);
        b.bind("out", &out);
        b.bind("scheme", &scheme);
        b.bind("stride", &stride);
        b.bind("input_size", &input_size);
        b.bind("image_index", &image_index);
        b.bind("min_visibility", &min_visibility);
    }
};

int cmd_encode(const EncodeOptions& opt, const json& config) {
    const auto images = load_dataset(opt.in);
    if (opt.image_index < 0 || opt.image_index >= static_cast<int>(images.size()))
        throw ValidationError("image index " + std::to_string(opt.image_index) +
                              " outside dataset of " + std::to_string(images.size()) +
                              " images");
    const ImageAnnotations& image = images[static_cast<std::size_t>(opt.image_index)];
    EncoderConfig enc;
    enc.input_size = opt.input_size;
    enc.stride = opt.stride;
    enc.min_visibility = opt.min_visibility;
    const TargetMaps targets =
        encode_targets(image.persons, scheme_or_throw(opt.scheme), enc);
    write_maps(opt.out, targets.maps, &targets.masks);
    write_manifest(opt.out, "encode", config, {opt.in});
    std::cout << "encode: image " << image.image_id << " (" << image.persons.size()
              << " persons) -> " << opt.out;
    if (targets.diagnostics.anchor_collisions > 0)
        std::cout << " [" << targets.diagnostics.anchor_collisions << " anchor collisions]";
    std::cout << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// decode

struct DecodeOptions {
    std::string in = "targets.hprt";
    std::string out = "results.json";
    std::string scheme;  // default: the dump's meta
    int stride = 0;      // 0: the dump's meta
    std::int64_t image_id = 1;
    int topk = 100;
    double center_thresh = 0.1;
    double kp_thresh = 0.1;
    double box_margin = 0.0;
    double fallback_score = 0.5;

    void bind(Bindings& b) {
        b.bind("in", &in);
        b.bind("out", &out);
        b.bind("scheme", &scheme);
        b.bind("stride", &stride);
        b.bind("image_id", &image_id);
        b.bind("topk", &topk);
        b.bind("center_thresh", &center_thresh);
        b.bind("kp_thresh", &kp_thresh);
        b.bind("box_margin", &box_margin);
        b.bind("fallback_score", &fallback_score);
    }
};

int cmd_decode(const DecodeOptions& opt, const json& config) {
    PredictionMaps maps = read_maps(opt.in);
    if (!opt.scheme.empty() && scheme_or_throw(opt.scheme) != maps.scheme)
        throw ValidationError("dump was encoded with scheme " +
                              std::string(to_string(maps.scheme)) + ", not " + opt.scheme);
    if (opt.stride > 0 && opt.stride != maps.stride)
        throw ValidationError("dump was encoded with stride " + std::to_string(maps.stride));
    DecodeConfig dec;
    dec.max_people = opt.topk;
    dec.center_threshold = opt.center_thresh;
    dec.keypoint_threshold = opt.kp_thresh;
    dec.box_margin = opt.box_margin;
    dec.fallback_score_factor = opt.fallback_score;
    const auto people = decode_people(maps, dec);
    std::vector<PoseResult> results;
    results.reserve(people.size());
    for (const DecodedPerson& person : people) {
        PoseResult r;
        r.image_id = opt.image_id;
        r.score = person.score;
        r.box = person.box;
        r.keypoints = person.keypoints;
        results.push_back(std::move(r));
    }
    write_results_json(opt.out, results);
    write_manifest(opt.out, "decode", config, {opt.in});
    std::cout << "decode: " << results.size() << " persons -> " << opt.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
    std::string results = "results.json";
    std::string gt = "scene.json";
    std::string sigmas;  // empty: built-in table
    std::string out = "report.json";
    std::string table;  // optional text-table artifact
    int max_dets = 20;
    bool face_box_ap = true;
    double face_kp_score_thresh = 0.2;

    void bind(Bindings& b) {
        b.bind("results", &results);
        b.bind("gt", &gt);
        b.bind("sigmas", &sigmas);
        b.bind("out", &out);
        b.bind("table", &table);
        b.bind("max_dets", &max_dets);
        b.bind("face_box_ap", &face_box_ap);
        b.bind("face_kp_score_thresh", &face_kp_score_thresh);
    }
};

int cmd_eval(const EvalOptions& opt, const json& config) {
    const auto results = read_results_json(opt.results);
    const auto gts = load_dataset(opt.gt);
    const SigmaTable sigmas =
        opt.sigmas.empty() ? SigmaTable::coco_wholebody() : SigmaTable::from_json(opt.sigmas);
    EvalConfig eval_config;
    eval_config.max_dets = opt.max_dets;
    const EvalReport report = evaluate_keypoints(results, gts, sigmas, eval_config);

    json doc;
    doc["parts"] = json::object();
    for (EvalPart part : kAllEvalParts)
        doc["parts"][to_string(part)] = metrics_json(report.part(part));
    doc["parts"]["wholebody-mean"] = metrics_json(report.wholebody_mean);
    if (opt.face_box_ap) {
        std::vector<ScoredBox> det_boxes, gt_boxes;
        for (const PoseResult& r : results) {
            const auto box = face_box_from_keypoints(r, opt.face_kp_score_thresh);
            if (box.has_value()) det_boxes.push_back(*box);
        }
        for (const ImageAnnotations& image : gts)
            for (const WholeBodyAnnotation& ann : image.persons) {
                const PartBox& face = ann.part_box(BoxedPart::Face);
                if (face.valid)
                    gt_boxes.push_back({image.image_id, {face.center, face.w, face.h}, 1.0});
            }
        const BoxApResult box_ap = evaluate_box_ap(det_boxes, gt_boxes);
        doc["face_box"] = {{"ap", box_ap.ap},
                           {"ap50", box_ap.ap50},
                           {"ap75", box_ap.ap75},
                           {"ap_m", box_ap.m_defined ? json(box_ap.ap_m) : json()},
                           {"ap_l", box_ap.l_defined ? json(box_ap.ap_l) : json()},
                           {"defined", box_ap.defined}};
    }
    std::ofstream out(opt.out);
    if (!out) throw IoError("cannot open for writing: " + opt.out);
    out << doc.dump(2) << "\n";
    out.close();
    write_manifest(opt.out, "eval", config, {opt.results, opt.gt});
    const std::string table = format_report_table(report);
    if (!opt.table.empty()) {
        std::ofstream table_out(opt.table);
        if (!table_out) throw IoError("cannot open for writing: " + opt.table);
        table_out << table;
    }
    std::cout << table;
    return 0;
}

// ---------------------------------------------------------------------------
// bench

struct BenchOptions {
    std::vector<int> persons = {1, 5, 10, 30};
    int reps = 30;
    std::uint64_t seed = 0;
    int image_size = 512;
    int stride = 4;
    std::string out = "bench.csv";
    std::string chart = "bench.svg";

    void bind(Bindings& b) {
        b.bind("persons", &persons);
        b.bind("reps", &reps);
        b.bind("seed", &seed);
        b.bind("image_size", &image_size);
        b.bind("stride", &stride);
        b.bind("out", &out);
        b.bind("chart", &chart);
    }
};

int cmd_bench(const BenchOptions& opt, const json& config) {
    SceneSpec spec;
    spec.seed = opt.seed;
    spec.image_size = opt.image_size;
    EncoderConfig enc;
    enc.input_size = opt.image_size;
    enc.stride = opt.stride;
    const BenchResult result = bench_decode(opt.persons, spec, opt.reps, enc);
    std::ofstream out(opt.out);
    if (!out) throw IoError("cannot open for writing: " + opt.out);
    out << bench_to_csv(result);
    out.close();
    write_manifest(opt.out, "bench", config, {});
    if (!opt.chart.empty()) {
        write_bench_chart_svg(opt.chart, result);
        write_manifest(opt.chart, "bench", config, {});
    }
    std::cout << bench_to_csv(result);
    if (result.timer_flagged)
        std::cout << "warning: timer resolution " << result.timer_resolution_ms
                  << " ms is coarser than 1% of a median\n";
    return 0;
}

// ---------------------------------------------------------------------------
// gradcheck

struct GradCheckOptions {
    std::string target = "targets.hprt";
    std::string pred;  // empty: seeded random predictions
    std::uint64_t seed = 0;
    int points = 100;
    double tolerance = 1e-4;
    std::string out = "gradcheck.json";

    void bind(Bindings& b) {
        b.bind("target", &target);
        b.bind("pred", &pred);
        b.bind("seed", &seed);
        b.bind("points", &points);
        b.bind("tolerance", &tolerance);
        b.bind("out", &out);
    }
};

int cmd_gradcheck(const GradCheckOptions& opt, const json& config) {
    TargetMaps target;
    target.maps = read_maps(opt.target, &target.masks);
    const PredictionMaps pred = opt.pred.empty()
                                    ? random_gradcheck_predictions(target, opt.seed)
                                    : read_maps(opt.pred);
    const auto results =
        gradcheck_losses(pred, target, opt.points, opt.seed, 1e-5, opt.tolerance);
    bool all_pass = true;
    json doc;
    doc["tolerance"] = opt.tolerance;
    doc["branches"] = json::array();
    for (const GradCheckResult& r : results) {
        doc["branches"].push_back({{"branch", r.branch},
                                   {"analytic_vs_fd_max_rel_err", r.max_rel_err},
                                   {"points", r.points_checked},
                                   {"pass", r.pass}});
        all_pass = all_pass && r.pass;
    }
    doc["pass"] = all_pass;
    std::ofstream out(opt.out);
    if (!out) throw IoError("cannot open for writing: " + opt.out);
    out << doc.dump(2) << "\n";
    out.close();
    std::vector<std::filesystem::path> inputs = {opt.target};
    if (!opt.pred.empty()) inputs.push_back(opt.pred);
    write_manifest(opt.out, "gradcheck", config, inputs);
    for (const GradCheckResult& r : results)
        std::cout << "gradcheck " << r.branch << ": max_rel_err=" << r.max_rel_err << " ("
                  << r.points_checked << " points) " << (r.pass ? "pass" : "FAIL") << "\n";
    return all_pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// overlay

struct OverlayOptions {
    std::string results = "results.json";
    std::string out = "overlay.svg";
    int image_size = 512;
    double min_score = 0.0;

    void bind(Bindings& b) {
        b.bind("results", &results);
        b.bind("out", &out);
        b.bind("image_size", &image_size);
        b.bind("min_score", &min_score);
    }
};

int cmd_overlay(const OverlayOptions& opt, const json& config) {
    const auto results = read_results_json(opt.results);
    write_pose_overlay_svg(opt.out, results, opt.image_size, opt.min_score);
    write_manifest(opt.out, "overlay", config, {opt.results});
    std::cout << "overlay: " << results.size() << " persons -> " << opt.out << "\n";
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"whole-body pose codec: hierarchical center-offset encoding, decoding,"
                 " losses, evaluation and benchmarks"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path,
                   "JSON file (or manifest) whose values override any flag")
        ->configurable(false);

    SynthOptions synth_opt;
    EncodeOptions encode_opt;
    DecodeOptions decode_opt;
    EvalOptions eval_opt;
    BenchOptions bench_opt;
    GradCheckOptions gradcheck_opt;
    OverlayOptions overlay_opt;

    auto* synth = app.add_subcommand("synth", "generate a synthetic scene");
    synth->add_option("--seed", synth_opt.seed);
    synth->add_option("--persons", synth_opt.persons);
    synth->add_option("--image-size", synth_opt.image_size);
    synth->add_option("--image-id", synth_opt.image_id);
    synth->add_option("--min-height", synth_opt.min_height);
    synth->add_option("--max-height", synth_opt.max_height);
    synth->add_option("--missing-foot-rate", synth_opt.missing_foot_rate);
    synth->add_option("--lattice", synth_opt.lattice);
    synth->add_option("--out", synth_opt.out);
    synth->add_option("--dump-targets", synth_opt.dump_targets);
    synth->add_option("--dump-pred", synth_opt.dump_pred);
    synth->add_option("--scheme", synth_opt.scheme);
    synth->add_option("--stride", synth_opt.stride);
    synth->add_option("--noise-offset-frac", synth_opt.noise_offset_frac);
    synth->add_option("--noise-peak-jitter", synth_opt.noise_peak_jitter);
    synth->add_option("--noise-face-scatter", synth_opt.noise_face_scatter);
    synth->add_option("--noise-hand-scatter", synth_opt.noise_hand_scatter);
    synth->add_option("--noise-foot-scatter", synth_opt.noise_foot_scatter);
    synth->add_option("--noise-foot-mult", synth_opt.noise_foot_mult);
    synth->add_option("--noise-dilation", synth_opt.noise_dilation);
    synth->add_option("--noise-seed", synth_opt.noise_seed);

    auto* encode = app.add_subcommand("encode", "encode annotations into branch targets");
    encode->add_option("--in", encode_opt.in);
    encode->add_option("--out", encode_opt.out);
    encode->add_option("--scheme", encode_opt.scheme);
    encode->add_option("--stride", encode_opt.stride);
    encode->add_option("--input-size", encode_opt.input_size);
    encode->add_option("--image-index", encode_opt.image_index);
    encode->add_option("--min-visibility", encode_opt.min_visibility);

    auto* decode = app.add_subcommand("decode", "decode prediction maps into poses");
    decode->add_option("--in", decode_opt.in);
    decode->add_option("--out", decode_opt.out);
    decode->add_option("--scheme", decode_opt.scheme);
    decode->add_option("--stride", decode_opt.stride);
    decode->add_option("--image-id", decode_opt.image_id);
    decode->add_option("--topk", decode_opt.topk);
    decode->add_option("--center-thresh", decode_opt.center_thresh);
    decode->add_option("--kp-thresh", decode_opt.kp_thresh);
    decode->add_option("--box-margin", decode_opt.box_margin);
    decode->add_option("--fallback-score", decode_opt.fallback_score);

    auto* eval = app.add_subcommand("eval", "per-part keypoint AP/AR against ground truth");
    eval->add_option("--results", eval_opt.results);
    eval->add_option("--gt", eval_opt.gt);
    eval->add_option("--sigmas", eval_opt.sigmas);
    eval->add_option("--out", eval_opt.out);
    eval->add_option("--table", eval_opt.table);
    eval->add_option("--max-dets", eval_opt.max_dets);
    eval->add_flag("--face-box-ap,!--no-face-box-ap", eval_opt.face_box_ap);
    eval->add_option("--face-kp-score-thresh", eval_opt.face_kp_score_thresh);

    auto* bench = app.add_subcommand("bench", "decode wall time vs person count");
    bench->add_option("--persons", bench_opt.persons)->delimiter(',');
    bench->add_option("--reps", bench_opt.reps);
    bench->add_option("--seed", bench_opt.seed);
    bench->add_option("--image-size", bench_opt.image_size);
    bench->add_option("--stride", bench_opt.stride);
    bench->add_option("--out", bench_opt.out);
    bench->add_option("--chart", bench_opt.chart);

    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference loss gradient check");
    gradcheck->add_option("--target", gradcheck_opt.target);
    gradcheck->add_option("--pred", gradcheck_opt.pred);
    gradcheck->add_option("--seed", gradcheck_opt.seed);
    gradcheck->add_option("--points", gradcheck_opt.points);
    gradcheck->add_option("--tolerance", gradcheck_opt.tolerance);
    gradcheck->add_option("--out", gradcheck_opt.out);

    auto* overlay = app.add_subcommand("overlay", "SVG pose overlay from results JSON");
    overlay->add_option("--results", overlay_opt.results);
    overlay->add_option("--out", overlay_opt.out);
    overlay->add_option("--image-size", overlay_opt.image_size);
    overlay->add_option("--min-score", overlay_opt.min_score);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        Bindings bindings;
        if (synth->parsed()) {
            synth_opt.bind(bindings);
            apply_config_file(bindings, config_path);
            return cmd_synth(synth_opt, bindings.to_json());
        }
        if (encode->parsed()) {
            encode_opt.bind(bindings);
            apply_config_file(bindings, config_path);
            return cmd_encode(encode_opt, bindings.to_json());
        }
        if (decode->parsed()) {
            decode_opt.bind(bindings);
            apply_config_file(bindings, config_path);
            return cmd_decode(decode_opt, bindings.to_json());
        }
        if (eval->parsed()) {
            eval_opt.bind(bindings);
            apply_config_file(bindings, config_path);
            return cmd_eval(eval_opt, bindings.to_json());
        }
        if (bench->parsed()) {
            bench_opt.bind(bindings);
            apply_config_file(bindings, config_path);
            return cmd_bench(bench_opt, bindings.to_json());
        }
        if (gradcheck->parsed()) {
            gradcheck_opt.bind(bindings);
            apply_config_file(bindings, config_path);
            return cmd_gradcheck(gradcheck_opt, bindings.to_json());
        }
        if (overlay->parsed()) {
            overlay_opt.bind(bindings);
            apply_config_file(bindings, config_path);
            return cmd_overlay(overlay_opt, bindings.to_json());
        }
        std::cerr << app.help();
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace hierpose::cli
