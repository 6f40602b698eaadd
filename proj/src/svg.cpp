#include "hierpose/svg.hpp"

#include <fstream>

#include "hierpose/errors.hpp"
#include <sstream>

namespace hierpose {

namespace {

const char* part_color(int k) {
    if (k < kFootBegin) return "#1f77b4";       // body
    if (k < kFaceBegin) return "#2ca02c";       // foot
    if (k < kLeftHandBegin) return "#d62728";   // face
    if (k < kRightHandBegin) return "#9467bd";  // left hand
    return "#ff7f0e";                           // right hand
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

void write_pose_overlay_svg(const std::filesystem::path& path,
                            const std::vector<PoseResult>& results, int image_size,
                            double min_score) {
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << image_size << "\" height=\""
        << image_size << "\" viewBox=\"0 0 " << image_size << " " << image_size << "\">\n";
    svg << "  <rect width=\"" << image_size << "\" height=\"" << image_size
        << "\" fill=\"#ffffff\"/>\n";
    for (const PoseResult& person : results) {
        svg << "  <g data-image-id=\"" << person.image_id << "\" data-score=\""
            << num(person.score) << "\">\n";
        svg << "    <rect x=\"" << num(person.box.x0()) << "\" y=\"" << num(person.box.y0())
            << "\" width=\"" << num(person.box.w) << "\" height=\"" << num(person.box.h)
            << "\" fill=\"none\" stroke=\"#888888\" stroke-width=\"1\"/>\n";
        for (int k = 0; k < kNumKeypoints; ++k) {
            const DecodedKeypoint& kp = person.keypoints[static_cast<std::size_t>(k)];
            if (kp.score < min_score) continue;
            svg << "    <circle cx=\"" << num(kp.x) << "\" cy=\"" << num(kp.y)
                << "\" r=\"1.6\" fill=\"" << part_color(k) << "\"/>\n";
        }
        svg << "  </g>\n";
    }
    svg << "</svg>\n";
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << svg.str();
}

void write_bench_chart_svg(const std::filesystem::path& path, const BenchResult& result) {
    const int width = 480, height = 320, margin = 48;
    double max_n = 1.0, max_ms = 1e-6;
    for (const BenchRow& row : result.rows) {
        max_n = std::max(max_n, static_cast<double>(row.n_persons));
        max_ms = std::max(max_ms, row.p95_ms);
    }
    auto px = [&](double n) { return margin + (width - 2 * margin) * n / max_n; };
    auto py = [&](double ms) { return height - margin - (height - 2 * margin) * ms / max_ms; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\">\n";
    svg << "  <rect width=\"" << width << "\" height=\"" << height << "\" fill=\"#ffffff\"/>\n";
    svg << "  <line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\""
        << width - margin << "\" y2=\"" << height - margin
        << "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
    svg << "  <line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin
        << "\" y2=\"" << height - margin << "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
    svg << "  <text x=\"" << width / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-size=\"12\">persons</text>\n";
    svg << "  <text x=\"14\" y=\"" << height / 2 << "\" text-anchor=\"middle\" font-size=\"12\""
        << " transform=\"rotate(-90 14 " << height / 2 << ")\">decode ms</text>\n";
    for (const char* series : {"median", "p95"}) {
        const bool is_median = std::string(series) == "median";
        svg << "  <polyline fill=\"none\" stroke=\"" << (is_median ? "#1f77b4" : "#ff7f0e")
            << "\" stroke-width=\"1.5\" points=\"";
        for (const BenchRow& row : result.rows)
            svg << num(px(row.n_persons)) << ","
                << num(py(is_median ? row.median_ms : row.p95_ms)) << " ";
        svg << "\"/>\n";
        for (const BenchRow& row : result.rows)
            svg << "  <circle cx=\"" << num(px(row.n_persons)) << "\" cy=\""
                << num(py(is_median ? row.median_ms : row.p95_ms)) << "\" r=\"2.5\" fill=\""
                << (is_median ? "#1f77b4" : "#ff7f0e") << "\"/>\n";
    }
    svg << "  <text x=\"" << width - margin << "\" y=\"" << margin
        << "\" text-anchor=\"end\" font-size=\"11\">median (blue), p95 (orange), "
        << result.repetitions << " reps</text>\n";
    svg << "</svg>\n";
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << svg.str();
}

}  // namespace hierpose
