#pragma once

// Run artifacts: results, metrics and fitness-trace CSVs, the config snapshot,
// gnuplot-style curve data and per-frame timings. Number formatting uses the
// shortest round-trip representation, so parsing a file restores exact values.

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "facf/metrics.hpp"
#include "facf/sequence.hpp"
#include "facf/tracker.hpp"

namespace facf {

inline constexpr std::string_view kResultsColumns = "frame,x,y,w,h,cx,cy,winner,executives";
inline constexpr std::string_view kMetricsColumns = "curve,threshold,value";
inline constexpr std::string_view kFitnessColumns =
    "frame,expert,name,cx,cy,w,h,mean_overlap,fluctuation,mean_overlap_bar,fluctuation_bar,r_pair,smoothness,"
    "r_self,r,winner";

namespace detail {

inline std::string join_masks(const std::vector<ExpertId>& ids)
{
    std::string s;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i)
            s += ';';
        s += std::to_string(ids[i].mask());
    }
    return s;
}

inline std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep))
        out.push_back(cur);
    if (!s.empty() && s.back() == sep)
        out.emplace_back();
    return out;
}

inline ExpertId parse_mask(const std::string& s)
{
    const double v = parse_double(s, "expert mask");
    if (v != std::floor(v) || v < 1 || v > kPoolSize)
        throw FormatError("invalid expert mask '" + s + "'");
    return ExpertId(static_cast<std::uint8_t>(v));
}

inline void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write " + path.string());
    out << content;
    if (!out)
        throw IoError("short write to " + path.string());
}

} // namespace detail

/// Metadata lines ("# key=value") followed by one row per frame. Boxes are
/// given both as OTB (1-indexed top-left) and center form.
inline std::string format_results(const RunRecord& rec)
{
    std::string s = "# facf results\n# sequence=" + rec.sequence + "\n# seed=" + std::to_string(rec.config.seed) + "\n";
    for (const auto& [k, v] : config_entries(rec.config))
        s += "# config." + k + "=" + v + "\n";
    s += kResultsColumns;
    s += '\n';
    for (std::size_t f = 0; f < rec.frames.size(); ++f) {
        const auto& fr = rec.frames[f];
        const auto o = to_otb(fr.box);
        s += std::to_string(f) + ',' + format_double(o.x) + ',' + format_double(o.y) + ',' + format_double(o.w) + ',' +
             format_double(o.h) + ',' + format_double(fr.box.cx) + ',' + format_double(fr.box.cy) + ',' +
             (fr.winner ? std::to_string(fr.winner->mask()) : std::string()) + ',' + detail::join_masks(fr.executives) +
             '\n';
    }
    return s;
}

struct ParsedResults {
    std::map<std::string, std::string> metadata;  // "sequence", "seed", "config.<key>"
    std::vector<FrameRecord> frames;

    RunConfig config() const
    {
        RunConfig c;
        for (const auto& [k, v] : metadata)
            if (k.starts_with("config."))
                set_config_value(c, k.substr(7), v);
        return c;
    }
};

inline ParsedResults parse_results(std::istream& in)
{
    ParsedResults r;
    std::string line;
    bool header = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.starts_with("#")) {
            const auto eq = line.find('=');
            if (eq != std::string::npos)
                r.metadata[detail::trim(line.substr(1, eq - 1))] = line.substr(eq + 1);
            continue;
        }
        if (!header) {
            if (line != kResultsColumns)
                throw FormatError("results header does not match the expected columns");
            header = true;
            continue;
        }
        if (line.empty())
            continue;
        const auto cols = detail::split(line, ',');
        if (cols.size() != 9)
            throw FormatError("results line " + std::to_string(lineno) + " does not have 9 columns");
        if (detail::parse_double(cols[0], "frame") != static_cast<double>(r.frames.size()))
            throw FormatError("results line " + std::to_string(lineno) + " is out of order");
        FrameRecord fr;
        const double w = detail::parse_double(cols[3], "w"), h = detail::parse_double(cols[4], "h");
        fr.box = BoundingBox{detail::parse_double(cols[5], "cx"), detail::parse_double(cols[6], "cy"), w, h};
        if (!cols[7].empty())
            fr.winner = detail::parse_mask(cols[7]);
        if (!cols[8].empty())
            for (const auto& m : detail::split(cols[8], ';'))
                fr.executives.push_back(detail::parse_mask(m));
        r.frames.push_back(std::move(fr));
    }
    if (!header)
        throw FormatError("results file has no column header");
    return r;
}

inline ParsedResults read_results(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read " + path.string());
    return parse_results(in);
}

/// Rows per precision threshold (px) and success threshold (IoU), then the two summary rows.
inline std::string format_metrics(const EvalCurves& c, const std::string& sequence)
{
    std::string s = "# facf metrics\n# sequence=" + sequence + "\n";
    s += kMetricsColumns;
    s += '\n';
    for (int t = 0; t <= kPrecisionMaxThreshold; ++t)
        s += "precision," + std::to_string(t) + ',' + format_double(c.precision.values[static_cast<std::size_t>(t)]) +
             '\n';
    for (int i = 0; i < kSuccessPoints; ++i)
        s += "success," + format_double(success_threshold(i)) + ',' +
             format_double(c.success.values[static_cast<std::size_t>(i)]) + '\n';
    s += "summary,p20," + format_double(c.precision.p20) + '\n';
    s += "summary,auc," + format_double(c.success.auc) + '\n';
    return s;
}

/// Reads back (p20, auc) from a metrics CSV.
inline std::pair<double, double> parse_metrics_summary(std::istream& in)
{
    std::optional<double> p20, auc;
    std::string line;
    while (std::getline(in, line)) {
        if (line.starts_with("summary,p20,"))
            p20 = detail::parse_double(line.substr(12), "p20");
        else if (line.starts_with("summary,auc,"))
            auc = detail::parse_double(line.substr(12), "auc");
    }
    if (!p20 || !auc)
        throw FormatError("metrics file lacks summary rows");
    return {*p20, *auc};
}

/// One row per executive per frame with its fitness breakdown.
inline std::string format_fitness_trace(const RunRecord& rec)
{
    std::string s(kFitnessColumns);
    s += '\n';
    for (std::size_t f = 0; f < rec.frames.size(); ++f) {
        const auto& fr = rec.frames[f];
        for (const auto& [id, b] : fr.fitness) {
            const auto& box = fr.expert_boxes.at(id);
            s += std::to_string(f) + ',' + std::to_string(id.mask()) + ',' + id.name() + ',' + format_double(box.cx) +
                 ',' + format_double(box.cy) + ',' + format_double(box.w) + ',' + format_double(box.h) + ',' +
                 format_double(b.mean_overlap) + ',' + format_double(b.fluctuation) + ',' +
                 format_double(b.mean_overlap_bar) + ',' + format_double(b.fluctuation_bar) + ',' +
                 format_double(b.r_pair) + ',' + format_double(b.smoothness) + ',' + format_double(b.r_self) + ',' +
                 format_double(b.r) + ',' + (fr.winner == id ? "1" : "0") + '\n';
        }
    }
    return s;
}

/// "threshold value" pairs, one per line, matching the precision and success plot axes.
inline std::string format_plot_data(const EvalCurves& c, bool success)
{
    std::string s = success ? "# overlap_threshold success_rate\n" : "# location_error_threshold precision\n";
    if (success)
        for (int i = 0; i < kSuccessPoints; ++i)
            s += format_double(success_threshold(i)) + ' ' + format_double(c.success.values[static_cast<std::size_t>(i)]) +
                 '\n';
    else
        for (int t = 0; t <= kPrecisionMaxThreshold; ++t)
            s += std::to_string(t) + ' ' + format_double(c.precision.values[static_cast<std::size_t>(t)]) + '\n';
    return s;
}

inline std::string format_timing(const RunRecord& rec)
{
    std::string s = "frame,seconds\n";
    for (std::size_t f = 0; f < rec.frame_seconds.size(); ++f)
        s += std::to_string(f) + ',' + format_double(rec.frame_seconds[f]) + '\n';
    return s;
}

struct ReportPaths {
    std::filesystem::path results, metrics, fitness, config, precision_plot, success_plot, timing;
};

inline ReportPaths report_paths(const std::filesystem::path& dir)
{
    return {dir / "results.csv",   dir / "metrics.csv",  dir / "fitness.csv", dir / "config.txt",
            dir / "precision.dat", dir / "success.dat", dir / "timing.csv"};
}

/// Writes every artifact into `dir` and returns the metrics that went into metrics.csv.
inline EvalCurves emit_reports(const RunRecord& rec, std::span<const BoundingBox> gt, const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    const auto boxes = rec.boxes();
    const auto curves = evaluate(boxes, gt);
    const auto p = report_paths(dir);
    detail::write_file(p.results, format_results(rec));
    detail::write_file(p.metrics, format_metrics(curves, rec.sequence));
    detail::write_file(p.fitness, format_fitness_trace(rec));
    detail::write_file(p.config, format_config(rec.config));
    detail::write_file(p.precision_plot, format_plot_data(curves, false));
    detail::write_file(p.success_plot, format_plot_data(curves, true));
    detail::write_file(p.timing, format_timing(rec));
    return curves;
}

} // namespace facf
