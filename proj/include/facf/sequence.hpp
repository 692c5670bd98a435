#pragma once

// Image sequences: OTB-style directories on disk and scripted synthetic scenes.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "facf/bbox.hpp"
#include "facf/error.hpp"
#include "facf/rng.hpp"

namespace facf {

inline const std::set<std::string>& sequence_attribute_tags()
{
    static const std::set<std::string> tags{"IV", "SV", "OCC", "DEF", "MB", "FM", "IPR", "OPR", "OV", "BC", "LR"};
    return tags;
}

/// Frames are either held in memory (synthetic) or decoded from image_files on demand.
struct Sequence {
    std::string name;
    std::vector<std::filesystem::path> image_files;
    std::vector<cv::Mat> frames;
    std::vector<OtbRect> ground_truth_rects;
    std::vector<BoundingBox> ground_truth;
    std::vector<std::string> attributes;

    int frame_count() const noexcept { return static_cast<int>(ground_truth.size()); }

    /// 8-bit BGR frame; grayscale sources are expanded to three channels.
    cv::Mat frame(int index) const
    {
        if (index < 0 || index >= frame_count())
            throw NotFound("frame " + std::to_string(index) + " out of range");
        const auto i = static_cast<std::size_t>(index);
        if (i < frames.size())
            return frames[i];
        cv::Mat img = cv::imread(image_files.at(i).string(), cv::IMREAD_COLOR);
        if (img.empty())
            throw IoError("frame " + std::to_string(index) + ": cannot decode " + image_files[i].string());
        return img;
    }
};

namespace detail {

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(std::string_view s, std::string_view what)
{
    const std::string t = trim(s);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty() || !std::isfinite(v))
        throw FormatError("cannot parse " + std::string(what) + " value '" + t + "'");
    return v;
}

inline bool is_image_file(const std::filesystem::path& p)
{
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".jpg" || ext == ".jpeg" || ext == ".png" || ext == ".bmp" || ext == ".tif" || ext == ".tiff" ||
           ext == ".pgm" || ext == ".ppm";
}

} // namespace detail

/// One x,y,w,h row per line; fields separated by commas, tabs or spaces. Blank lines are skipped.
inline std::vector<OtbRect> parse_ground_truth(std::istream& in)
{
    std::vector<OtbRect> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty())
            continue;
        std::vector<double> v;
        std::size_t pos = 0;
        while (pos < line.size()) {
            const auto next = line.find_first_of(",\t ", pos);
            const auto field = line.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
            if (!detail::trim(field).empty())
                v.push_back(detail::parse_double(field, "ground-truth line " + std::to_string(lineno)));
            if (next == std::string::npos)
                break;
            pos = next + 1;
        }
        if (v.size() != 4)
            throw FormatError("ground-truth line " + std::to_string(lineno) + " does not have 4 fields");
        if (!(v[2] > 0.0 && v[3] > 0.0))
            throw FormatError("ground-truth line " + std::to_string(lineno) + " has a non-positive size");
        rows.push_back({v[0], v[1], v[2], v[3]});
    }
    return rows;
}

/// Loads <dir>/img/* (sorted by file name) and <dir>/groundtruth_rect.txt.
/// An optional attributes.txt lists tags such as SV or OCC.
inline Sequence load_sequence(const std::filesystem::path& dir)
{
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir))
        throw IoError("sequence directory " + dir.string() + " does not exist");
    const fs::path img_dir = dir / "img";
    if (!fs::is_directory(img_dir))
        throw FormatError(dir.string() + " has no img/ directory");
    Sequence s;
    s.name = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();
    for (const auto& entry : fs::directory_iterator(img_dir))
        if (entry.is_regular_file() && detail::is_image_file(entry.path()))
            s.image_files.push_back(entry.path());
    std::sort(s.image_files.begin(), s.image_files.end());

    std::ifstream gt(dir / "groundtruth_rect.txt");
    if (!gt)
        throw FormatError(dir.string() + " has no readable groundtruth_rect.txt");
    s.ground_truth_rects = parse_ground_truth(gt);
    if (s.ground_truth_rects.size() != s.image_files.size())
        throw FormatError("ground truth has " + std::to_string(s.ground_truth_rects.size()) + " rows but img/ has " +
                          std::to_string(s.image_files.size()) + " frames");
    if (s.image_files.empty())
        throw FormatError(dir.string() + " contains no frames");
    for (const auto& r : s.ground_truth_rects)
        s.ground_truth.push_back(BoundingBox::from_otb(r.x, r.y, r.w, r.h));
    for (std::size_t i = 0; i < s.image_files.size(); ++i)
        if (!cv::haveImageReader(s.image_files[i].string()))
            throw IoError("frame " + std::to_string(i) + ": unreadable image " + s.image_files[i].string());

    std::ifstream attrs(dir / "attributes.txt");
    std::string tok;
    while (std::getline(attrs, tok, ',')) {
        std::istringstream words(tok);
        std::string t;
        while (words >> t) {
            if (!sequence_attribute_tags().contains(t))
                throw FormatError("unknown sequence attribute '" + t + "'");
            s.attributes.push_back(t);
        }
    }
    return s;
}

/// Shortest round-trip decimal form.
inline std::string format_double(double v)
{
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

/// Writes frames as img/%04d.png plus a comma-separated groundtruth_rect.txt.
inline void save_sequence(const Sequence& s, const std::filesystem::path& dir)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir / "img");
    for (int i = 0; i < s.frame_count(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "%04d.png", i + 1);
        const auto path = dir / "img" / name;
        if (!cv::imwrite(path.string(), s.frame(i)))
            throw IoError("cannot write " + path.string());
    }
    std::ofstream gt(dir / "groundtruth_rect.txt");
    if (!gt)
        throw IoError("cannot write ground truth in " + dir.string());
    for (const auto& r : s.ground_truth_rects)
        gt << format_double(r.x) << ',' << format_double(r.y) << ',' << format_double(r.w) << ','
           << format_double(r.h) << '\n';
    if (!s.attributes.empty()) {
        std::ofstream a(dir / "attributes.txt");
        for (std::size_t i = 0; i < s.attributes.size(); ++i)
            a << (i ? "," : "") << s.attributes[i];
        a << '\n';
    }
}

/// Declarative scene: a textured rectangle moving (dx, dy per frame) and
/// zooming (size factor per frame) over a static textured background, with an
/// optional flat occluder covering the left part of the target.
struct SynthScript {
    std::string name = "synthetic";
    int frames = 50;
    int width = 320;
    int height = 240;
    double start_x = 160.0;  // target center, pixels
    double start_y = 120.0;
    double target_w = 40.0;
    double target_h = 40.0;
    double dx = 2.0;
    double dy = 0.0;
    double zoom = 1.0;
    int texture_cells = 8;
    double background_contrast = 0.25;  // 0 gives a flat gray background
    double noise = 0.0;                 // uniform pixel noise amplitude, gray levels
    int occlusion_start = -1;
    int occlusion_end = -1;
    double occlusion_fraction = 0.5;
    std::uint64_t seed = 1;

    void validate() const
    {
        detail::require<InvalidArgument>(frames >= 1, "frames must be positive");
        detail::require<InvalidArgument>(width >= 8 && height >= 8, "frame must be at least 8x8");
        detail::require<InvalidArgument>(target_w >= 2.0 && target_h >= 2.0, "target must be at least 2x2");
        detail::require<InvalidArgument>(zoom > 0.0 && std::isfinite(zoom), "zoom must be positive");
        detail::require<InvalidArgument>(texture_cells >= 1, "texture_cells must be positive");
        detail::require<InvalidArgument>(background_contrast >= 0.0 && background_contrast <= 1.0,
                                         "background_contrast must lie in [0, 1]");
        detail::require<InvalidArgument>(noise >= 0.0, "noise must be non-negative");
        detail::require<InvalidArgument>(occlusion_fraction >= 0.0 && occlusion_fraction <= 1.0,
                                         "occlusion_fraction must lie in [0, 1]");
    }
};

/// key=value lines; '#' starts a comment. Unknown keys are errors.
inline SynthScript parse_synth_script(std::istream& in)
{
    SynthScript s;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        if (detail::trim(line).empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError("script line " + std::to_string(lineno) + " is not key=value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        auto num = [&] { return detail::parse_double(val, key); };
        auto integer = [&] {
            const double v = num();
            if (v != std::floor(v) || std::abs(v) > 1e9)
                throw FormatError(key + " must be an integer");
            return static_cast<int>(v);
        };
        if (key == "name")
            s.name = val;
        else if (key == "frames")
            s.frames = integer();
        else if (key == "width")
            s.width = integer();
        else if (key == "height")
            s.height = integer();
        else if (key == "start_x")
            s.start_x = num();
        else if (key == "start_y")
            s.start_y = num();
        else if (key == "target_w")
            s.target_w = num();
        else if (key == "target_h")
            s.target_h = num();
        else if (key == "dx")
            s.dx = num();
        else if (key == "dy")
            s.dy = num();
        else if (key == "zoom")
            s.zoom = num();
        else if (key == "texture_cells")
            s.texture_cells = integer();
        else if (key == "background_contrast")
            s.background_contrast = num();
        else if (key == "noise")
            s.noise = num();
        else if (key == "occlusion_start")
            s.occlusion_start = integer();
        else if (key == "occlusion_end")
            s.occlusion_end = integer();
        else if (key == "occlusion_fraction")
            s.occlusion_fraction = num();
        else if (key == "seed") {
            std::uint64_t v = 0;
            const auto [p, ec] = std::from_chars(val.data(), val.data() + val.size(), v);
            if (ec != std::errc() || p != val.data() + val.size())
                throw FormatError("seed must be a non-negative integer");
            s.seed = v;
        } else
            throw FormatError("unknown script key '" + key + "'");
    }
    try {
        s.validate();
    } catch (const InvalidArgument& e) {
        throw FormatError(e.what());
    }
    return s;
}

inline SynthScript parse_synth_script(const std::string& text)
{
    std::istringstream in(text);
    return parse_synth_script(in);
}

inline BoundingBox synth_box(const SynthScript& s, int frame)
{
    const double z = std::pow(s.zoom, frame);
    return {s.start_x + s.dx * frame, s.start_y + s.dy * frame, s.target_w * z, s.target_h * z};
}

/// Renders every frame. The target texture lives in target-normalized
/// coordinates, so it stretches with zoom; pixels are sampled at their centers.
inline Sequence synth_sequence(const SynthScript& script)
{
    script.validate();
    Rng rng(script.seed);
    const int tc = script.texture_cells;
    std::vector<cv::Vec3b> texture(static_cast<std::size_t>(tc * tc));
    for (auto& t : texture)
        for (int ch = 0; ch < 3; ++ch)
            t[ch] = static_cast<uchar>(30 + rng.below(196));

    constexpr int bg_cell = 16;
    const int bgw = script.width / bg_cell + 2, bgh = script.height / bg_cell + 2;
    std::vector<double> bg_noise(static_cast<std::size_t>(bgw * bgh));
    for (auto& v : bg_noise)
        v = rng.uniform01() - 0.5;
    cv::Mat background(script.height, script.width, CV_8UC3);
    for (int y = 0; y < script.height; ++y)
        for (int x = 0; x < script.width; ++x) {
            // smooth value noise: bilinear between 16 px lattice points
            const double gx = (x + 0.5) / bg_cell, gy = (y + 0.5) / bg_cell;
            const int ix = static_cast<int>(gx), iy = static_cast<int>(gy);
            const double fx = gx - ix, fy = gy - iy;
            auto at = [&](int yy, int xx) { return bg_noise[static_cast<std::size_t>(yy * bgw + xx)]; };
            const double v = (at(iy, ix) * (1 - fx) + at(iy, ix + 1) * fx) * (1 - fy) +
                             (at(iy + 1, ix) * (1 - fx) + at(iy + 1, ix + 1) * fx) * fy;
            const double level = 128.0 + 2.0 * v * 127.0 * script.background_contrast;
            const auto g = cv::saturate_cast<uchar>(level);
            background.at<cv::Vec3b>(y, x) = cv::Vec3b(g, g, g);
        }

    Sequence s;
    s.name = script.name;
    if (script.zoom != 1.0)
        s.attributes.push_back("SV");
    if (script.occlusion_start >= 0 && script.occlusion_end > script.occlusion_start)
        s.attributes.push_back("OCC");
    for (int f = 0; f < script.frames; ++f) {
        const BoundingBox b = synth_box(script, f);
        cv::Mat img = background.clone();
        const int x0 = std::max(0, static_cast<int>(std::floor(b.left()))),
                  x1 = std::min(script.width, static_cast<int>(std::ceil(b.right())));
        const int y0 = std::max(0, static_cast<int>(std::floor(b.top()))),
                  y1 = std::min(script.height, static_cast<int>(std::ceil(b.bottom())));
        const bool occluded = f >= script.occlusion_start && f < script.occlusion_end;
        const double occ_right = b.left() + script.occlusion_fraction * b.w;
        for (int y = y0; y < y1; ++y)
            for (int x = x0; x < x1; ++x) {
                const double px = x + 0.5, py = y + 0.5;
                if (px < b.left() || px >= b.right() || py < b.top() || py >= b.bottom())
                    continue;
                if (occluded && px < occ_right) {
                    img.at<cv::Vec3b>(y, x) = cv::Vec3b(90, 90, 90);
                    continue;
                }
                const int u = std::min(tc - 1, static_cast<int>((px - b.left()) / b.w * tc));
                const int v = std::min(tc - 1, static_cast<int>((py - b.top()) / b.h * tc));
                img.at<cv::Vec3b>(y, x) = texture[static_cast<std::size_t>(v * tc + u)];
            }
        if (script.noise > 0.0)
            for (int y = 0; y < script.height; ++y)
                for (int x = 0; x < script.width; ++x)
                    for (int ch = 0; ch < 3; ++ch) {
                        auto& p = img.at<cv::Vec3b>(y, x)[ch];
                        p = cv::saturate_cast<uchar>(p + (rng.uniform01() - 0.5) * 2.0 * script.noise);
                    }
        s.frames.push_back(std::move(img));
        s.ground_truth.push_back(b);
        s.ground_truth_rects.push_back(to_otb(b));
    }
    return s;
}

} // namespace facf
