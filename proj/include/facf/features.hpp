#pragma once

// Feature pool: HOG plus five deeper "layer" kinds. Without a network the
// layer kinds come either from precomputed channel-map files or from the
// deterministic synthetic stand-ins below (box-filtered intensity, opponent
// color and gradient maps; blur radius and channel count grow with depth).

#include <array>
#include <span>
#include <vector>

#include <opencv2/core.hpp>

#include "facf/dcf.hpp"
#include "facf/expert_id.hpp"
#include "facf/hog.hpp"
#include "facf/patch.hpp"

namespace facf {

/// Template pixel size and HOG cell; all feature kinds of a patch share the resulting grid.
struct GridShape {
    int template_rows = 0;
    int template_cols = 0;
    int cell = 4;

    int rows() const noexcept { return template_rows / cell; }
    int cols() const noexcept { return template_cols / cell; }

    friend bool operator==(const GridShape&, const GridShape&) = default;
};

struct FrameView {
    cv::Mat image;  // CV_8UC3 (BGR) or CV_8UC1
    int index = 0;
};

struct SynthKindSpec {
    int blur_radius;
    int channels;
};

inline constexpr SynthKindSpec synth_kind_spec(FeatureKind k)
{
    switch (k) {
    case FeatureKind::L5: return {1, 3};
    case FeatureKind::L10: return {2, 4};
    case FeatureKind::L19: return {3, 5};
    case FeatureKind::L28: return {5, 6};
    case FeatureKind::L37: return {8, 6};
    case FeatureKind::HOG: break;
    }
    return {0, kHogChannels};
}

namespace detail {

/// Separable (2r+1)^2 mean filter with replicated borders.
inline RealGrid box_blur(const RealGrid& g, int radius)
{
    if (radius <= 0)
        return g;
    const int rows = g.rows(), cols = g.cols();
    const double inv = 1.0 / (2 * radius + 1);
    RealGrid tmp(rows, cols), out(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            double s = 0.0;
            for (int k = -radius; k <= radius; ++k)
                s += g(r, std::clamp(c + k, 0, cols - 1));
            tmp(r, c) = s * inv;
        }
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            double s = 0.0;
            for (int k = -radius; k <= radius; ++k)
                s += tmp(std::clamp(r + k, 0, rows - 1), c);
            out(r, c) = s * inv;
        }
    return out;
}

/// Pixel-level base maps in a fixed order; kinds take a prefix of this list.
inline std::vector<RealGrid> synth_base_maps(const ColorPatch& p, int count)
{
    const int rows = p.rows(), cols = p.cols();
    const auto& B = p.planes[0];
    const auto& G = p.planes[1];
    const auto& R = p.planes[2];
    const RealGrid gray = p.gray();
    std::vector<RealGrid> maps;
    maps.reserve(static_cast<std::size_t>(count));
    auto add = [&](auto&& f) {
        if (static_cast<int>(maps.size()) >= count)
            return;
        RealGrid m(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
                m(r, c) = f(r, c);
        maps.push_back(std::move(m));
    };
    auto gx = [&](int r, int c) {
        return (gray(r, std::min(c + 1, cols - 1)) - gray(r, std::max(c - 1, 0))) / 255.0;
    };
    auto gy = [&](int r, int c) {
        return (gray(std::min(r + 1, rows - 1), c) - gray(std::max(r - 1, 0), c)) / 255.0;
    };
    add([&](int r, int c) { return gray(r, c) / 255.0 - 0.5; });
    add([&](int r, int c) { return (R(r, c) - G(r, c)) / 255.0; });
    add([&](int r, int c) { return (B(r, c) - 0.5 * (R(r, c) + G(r, c))) / 255.0; });
    add([&](int r, int c) { return std::hypot(gx(r, c), gy(r, c)); });
    add(gx);
    add(gy);
    return maps;
}

} // namespace detail

/// Synthetic stand-in for one deep layer, pooled to the HOG grid of the patch.
inline FeatureStack synth_features(const ColorPatch& patch, FeatureKind kind, int cell)
{
    if (kind == FeatureKind::HOG)
        return fhog(patch, cell);
    const auto spec = synth_kind_spec(kind);
    std::vector<RealGrid> channels;
    for (const auto& m : detail::synth_base_maps(patch, spec.channels))
        channels.push_back(pool_cells(detail::box_blur(m, spec.blur_radius), cell));
    return FeatureStack(std::move(channels));
}

inline FeatureStack extract_hog(const cv::Mat& image, const PatchSpec& patch, const GridShape& grid)
{
    detail::require<InvalidArgument>(grid.cell >= 1, "HOG cell size must be positive");
    detail::require<InvalidArgument>(grid.rows() >= 1 && grid.cols() >= 1, "empty patch");
    return fhog(sample_patch(image, patch, grid.template_rows, grid.template_cols), grid.cell);
}

inline FeatureStack synth_features(const cv::Mat& image, const PatchSpec& patch, FeatureKind kind,
                                   const GridShape& grid)
{
    return synth_features(sample_patch(image, patch, grid.template_rows, grid.template_cols), kind, grid.cell);
}

struct ColorMask {
    RealGrid grid;  // per-cell foreground probability in [0, 1]
};

/// Per-pixel P(foreground | color) from joint color histograms of the
/// foreground rectangle and the rest of the patch. Bin counts get +1 and are
/// normalized by each region's pixel count. fg_* are template pixel bounds.
inline RealGrid color_posterior(const ColorPatch& p, double fg_top, double fg_left, double fg_bottom,
                                double fg_right, int bins)
{
    detail::require<InvalidArgument>(bins >= 2 && bins <= 256, "color bins must lie in [2, 256]");
    detail::require<InvalidArgument>(fg_bottom > fg_top && fg_right > fg_left, "foreground box has zero area");
    const int rows = p.rows(), cols = p.cols();
    const std::size_t nbins = static_cast<std::size_t>(bins) * bins * bins;
    auto bin_of = [&](int r, int c) {
        std::size_t idx = 0;
        for (const auto& pl : p.planes) {
            const int b = std::clamp(static_cast<int>(pl(r, c) * bins / 256.0), 0, bins - 1);
            idx = idx * static_cast<std::size_t>(bins) + static_cast<std::size_t>(b);
        }
        return idx;
    };
    std::vector<double> fg(nbins, 1.0), bg(nbins, 1.0);
    double n_fg = 0.0, n_bg = 0.0;
    std::vector<std::size_t> idx(static_cast<std::size_t>(rows * cols));
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const std::size_t b = bin_of(r, c);
            idx[static_cast<std::size_t>(r * cols + c)] = b;
            const double y = r + 0.5, x = c + 0.5;
            if (y >= fg_top && y < fg_bottom && x >= fg_left && x < fg_right) {
                fg[b] += 1.0;
                n_fg += 1.0;
            } else {
                bg[b] += 1.0;
                n_bg += 1.0;
            }
        }
    detail::require<InvalidArgument>(n_fg > 0.0, "foreground box covers no pixel centers");
    n_bg = std::max(n_bg, 1.0);
    RealGrid post(rows, cols);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const double pf = fg[idx[i]] / n_fg, pb = bg[idx[i]] / n_bg;
        post.data()[i] = pf / (pf + pb);
    }
    return post;
}

inline ColorMask color_mask(const ColorPatch& p, const PatchSpec& spec, const BoundingBox& fg_box, int bins, int cell)
{
    detail::require<InvalidArgument>(fg_box.valid(), "foreground box is degenerate");
    const auto m = patch_mapping(spec, p.rows(), p.cols());
    const double top = m.template_row(fg_box.top()), bottom = m.template_row(fg_box.bottom());
    const double left = m.template_col(fg_box.left()), right = m.template_col(fg_box.right());
    return {pool_cells(color_posterior(p, top, left, bottom, right, bins), cell)};
}

inline ColorMask color_mask(const cv::Mat& image, const PatchSpec& patch, const BoundingBox& fg_box, int bins,
                            const GridShape& grid)
{
    return color_mask(sample_patch(image, patch, grid.template_rows, grid.template_cols), patch, fg_box, bins,
                      grid.cell);
}

/// Supplies feature stacks for a patch. Implementations must be deterministic.
class FeatureSource {
public:
    virtual ~FeatureSource() = default;

    /// One stack per requested kind, in request order, each on grid.rows() x grid.cols().
    virtual std::vector<FeatureStack> extract(const FrameView& frame, const PatchSpec& patch,
                                              std::span<const FeatureKind> kinds, const GridShape& grid) const = 0;
};

class SyntheticFeatureSource final : public FeatureSource {
public:
    std::vector<FeatureStack> extract(const FrameView& frame, const PatchSpec& patch, std::span<const FeatureKind> kinds,
                                      const GridShape& grid) const override
    {
        const auto p = sample_patch(frame.image, patch, grid.template_rows, grid.template_cols);
        std::vector<FeatureStack> out;
        out.reserve(kinds.size());
        for (auto k : kinds)
            out.push_back(synth_features(p, k, grid.cell));
        return out;
    }
};

} // namespace facf
