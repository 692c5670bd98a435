#pragma once

// Region-of-interest extraction from 8-bit BGR (or grayscale) frames.

#include <array>
#include <cmath>

#include <opencv2/core.hpp>

#include "facf/bbox.hpp"
#include "facf/error.hpp"
#include "facf/grid.hpp"

namespace facf {

/// Search/training window in image pixels: (width*scale) x (height*scale) around the center.
struct PatchSpec {
    double cx = 0.0;
    double cy = 0.0;
    double width = 1.0;
    double height = 1.0;
    double scale = 1.0;

    double window_w() const noexcept { return width * scale; }
    double window_h() const noexcept { return height * scale; }

    void validate() const
    {
        detail::require<InvalidArgument>(std::isfinite(cx) && std::isfinite(cy), "patch center must be finite");
        detail::require<InvalidArgument>(scale > 0.0, "patch scale must be positive");
        detail::require<InvalidArgument>(window_w() >= 1.0 && window_h() >= 1.0, "patch must be at least 1x1 px");
    }

    friend auto operator<=>(const PatchSpec&, const PatchSpec&) = default;
};

/// Three color planes (B, G, R order, 0..255) resampled to a fixed template size.
struct ColorPatch {
    std::array<RealGrid, 3> planes;

    int rows() const noexcept { return planes[0].rows(); }
    int cols() const noexcept { return planes[0].cols(); }

    RealGrid gray() const
    {
        RealGrid g(rows(), cols());
        for (std::size_t i = 0; i < g.size(); ++i)
            g.data()[i] = 0.114 * planes[0].data()[i] + 0.587 * planes[1].data()[i] + 0.299 * planes[2].data()[i];
        return g;
    }
};

/// Map from template pixel coordinates to image coordinates for one patch.
struct PatchMapping {
    double left, top, step_x, step_y;

    double image_x(double col) const noexcept { return left + (col + 0.5) * step_x; }
    double image_y(double row) const noexcept { return top + (row + 0.5) * step_y; }
    double template_col(double x) const noexcept { return (x - left) / step_x; }
    double template_row(double y) const noexcept { return (y - top) / step_y; }
};

inline PatchMapping patch_mapping(const PatchSpec& p, int rows, int cols) noexcept
{
    return {p.cx - 0.5 * p.window_w(), p.cy - 0.5 * p.window_h(), p.window_w() / cols, p.window_h() / rows};
}

/// Bilinear resample of the window to rows x cols, replicating image borders.
/// Throws TrackingDegenerate when the window does not touch the image at all.
inline ColorPatch sample_patch(const cv::Mat& image, const PatchSpec& p, int rows, int cols)
{
    p.validate();
    detail::require<InvalidArgument>(rows >= 1 && cols >= 1, "template size must be positive");
    detail::require<InvalidArgument>(!image.empty() && image.depth() == CV_8U &&
                                         (image.channels() == 3 || image.channels() == 1),
                                     "frame must be 8-bit gray or BGR");
    const double left = p.cx - 0.5 * p.window_w(), top = p.cy - 0.5 * p.window_h();
    if (left >= image.cols || top >= image.rows || left + p.window_w() <= 0 || top + p.window_h() <= 0)
        throw TrackingDegenerate("patch lies entirely outside the frame");

    const auto m = patch_mapping(p, rows, cols);
    ColorPatch out;
    for (auto& pl : out.planes)
        pl = RealGrid(rows, cols);
    const int nc = image.channels();
    const double max_x = image.cols - 1, max_y = image.rows - 1;

    std::vector<int> x0(static_cast<std::size_t>(cols)), x1(x0.size());
    std::vector<double> fx(x0.size());
    for (int c = 0; c < cols; ++c) {
        double x = std::clamp(m.image_x(c) - 0.5, 0.0, max_x);
        x0[static_cast<std::size_t>(c)] = static_cast<int>(x);
        x1[static_cast<std::size_t>(c)] = std::min(x0[static_cast<std::size_t>(c)] + 1, image.cols - 1);
        fx[static_cast<std::size_t>(c)] = x - x0[static_cast<std::size_t>(c)];
    }
    for (int r = 0; r < rows; ++r) {
        double y = std::clamp(m.image_y(r) - 0.5, 0.0, max_y);
        const int y0 = static_cast<int>(y), y1 = std::min(y0 + 1, image.rows - 1);
        const double fy = y - y0;
        const uchar* row0 = image.ptr<uchar>(y0);
        const uchar* row1 = image.ptr<uchar>(y1);
        for (int c = 0; c < cols; ++c) {
            const auto i = static_cast<std::size_t>(c);
            for (int ch = 0; ch < 3; ++ch) {
                const int k = nc == 3 ? ch : 0;
                const double a = row0[x0[i] * nc + k], b = row0[x1[i] * nc + k];
                const double cc = row1[x0[i] * nc + k], d = row1[x1[i] * nc + k];
                const double top_v = a + (b - a) * fx[i];
                const double bot_v = cc + (d - cc) * fx[i];
                out.planes[static_cast<std::size_t>(ch)](r, c) = top_v + (bot_v - top_v) * fy;
            }
        }
    }
    return out;
}

/// Average pooling over non-overlapping cell x cell blocks; trailing partial cells are dropped.
inline RealGrid pool_cells(const RealGrid& g, int cell)
{
    detail::require<InvalidArgument>(cell >= 1, "cell size must be positive");
    const int rows = g.rows() / cell, cols = g.cols() / cell;
    RealGrid out(rows, cols);
    const double inv = 1.0 / (cell * cell);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            double s = 0.0;
            for (int i = 0; i < cell; ++i)
                for (int j = 0; j < cell; ++j)
                    s += g(r * cell + i, c * cell + j);
            out(r, c) = s * inv;
        }
    return out;
}

} // namespace facf
