#pragma once

// Felzenszwalb-style HOG with 31 channels per cell:
//   0..17  contrast-sensitive orientations (20 degree bins over 360)
//   18..26 contrast-insensitive orientations (bins folded over 180)
//   27..30 gradient energy under each of the four block normalizations
// Unlike the original detector code the border cells are kept, with block
// neighbours clamped at the edge, so the output grid is floor(rows/cell) x floor(cols/cell).

#include <array>
#include <cmath>
#include <numbers>

#include "facf/dcf.hpp"
#include "facf/patch.hpp"

namespace facf {

inline constexpr int kHogChannels = 31;
inline constexpr int kHogOrientations = 18;

namespace detail {

struct PixelGradient {
    double magnitude = 0.0;
    int bin = 0;  // 0..17
};

inline const std::array<std::pair<double, double>, 9>& hog_directions()
{
    static const auto dirs = [] {
        std::array<std::pair<double, double>, 9> d{};
        for (int o = 0; o < 9; ++o) {
            const double a = o * std::numbers::pi / 9.0;
            d[static_cast<std::size_t>(o)] = {std::cos(a), std::sin(a)};
        }
        return d;
    }();
    return dirs;
}

/// Strongest-channel gradient snapped to the nearest of 18 directions.
inline PixelGradient pixel_gradient(const ColorPatch& p, int r, int c)
{
    const int rows = p.rows(), cols = p.cols();
    const int cl = std::max(c - 1, 0), cr = std::min(c + 1, cols - 1);
    const int ru = std::max(r - 1, 0), rd = std::min(r + 1, rows - 1);
    double best_dx = 0.0, best_dy = 0.0, best_mag2 = 0.0;
    for (const auto& pl : p.planes) {
        const double dx = pl(r, cr) - pl(r, cl);
        const double dy = pl(rd, c) - pl(ru, c);
        const double m2 = dx * dx + dy * dy;
        if (m2 > best_mag2) {
            best_mag2 = m2;
            best_dx = dx;
            best_dy = dy;
        }
    }
    PixelGradient g;
    g.magnitude = std::sqrt(best_mag2);
    double best_dot = 0.0;
    const auto& dirs = hog_directions();
    for (int o = 0; o < 9; ++o) {
        const double dot = dirs[static_cast<std::size_t>(o)].first * best_dx +
                           dirs[static_cast<std::size_t>(o)].second * best_dy;
        if (dot > best_dot) {
            best_dot = dot;
            g.bin = o;
        } else if (-dot > best_dot) {
            best_dot = -dot;
            g.bin = o + 9;
        }
    }
    return g;
}

} // namespace detail

/// Per-cell oriented gradient histograms (18 bins) with bilinear spatial voting.
inline std::vector<std::array<double, kHogOrientations>> hog_cell_histograms(const ColorPatch& p, int cell,
                                                                            int& cell_rows, int& cell_cols)
{
    cell_rows = p.rows() / cell;
    cell_cols = p.cols() / cell;
    std::vector<std::array<double, kHogOrientations>> hist(static_cast<std::size_t>(cell_rows * cell_cols));
    const int vis_rows = cell_rows * cell, vis_cols = cell_cols * cell;
    for (int r = 0; r < vis_rows; ++r) {
        const double yp = (r + 0.5) / cell - 0.5;
        const int iy = static_cast<int>(std::floor(yp));
        const double vy0 = yp - iy, vy1 = 1.0 - vy0;
        for (int c = 0; c < vis_cols; ++c) {
            const auto g = detail::pixel_gradient(p, r, c);
            if (g.magnitude == 0.0)
                continue;
            const double xp = (c + 0.5) / cell - 0.5;
            const int ix = static_cast<int>(std::floor(xp));
            const double vx0 = xp - ix, vx1 = 1.0 - vx0;
            auto vote = [&](int cy, int cx, double w) {
                if (cy >= 0 && cy < cell_rows && cx >= 0 && cx < cell_cols)
                    hist[static_cast<std::size_t>(cy * cell_cols + cx)][static_cast<std::size_t>(g.bin)] +=
                        w * g.magnitude;
            };
            vote(iy, ix, vy1 * vx1);
            vote(iy, ix + 1, vy1 * vx0);
            vote(iy + 1, ix, vy0 * vx1);
            vote(iy + 1, ix + 1, vy0 * vx0);
        }
    }
    return hist;
}

inline FeatureStack fhog(const ColorPatch& p, int cell)
{
    detail::require<InvalidArgument>(cell >= 1, "HOG cell size must be positive");
    detail::require<InvalidArgument>(p.rows() >= cell && p.cols() >= cell, "patch smaller than one HOG cell");
    int rows = 0, cols = 0;
    const auto hist = hog_cell_histograms(p, cell, rows, cols);
    auto H = [&](int r, int c) -> const std::array<double, kHogOrientations>& {
        return hist[static_cast<std::size_t>(std::clamp(r, 0, rows - 1) * cols + std::clamp(c, 0, cols - 1))];
    };

    RealGrid energy(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            double e = 0.0;
            for (int o = 0; o < 9; ++o) {
                const double s = H(r, c)[static_cast<std::size_t>(o)] + H(r, c)[static_cast<std::size_t>(o + 9)];
                e += s * s;
            }
            energy(r, c) = e;
        }
    auto E = [&](int r, int c) { return energy(std::clamp(r, 0, rows - 1), std::clamp(c, 0, cols - 1)); };

    constexpr double eps = 1e-4;
    constexpr double clip = 0.2;
    std::vector<RealGrid> out(kHogChannels, RealGrid(rows, cols));
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const std::array<double, 4> n{
                1.0 / std::sqrt(E(r, c) + E(r, c + 1) + E(r + 1, c) + E(r + 1, c + 1) + eps),
                1.0 / std::sqrt(E(r, c) + E(r, c + 1) + E(r - 1, c) + E(r - 1, c + 1) + eps),
                1.0 / std::sqrt(E(r, c) + E(r, c - 1) + E(r + 1, c) + E(r + 1, c - 1) + eps),
                1.0 / std::sqrt(E(r, c) + E(r, c - 1) + E(r - 1, c) + E(r - 1, c - 1) + eps),
            };
            const auto& h = H(r, c);
            std::array<double, 4> texture{};
            for (int o = 0; o < kHogOrientations; ++o) {
                double sum = 0.0;
                for (std::size_t k = 0; k < 4; ++k) {
                    const double v = std::min(h[static_cast<std::size_t>(o)] * n[k], clip);
                    sum += v;
                    texture[k] += v;
                }
                out[static_cast<std::size_t>(o)](r, c) = 0.5 * sum;
            }
            for (int o = 0; o < 9; ++o) {
                const double folded = h[static_cast<std::size_t>(o)] + h[static_cast<std::size_t>(o + 9)];
                double sum = 0.0;
                for (std::size_t k = 0; k < 4; ++k)
                    sum += std::min(folded * n[k], clip);
                out[static_cast<std::size_t>(18 + o)](r, c) = 0.5 * sum;
            }
            for (std::size_t k = 0; k < 4; ++k)
                out[27 + k](r, c) = 0.2357 * texture[k];
        }
    return FeatureStack(std::move(out));
}

} // namespace facf
