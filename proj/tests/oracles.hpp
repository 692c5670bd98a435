#pragma once

// Reference implementations used only by tests. Nothing here calls into the
// library's transform or filter code.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "facf/dcf.hpp"
#include "facf/grid.hpp"

namespace facf::oracle {

using cd = std::complex<double>;

/// O(N^2 M^2) textbook DFT. sign = -1 forward (unnormalized), +1 inverse (scaled by 1/MN).
inline ComplexGrid naive_dft(const ComplexGrid& x, int sign)
{
    const int M = x.rows(), N = x.cols();
    ComplexGrid out(M, N);
    for (int u = 0; u < M; ++u)
        for (int v = 0; v < N; ++v) {
            cd acc{};
            for (int m = 0; m < M; ++m)
                for (int n = 0; n < N; ++n) {
                    double ang = sign * 2.0 * std::numbers::pi * (double(u) * m / M + double(v) * n / N);
                    acc += x(m, n) * cd(std::cos(ang), std::sin(ang));
                }
            out(u, v) = sign > 0 ? acc / double(M * N) : acc;
        }
    return out;
}

inline ComplexGrid to_complex(const RealGrid& g)
{
    ComplexGrid c(g.rows(), g.cols());
    for (int r = 0; r < g.rows(); ++r)
        for (int k = 0; k < g.cols(); ++k)
            c(r, k) = g(r, k);
    return c;
}

inline RealGrid real_part(const ComplexGrid& g)
{
    RealGrid r(g.rows(), g.cols());
    for (int i = 0; i < g.rows(); ++i)
        for (int k = 0; k < g.cols(); ++k)
            r(i, k) = g(i, k).real();
    return r;
}

/// R(s) = sum_d sum_p h_d(p) * z_d(p + s), indices modulo the grid.
inline RealGrid spatial_cross_correlation(const std::vector<RealGrid>& h, const std::vector<RealGrid>& z)
{
    const int M = z.front().rows(), N = z.front().cols();
    RealGrid out(M, N);
    for (int sr = 0; sr < M; ++sr)
        for (int sc = 0; sc < N; ++sc) {
            double acc = 0.0;
            for (std::size_t d = 0; d < h.size(); ++d)
                for (int m = 0; m < M; ++m)
                    for (int n = 0; n < N; ++n)
                        acc += h[d](m, n) * z[d].wrapped(m + sr, n + sc);
            out(sr, sc) = acc;
        }
    return out;
}

/// Dense Gaussian elimination with partial pivoting; a is n x n row-major.
inline std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b)
{
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col]))
                piv = r;
        for (std::size_t k = 0; k < n; ++k)
            std::swap(a[col * n + k], a[piv * n + k]);
        std::swap(b[col], b[piv]);
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = a[r * n + col] / a[col * n + col];
            for (std::size_t k = col; k < n; ++k)
                a[r * n + k] -= f * a[col * n + k];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k)
            s -= a[i * n + k] * x[k];
        x[i] = s / a[i * n + i];
    }
    return x;
}

inline RealGrid random_grid(std::mt19937_64& rng, int rows, int cols, double lo = -1.0, double hi = 1.0)
{
    std::uniform_real_distribution<double> u(lo, hi);
    RealGrid g(rows, cols);
    for (auto& v : g)
        v = u(rng);
    return g;
}

inline RealGrid circshift(const RealGrid& g, int dr, int dc)
{
    RealGrid out(g.rows(), g.cols());
    for (int r = 0; r < g.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c)
            out(r, c) = g.wrapped(r - dr, c - dc);
    return out;
}

inline double max_abs_diff(const RealGrid& a, const RealGrid& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

// Spatial filter taps derived straight from the closed-form ridge solution,
// using the naive DFT only.
inline std::vector<RealGrid> ridge_filter_taps(const FeatureStack& x, const RealGrid& y, double lambda)
{
    const auto yh = naive_dft(to_complex(y), -1);
    std::vector<ComplexGrid> xh;
    for (const auto& c : x.channels())
        xh.push_back(naive_dft(to_complex(c), -1));
    std::vector<RealGrid> taps;
    for (const auto& xd : xh) {
        ComplexGrid h(x.rows(), x.cols());
        for (int r = 0; r < x.rows(); ++r)
            for (int c = 0; c < x.cols(); ++c) {
                double energy = 0.0;
                for (const auto& xi : xh)
                    energy += std::norm(xi(r, c));
                h(r, c) = std::conj(std::conj(xd(r, c)) * yh(r, c) / (energy + lambda));
            }
        taps.push_back(real_part(naive_dft(h, +1)));
    }
    return taps;
}

} // namespace facf::oracle
