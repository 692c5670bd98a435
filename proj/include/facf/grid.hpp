#pragma once

#include <algorithm>
#include <cassert>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "facf/error.hpp"

namespace facf {

/// Dense row-major 2-D array with value semantics.
template <typename T>
class Grid {
public:
    using value_type = T;

    Grid() = default;
    Grid(int rows, int cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(checked_size(rows, cols), fill)
    {
    }

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(int r, int c) noexcept
    {
        assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
        return data_[static_cast<std::size_t>(r) * cols_ + c];
    }
    const T& operator()(int r, int c) const noexcept
    {
        assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
        return data_[static_cast<std::size_t>(r) * cols_ + c];
    }

    /// Circular indexing; negative and out-of-range indices wrap.
    const T& wrapped(int r, int c) const noexcept
    {
        r %= rows_;
        c %= cols_;
        if (r < 0)
            r += rows_;
        if (c < 0)
            c += cols_;
        return (*this)(r, c);
    }

    T* data() noexcept { return data_.data(); }
    const T* data() const noexcept { return data_.data(); }
    std::span<T> values() noexcept { return data_; }
    std::span<const T> values() const noexcept { return data_; }

    auto begin() noexcept { return data_.begin(); }
    auto end() noexcept { return data_.end(); }
    auto begin() const noexcept { return data_.begin(); }
    auto end() const noexcept { return data_.end(); }

    bool same_shape(const Grid& other) const noexcept
    {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    template <typename U>
    bool same_shape(const Grid<U>& other) const noexcept
    {
        return rows_ == other.rows() && cols_ == other.cols();
    }

    friend bool operator==(const Grid& a, const Grid& b)
    {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    static std::size_t checked_size(int rows, int cols)
    {
        detail::require<InvalidArgument>(rows >= 0 && cols >= 0, "grid dimensions must be non-negative");
        return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<T> data_;
};

using RealGrid = Grid<double>;
using ComplexGrid = Grid<std::complex<double>>;

template <typename T, typename F>
Grid<T> map_grid(const Grid<T>& g, F&& f)
{
    Grid<T> out(g.rows(), g.cols());
    std::transform(g.begin(), g.end(), out.begin(), f);
    return out;
}

/// Bilinear resample to (rows, cols) with pixel-center alignment and edge clamping.
/// Upsampling by an integer factor reproduces linear ramps exactly away from the borders.
inline RealGrid resample_bilinear(const RealGrid& src, int rows, int cols)
{
    detail::require<InvalidArgument>(rows >= 1 && cols >= 1 && !src.empty(), "resample: empty source or target");
    if (src.rows() == rows && src.cols() == cols)
        return src;
    RealGrid out(rows, cols);
    const double sy = static_cast<double>(src.rows()) / rows;
    const double sx = static_cast<double>(src.cols()) / cols;
    for (int r = 0; r < rows; ++r) {
        double y = std::clamp((r + 0.5) * sy - 0.5, 0.0, static_cast<double>(src.rows() - 1));
        int y0 = static_cast<int>(y);
        int y1 = std::min(y0 + 1, src.rows() - 1);
        double fy = y - y0;
        for (int c = 0; c < cols; ++c) {
            double x = std::clamp((c + 0.5) * sx - 0.5, 0.0, static_cast<double>(src.cols() - 1));
            int x0 = static_cast<int>(x);
            int x1 = std::min(x0 + 1, src.cols() - 1);
            double fx = x - x0;
            double top = src(y0, x0) * (1.0 - fx) + src(y0, x1) * fx;
            double bot = src(y1, x0) * (1.0 - fx) + src(y1, x1) * fx;
            out(r, c) = top * (1.0 - fy) + bot * fy;
        }
    }
    return out;
}

} // namespace facf
