#pragma once

#include <algorithm>
#include <cmath>

#include "facf/error.hpp"

namespace facf {

/// Axis-aligned target state, 0-indexed pixel coordinates, center based.
/// Pixel i covers the continuous interval [i, i+1).
struct BoundingBox {
    double cx = 0.0;
    double cy = 0.0;
    double w = 1.0;
    double h = 1.0;

    double left() const noexcept { return cx - 0.5 * w; }
    double top() const noexcept { return cy - 0.5 * h; }
    double right() const noexcept { return cx + 0.5 * w; }
    double bottom() const noexcept { return cy + 0.5 * h; }
    double area() const noexcept { return w * h; }

    bool valid() const noexcept
    {
        return std::isfinite(cx) && std::isfinite(cy) && std::isfinite(w) && std::isfinite(h) && w > 0.0 && h > 0.0;
    }

    /// From a 1-indexed top-left OTB row (x, y, w, h).
    static BoundingBox from_otb(double x, double y, double w, double h) noexcept
    {
        return {x - 1.0 + 0.5 * w, y - 1.0 + 0.5 * h, w, h};
    }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct OtbRect {
    double x, y, w, h;
};

inline OtbRect to_otb(const BoundingBox& b) noexcept { return {b.left() + 1.0, b.top() + 1.0, b.w, b.h}; }

inline double intersection_area(const BoundingBox& a, const BoundingBox& b) noexcept
{
    const double iw = std::min(a.right(), b.right()) - std::max(a.left(), b.left());
    const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top());
    return iw > 0.0 && ih > 0.0 ? iw * ih : 0.0;
}

inline double iou(const BoundingBox& a, const BoundingBox& b)
{
    detail::require<InvalidArgument>(a.valid() && b.valid(), "iou of a degenerate box");
    if (a == b)
        return 1.0;
    const double inter = intersection_area(a, b);
    return inter / (a.area() + b.area() - inter);
}

inline double center_distance(const BoundingBox& a, const BoundingBox& b) noexcept
{
    return std::hypot(a.cx - b.cx, a.cy - b.cy);
}

/// Keep the box inside a width x height image with at least min_size pixels per side.
inline BoundingBox clamp_box(BoundingBox b, double width, double height, double min_size = 2.0)
{
    b.w = std::clamp(b.w, min_size, std::max(min_size, width));
    b.h = std::clamp(b.h, min_size, std::max(min_size, height));
    b.cx = std::clamp(b.cx, 0.0, width);
    b.cy = std::clamp(b.cy, 0.0, height);
    return b;
}

} // namespace facf
