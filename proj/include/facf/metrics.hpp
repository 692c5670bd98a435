#pragma once

// One-pass evaluation curves: center-error precision and IoU success.

#include <array>
#include <span>
#include <vector>

#include "facf/bbox.hpp"
#include "facf/error.hpp"

namespace facf {

inline constexpr int kPrecisionMaxThreshold = 50;
inline constexpr int kSuccessPoints = 21;

struct PrecisionCurve {
    std::array<double, kPrecisionMaxThreshold + 1> values{};  // threshold 0..50 px
    double p20 = 0.0;
};

struct SuccessCurve {
    std::array<double, kSuccessPoints> values{};  // IoU threshold 0, 0.05, ..., 1
    double auc = 0.0;
};

struct EvalCurves {
    PrecisionCurve precision;
    SuccessCurve success;
};

inline double success_threshold(int i) noexcept { return i / static_cast<double>(kSuccessPoints - 1); }

inline PrecisionCurve precision_curve(std::span<const BoundingBox> pred, std::span<const BoundingBox> gt)
{
    detail::require<InvalidArgument>(pred.size() == gt.size(), "prediction and ground truth lengths differ");
    PrecisionCurve out;
    if (pred.empty())
        return out;
    std::vector<double> err(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i)
        err[i] = center_distance(pred[i], gt[i]);
    for (int t = 0; t <= kPrecisionMaxThreshold; ++t) {
        std::size_t hit = 0;
        for (double e : err)
            hit += e <= t ? 1 : 0;
        out.values[static_cast<std::size_t>(t)] = static_cast<double>(hit) / static_cast<double>(err.size());
    }
    out.p20 = out.values[20];
    return out;
}

inline SuccessCurve success_auc(std::span<const BoundingBox> pred, std::span<const BoundingBox> gt)
{
    detail::require<InvalidArgument>(pred.size() == gt.size(), "prediction and ground truth lengths differ");
    SuccessCurve out;
    if (pred.empty())
        return out;
    std::vector<double> ov(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i)
        ov[i] = iou(pred[i], gt[i]);
    double sum = 0.0;
    for (int t = 0; t < kSuccessPoints; ++t) {
        const double th = success_threshold(t);
        std::size_t hit = 0;
        for (double o : ov)
            hit += o > th ? 1 : 0;
        const double v = static_cast<double>(hit) / static_cast<double>(ov.size());
        out.values[static_cast<std::size_t>(t)] = v;
        sum += v;
    }
    out.auc = sum / kSuccessPoints;
    return out;
}

inline EvalCurves evaluate(std::span<const BoundingBox> pred, std::span<const BoundingBox> gt)
{
    return {precision_curve(pred, gt), success_auc(pred, gt)};
}

} // namespace facf
