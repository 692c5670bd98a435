#pragma once

// Fitness-degree building blocks: Gaussian-normalized overlap, per-frame mean
// overlap and its fluctuation, rho-weighted temporal means, the pair and self
// scores, and their linear combination.

#include <cmath>
#include <span>
#include <vector>

#include "facf/bbox.hpp"
#include "facf/error.hpp"

namespace facf {

/// exp(-(1 - IoU)^2); lies in [exp(-1), 1].
inline double overlap(const BoundingBox& a, const BoundingBox& b)
{
    const double gap = 1.0 - iou(a, b);
    return std::exp(-gap * gap);
}

/// Arithmetic mean of one expert's overlaps with every executive (self term included by the caller).
inline double mean_overlap(std::span<const double> overlaps)
{
    detail::require<InvalidArgument>(!overlaps.empty(), "mean_overlap needs at least one executive");
    double s = 0.0;
    for (double o : overlaps)
        s += o;
    return s / static_cast<double>(overlaps.size());
}

/// Root-mean-square deviation of each pair's current overlap (last element of
/// its series) from that pair's mean over the window.
inline double fluctuation(std::span<const std::vector<double>> pair_series)
{
    detail::require<InvalidArgument>(!pair_series.empty(), "fluctuation needs at least one executive");
    double acc = 0.0;
    for (const auto& series : pair_series) {
        detail::require<InvalidArgument>(!series.empty(), "empty overlap series");
        // current minus window mean, accumulated as differences so a constant series gives exactly 0
        double dev = 0.0;
        for (double o : series)
            dev += series.back() - o;
        dev /= static_cast<double>(series.size());
        acc += dev * dev;
    }
    return std::sqrt(acc / static_cast<double>(pair_series.size()));
}

/// Weighted mean with weights rho^0 .. rho^(n-1); the last (most recent) value weighs most.
inline double weighted_temporal_mean(std::span<const double> series, double rho)
{
    detail::require<InvalidArgument>(!series.empty(), "weighted mean of an empty series");
    detail::require<InvalidArgument>(rho > 0.0, "rho must be positive");
    double num = 0.0, den = 0.0, w = 1.0;
    for (double v : series) {
        num += w * v;
        den += w;
        w *= rho;
    }
    return num / den;
}

inline double pair_score(double mean_overlap_bar, double fluctuation_bar, double eps)
{
    detail::require<InvalidArgument>(eps > 0.0, "epsilon must be positive");
    return mean_overlap_bar / (fluctuation_bar + eps);
}

/// Gaussian of the center shift from the previous best box, sigma = (W + H) / 2 of `current`.
inline double smoothness(const BoundingBox& prev_best, const BoundingBox& current)
{
    const double sigma = 0.5 * (current.w + current.h);
    const double dx = prev_best.cx - current.cx;
    const double dy = prev_best.cy - current.cy;
    return std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
}

inline double self_score(std::span<const double> smoothness_history, double rho)
{
    return weighted_temporal_mean(smoothness_history, rho);
}

inline double combine_fitness(double r_pair, double r_self, double mu)
{
    detail::require<InvalidArgument>(mu >= 0.0 && mu <= 1.0, "mu must lie in [0, 1]");
    return mu * r_pair + (1.0 - mu) * r_self;
}

} // namespace facf
