#pragma once

// One expert = one non-empty subset of the feature pool with its own
// translation filters (one per member kind) and a DSST-style scale filter.

#include <cmath>
#include <deque>
#include <map>
#include <memory>
#include <span>
#include <tuple>
#include <vector>

#include "facf/bbox.hpp"
#include "facf/dcf.hpp"
#include "facf/expert_id.hpp"
#include "facf/features.hpp"
#include "facf/hog.hpp"

namespace facf {

struct ExpertParams {
    double lambda = 1e-4;
    double sigma_factor = 0.1;
    double eta = 0.01;
    double padding = 2.0;
    int cell = 4;
    int template_size = 96;  // longest side of the resampled search window, pixels
    bool color_mask = true;
    int color_bins = 32;
    int scale_count = 33;
    double scale_step = 1.02;
    double scale_lambda = 1e-2;
    double scale_eta = 0.025;
    double scale_sigma_factor = 0.25;
    double scale_max_area = 512.0;

    void validate() const
    {
        detail::require<InvalidArgument>(lambda >= 0.0 && std::isfinite(lambda), "lambda must be non-negative");
        detail::require<InvalidArgument>(sigma_factor > 0.0, "sigma_factor must be positive");
        detail::require<InvalidArgument>(eta > 0.0 && eta <= 1.0, "eta must lie in (0, 1]");
        detail::require<InvalidArgument>(padding > 1.0, "padding must exceed 1");
        detail::require<InvalidArgument>(cell >= 1, "cell size must be positive");
        detail::require<InvalidArgument>(template_size >= 4 * cell, "template_size must span at least four cells");
        detail::require<InvalidArgument>(color_bins >= 2 && color_bins <= 256, "color_bins must lie in [2, 256]");
        detail::require<InvalidArgument>(scale_count >= 1, "scale_count must be positive");
        detail::require<InvalidArgument>(scale_step > 1.0, "scale_step must exceed 1");
        detail::require<InvalidArgument>(scale_lambda > 0.0, "scale_lambda must be positive");
        detail::require<InvalidArgument>(scale_eta > 0.0 && scale_eta <= 1.0, "scale_eta must lie in (0, 1]");
        detail::require<InvalidArgument>(scale_sigma_factor > 0.0, "scale_sigma_factor must be positive");
        detail::require<InvalidArgument>(scale_max_area >= 16.0, "scale_max_area too small");
    }
};

/// Everything fixed at initialization: template grid, labels and scale ladder.
struct TrackGeometry {
    ExpertParams params;
    GridShape grid;
    GaussianLabel label;
    ComplexGrid label_hat;
    int scale_rows = 0;
    int scale_cols = 0;
    std::vector<double> scale_factors;
    std::vector<double> scale_window;
    ComplexGrid scale_label_hat;  // 1 x S
    int image_width = 0;
    int image_height = 0;

    static TrackGeometry make(const BoundingBox& init, const ExpertParams& params, int image_width, int image_height)
    {
        params.validate();
        detail::require<InvalidArgument>(init.valid(), "initial box is degenerate");
        detail::require<InvalidArgument>(image_width >= 1 && image_height >= 1, "empty frame");
        TrackGeometry g;
        g.params = params;
        g.image_width = image_width;
        g.image_height = image_height;

        const double ww = init.w * params.padding, wh = init.h * params.padding;
        const double ts = params.template_size / std::max(ww, wh);
        auto cells = [&](double len) { return std::max(4, static_cast<int>(std::floor(len * ts / params.cell))); };
        g.grid = GridShape{cells(wh) * params.cell, cells(ww) * params.cell, params.cell};
        g.label = make_gaussian_label(g.grid.rows(), g.grid.cols(), g.grid.rows() / params.padding,
                                      g.grid.cols() / params.padding, params.sigma_factor);
        g.label_hat = dft2(g.label.grid);

        const double area = init.w * init.h;
        const double sf = area > params.scale_max_area ? std::sqrt(params.scale_max_area / area) : 1.0;
        g.scale_rows = std::max(2 * params.cell, static_cast<int>(std::floor(init.h * sf)));
        g.scale_cols = std::max(2 * params.cell, static_cast<int>(std::floor(init.w * sf)));

        const int S = params.scale_count;
        const int c = S / 2;
        const double sigma = std::sqrt(static_cast<double>(S)) * params.scale_sigma_factor;
        RealGrid ys(1, S);
        for (int i = 0; i < S; ++i) {
            g.scale_factors.push_back(std::pow(params.scale_step, i - c));
            const double d = i - c;
            ys(0, i) = std::exp(-0.5 * d * d / (sigma * sigma));
        }
        g.scale_window = hann(S);
        g.scale_label_hat = dft_rows(ys);
        return g;
    }

    PatchSpec search_patch(const BoundingBox& at) const
    {
        return PatchSpec{at.cx, at.cy, at.w * params.padding, at.h * params.padding, 1.0};
    }
    double stride_x(const BoundingBox& at) const { return at.w * params.padding / grid.cols(); }
    double stride_y(const BoundingBox& at) const { return at.h * params.padding / grid.rows(); }
    int scale_center() const noexcept { return params.scale_count / 2; }
};

/// Per-frame feature cache: spectra are computed once per (box, kind) and shared by all experts.
class FrameFeatures {
public:
    FrameFeatures(FrameView frame, const FeatureSource& source, const TrackGeometry& geometry)
        : frame_(std::move(frame)), source_(&source), geo_(&geometry)
    {
    }

    const FrameView& frame() const noexcept { return frame_; }
    const TrackGeometry& geometry() const noexcept { return *geo_; }

    /// Hann-windowed search spectrum of one kind at `at`.
    const FeatureSpectrum& search(const BoundingBox& at, FeatureKind kind) { return windowed(at, kind, false); }

    /// Training spectrum: optionally color-masked, then Hann-windowed.
    const FeatureSpectrum& training(const BoundingBox& at, FeatureKind kind, bool masked)
    {
        return windowed(at, kind, masked);
    }

    /// Row DFTs of the D x S scale-sample matrix around `at`.
    const ComplexGrid& scale_samples(const BoundingBox& at)
    {
        const auto key = box_key(at);
        if (auto it = scale_.find(key); it != scale_.end())
            return it->second;
        const auto& g = *geo_;
        const int S = g.params.scale_count;
        RealGrid m;
        for (int i = 0; i < S; ++i) {
            const double f = g.scale_factors[static_cast<std::size_t>(i)];
            const PatchSpec p{at.cx, at.cy, std::max(1.0, at.w * f), std::max(1.0, at.h * f), 1.0};
            const auto h = fhog(sample_patch(frame_.image, p, g.scale_rows, g.scale_cols), g.params.cell);
            const int per = h.rows() * h.cols();
            if (i == 0)
                m = RealGrid(h.depth() * per, S);
            const double w = g.scale_window[static_cast<std::size_t>(i)];
            for (int d = 0; d < h.depth(); ++d)
                for (int j = 0; j < per; ++j)
                    m(d * per + j, i) = h.channel(d).data()[j] * w;
        }
        return scale_.emplace(key, dft_rows(m)).first->second;
    }

private:
    using BoxKey = std::tuple<double, double, double, double>;
    static BoxKey box_key(const BoundingBox& b) { return {b.cx, b.cy, b.w, b.h}; }

    const FeatureStack& raw(const BoundingBox& at, FeatureKind kind)
    {
        const auto key = std::tuple_cat(box_key(at), std::tuple<int>(static_cast<int>(kind)));
        if (auto it = raw_.find(key); it != raw_.end())
            return it->second;
        const std::array<FeatureKind, 1> k{kind};
        auto stacks = source_->extract(frame_, geo_->search_patch(at), k, geo_->grid);
        detail::require<InvariantError>(stacks.size() == 1 && stacks[0].rows() == geo_->grid.rows() &&
                                            stacks[0].cols() == geo_->grid.cols(),
                                        "feature source returned a stack of the wrong shape");
        return raw_.emplace(key, std::move(stacks[0])).first->second;
    }

    const RealGrid& mask(const BoundingBox& at)
    {
        const auto key = box_key(at);
        if (auto it = mask_.find(key); it != mask_.end())
            return it->second;
        const auto& g = *geo_;
        auto m = color_mask(frame_.image, g.search_patch(at), at, g.params.color_bins, g.grid).grid;
        return mask_.emplace(key, std::move(m)).first->second;
    }

    const FeatureSpectrum& windowed(const BoundingBox& at, FeatureKind kind, bool masked)
    {
        const auto key = std::tuple_cat(box_key(at), std::tuple<int, bool>(static_cast<int>(kind), masked));
        if (auto it = spectra_.find(key); it != spectra_.end())
            return it->second;
        const auto& x = raw(at, kind);
        auto s = spectrum(apply_hann(masked ? multiply_each(x, mask(at)) : x));
        return spectra_.emplace(key, std::move(s)).first->second;
    }

    FrameView frame_;
    const FeatureSource* source_;
    const TrackGeometry* geo_;
    std::map<std::tuple<double, double, double, double, int>, FeatureStack> raw_;
    std::map<std::tuple<double, double, double, double, int, bool>, FeatureSpectrum> spectra_;
    std::map<BoxKey, RealGrid> mask_;
    std::map<BoxKey, ComplexGrid> scale_;
};

struct ScaleModel {
    ComplexGrid numerator;    // D x S
    ComplexGrid denominator;  // 1 x S

    bool trained() const noexcept { return !numerator.empty(); }
    friend bool operator==(const ScaleModel&, const ScaleModel&) = default;
};

struct BoxRecord {
    int frame = 0;
    BoundingBox box;
    friend bool operator==(const BoxRecord&, const BoxRecord&) = default;
};

struct Expert {
    ExpertId id;
    std::vector<FilterModel> models;  // one per member kind, canonical kind order
    ScaleModel scale;
    std::deque<BoxRecord> history;
    int history_capacity = 5;
    int last_trained_frame = -1;

    Expert() = default;
    Expert(ExpertId id_, int capacity) : id(id_), history_capacity(capacity)
    {
        detail::require<InvalidArgument>(capacity >= 1, "history capacity must be positive");
    }

    bool trained() const noexcept { return !models.empty(); }

    void record(int frame, const BoundingBox& box)
    {
        detail::require<InvariantError>(history.empty() || history.back().frame < frame,
                                        "box history must be ordered by frame");
        history.push_back({frame, box});
        while (static_cast<int>(history.size()) > history_capacity)
            history.pop_front();
    }

    friend bool operator==(const Expert&, const Expert&) = default;
};

/// Weighted sum of equally sized maps, weights normalized to sum 1.
inline ResponseMap fuse_responses(std::span<const ResponseMap> maps, std::span<const double> weights)
{
    detail::require<InvalidArgument>(!maps.empty() && maps.size() == weights.size(),
                                     "need one weight per response map");
    double total = 0.0;
    for (double w : weights) {
        detail::require<InvalidArgument>(w >= 0.0 && std::isfinite(w), "fusion weights must be non-negative");
        total += w;
    }
    detail::require<InvalidArgument>(total > 0.0, "at least one fusion weight must be positive");
    const auto& first = maps.front().grid;
    RealGrid out(first.rows(), first.cols());
    for (std::size_t k = 0; k < maps.size(); ++k) {
        detail::require<InvalidArgument>(maps[k].grid.same_shape(first), "response map dimensions differ");
        const double w = weights[k] / total;
        for (std::size_t i = 0; i < out.size(); ++i)
            out.data()[i] += w * maps[k].grid.data()[i];
    }
    return make_response(std::move(out));
}

/// Peak position as a signed circular displacement in cells, refined by a
/// parabola through the peak and its two neighbours along each axis.
inline std::pair<double, double> subpixel_displacement(const ResponseMap& r)
{
    const auto& g = r.grid;
    auto refine = [](double l, double c, double rr) {
        const double den = l - 2.0 * c + rr;
        if (!(den < 0.0))
            return 0.0;
        return std::clamp(0.5 * (l - rr) / den, -0.5, 0.5);
    };
    const int pr = r.peak.row, pc = r.peak.col;
    double dy = wrap_displacement(pr, g.rows());
    double dx = wrap_displacement(pc, g.cols());
    if (g.rows() >= 3)
        dy += refine(g.wrapped(pr - 1, pc), g(pr, pc), g.wrapped(pr + 1, pc));
    if (g.cols() >= 3)
        dx += refine(g.wrapped(pr, pc - 1), g(pr, pc), g.wrapped(pr, pc + 1));
    return {dy, dx};
}

/// Scale multiplier relative to `at`'s size; ties and flat responses prefer the unchanged scale.
inline double search_scale(const Expert& e, FrameFeatures& ff, const BoundingBox& at)
{
    const auto& g = ff.geometry();
    if (!e.scale.trained() || g.params.scale_count == 1)
        return 1.0;
    const auto& z = ff.scale_samples(at);
    detail::require<InvalidArgument>(z.rows() == e.scale.numerator.rows() && z.cols() == e.scale.numerator.cols(),
                                     "scale sample dimensions differ from model");
    const int S = z.cols();
    ComplexGrid acc(1, S);
    for (int d = 0; d < z.rows(); ++d)
        for (int i = 0; i < S; ++i)
            acc(0, i) += e.scale.numerator(d, i) * z(d, i);
    for (int i = 0; i < S; ++i)
        acc(0, i) /= e.scale.denominator(0, i) + g.params.scale_lambda;
    const ComplexGrid resp = idft_rows(acc);
    const int c = g.scale_center();
    int best = c;
    double best_v = resp(0, c).real();
    for (int i = 0; i < S; ++i) {
        const double v = resp(0, i).real();
        if (!std::isfinite(v))
            return 1.0;
        if (v > best_v || (v == best_v && std::abs(i - c) < std::abs(best - c)))
            best = i, best_v = v;
    }
    return g.scale_factors[static_cast<std::size_t>(best)];
}

struct Prediction {
    BoundingBox box;
    ResponseMap response;
    double scale = 1.0;
};

/// Translation from the fused response at prev_box, then scale search at the new center.
inline Prediction predict(const Expert& e, FrameFeatures& ff, const BoundingBox& prev_box)
{
    detail::require<InvalidArgument>(e.trained(), "expert has no trained models");
    detail::require<InvalidArgument>(prev_box.valid(), "previous box is degenerate");
    const auto& g = ff.geometry();
    const auto kinds = e.id.members();
    std::vector<ResponseMap> maps;
    maps.reserve(kinds.size());
    for (std::size_t i = 0; i < kinds.size(); ++i)
        maps.push_back(respond(e.models[i], ff.search(prev_box, kinds[i])));
    const std::vector<double> weights(kinds.size(), 1.0);

    Prediction p;
    p.response = fuse_responses(maps, weights);
    bool finite = true;
    for (double v : p.response.grid)
        finite = finite && std::isfinite(v);
    BoundingBox moved = prev_box;
    if (finite) {
        const auto [dy, dx] = subpixel_displacement(p.response);
        moved.cx += dx * g.stride_x(prev_box);
        moved.cy += dy * g.stride_y(prev_box);
    }
    moved = clamp_box(moved, g.image_width, g.image_height);
    p.scale = search_scale(e, ff, moved);
    moved.w *= p.scale;
    moved.h *= p.scale;
    p.box = clamp_box(moved, g.image_width, g.image_height);
    return p;
}

/// Updates (or first trains) every member filter and the scale filter on `box`.
inline Expert train_expert(Expert e, FrameFeatures& ff, const BoundingBox& box, int frame_index)
{
    detail::require<InvalidArgument>(box.valid(), "training box is degenerate");
    const auto& g = ff.geometry();
    const auto kinds = e.id.members();
    const bool first = !e.trained();
    if (first)
        e.models.reserve(kinds.size());
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        const auto& x = ff.training(box, kinds[i], g.params.color_mask);
        if (first)
            e.models.push_back(train_filter(x, g.label_hat, g.params.lambda));
        else
            e.models[i] = update_model(e.models[i], x, g.params.eta);
    }

    if (g.params.scale_count > 1) {
        const auto& xs = ff.scale_samples(box);
        const int D = xs.rows(), S = xs.cols();
        ComplexGrid num(D, S), den(1, S);
        for (int d = 0; d < D; ++d)
            for (int i = 0; i < S; ++i) {
                const auto x = xs(d, i);
                num(d, i) = std::conj(x) * g.scale_label_hat(0, i);
                den(0, i) += std::norm(x);
            }
        if (!e.scale.trained()) {
            e.scale = ScaleModel{std::move(num), std::move(den)};
        } else {
            const double eta = g.params.scale_eta, keep = 1.0 - eta;
            for (std::size_t i = 0; i < num.size(); ++i)
                e.scale.numerator.data()[i] = keep * e.scale.numerator.data()[i] + eta * num.data()[i];
            for (std::size_t i = 0; i < den.size(); ++i)
                e.scale.denominator.data()[i] = keep * e.scale.denominator.data()[i] + eta * den.data()[i];
        }
    }
    e.last_trained_frame = frame_index;
    return e;
}

} // namespace facf
