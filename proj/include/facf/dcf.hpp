#pragma once

// Linear multi-channel discriminative correlation filter in the Fourier domain.
//
// Training solves the ridge regression over all circular shifts of a patch:
//   A_d = conj(X_d) * Y,   B = sum_i conj(X_i) * X_i,   W_d = A_d / (B + lambda)
// and detection evaluates
//   R = IDFT( sum_d W_d * Z_d )
// which is the circular cross-correlation of the learned filter with z.
// With this form a circular shift of the candidate moves the response peak by
// the same shift.

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "facf/error.hpp"
#include "facf/fft.hpp"
#include "facf/grid.hpp"

namespace facf {

struct DcfParams {
    double lambda = 1e-4;
    double sigma_factor = 0.1;
    double eta = 0.01;
};

/// Multi-channel feature tensor for one image patch.
class FeatureStack {
public:
    FeatureStack() = default;
    explicit FeatureStack(std::vector<RealGrid> channels) : channels_(std::move(channels)) { validate(); }

    int rows() const noexcept { return channels_.empty() ? 0 : channels_.front().rows(); }
    int cols() const noexcept { return channels_.empty() ? 0 : channels_.front().cols(); }
    int depth() const noexcept { return static_cast<int>(channels_.size()); }
    bool empty() const noexcept { return channels_.empty(); }

    const RealGrid& channel(int d) const { return channels_.at(static_cast<std::size_t>(d)); }
    const std::vector<RealGrid>& channels() const noexcept { return channels_; }

    void push_back(RealGrid channel)
    {
        detail::require<InvalidArgument>(channels_.empty() || channel.same_shape(channels_.front()),
                                         "feature channel dimensions differ");
        channels_.push_back(std::move(channel));
    }

    friend bool operator==(const FeatureStack&, const FeatureStack&) = default;

private:
    void validate() const
    {
        for (const auto& ch : channels_) {
            detail::require<InvalidArgument>(ch.same_shape(channels_.front()), "feature channel dimensions differ");
            for (double v : ch)
                detail::require<InvalidArgument>(std::isfinite(v), "feature value is not finite");
        }
    }

    std::vector<RealGrid> channels_;
};

struct GaussianLabel {
    RealGrid grid;
    double sigma_factor = 0.0;
};

/// Fourier-domain filter state. Values are never mutated in place by the
/// free functions below; update_model returns a fresh model.
struct FilterModel {
    std::vector<ComplexGrid> numerator;  // A_d, one per channel
    ComplexGrid denominator;             // B, shared across channels
    ComplexGrid label_hat;               // DFT of the training label
    double lambda = 0.0;

    int rows() const noexcept { return denominator.rows(); }
    int cols() const noexcept { return denominator.cols(); }
    int depth() const noexcept { return static_cast<int>(numerator.size()); }

    friend bool operator==(const FilterModel&, const FilterModel&) = default;
};

struct Peak {
    int row = 0;
    int col = 0;
    friend bool operator==(const Peak&, const Peak&) = default;
};

struct ResponseMap {
    RealGrid grid;
    Peak peak;
    double peak_value = 0.0;
};

/// Maximum with ties broken by smallest row, then smallest column.
inline Peak find_peak(const RealGrid& g, double* value = nullptr)
{
    detail::require<InvalidArgument>(!g.empty(), "find_peak on empty grid");
    Peak best;
    double best_v = g(0, 0);
    for (int r = 0; r < g.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c)
            if (g(r, c) > best_v) {
                best_v = g(r, c);
                best = {r, c};
            }
    if (value)
        *value = best_v;
    return best;
}

inline ResponseMap make_response(RealGrid grid)
{
    ResponseMap m;
    m.peak = find_peak(grid, &m.peak_value);
    m.grid = std::move(grid);
    return m;
}

/// Signed circular displacement of a bin index: values past the midpoint wrap negative.
inline int wrap_displacement(int idx, int size) noexcept
{
    return idx > (size - 1) / 2 ? idx - size : idx;
}

/// Gaussian regression target with its peak at zero shift (bin (0,0)).
inline GaussianLabel make_gaussian_label(int rows, int cols, double target_h, double target_w, double sigma_factor)
{
    detail::require<InvalidArgument>(rows >= 1 && cols >= 1, "label dimensions must be positive");
    detail::require<InvalidArgument>(sigma_factor > 0.0, "sigma_factor must be positive");
    detail::require<InvalidArgument>(target_h > 0.0 && target_w > 0.0, "target size must be positive");
    const double sigma = sigma_factor * std::sqrt(target_h * target_w);
    const double inv = 1.0 / (2.0 * sigma * sigma);
    GaussianLabel label{RealGrid(rows, cols), sigma_factor};
    for (int r = 0; r < rows; ++r) {
        const double dm = wrap_displacement(r, rows);
        for (int c = 0; c < cols; ++c) {
            const double dn = wrap_displacement(c, cols);
            label.grid(r, c) = std::exp(-(dm * dm + dn * dn) * inv);
        }
    }
    return label;
}

/// 0.5 * (1 - cos(2*pi*k / (L-1))); length 1 is defined as {1.0}.
inline std::vector<double> hann(int length)
{
    detail::require<InvalidArgument>(length >= 1, "hann length must be positive");
    if (length == 1)
        return {1.0};
    std::vector<double> w(static_cast<std::size_t>(length));
    for (int k = 0; k < length; ++k)
        w[static_cast<std::size_t>(k)] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * k / (length - 1)));
    return w;
}

inline RealGrid hann2d(int rows, int cols)
{
    const auto wr = hann(rows);
    const auto wc = hann(cols);
    RealGrid w(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            w(r, c) = wr[static_cast<std::size_t>(r)] * wc[static_cast<std::size_t>(c)];
    return w;
}

inline FeatureStack multiply_each(const FeatureStack& features, const RealGrid& weights)
{
    detail::require<InvalidArgument>(weights.rows() == features.rows() && weights.cols() == features.cols(),
                                     "weight grid does not match feature dimensions");
    std::vector<RealGrid> out;
    out.reserve(features.channels().size());
    for (const auto& ch : features.channels()) {
        RealGrid m(ch.rows(), ch.cols());
        for (std::size_t i = 0; i < ch.size(); ++i)
            m.data()[i] = ch.data()[i] * weights.data()[i];
        out.push_back(std::move(m));
    }
    return FeatureStack(std::move(out));
}

inline FeatureStack apply_hann(const FeatureStack& features)
{
    if (features.empty())
        return features;
    return multiply_each(features, hann2d(features.rows(), features.cols()));
}

/// Per-channel 2-D DFTs of a feature stack, computed once and shared by every
/// filter that consumes the same patch.
struct FeatureSpectrum {
    std::vector<ComplexGrid> channels;

    int rows() const noexcept { return channels.empty() ? 0 : channels.front().rows(); }
    int cols() const noexcept { return channels.empty() ? 0 : channels.front().cols(); }
    int depth() const noexcept { return static_cast<int>(channels.size()); }
};

inline FeatureSpectrum spectrum(const FeatureStack& f)
{
    FeatureSpectrum s;
    s.channels.reserve(f.channels().size());
    for (const auto& ch : f.channels())
        s.channels.push_back(dft2(ch));
    return s;
}

namespace detail {

inline void check_dims(const FeatureStack& f, const RealGrid& label)
{
    require<InvalidArgument>(!f.empty(), "feature stack is empty");
    require<InvalidArgument>(f.rows() == label.rows() && f.cols() == label.cols(),
                             "feature and label dimensions differ");
}

struct FrameTerms {
    std::vector<ComplexGrid> numerator;
    ComplexGrid energy;
};

inline FrameTerms frame_terms(std::span<const ComplexGrid> spectra, const ComplexGrid& label_hat)
{
    FrameTerms t;
    t.energy = ComplexGrid(label_hat.rows(), label_hat.cols());
    t.numerator.reserve(spectra.size());
    for (const auto& xh : spectra) {
        ComplexGrid a(xh.rows(), xh.cols());
        for (std::size_t i = 0; i < xh.size(); ++i) {
            const auto x = xh.data()[i];
            a.data()[i] = std::conj(x) * label_hat.data()[i];
            t.energy.data()[i] += std::norm(x);
        }
        t.numerator.push_back(std::move(a));
    }
    return t;
}

} // namespace detail

inline FilterModel train_filter(const FeatureSpectrum& features, ComplexGrid label_hat, double lambda)
{
    detail::require<InvalidArgument>(features.depth() > 0, "feature stack is empty");
    detail::require<InvalidArgument>(features.rows() == label_hat.rows() && features.cols() == label_hat.cols(),
                                     "feature and label dimensions differ");
    detail::require<InvalidArgument>(lambda >= 0.0, "lambda must be non-negative");
    FilterModel m;
    m.label_hat = std::move(label_hat);
    m.lambda = lambda;
    auto terms = detail::frame_terms(features.channels, m.label_hat);
    m.numerator = std::move(terms.numerator);
    m.denominator = std::move(terms.energy);
    return m;
}

inline FilterModel train_filter(const FeatureStack& features, const GaussianLabel& label, double lambda)
{
    detail::check_dims(features, label.grid);
    detail::require<InvalidArgument>(lambda >= 0.0, "lambda must be non-negative");
    return train_filter(spectrum(features), dft2(label.grid), lambda);
}

/// Fourier-domain filter W_d = A_d / (B + lambda) for every channel.
inline std::vector<ComplexGrid> filter_coefficients(const FilterModel& model)
{
    std::vector<ComplexGrid> w;
    w.reserve(model.numerator.size());
    for (const auto& a : model.numerator) {
        ComplexGrid wd(a.rows(), a.cols());
        for (std::size_t i = 0; i < a.size(); ++i)
            wd.data()[i] = a.data()[i] / (model.denominator.data()[i] + model.lambda);
        w.push_back(std::move(wd));
    }
    return w;
}

inline ResponseMap respond(const FilterModel& model, const FeatureSpectrum& candidate)
{
    detail::require<InvalidArgument>(candidate.depth() == model.depth(), "candidate channel count differs from model");
    detail::require<InvalidArgument>(candidate.rows() == model.rows() && candidate.cols() == model.cols(),
                                     "candidate dimensions differ from model");
    ComplexGrid acc(model.rows(), model.cols());
    for (int d = 0; d < model.depth(); ++d) {
        const auto& zh = candidate.channels[static_cast<std::size_t>(d)];
        const auto& a = model.numerator[static_cast<std::size_t>(d)];
        for (std::size_t i = 0; i < acc.size(); ++i)
            acc.data()[i] += a.data()[i] / (model.denominator.data()[i] + model.lambda) * zh.data()[i];
    }
    return make_response(idft2_real(acc));
}

inline ResponseMap respond(const FilterModel& model, const FeatureStack& candidate)
{
    detail::require<InvalidArgument>(candidate.depth() == model.depth(), "candidate channel count differs from model");
    detail::require<InvalidArgument>(candidate.rows() == model.rows() && candidate.cols() == model.cols(),
                                     "candidate dimensions differ from model");
    return respond(model, spectrum(candidate));
}

/// Blends one frame into the model, keeping the model's label.
inline FilterModel update_model(const FilterModel& model, const FeatureSpectrum& features, double eta)
{
    detail::require<InvalidArgument>(eta > 0.0 && eta <= 1.0, "eta must lie in (0, 1]");
    detail::require<InvalidArgument>(features.depth() == model.depth(), "feature channel count differs from model");
    detail::require<InvalidArgument>(features.rows() == model.rows() && features.cols() == model.cols(),
                                     "feature dimensions differ from model");
    FilterModel next;
    next.lambda = model.lambda;
    next.label_hat = model.label_hat;
    auto terms = detail::frame_terms(features.channels, next.label_hat);
    const double keep = 1.0 - eta;
    next.numerator.reserve(model.numerator.size());
    for (std::size_t d = 0; d < model.numerator.size(); ++d) {
        ComplexGrid a(model.rows(), model.cols());
        for (std::size_t i = 0; i < a.size(); ++i)
            a.data()[i] = keep * model.numerator[d].data()[i] + eta * terms.numerator[d].data()[i];
        next.numerator.push_back(std::move(a));
    }
    next.denominator = ComplexGrid(model.rows(), model.cols());
    for (std::size_t i = 0; i < next.denominator.size(); ++i)
        next.denominator.data()[i] = keep * model.denominator.data()[i] + eta * terms.energy.data()[i];
    return next;
}

inline FilterModel update_model(const FilterModel& model, const FeatureStack& features, const GaussianLabel& label,
                                double eta)
{
    detail::require<InvalidArgument>(eta > 0.0 && eta <= 1.0, "eta must lie in (0, 1]");
    detail::check_dims(features, label.grid);
    detail::require<InvalidArgument>(features.rows() == model.rows() && features.cols() == model.cols(),
                                     "feature dimensions differ from model");
    FilterModel relabeled = model;
    relabeled.label_hat = dft2(label.grid);
    return update_model(relabeled, spectrum(features), eta);
}

} // namespace facf
