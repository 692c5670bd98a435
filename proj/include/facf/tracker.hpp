#pragma once

// The frame loop: select executives, predict, score, pick the winner, train.

#include <charconv>
#include <chrono>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "facf/channel_map.hpp"
#include "facf/experts.hpp"
#include "facf/selection.hpp"
#include "facf/sequence.hpp"

namespace facf {

enum class TrackerMode { Adaptive, AllExperts };

inline std::string_view to_string(TrackerMode m) noexcept
{
    return m == TrackerMode::Adaptive ? "adaptive" : "all-experts";
}

inline TrackerMode tracker_mode_from_string(std::string_view s)
{
    if (s == "adaptive")
        return TrackerMode::Adaptive;
    if (s == "all-experts")
        return TrackerMode::AllExperts;
    throw ConfigError("mode must be 'adaptive' or 'all-experts', got '" + std::string(s) + "'");
}

/// Expert names joined by commas (e.g. "HOG,HOG+L5"), or "all".
inline std::vector<ExpertId> parse_expert_list(std::string_view s)
{
    if (s == "all")
        return enumerate_pool();
    std::vector<ExpertId> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto comma = s.find(',', pos);
        const std::string item = detail::trim(s.substr(pos, comma == std::string_view::npos ? s.npos : comma - pos));
        if (item.empty())
            throw ConfigError("empty entry in expert list");
        std::uint8_t mask = 0;
        std::size_t p = 0;
        while (p <= item.size()) {
            const auto plus = item.find('+', p);
            const auto name = item.substr(p, plus == std::string::npos ? std::string::npos : plus - p);
            try {
                mask |= static_cast<std::uint8_t>(1u << static_cast<int>(feature_kind_from_string(name)));
            } catch (const InvalidArgument&) {
                throw ConfigError("unknown feature kind '" + name + "' in expert list");
            }
            if (plus == std::string::npos)
                break;
            p = plus + 1;
        }
        const ExpertId id(mask);
        if (std::find(out.begin(), out.end(), id) != out.end())
            throw ConfigError("expert " + id.name() + " listed twice");
        out.push_back(id);
        if (comma == std::string_view::npos)
            break;
        pos = comma + 1;
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Every tunable of a run. Config-file keys are exactly these field names.
struct RunConfig {
    double lambda = 1e-4;
    double eta = 0.01;
    double sigma_factor = 0.1;
    double padding = 2.0;
    int cell_size = 4;
    int template_size = 96;
    int k = 28;
    int delta_t = 5;
    double rho = 1.1;
    double mu = 0.5;
    double epsilon = 1e-6;
    bool include_self_overlap = true;
    int scale_count = 33;
    double scale_step = 1.02;
    double scale_lambda = 1e-2;
    double scale_eta = 0.025;
    double scale_sigma_factor = 0.25;
    double scale_max_area = 512.0;
    bool color_mask = true;
    int color_bins = 32;
    std::uint64_t seed = 0;
    std::string features = "synthetic";  // or a channel-map file path
    std::string mode = "adaptive";
    std::string experts = "all";

    ExpertParams expert_params() const
    {
        ExpertParams p;
        p.lambda = lambda;
        p.sigma_factor = sigma_factor;
        p.eta = eta;
        p.padding = padding;
        p.cell = cell_size;
        p.template_size = template_size;
        p.color_mask = color_mask;
        p.color_bins = color_bins;
        p.scale_count = scale_count;
        p.scale_step = scale_step;
        p.scale_lambda = scale_lambda;
        p.scale_eta = scale_eta;
        p.scale_sigma_factor = scale_sigma_factor;
        p.scale_max_area = scale_max_area;
        return p;
    }

    SelectionConfig selection() const
    {
        return SelectionConfig{k, delta_t, rho, mu, epsilon, include_self_overlap, seed};
    }

    TrackerMode tracker_mode() const { return tracker_mode_from_string(mode); }
    std::vector<ExpertId> pool() const { return parse_expert_list(experts); }

    void validate() const
    {
        try {
            expert_params().validate();
            selection().validate();
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what());
        }
        tracker_mode();
        pool();
        detail::require<ConfigError>(!features.empty(), "features must be 'synthetic' or a channel-map path");
    }

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

struct ConfigField {
    std::string_view name;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

inline std::string config_number(double v)
{
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

template <typename T>
ConfigField numeric_field(std::string_view name, T RunConfig::*member)
{
    return {name,
            [member](const RunConfig& c) {
                if constexpr (std::is_floating_point_v<T>)
                    return config_number(c.*member);
                else
                    return std::to_string(c.*member);
            },
            [member, name](RunConfig& c, const std::string& v) {
                T out{};
                const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
                if (ec != std::errc() || p != v.data() + v.size() || v.empty())
                    throw ConfigError("invalid value '" + v + "' for " + std::string(name));
                c.*member = out;
            }};
}

inline ConfigField bool_field(std::string_view name, bool RunConfig::*member)
{
    return {name, [member](const RunConfig& c) { return std::string(c.*member ? "true" : "false"); },
            [member, name](RunConfig& c, const std::string& v) {
                if (v == "true" || v == "1" || v == "on")
                    c.*member = true;
                else if (v == "false" || v == "0" || v == "off")
                    c.*member = false;
                else
                    throw ConfigError("invalid boolean '" + v + "' for " + std::string(name));
            }};
}

inline ConfigField string_field(std::string_view name, std::string RunConfig::*member)
{
    return {name, [member](const RunConfig& c) { return c.*member; },
            [member](RunConfig& c, const std::string& v) { c.*member = v; }};
}

inline const std::vector<ConfigField>& config_fields()
{
    static const std::vector<ConfigField> fields{
        numeric_field("lambda", &RunConfig::lambda),
        numeric_field("eta", &RunConfig::eta),
        numeric_field("sigma_factor", &RunConfig::sigma_factor),
        numeric_field("padding", &RunConfig::padding),
        numeric_field("cell_size", &RunConfig::cell_size),
        numeric_field("template_size", &RunConfig::template_size),
        numeric_field("k", &RunConfig::k),
        numeric_field("delta_t", &RunConfig::delta_t),
        numeric_field("rho", &RunConfig::rho),
        numeric_field("mu", &RunConfig::mu),
        numeric_field("epsilon", &RunConfig::epsilon),
        bool_field("include_self_overlap", &RunConfig::include_self_overlap),
        numeric_field("scale_count", &RunConfig::scale_count),
        numeric_field("scale_step", &RunConfig::scale_step),
        numeric_field("scale_lambda", &RunConfig::scale_lambda),
        numeric_field("scale_eta", &RunConfig::scale_eta),
        numeric_field("scale_sigma_factor", &RunConfig::scale_sigma_factor),
        numeric_field("scale_max_area", &RunConfig::scale_max_area),
        bool_field("color_mask", &RunConfig::color_mask),
        numeric_field("color_bins", &RunConfig::color_bins),
        numeric_field("seed", &RunConfig::seed),
        string_field("features", &RunConfig::features),
        string_field("mode", &RunConfig::mode),
        string_field("experts", &RunConfig::experts),
    };
    return fields;
}

} // namespace detail

inline void set_config_value(RunConfig& c, std::string_view key, const std::string& value)
{
    for (const auto& f : detail::config_fields())
        if (f.name == key) {
            f.set(c, value);
            return;
        }
    throw ConfigError("unknown config key '" + std::string(key) + "'");
}

/// (key, value) pairs in a fixed order.
inline std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c)
{
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& f : detail::config_fields())
        out.emplace_back(std::string(f.name), f.get(c));
    return out;
}

/// key=value lines; '#' comments and blank lines are ignored. Not validated.
inline RunConfig parse_config(std::istream& in, RunConfig base = {})
{
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        if (detail::trim(line).empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + " is not key=value");
        set_config_value(base, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
    return base;
}

inline RunConfig load_config(const std::filesystem::path& path, RunConfig base = {})
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file " + path.string());
    return parse_config(in, std::move(base));
}

inline std::string format_config(const RunConfig& c)
{
    std::string out;
    for (const auto& [k, v] : config_entries(c))
        out += k + "=" + v + "\n";
    return out;
}

struct FrameRecord {
    BoundingBox box;
    std::vector<ExpertId> executives;
    std::optional<ExpertId> winner;  // empty on the initialization frame
    std::map<ExpertId, BoundingBox> expert_boxes;
    std::map<ExpertId, FitnessBreakdown> fitness;

    friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

/// Equality compares the tracking outcome only, not the config or timings.
struct RunRecord {
    RunConfig config;
    std::string sequence;
    std::vector<FrameRecord> frames;
    std::vector<double> frame_seconds;

    std::vector<BoundingBox> boxes() const
    {
        std::vector<BoundingBox> out;
        for (const auto& f : frames)
            out.push_back(f.box);
        return out;
    }

    friend bool operator==(const RunRecord& a, const RunRecord& b) { return a.frames == b.frames; }
};

inline std::shared_ptr<const FeatureSource> make_feature_source(const RunConfig& c)
{
    if (c.features == "synthetic")
        return std::make_shared<SyntheticFeatureSource>();
    auto file = std::make_shared<const ChannelMapFile>(ChannelMapFile::read(c.features));
    return std::make_shared<ChannelMapFeatureSource>(std::move(file));
}

namespace detail {

/// Re-throws with the frame index prefixed, preserving the exception type.
template <typename F>
auto at_frame(int frame, F&& fn)
{
    const std::string pre = "frame " + std::to_string(frame) + ": ";
    try {
        return fn();
    } catch (const ConfigError& e) {
        throw ConfigError(pre + e.what());
    } catch (const InvalidArgument& e) {
        throw InvalidArgument(pre + e.what());
    } catch (const NotFound& e) {
        throw NotFound(pre + e.what());
    } catch (const FormatError& e) {
        throw FormatError(pre + e.what());
    } catch (const IoError& e) {
        throw IoError(pre + e.what());
    } catch (const TrackingDegenerate& e) {
        throw TrackingDegenerate(pre + e.what());
    } catch (const InvariantError& e) {
        throw InvariantError(pre + e.what());
    }
}

} // namespace detail

class Tracker {
public:
    Tracker(RunConfig config, std::shared_ptr<const FeatureSource> source)
        : config_(std::move(config)), source_(std::move(source)), rng_(0)
    {
        config_.validate();
        mode_ = config_.tracker_mode();
        pool_ = config_.pool();
        selection_ = config_.selection();
        ledger_ = FitnessLedger(selection_.delta_t);
        rng_ = Rng(config_.seed);
        detail::require<InvalidArgument>(source_ != nullptr, "feature source is null");
    }

    /// Frame 0: every pool expert is trained on the ground-truth box.
    FrameRecord init(const cv::Mat& frame, const BoundingBox& box)
    {
        return detail::at_frame(0, [&] {
            detail::require<InvalidArgument>(box.valid(), "initial box is degenerate");
            geometry_ = TrackGeometry::make(box, config_.expert_params(), frame.cols, frame.rows);
            experts_.clear();
            FrameFeatures ff({frame, 0}, *source_, geometry_);
            for (ExpertId id : pool_) {
                Expert e(id, selection_.delta_t);
                e.record(0, box);
                experts_.push_back(train_expert(std::move(e), ff, box, 0));
            }
            frame_ = 0;
            box_ = box;
            FrameRecord r;
            r.box = box;
            r.executives = pool_;
            return r;
        });
    }

    FrameRecord step(const cv::Mat& frame)
    {
        detail::require<InvalidArgument>(frame_ >= 0, "tracker not initialized");
        const int t = frame_ + 1;
        return detail::at_frame(t, [&] {
            FrameRecord r;
            r.executives = choose_executives(t);
            FrameFeatures ff({frame, t}, *source_, geometry_);
            for (ExpertId id : r.executives) {
                auto& e = mutable_expert(id);
                const auto p = predict(e, ff, box_);
                e.record(t, p.box);
                r.expert_boxes.emplace(id, p.box);
            }
            r.fitness = ledger_.evaluate(r.expert_boxes, box_, selection_);
            const auto [winner, box] = pick_best(ledger_, r.executives, r.expert_boxes);
            r.winner = winner;
            r.box = box;
            for (ExpertId id : r.executives) {
                auto& e = mutable_expert(id);
                e = train_expert(std::move(e), ff, box, t);
            }
            box_ = box;
            frame_ = t;
            return r;
        });
    }

    int frame_index() const noexcept { return frame_; }
    const BoundingBox& box() const noexcept { return box_; }
    const RunConfig& config() const noexcept { return config_; }
    const FitnessLedger& ledger() const noexcept { return ledger_; }
    const std::vector<Expert>& experts() const noexcept { return experts_; }
    const TrackGeometry& geometry() const noexcept { return geometry_; }

    const Expert& expert(ExpertId id) const
    {
        for (const auto& e : experts_)
            if (e.id == id)
                return e;
        throw NotFound("expert " + id.name() + " is not in the pool");
    }

private:
    Expert& mutable_expert(ExpertId id) { return const_cast<Expert&>(std::as_const(*this).expert(id)); }

    std::vector<ExpertId> choose_executives(int t)
    {
        const int pool_size = static_cast<int>(pool_.size());
        if (mode_ == TrackerMode::AllExperts || t <= selection_.delta_t || selection_.k >= pool_size)
            return pool_;
        auto probs = selection_probabilities(ledger_);
        if (pool_size < kPoolSize) {
            std::array<bool, kPoolSize> in_pool{};
            for (ExpertId id : pool_)
                in_pool[static_cast<std::size_t>(id.index())] = true;
            double mass = 0.0;
            for (std::size_t i = 0; i < probs.size(); ++i) {
                if (!in_pool[i])
                    probs[i] = 0.0;
                mass += probs[i];
            }
            for (std::size_t i = 0; i < probs.size(); ++i)
                probs[i] = mass > 0.0 ? probs[i] / mass : (in_pool[i] ? 1.0 / pool_size : 0.0);
        }
        auto chosen = select_executives(probs, selection_.k, rng_);
        for (ExpertId id : chosen)
            detail::require<InvariantError>(std::binary_search(pool_.begin(), pool_.end(), id),
                                            "selected an expert outside the pool");
        return chosen;
    }

    RunConfig config_;
    std::shared_ptr<const FeatureSource> source_;
    TrackerMode mode_ = TrackerMode::Adaptive;
    std::vector<ExpertId> pool_;
    SelectionConfig selection_;
    FitnessLedger ledger_;
    Rng rng_;
    TrackGeometry geometry_;
    std::vector<Expert> experts_;
    int frame_ = -1;
    BoundingBox box_;
};

/// Tracks the whole sequence from its first ground-truth box (one-pass evaluation).
inline RunRecord run_tracker(const RunConfig& config, const Sequence& seq,
                             std::shared_ptr<const FeatureSource> source = nullptr)
{
    config.validate();
    detail::require<InvalidArgument>(seq.frame_count() >= 1, "sequence has no frames");
    if (!source)
        source = make_feature_source(config);
    Tracker tracker(config, std::move(source));
    RunRecord rec;
    rec.config = config;
    rec.sequence = seq.name;
    using clock = std::chrono::steady_clock;
    for (int f = 0; f < seq.frame_count(); ++f) {
        const auto img = detail::at_frame(f, [&] { return seq.frame(f); });
        const auto t0 = clock::now();
        rec.frames.push_back(f == 0 ? tracker.init(img, seq.ground_truth[0]) : tracker.step(img));
        rec.frame_seconds.push_back(std::chrono::duration<double>(clock::now() - t0).count());
    }
    return rec;
}

} // namespace facf
