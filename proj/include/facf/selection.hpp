#pragma once

// Fitness bookkeeping and roulette selection of executive experts.

#include <algorithm>
#include <array>
#include <map>
#include <span>
#include <vector>

#include "facf/bbox.hpp"
#include "facf/evaluation.hpp"
#include "facf/expert_id.hpp"
#include "facf/rng.hpp"

namespace facf {

struct SelectionConfig {
    int k = 28;
    int delta_t = 5;
    double rho = 1.1;
    double mu = 0.5;
    double epsilon = 1e-6;
    bool include_self_overlap = true;
    std::uint64_t rng_seed = 0;

    void validate() const
    {
        detail::require<InvalidArgument>(k >= 1 && k <= kPoolSize, "K must lie in [1, 63]");
        detail::require<InvalidArgument>(delta_t >= 1, "delta_t must be at least 1");
        detail::require<InvalidArgument>(rho > 1.0, "rho must be greater than 1");
        detail::require<InvalidArgument>(mu >= 0.0 && mu <= 1.0, "mu must lie in [0, 1]");
        detail::require<InvalidArgument>(epsilon > 0.0, "epsilon must be positive");
    }
};

/// Bounded history; the oldest value is dropped once capacity is reached.
class Window {
public:
    Window() = default;
    explicit Window(int capacity) : capacity_(static_cast<std::size_t>(capacity)) {}

    void push(double v)
    {
        if (values_.size() == capacity_)
            values_.erase(values_.begin());
        values_.push_back(v);
    }
    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    friend bool operator==(const Window&, const Window&) = default;

private:
    std::size_t capacity_ = 1;
    std::vector<double> values_;
};

struct FitnessBreakdown {
    double mean_overlap = 0.0;      // M at this frame
    double fluctuation = 0.0;       // V at this frame
    double mean_overlap_bar = 0.0;  // weighted M over the window
    double fluctuation_bar = 0.0;   // weighted V over the window
    double r_pair = 0.0;
    double smoothness = 0.0;        // S at this frame
    double r_self = 0.0;
    double r = 0.0;

    friend bool operator==(const FitnessBreakdown&, const FitnessBreakdown&) = default;
};

/// Per-expert state that feeds the fitness degree.
struct ExpertFitness {
    double fitness = 1.0;
    Window mean_overlaps;
    Window fluctuations;
    Window smoothness;

    friend bool operator==(const ExpertFitness&, const ExpertFitness&) = default;
};

class FitnessLedger {
public:
    explicit FitnessLedger(int delta_t = 5, double initial_fitness = 1.0) : delta_t_(delta_t)
    {
        detail::require<InvalidArgument>(delta_t >= 1, "delta_t must be at least 1");
        for (auto& e : experts_)
            e = ExpertFitness{initial_fitness, Window(delta_t), Window(delta_t), Window(delta_t)};
        pairs_.assign(static_cast<std::size_t>(kPoolSize * kPoolSize), Window(delta_t));
    }

    int delta_t() const noexcept { return delta_t_; }

    double fitness(ExpertId id) const noexcept { return experts_[static_cast<std::size_t>(id.index())].fitness; }
    const ExpertFitness& expert(ExpertId id) const noexcept { return experts_[static_cast<std::size_t>(id.index())]; }
    const Window& pair_history(ExpertId n, ExpertId k) const noexcept { return pairs_[pair_index(n, k)]; }

    std::array<double, kPoolSize> fitness_values() const noexcept
    {
        std::array<double, kPoolSize> out{};
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = experts_[i].fitness;
        return out;
    }

    void set_fitness(ExpertId id, double value)
    {
        detail::require<InvariantError>(value >= 0.0 && std::isfinite(value), "fitness must be finite and non-negative");
        experts_[static_cast<std::size_t>(id.index())].fitness = value;
    }

    /// Scores every executive from this frame's boxes and the previous final box,
    /// appending to its histories and replacing its fitness. Experts outside
    /// `boxes` are left untouched.
    std::map<ExpertId, FitnessBreakdown> evaluate(const std::map<ExpertId, BoundingBox>& boxes,
                                                  const BoundingBox& prev_best, const SelectionConfig& cfg)
    {
        detail::require<InvalidArgument>(!boxes.empty(), "no executive boxes to evaluate");
        std::map<ExpertId, FitnessBreakdown> out;
        for (const auto& [n, box_n] : boxes) {
            std::vector<double> current;
            std::vector<std::vector<double>> series;
            for (const auto& [k, box_k] : boxes) {
                if (n == k && !cfg.include_self_overlap)
                    continue;
                const double o = n == k ? 1.0 : overlap(box_n, box_k);
                auto& hist = pairs_[pair_index(n, k)];
                hist.push(o);
                current.push_back(o);
                series.emplace_back(hist.values().begin(), hist.values().end());
            }
            FitnessBreakdown b;
            auto& st = experts_[static_cast<std::size_t>(n.index())];
            if (current.empty()) {
                // single executive with the self term excluded: no peers to agree with
                b.mean_overlap = 1.0;
                b.fluctuation = 0.0;
            } else {
                b.mean_overlap = mean_overlap(current);
                b.fluctuation = fluctuation(series);
            }
            st.mean_overlaps.push(b.mean_overlap);
            st.fluctuations.push(b.fluctuation);
            b.mean_overlap_bar = weighted_temporal_mean(st.mean_overlaps.values(), cfg.rho);
            b.fluctuation_bar = weighted_temporal_mean(st.fluctuations.values(), cfg.rho);
            b.r_pair = pair_score(b.mean_overlap_bar, b.fluctuation_bar, cfg.epsilon);
            b.smoothness = facf::smoothness(prev_best, box_n);
            st.smoothness.push(b.smoothness);
            b.r_self = self_score(st.smoothness.values(), cfg.rho);
            b.r = combine_fitness(b.r_pair, b.r_self, cfg.mu);
            set_fitness(n, b.r);
            out.emplace(n, b);
        }
        return out;
    }

    friend bool operator==(const FitnessLedger&, const FitnessLedger&) = default;

private:
    static std::size_t pair_index(ExpertId n, ExpertId k) noexcept
    {
        return static_cast<std::size_t>(n.index() * kPoolSize + k.index());
    }

    int delta_t_;
    std::array<ExpertFitness, kPoolSize> experts_{};
    std::vector<Window> pairs_;
};

/// Fitness-proportional probabilities; all-zero fitness falls back to uniform.
inline std::array<double, kPoolSize> selection_probabilities(std::span<const double, kPoolSize> fitness)
{
    std::array<double, kPoolSize> p{};
    double total = 0.0;
    for (double f : fitness) {
        if (!(f >= 0.0) || !std::isfinite(f))
            throw InvariantError("fitness must be finite and non-negative");
        total += f;
    }
    for (std::size_t i = 0; i < p.size(); ++i)
        p[i] = total > 0.0 ? fitness[i] / total : 1.0 / kPoolSize;
    return p;
}

inline std::array<double, kPoolSize> selection_probabilities(const FitnessLedger& ledger)
{
    const auto f = ledger.fitness_values();
    return selection_probabilities(std::span<const double, kPoolSize>(f));
}

/// K distinct experts by successive roulette draws without replacement; the
/// remaining mass is renormalized after each draw, and when it is exhausted
/// the rest are drawn uniformly. Returned in canonical order.
inline std::vector<ExpertId> select_executives(std::span<const double, kPoolSize> probs, int k, Rng& rng)
{
    detail::require<InvalidArgument>(k >= 0 && k <= kPoolSize, "K must lie in [0, 63]");
    std::vector<ExpertId> chosen;
    if (k == kPoolSize)
        return enumerate_pool();
    std::array<bool, kPoolSize> taken{};
    for (int draw = 0; draw < k; ++draw) {
        double mass = 0.0;
        int remaining = 0;
        for (int i = 0; i < kPoolSize; ++i)
            if (!taken[static_cast<std::size_t>(i)]) {
                mass += probs[static_cast<std::size_t>(i)];
                ++remaining;
            }
        int pick = -1;
        if (mass > 0.0) {
            const double u = rng.uniform01() * mass;
            double cum = 0.0;
            for (int i = 0; i < kPoolSize; ++i) {
                const double p = probs[static_cast<std::size_t>(i)];
                if (taken[static_cast<std::size_t>(i)] || p <= 0.0)
                    continue;
                cum += p;
                pick = i;
                if (u < cum)
                    break;
            }
        } else {
            auto nth = static_cast<int>(rng.below(static_cast<std::uint64_t>(remaining)));
            for (int i = 0; i < kPoolSize; ++i)
                if (!taken[static_cast<std::size_t>(i)] && nth-- == 0) {
                    pick = i;
                    break;
                }
        }
        taken[static_cast<std::size_t>(pick)] = true;
    }
    for (int i = 0; i < kPoolSize; ++i)
        if (taken[static_cast<std::size_t>(i)])
            chosen.push_back(ExpertId::from_index(i));
    return chosen;
}

/// Executive with the largest fitness; ties go to the smallest canonical id.
inline ExpertId pick_best(const FitnessLedger& ledger, std::span<const ExpertId> executives)
{
    detail::require<InvalidArgument>(!executives.empty(), "pick_best needs at least one executive");
    ExpertId best = executives.front();
    for (ExpertId id : executives) {
        const double f = ledger.fitness(id), fb = ledger.fitness(best);
        if (f > fb || (f == fb && id < best))
            best = id;
    }
    return best;
}

inline std::pair<ExpertId, BoundingBox> pick_best(const FitnessLedger& ledger, std::span<const ExpertId> executives,
                                                 const std::map<ExpertId, BoundingBox>& boxes)
{
    const ExpertId best = pick_best(ledger, executives);
    const auto it = boxes.find(best);
    detail::require<InvalidArgument>(it != boxes.end(), "winning executive has no box");
    return {best, it->second};
}

} // namespace facf
