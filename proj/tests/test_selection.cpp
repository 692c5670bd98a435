#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "facf/selection.hpp"

using namespace facf;

namespace {

std::array<double, kPoolSize> fitness_head(std::initializer_list<double> head)
{
    std::array<double, kPoolSize> f{};
    std::size_t i = 0;
    for (double v : head)
        f[i++] = v;
    return f;
}

std::span<const double, kPoolSize> view(const std::array<double, kPoolSize>& a) { return a; }

} // namespace

TEST(ExpertPool, CanonicalEnumeration)
{
    auto pool = enumerate_pool();
    ASSERT_EQ(pool.size(), 63u);
    EXPECT_EQ(pool.front().mask(), 0b000001);
    EXPECT_EQ(pool.front().members(), std::vector<FeatureKind>{FeatureKind::HOG});
    EXPECT_EQ(pool.back().mask(), 0b111111);
    EXPECT_EQ(pool.back().size(), 6);
    EXPECT_EQ(std::set<ExpertId>(pool.begin(), pool.end()).size(), 63u);
    EXPECT_TRUE(std::is_sorted(pool.begin(), pool.end()));
    int singles = 0;
    for (auto id : pool)
        singles += id.size() == 1;
    EXPECT_EQ(singles, 6);
    EXPECT_THROW(ExpertId(0), InvalidArgument);
    EXPECT_THROW(ExpertId(64), InvalidArgument);
}

TEST(SelectionProbabilities, Examples)
{
    auto uniform = selection_probabilities(view(std::array<double, kPoolSize>{} = [] {
        std::array<double, kPoolSize> a;
        a.fill(3.0);
        return a;
    }()));
    for (double p : uniform)
        EXPECT_NEAR(p, 1.0 / 63, 1e-15);

    auto p = selection_probabilities(view(fitness_head({2, 1, 1})));
    EXPECT_EQ(p[0], 0.5);
    EXPECT_EQ(p[1], 0.25);
    EXPECT_EQ(p[2], 0.25);
    for (std::size_t i = 3; i < p.size(); ++i)
        EXPECT_EQ(p[i], 0.0);

    auto cold = selection_probabilities(view(fitness_head({})));
    for (double q : cold)
        EXPECT_EQ(q, 1.0 / 63);

    EXPECT_THROW(selection_probabilities(view(fitness_head({1, -1}))), InvariantError);
}

TEST(SelectionProbabilities, ScaleInvarianceProperty)
{
    Rng rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        std::array<double, kPoolSize> f{};
        for (auto& v : f)
            v = rng.uniform01() * 10;
        double c = 0.001 + rng.uniform01() * 1000;
        auto g = f;
        for (auto& v : g)
            v *= c;
        auto p = selection_probabilities(view(f)), q = selection_probabilities(view(g));
        double sum = 0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            EXPECT_NEAR(p[i], q[i], 1e-12);
            sum += p[i];
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
    }
}

TEST(SelectExecutives, AllWhenKIs63)
{
    Rng rng(1);
    auto sel = select_executives(view(fitness_head({1})), 63, rng);
    EXPECT_EQ(sel, enumerate_pool());
}

TEST(SelectExecutives, PointMass)
{
    Rng rng(2);
    auto probs = fitness_head({});
    probs[17] = 1.0;
    for (int i = 0; i < 100; ++i) {
        auto sel = select_executives(view(probs), 1, rng);
        ASSERT_EQ(sel.size(), 1u);
        EXPECT_EQ(sel[0].index(), 17);
    }
}

TEST(SelectExecutives, DistinctAndDeterministic)
{
    auto probs = selection_probabilities(view(fitness_head({5, 4, 3, 2, 1})));
    Rng a(77), b(77);
    for (int k : {1, 3, 5, 10, 28, 62}) {
        auto s1 = select_executives(view(probs), k, a);
        auto s2 = select_executives(view(probs), k, b);
        EXPECT_EQ(s1, s2);
        ASSERT_EQ(s1.size(), static_cast<std::size_t>(k));
        EXPECT_EQ(std::set<ExpertId>(s1.begin(), s1.end()).size(), s1.size());
        // zero-probability experts only appear after the positive mass is used up
        if (k <= 5)
            for (auto id : s1)
                EXPECT_LT(id.index(), 5);
    }
    EXPECT_THROW(select_executives(view(probs), 64, a), InvalidArgument);
}

TEST(SelectExecutives, RouletteFrequencies)
{
    auto probs = fitness_head({0.5, 0.25, 0.25});
    Rng rng(2024);
    std::array<int, kPoolSize> counts{};
    const int draws = 100000;
    for (int i = 0; i < draws; ++i)
        counts[static_cast<std::size_t>(select_executives(view(probs), 1, rng)[0].index())]++;
    EXPECT_NEAR(counts[0] / double(draws), 0.5, 0.01);
    EXPECT_NEAR(counts[1] / double(draws), 0.25, 0.01);
    EXPECT_NEAR(counts[2] / double(draws), 0.25, 0.01);
    for (std::size_t i = 3; i < counts.size(); ++i)
        EXPECT_EQ(counts[i], 0);
}

TEST(PickBest, ArgmaxAndTieBreak)
{
    FitnessLedger ledger(5);
    ExpertId a(3), b(9), c(12);
    ledger.set_fitness(a, 3.0);
    ledger.set_fitness(b, 2.9);
    ledger.set_fitness(c, 1.0);
    std::vector<ExpertId> ex{a, b, c};
    EXPECT_EQ(pick_best(ledger, ex), a);

    std::vector<ExpertId> single{c};
    EXPECT_EQ(pick_best(ledger, single), c);

    ledger.set_fitness(b, 3.0);
    std::vector<ExpertId> reversed{b, a};
    EXPECT_EQ(pick_best(ledger, reversed), a);

    std::map<ExpertId, BoundingBox> boxes{{a, {1, 2, 3, 4}}, {b, {5, 6, 7, 8}}};
    auto [id, box] = pick_best(ledger, reversed, boxes);
    EXPECT_EQ(id, a);
    EXPECT_EQ(box, (BoundingBox{1, 2, 3, 4}));

    EXPECT_THROW(pick_best(ledger, std::vector<ExpertId>{}), InvalidArgument);
}

TEST(FitnessLedger, EvaluateMatchesFormulas)
{
    SelectionConfig cfg;
    cfg.delta_t = 3;
    cfg.rho = 2.0;
    cfg.mu = 0.25;
    FitnessLedger ledger(cfg.delta_t);
    ExpertId a(1), b(2);
    BoundingBox prev{10, 10, 8, 8};

    std::vector<std::map<ExpertId, BoundingBox>> frames{
        {{a, {10, 10, 8, 8}}, {b, {12, 10, 8, 8}}},
        {{a, {11, 10, 8, 8}}, {b, {11, 10, 8, 8}}},
        {{a, {12, 11, 8, 8}}, {b, {16, 10, 8, 8}}},
        {{a, {13, 11, 8, 8}}, {b, {13, 12, 8, 8}}},
    };
    std::vector<double> m_hist, v_hist, s_hist, o_hist;
    for (const auto& boxes : frames) {
        auto out = ledger.evaluate(boxes, prev, cfg);
        double o_ab = overlap(boxes.at(a), boxes.at(b));
        o_hist.push_back(o_ab);
        if (o_hist.size() > 3)
            o_hist.erase(o_hist.begin());
        double mean_ab = 0;
        for (double o : o_hist)
            mean_ab += o / o_hist.size();
        double m = (1.0 + o_ab) / 2.0;
        double v = std::sqrt((0.0 + std::pow(o_ab - mean_ab, 2)) / 2.0);
        double s = smoothness(prev, boxes.at(a));
        for (auto* h : {&m_hist, &v_hist, &s_hist})
            if (h->size() == 3)
                h->erase(h->begin());
        m_hist.push_back(m);
        v_hist.push_back(v);
        s_hist.push_back(s);
        auto wmean = [](const std::vector<double>& x) {
            double num = 0, den = 0, w = 1;
            for (double e : x) {
                num += w * e;
                den += w;
                w *= 2;
            }
            return num / den;
        };
        double r_pair = wmean(m_hist) / (wmean(v_hist) + cfg.epsilon);
        double r = 0.25 * r_pair + 0.75 * wmean(s_hist);
        EXPECT_NEAR(out.at(a).mean_overlap, m, 1e-15);
        EXPECT_NEAR(out.at(a).fluctuation, v, 1e-15);
        EXPECT_NEAR(out.at(a).r, r, 1e-9 * r);
        EXPECT_EQ(ledger.fitness(a), out.at(a).r);
        EXPECT_EQ(out.at(a).r_pair, out.at(a).mean_overlap_bar / (out.at(a).fluctuation_bar + cfg.epsilon));
        EXPECT_LE(ledger.pair_history(a, b).size(), 3u);
        prev = boxes.at(a);
    }
}

TEST(FitnessLedger, NonExecutivesUntouched)
{
    SelectionConfig cfg;
    FitnessLedger ledger(cfg.delta_t);
    ExpertId a(1), b(2), idle(40);
    ledger.set_fitness(idle, 0.123);
    auto before = ledger.expert(idle);
    ledger.evaluate({{a, {10, 10, 8, 8}}, {b, {12, 10, 8, 8}}}, BoundingBox{10, 10, 8, 8}, cfg);
    EXPECT_EQ(ledger.expert(idle), before);
    EXPECT_TRUE(ledger.pair_history(idle, a).empty());
}

TEST(FitnessLedger, ExcludingSelfOverlap)
{
    SelectionConfig cfg;
    cfg.include_self_overlap = false;
    FitnessLedger ledger(cfg.delta_t);
    ExpertId a(1), b(2);
    BoundingBox ba{10, 10, 8, 8}, bb{30, 30, 8, 8};
    auto out = ledger.evaluate({{a, ba}, {b, bb}}, ba, cfg);
    EXPECT_NEAR(out.at(a).mean_overlap, std::exp(-1.0), 1e-15);
}

TEST(SelectionConfigValidation, RejectsOutOfRange)
{
    SelectionConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.k = 64;
    EXPECT_THROW(cfg.validate(), InvalidArgument);
    cfg = {};
    cfg.rho = 1.0;
    EXPECT_THROW(cfg.validate(), InvalidArgument);
    cfg = {};
    cfg.epsilon = 0.0;
    EXPECT_THROW(cfg.validate(), InvalidArgument);
}

TEST(RngStream, PortableReferenceValues)
{
    // mt19937_64 with default seed 5489 has 10000th output 9981545732273789042 (C++ standard).
    Rng rng(5489);
    std::uint64_t v = 0;
    for (int i = 0; i < 10000; ++i)
        v = rng.next_u64();
    EXPECT_EQ(v, 9981545732273789042ull);
    Rng u(1);
    for (int i = 0; i < 1000; ++i) {
        double x = u.uniform01();
        EXPECT_GE(x, 0.0);
        EXPECT_LT(x, 1.0);
    }
}
