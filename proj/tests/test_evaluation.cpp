#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "facf/evaluation.hpp"

using namespace facf;

namespace {

// Corner-form rectangle overlap, written independently of BoundingBox helpers.
double ref_overlap(const BoundingBox& a, const BoundingBox& b)
{
    double ax1 = a.cx - a.w / 2, ax2 = a.cx + a.w / 2, ay1 = a.cy - a.h / 2, ay2 = a.cy + a.h / 2;
    double bx1 = b.cx - b.w / 2, bx2 = b.cx + b.w / 2, by1 = b.cy - b.h / 2, by2 = b.cy + b.h / 2;
    double iw = std::max(0.0, std::min(ax2, bx2) - std::max(ax1, bx1));
    double ih = std::max(0.0, std::min(ay2, by2) - std::max(ay1, by1));
    double inter = iw * ih;
    double uni = a.w * a.h + b.w * b.h - inter;
    return std::exp(-std::pow(1 - inter / uni, 2));
}

double ref_weighted(const std::vector<double>& v, double rho)
{
    double num = 0, den = 0;
    for (std::size_t t = 1; t <= v.size(); ++t) {
        num += std::pow(rho, double(t - 1)) * v[t - 1];
        den += std::pow(rho, double(t - 1));
    }
    return num / den;
}

BoundingBox random_box(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> pos(0, 100), size(1, 40);
    return {pos(rng), pos(rng), size(rng), size(rng)};
}

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

} // namespace

TEST(Overlap, IdenticalAndDisjoint)
{
    BoundingBox a{10, 10, 4, 4};
    EXPECT_EQ(overlap(a, a), 1.0);
    EXPECT_NEAR(overlap(a, BoundingBox{100, 100, 4, 4}), std::exp(-1.0), 1e-15);
    EXPECT_NEAR(std::exp(-1.0), 0.36788, 1e-5);
}

TEST(Overlap, HandComputedRectangles)
{
    // a = top-left (0,0) 4x4, b shifted 2 px right: intersection 8, union 24
    BoundingBox a{2, 2, 4, 4}, b{4, 2, 4, 4};
    EXPECT_DOUBLE_EQ(intersection_area(a, b), 8.0);
    EXPECT_NEAR(overlap(a, b), std::exp(-std::pow(1.0 - 1.0 / 3.0, 2)), 1e-15);
}

TEST(Overlap, BoundsSymmetryIdentityProperty)
{
    std::mt19937_64 rng(1);
    for (int i = 0; i < 10000; ++i) {
        auto a = random_box(rng), b = random_box(rng);
        double o = overlap(a, b);
        EXPECT_GE(o, std::exp(-1.0));
        EXPECT_LE(o, 1.0);
        EXPECT_EQ(o, overlap(b, a));
        EXPECT_LT(o, 1.0);
    }
}

TEST(MeanOverlap, Examples)
{
    std::vector<double> same{1, 1, 1};
    EXPECT_EQ(mean_overlap(same), 1.0);
    std::vector<double> two{1.0, std::exp(-1.0)};
    EXPECT_DOUBLE_EQ(mean_overlap(two), (1 + std::exp(-1.0)) / 2);
}

TEST(MeanOverlap, BruteForceOverRandomBoxes)
{
    std::mt19937_64 rng(2);
    std::vector<BoundingBox> boxes;
    for (int i = 0; i < 5; ++i)
        boxes.push_back(random_box(rng));
    for (int n = 0; n < 5; ++n) {
        std::vector<double> o;
        double acc = 0;
        for (int k = 0; k < 5; ++k) {
            o.push_back(overlap(boxes[n], boxes[k]));
            acc += ref_overlap(boxes[n], boxes[k]);
        }
        EXPECT_NEAR(mean_overlap(o), acc / 5, 1e-12);
    }
}

TEST(Fluctuation, ConstantSeriesIsZero)
{
    std::vector<std::vector<double>> s{{0.7, 0.7, 0.7}, {1, 1, 1}};
    EXPECT_EQ(fluctuation(s), 0.0);
}

TEST(Fluctuation, SingleTerm)
{
    // K = 1, window (e^-1 ... , 1) whose mean is e^-1 needs O^t = 1 and mean e^-1:
    // series {a, 1} with (a + 1)/2 = e^-1
    double a = 2 * std::exp(-1.0) - 1;
    std::vector<std::vector<double>> s{{a, 1.0}};
    EXPECT_NEAR(fluctuation(s), 1 - std::exp(-1.0), 1e-15);
}

TEST(Fluctuation, DoubleLoopOracle)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(std::exp(-1.0), 1.0);
    std::vector<std::vector<double>> s(4, std::vector<double>(5));
    for (auto& row : s)
        for (auto& v : row)
            v = u(rng);
    double acc = 0;
    for (int k = 0; k < 4; ++k) {
        double mean = 0;
        for (int t = 0; t < 5; ++t)
            mean += s[k][t] / 5;
        acc += std::pow(s[k][4] - mean, 2);
    }
    EXPECT_NEAR(fluctuation(s), std::sqrt(acc / 4), 1e-14);
}

TEST(WeightedTemporalMean, Examples)
{
    std::vector<double> c{0.3, 0.3, 0.3, 0.3};
    EXPECT_NEAR(weighted_temporal_mean(c, 1.5), 0.3, 1e-15);
    std::vector<double> v{0, 0, 0, 0, 1};
    EXPECT_NEAR(weighted_temporal_mean(v, 2.0), 16.0 / 31.0, 1e-15);
    std::vector<double> r{1, 2, 3, 4, 5};
    EXPECT_NEAR(weighted_temporal_mean(r, 1 + 1e-9), 3.0, 1e-6);
}

TEST(WeightedTemporalMean, ConvexityProperty)
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-5, 5), rr(1.0001, 3);
    std::uniform_int_distribution<int> len(1, 8);
    for (int i = 0; i < 500; ++i) {
        std::vector<double> v(static_cast<std::size_t>(len(rng)));
        for (auto& x : v)
            x = u(rng);
        double m = weighted_temporal_mean(v, rr(rng));
        EXPECT_GE(m, *std::min_element(v.begin(), v.end()) - 1e-12);
        EXPECT_LE(m, *std::max_element(v.begin(), v.end()) + 1e-12);
    }
}

TEST(PairScore, Examples)
{
    EXPECT_NEAR(pair_score(1.0, 0.0, 1e-6), 1e6, 1e-6);
    EXPECT_EQ(pair_score(0.0, 0.3, 1e-6), 0.0);
    EXPECT_NEAR(pair_score(0.8, 0.2, 1e-6), 3.9999800001, 1e-9);
}

TEST(Smoothness, Examples)
{
    BoundingBox prev{50, 50, 10, 10};
    EXPECT_EQ(smoothness(prev, BoundingBox{50, 50, 20, 8}), 1.0);
    // sigma = (w + h) / 2 = 10; shift by 10 along x
    EXPECT_NEAR(smoothness(prev, BoundingBox{60, 50, 10, 10}), std::exp(-0.5), 1e-15);
    EXPECT_NEAR(smoothness(BoundingBox{0, 0, 1, 1}, BoundingBox{3, 4, 6, 4}), std::exp(-0.5), 1e-15);
    EXPECT_NEAR(std::exp(-0.5), 0.6065, 1e-4);
}

TEST(SelfScore, Examples)
{
    std::vector<double> ones{1, 1, 1, 1, 1};
    EXPECT_NEAR(self_score(ones, 1.1), 1.0, 1e-15);
    std::vector<double> s{1, 1, 1, 1, 0};
    EXPECT_NEAR(self_score(s, 2.0), 15.0 / 31.0, 1e-15);
    std::vector<double> one{0.42};
    EXPECT_EQ(self_score(one, 1.1), 0.42);
}

TEST(CombineFitness, Examples)
{
    EXPECT_EQ(combine_fitness(2, 4, 1.0), 2.0);
    EXPECT_EQ(combine_fitness(2, 4, 0.0), 4.0);
    EXPECT_EQ(combine_fitness(2, 4, 0.5), 3.0);
    EXPECT_THROW(combine_fitness(2, 4, 1.5), InvalidArgument);
}

TEST(CombineFitness, MonotoneProperty)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 10), m(0.01, 0.99), d(0, 1);
    for (int i = 0; i < 1000; ++i) {
        double a = u(rng), b = u(rng), mu = m(rng);
        EXPECT_LE(combine_fitness(a, b, mu), combine_fitness(a + d(rng), b, mu));
        EXPECT_LE(combine_fitness(a, b, mu), combine_fitness(a, b + d(rng), mu));
    }
}

TEST(FitnessFormulas, MatchReferenceOnRandomInputs)
{
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u01(0, 1), rr(1.01, 2.0), oo(std::exp(-1.0), 1.0);
    for (int i = 0; i < 1000; ++i) {
        auto a = random_box(rng), b = random_box(rng);
        EXPECT_TRUE(rel_close(overlap(a, b), ref_overlap(a, b), 1e-9));

        std::vector<double> series(5);
        for (auto& v : series)
            v = u01(rng);
        double rho = rr(rng);
        EXPECT_TRUE(rel_close(weighted_temporal_mean(series, rho), ref_weighted(series, rho), 1e-9));
        EXPECT_TRUE(rel_close(self_score(series, rho), ref_weighted(series, rho), 1e-9));

        double mbar = u01(rng), vbar = u01(rng);
        EXPECT_TRUE(rel_close(pair_score(mbar, vbar, 1e-6), mbar / (vbar + 1e-6), 1e-9));

        BoundingBox prev = random_box(rng);
        double sigma = 0.5 * (a.w + a.h);
        double d2 = std::pow(prev.cx - a.cx, 2) + std::pow(prev.cy - a.cy, 2);
        EXPECT_TRUE(rel_close(smoothness(prev, a), std::exp(-d2 / (2 * sigma * sigma)), 1e-9));

        double mu = u01(rng);
        EXPECT_TRUE(rel_close(combine_fitness(mbar, vbar, mu), mu * mbar + (1 - mu) * vbar, 1e-9));
    }
}
