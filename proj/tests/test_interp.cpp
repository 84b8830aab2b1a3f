#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mfuq/interp.hpp"

using namespace mfuq;

namespace {

std::vector<KnotFamily> unit_box(std::size_t n) {
    return std::vector<KnotFamily>(n, KnotFamily::symmetric_leja(-1.0, 1.0));
}

TensorInterpolant sample(const TensorGrid& g, const std::function<double(const Point&)>& f) {
    std::vector<double> vals;
    for (const auto& p : g.points()) vals.push_back(f(p));
    return TensorInterpolant(g, vals, 1);
}

}  // namespace

TEST(BuildGrid, SizesAndEnumeration) {
    const auto fam = unit_box(2);
    EXPECT_EQ(build_grid({1, 1}, fam).size(), 1u);
    EXPECT_EQ(build_grid({1, 1}, fam).point(0), (Point{0.0, 0.0}));
    const auto g21 = build_grid({2, 1}, fam);
    ASSERT_EQ(g21.size(), 3u);
    EXPECT_EQ(g21.point(0), (Point{0.0, 0.0}));
    EXPECT_EQ(g21.point(1), (Point{1.0, 0.0}));
    EXPECT_EQ(g21.point(2), (Point{-1.0, 0.0}));
    EXPECT_EQ(build_grid({2, 2}, fam).size(), 9u);
    // row-major: last dimension fastest
    EXPECT_EQ(build_grid({2, 2}, fam).point(1), (Point{0.0, 1.0}));
    EXPECT_THROW(build_grid({1}, fam), std::invalid_argument);
    EXPECT_THROW(build_grid({0, 1}, fam), std::invalid_argument);
}

TEST(BuildGrid, UsesFamilyPrefixes) {
    const std::vector<KnotFamily> fam{KnotFamily::symmetric_leja(1130, 1450), KnotFamily::weighted_gaussian_leja(-3, 0.92)};
    const auto g = build_grid({3, 4}, fam);
    EXPECT_EQ(g.knots(0), fam[0].knots(5));
    EXPECT_EQ(g.knots(1), fam[1].knots(7));
    EXPECT_EQ(g.size(), 35u);
}

TEST(Interpolate, ConstantIsReproduced) {
    const auto g = build_grid({3, 2, 2}, unit_box(3));
    const auto itp = sample(g, [](const Point&) { return 4.25; });
    EXPECT_NEAR(itp.evaluate(Point{0.3, -0.2, 0.9})[0], 4.25, 1e-13);
    // Far outside the box the Lagrange basis is large and rounding grows with it.
    EXPECT_NEAR(itp.evaluate(Point{2.0, 3.0, -4.0})[0], 4.25, 1e-10);
}

TEST(Interpolate, QuadraticIn1D) {
    const TensorGrid g({2}, {{0.0, 1.0, -1.0}});
    const TensorInterpolant itp(g, {0.0, 1.0, 1.0}, 1);
    EXPECT_NEAR(itp.evaluate(Point{0.5})[0], 0.25, 1e-15);
}

TEST(Interpolate, BilinearPlusCrossTerm) {
    const auto g = build_grid({2, 2}, unit_box(2));
    const auto itp = sample(g, [](const Point& p) { return 3 * p[0] + 2 * p[1] - p[0] * p[1]; });
    EXPECT_NEAR(itp.evaluate(Point{0.3, -0.7})[0], -0.29, 1e-14);
}

TEST(Interpolate, ReproducesGridValues) {
    const std::vector<KnotFamily> fam{KnotFamily::symmetric_leja(1130, 1450), KnotFamily::symmetric_leja(-5, 0)};
    const auto g = build_grid({4, 3}, fam);
    const auto f = [](const Point& p) { return std::exp(p[0] / 1000.0) * std::sin(p[1]); };
    const auto itp = sample(g, f);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double v = f(g.point(i));
        EXPECT_LE(std::abs(itp.evaluate(g.point(i))[0] - v), 1e-12 * (1 + std::abs(v)));
    }
}

TEST(Interpolate, PolynomialExactnessRandom) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::uniform_int_distribution<int> lvl(1, 4);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t N = 1 + trial % 3;
        std::vector<int> beta(N);
        for (auto& b : beta) b = lvl(rng);
        // random polynomial with per-dimension degree <= m(beta_n) - 1
        std::size_t terms = 1;
        for (int b : beta) terms *= static_cast<std::size_t>(2 * b - 1);
        std::vector<double> c(terms);
        for (auto& x : c) x = coef(rng);
        auto poly = [&](const Point& x) {
            double s = 0.0;
            for (std::size_t t = 0; t < terms; ++t) {
                std::size_t rest = t;
                double mono = c[t];
                for (std::size_t n = N; n-- > 0;) {
                    const auto m = static_cast<std::size_t>(2 * beta[n] - 1);
                    mono *= std::pow(x[n], static_cast<double>(rest % m));
                    rest /= m;
                }
                s += mono;
            }
            return s;
        };
        const auto itp = sample(build_grid(beta, unit_box(N)), poly);
        double err = 0.0;
        for (int k = 0; k < 100; ++k) {
            Point x(N);
            for (auto& xi : x) xi = coef(rng);
            err = std::max(err, std::abs(itp.evaluate(x)[0] - poly(x)));
        }
        EXPECT_LE(err, 1e-9) << "trial " << trial;
    }
}

TEST(Interpolate, Linearity) {
    const auto g = build_grid({3, 3}, unit_box(2));
    const auto f = [](const Point& p) { return std::cos(p[0] + 2 * p[1]); };
    const auto h = [](const Point& p) { return std::exp(p[0] * p[1]); };
    const double a = 2.5, b = -0.75;
    const auto itf = sample(g, f), ith = sample(g, h);
    const auto itc = sample(g, [&](const Point& p) { return a * f(p) + b * h(p); });
    for (const auto& v : {Point{0.1, 0.2}, Point{-0.77, 0.5}, Point{0.99, -0.99}}) {
        EXPECT_NEAR(itc.evaluate(v)[0], a * itf.evaluate(v)[0] + b * ith.evaluate(v)[0], 1e-12);
    }
}

TEST(Interpolate, VectorValuedSharesGrid) {
    const auto g = build_grid({2, 2}, unit_box(2));
    std::vector<double> vals;
    for (const auto& p : g.points()) {
        vals.push_back(p[0]);
        vals.push_back(p[1] * p[1]);
    }
    const TensorInterpolant itp(g, vals, 2);
    const auto y = itp.evaluate(Point{0.4, -0.3});
    EXPECT_NEAR(y[0], 0.4, 1e-15);
    EXPECT_NEAR(y[1], 0.09, 1e-15);
    EXPECT_THROW(TensorInterpolant(g, std::vector<double>(5), 2), std::invalid_argument);
}

TEST(BarycentricWeights, RejectsCoincidentKnots) {
    EXPECT_THROW(barycentric_weights(std::vector<double>{0.0, 1.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(barycentric_weights(std::vector<double>{1.0, 1.0 + 1e-16}), std::invalid_argument);
    EXPECT_NO_THROW(barycentric_weights(std::vector<double>{0.0, 1.0, -1.0}));
}
