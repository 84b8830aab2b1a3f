#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <gtest/gtest.h>

#include "mfuq/bayes.hpp"
#include "mfuq/errors.hpp"

using namespace mfuq;
namespace fs = std::filesystem;

namespace {

ObservationSet obs_of(std::vector<double> values) {
    std::vector<Observation> e;
    for (std::size_t k = 0; k < values.size(); ++k) e.push_back({"q" + std::to_string(k + 1), values[k]});
    return ObservationSet(std::move(e));
}

ParamSpace box(std::size_t n, double lo, double hi) {
    std::vector<ParamSpec> p;
    for (std::size_t i = 0; i < n; ++i) p.emplace_back("v" + std::to_string(i + 1), Uniform{lo, hi});
    return ParamSpace(std::move(p));
}

// Linear model u = A v + b.
ForwardMap linear_model(Eigen::MatrixXd A, Eigen::VectorXd b) {
    return [A, b](std::span<const double> v) {
        const Eigen::VectorXd x = A * Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())) + b;
        return std::vector<double>(x.data(), x.data() + x.size());
    };
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("mfuq_test_bayes_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST(Observations, Validation) {
    EXPECT_THROW(ObservationSet({}), ConfigError);
    EXPECT_THROW(ObservationSet({{"a", 1.0}, {"a", 2.0}}), ConfigError);
    EXPECT_THROW(ObservationSet({{"a", std::nan("")}}), ConfigError);
    const auto o = obs_of({1.0, -3.0});
    EXPECT_EQ(o.max_abs_value(), 3.0);
}

TEST(Observations, CsvRoundTripAndComments) {
    const auto dir = scratch("csv");
    const auto o = obs_of({0.125, -2.5e-7});
    o.save_csv((dir / "o.csv").string(), "p1");
    const auto back = ObservationSet::load_csv((dir / "o.csv").string());
    EXPECT_EQ(back.names(), o.names());
    EXPECT_EQ(back.values(), o.values());
    std::ofstream(dir / "bad.csv") << "name,val\nq1,1\n";
    EXPECT_THROW(ObservationSet::load_csv((dir / "bad.csv").string()), ConfigError);
    std::ofstream(dir / "bad2.csv") << "qoi,value\nq1,abc\n";
    EXPECT_THROW(ObservationSet::load_csv((dir / "bad2.csv").string()), ConfigError);
}

TEST(Likelihood, MisfitAndLogLikelihoodExample) {
    const auto obs = obs_of({1.0, 2.0, 3.0});
    const ForwardMap m = [](std::span<const double>) { return std::vector<double>{1.5, 2.0, 2.0}; };
    const Point v{0.0};
    EXPECT_DOUBLE_EQ(misfit(m, obs, v), 1.25);
    const double expect = -1.5 * std::log(2 * std::numbers::pi * 0.25) - 1.25 / (2 * 0.25);
    EXPECT_NEAR(log_likelihood(m, obs, v, 0.5), expect, 1e-14);
}

TEST(Likelihood, DoublingSigmaChangesByKnownAmount) {
    for (double M : {0.0, 0.3, 7.0}) {
        for (double s : {1e-3, 0.5, 2.0}) {
            const std::size_t K = 4;
            const double d = log_likelihood(M, K, 2 * s) - log_likelihood(M, K, s);
            EXPECT_NEAR(d, -static_cast<double>(K) * std::log(2.0) + 3.0 * M / (8 * s * s), 1e-9 * (1 + M / (s * s)));
        }
    }
    EXPECT_THROW(log_likelihood(1.0, 2, 0.0), std::invalid_argument);
}

TEST(NelderMead, QuadraticBowl) {
    const auto r = nelder_mead([](std::span<const double> x) { return (x[0] - 1) * (x[0] - 1) + 4 * (x[1] + 2) * (x[1] + 2); },
                               {5.0, 5.0});
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.x[0], 1.0, 1e-6);
    EXPECT_NEAR(r.x[1], -2.0, 1e-6);
}

TEST(NelderMead, Rosenbrock) {
    const auto r = nelder_mead(
        [](std::span<const double> x) { return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2); },
        {-1.2, 1.0});
    EXPECT_NEAR(r.x[0], 1.0, 1e-5);
    EXPECT_NEAR(r.x[1], 1.0, 1e-5);
    EXPECT_LE(r.iterations, 5000u);
}

TEST(NelderMead, NonSmoothAbsoluteValue) {
    const auto r = nelder_mead([](std::span<const double> x) { return std::abs(x[0] - 0.3) + std::abs(x[1]); }, {2.0, -1.0});
    EXPECT_NEAR(r.x[0], 0.3, 1e-6);
    EXPECT_NEAR(r.x[1], 0.0, 1e-6);
}

TEST(NelderMead, IterationCap) {
    NelderMeadOptions opt;
    opt.max_iter = 3;
    const auto r = nelder_mead([](std::span<const double> x) { return x[0] * x[0]; }, {10.0}, opt);
    EXPECT_FALSE(r.converged);
    EXPECT_LE(r.iterations, 3u);
}

TEST(FindMap, IdentityModelRecoversTheData) {
    const auto obs = obs_of({0.2, -0.7});
    const auto r = find_map([](std::span<const double> v) { return std::vector<double>(v.begin(), v.end()); }, obs,
                            box(2, -1, 1));
    EXPECT_NEAR(r.v_map[0], 0.2, 1e-6);
    EXPECT_NEAR(r.v_map[1], -0.7, 1e-6);
    EXPECT_LT(r.misfit, 1e-12);
    EXPECT_EQ(r.starts.size(), 20u);
}

TEST(FindMap, SelfConsistencyUnderSmallNoise) {
    // Nonlinear 2-parameter model with five outputs.
    const ForwardMap model = [](std::span<const double> v) {
        std::vector<double> u;
        for (int k = 1; k <= 5; ++k) u.push_back(std::exp(-v[1] * k / 5.0) * std::sin(v[0] + 0.3 * k));
        return u;
    };
    const ParamSpace space = box(2, 0.0, 2.0);
    const Point truth{0.8, 1.3};
    const auto clean = model(truth);
    for (double s0 : {1e-2, 1e-4}) {
        std::vector<double> noisy = clean;
        const double pattern[] = {1.0, -0.6, 0.3, -1.2, 0.8};
        for (std::size_t k = 0; k < noisy.size(); ++k) noisy[k] += s0 * pattern[k];
        const auto post = calibrate(model, obs_of(noisy), space);
        const auto sd = post.stddevs();
        for (int i = 0; i < 2; ++i) EXPECT_LT(std::abs(post.mean[i] - truth[i]), 3 * sd[i]) << s0;
    }
}

TEST(FindMap, DeterministicInSeedAndNumberOfStarts) {
    const ForwardMap model = [](std::span<const double> v) {
        return std::vector<double>{v[0] * v[0] + v[1], std::cos(v[0]) * v[1]};
    };
    const auto obs = obs_of({1.0, 0.3});
    const auto a = find_map(model, obs, box(2, -2, 2));
    const auto b = find_map(model, obs, box(2, -2, 2));
    EXPECT_EQ(a.v_map, b.v_map);
    MapOptions other;
    other.seed = 99;
    const auto c = find_map(model, obs, box(2, -2, 2), other);
    EXPECT_NE(a.starts.front().initial, c.starts.front().initial);
}

TEST(FindMap, PenaltyKeepsTheOptimumNearTheBox) {
    // Unconstrained optimum at v = 3, box [0, 1].
    const ForwardMap model = [](std::span<const double> v) { return std::vector<double>{v[0]}; };
    const auto r = find_map(model, obs_of({3.0}), box(1, 0, 1));
    EXPECT_LT(r.v_map[0], 1.1);
    EXPECT_GT(r.v_map[0], 1.0);
    MapOptions off;
    off.penalty_factor = 0.0;
    EXPECT_NEAR(find_map(model, obs_of({3.0}), box(1, 0, 1), off).v_map[0], 3.0, 1e-6);
}

TEST(Sigma, Examples) {
    const auto obs = obs_of({1.0, 2.0, 3.0});
    const ForwardMap m = [](std::span<const double>) { return std::vector<double>{0.0, 0.0, 1.0}; };
    // residuals (1, 2, 2): sqrt(9 / 3)
    EXPECT_DOUBLE_EQ(estimate_sigma(m, obs, Point{0.0}).sigma, std::sqrt(3.0));
    const auto f = estimate_sigma(0.0, obs);
    EXPECT_TRUE(f.floored);
    EXPECT_DOUBLE_EQ(f.sigma, 3e-12);
}

TEST(Laplace, LinearGaussianCovariance) {
    Eigen::MatrixXd A(4, 2);
    A << 1.0, 0.5, -0.3, 2.0, 0.7, 0.1, 0.0, 1.5;
    const Eigen::VectorXd b = Eigen::VectorXd::Constant(4, 0.25);
    const double sigma = 0.02;
    const auto r = laplace_covariance(linear_model(A, b), box(2, -1, 1), Point{0.1, -0.2}, sigma);
    const Eigen::MatrixXd expect = sigma * sigma * (A.transpose() * A).inverse();
    EXPECT_LT((r.covariance - expect).cwiseAbs().maxCoeff(), 1e-8 * expect.cwiseAbs().maxCoeff());
    EXPECT_TRUE(r.flat_directions.empty());
    EXPECT_LT((r.jacobian - A).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Laplace, OneDimensionalClosedForm) {
    const double c = 3.0, sigma = 0.1;
    const std::size_t K = 5;
    const ForwardMap m = [c](std::span<const double> v) { return std::vector<double>(5, c * v[0]); };
    const auto r = laplace_covariance(m, box(1, 0, 1), Point{0.5}, sigma);
    EXPECT_NEAR(r.covariance(0, 0), sigma * sigma / (K * c * c), 1e-12);
}

TEST(Laplace, FlatDirectionUsesPseudoInverse) {
    const ForwardMap m = [](std::span<const double> v) { return std::vector<double>{v[0] + v[1], 2 * (v[0] + v[1])}; };
    const auto r = laplace_covariance(m, box(2, -1, 1), Point{0.0, 0.0}, 0.1);
    ASSERT_EQ(r.flat_directions.size(), 1u);
    EXPECT_NEAR(std::abs(r.flat_directions[0](0)), std::sqrt(0.5), 1e-6);
    EXPECT_TRUE(r.covariance.allFinite());
}

TEST(Laplace, EdgeOfBoxUsesOneSidedDifferences) {
    const ForwardMap m = [](std::span<const double> v) {
        if (v[0] > 1.0) throw std::runtime_error("outside");
        return std::vector<double>{2 * v[0], v[0]};
    };
    const auto r = laplace_covariance(m, box(1, 0, 1), Point{1.0}, 0.1);
    EXPECT_NEAR(r.jacobian(0, 0), 2.0, 1e-8);
}

TEST(Calibrate, LinearModelMatchesClosedForm) {
    Eigen::MatrixXd A(3, 2);
    A << 1.0, 0.2, 0.3, -1.0, 0.5, 0.5;
    const Eigen::VectorXd b(Eigen::Vector3d(0.1, 0.0, -0.1));
    const Eigen::Vector3d y(0.45, -0.2, 0.31);
    std::vector<double> yv(y.data(), y.data() + 3);
    const auto post = calibrate(linear_model(A, b), obs_of(yv), box(2, -2, 2));
    const Eigen::Vector2d v_ls = (A.transpose() * A).ldlt().solve(A.transpose() * (y - b));
    EXPECT_NEAR(post.mean[0], v_ls(0), 1e-7);
    EXPECT_NEAR(post.mean[1], v_ls(1), 1e-7);
    const double M = (A * v_ls + b - y).squaredNorm();
    EXPECT_NEAR(post.misfit, M, 1e-12);
    EXPECT_NEAR(post.sigma_meas, std::sqrt(M / 3), 1e-8);
    const Eigen::MatrixXd C = (M / 3) * (A.transpose() * A).inverse();
    EXPECT_LT((post.covariance - C).cwiseAbs().maxCoeff(), 1e-6 * C.cwiseAbs().maxCoeff());
}

TEST(Calibrate, CovarianceIsSymmetricPsd) {
    const ForwardMap model = [](std::span<const double> v) {
        return std::vector<double>{std::sin(v[0]) + v[1], v[0] * v[1], std::exp(0.3 * v[1]), v[0] - v[1]};
    };
    const auto post = calibrate(model, obs_of({0.9, 0.25, 1.2, 0.1}), box(2, -1, 2));
    EXPECT_EQ(post.covariance, post.covariance.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(post.covariance);
    EXPECT_GE(es.eigenvalues().minCoeff(), 0.0);
    const auto R = post.correlation();
    EXPECT_NEAR(R(0, 0), 1.0, 1e-15);
    EXPECT_LE(std::abs(R(0, 1)), 1.0);
}

TEST(Calibrate, ScalingTheDataScalesSigma) {
    const ForwardMap base = [](std::span<const double> v) {
        return std::vector<double>{v[0] + 0.1 * v[1] * v[1], v[1] - 0.2 * v[0], v[0] * v[1]};
    };
    const double s = 1000.0;
    const ForwardMap scaled = [&](std::span<const double> v) {
        auto u = base(v);
        for (auto& x : u) x *= s;
        return u;
    };
    const std::vector<double> y{0.31, 0.52, 0.2};
    std::vector<double> ys;
    for (double x : y) ys.push_back(s * x);
    const auto p1 = calibrate(base, obs_of(y), box(2, -1, 1));
    const auto p2 = calibrate(scaled, obs_of(ys), box(2, -1, 1));
    EXPECT_NEAR(p2.sigma_meas, s * p1.sigma_meas, 1e-6 * s * p1.sigma_meas);
    EXPECT_LT((p2.covariance - p1.covariance).cwiseAbs().maxCoeff(), 1e-4 * p1.covariance.cwiseAbs().maxCoeff());
}

TEST(Posterior, FileRoundTrip) {
    const ForwardMap model = [](std::span<const double> v) { return std::vector<double>{v[0] + v[1], v[0] - 2 * v[1], v[0]}; };
    const auto post = calibrate(model, obs_of({0.3, -0.1, 0.15}), box(2, -1, 1));
    const auto text = serialize_posterior(post, "xyz");
    std::string prov;
    const auto back = deserialize_posterior(text, &prov);
    EXPECT_EQ(prov, "xyz");
    EXPECT_EQ(back.mean, post.mean);
    EXPECT_EQ(back.covariance, post.covariance);
    EXPECT_EQ(back.sigma_meas, post.sigma_meas);
    EXPECT_EQ(back.names, post.names);
    EXPECT_EQ(serialize_posterior(back, "xyz"), text);
    EXPECT_THROW(deserialize_posterior("{\"format\": 3}"), FormatError);
}

TEST(SurrogateForwardMap, MissingQoi) {
    Oracle o({{1, 1.0}}, make_builtin_backend("beam-analog"));
    const auto s = build_surrogate(MultiIndexSet(2, {ExtMultiIndex{1, {1, 1}}}), o,
                                   {KnotFamily::symmetric_leja(1130, 1450), KnotFamily::symmetric_leja(-5, 0)}, {"u1"});
    EXPECT_THROW(surrogate_forward_map(s, ObservationSet({{"u2", 0.1}})), ConfigError);
    EXPECT_NO_THROW(surrogate_forward_map(s, ObservationSet({{"u1", 0.1}})));
}
