#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "mfuq/errors.hpp"
#include "mfuq/misc.hpp"
#include "mfuq/params.hpp"

using namespace mfuq;
namespace fs = std::filesystem;

namespace {

ExtMultiIndex idx(int a, std::vector<int> b) { return ExtMultiIndex{a, std::move(b)}; }

std::vector<KnotFamily> beam_families() {
    return {KnotFamily::symmetric_leja(1130.0, 1450.0), KnotFamily::symmetric_leja(-5.0, 0.0)};
}

ParamSpace beam_space() {
    return ParamSpace({ParamSpec("T_A", Uniform{1130.0, 1450.0}), ParamSpec("log_hp", Uniform{-5.0, 0.0})});
}

std::shared_ptr<ModelBackend> function_backend(std::function<double(int, std::span<const double>)> f) {
    return std::make_shared<FunctionBackend>(
        "test", [f](int a, std::span<const double> v, std::string_view) { return f(a, v); });
}

Oracle beam_oracle() { return Oracle({{1, 1.0}, {2, 36.0}}, make_builtin_backend("beam-analog")); }

double max_error_vs_f2(const MiscSurrogate& s, const std::vector<Point>& pts) {
    double err = 0.0;
    for (const auto& p : pts) {
        const auto y = s.evaluate(p);
        for (std::size_t k = 0; k < y.size(); ++k) {
            err = std::max(err, std::abs(y[k] - beam_analog::value(2, s.qoi_names()[k], p)));
        }
    }
    return err;
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("mfuq_test_misc_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST(Build, BaseIndexGivesConstant) {
    auto o = beam_oracle();
    const auto s = build_surrogate(MultiIndexSet(2, {idx(1, {1, 1})}), o, beam_families(), {"u3"});
    const double c = beam_analog::value(1, "u3", Point{1290, -2.5});
    EXPECT_EQ(s.evaluate(Point{1200, -4})[0], c);
    EXPECT_EQ(s.evaluate(Point{1440, -0.1})[0], c);
}

TEST(Build, TelescopingCollapseToFullTensor) {
    Oracle o({{1, 1.0}}, function_backend([](int, std::span<const double> v) {
        return std::sin(v[0] / 100.0) * std::exp(v[1] / 3.0);
    }));
    MultiIndexSet full(2);
    for (int a = 1; a <= 3; ++a)
        for (int b = 1; b <= 3; ++b) full.insert(idx(1, {a, b}));
    const auto s = build_surrogate(full, o, beam_families(), {"f"});
    ASSERT_EQ(s.interpolants().size(), 1u);  // only c != 0 entries are built
    const auto g = build_grid({3, 3}, beam_families());
    std::vector<double> vals;
    for (const auto& p : g.points()) vals.push_back(o.eval_batch(1, std::vector<Point>{p}, std::vector<std::string>{"f"})[0].values[0]);
    const TensorInterpolant plain(g, vals, 1);
    for (const auto& p : beam_space().sample(50, 3)) EXPECT_NEAR(s.evaluate(p)[0], plain.evaluate(p)[0], 1e-10);
}

TEST(Build, MatchesOracleAtFinestKnots) {
    auto o = beam_oracle();
    MultiIndexSet full(2);
    for (int a = 1; a <= 2; ++a)
        for (int b = 1; b <= 3; ++b) full.insert(idx(1, {a, b}));
    const auto s = build_surrogate(full, o, beam_families(), {"u2"});
    for (const auto& p : build_grid({2, 3}, beam_families()).points()) {
        EXPECT_NEAR(s.evaluate(p)[0], beam_analog::value(1, "u2", p), 1e-12);
    }
}

TEST(Build, LinearInTheOracle) {
    auto f = [](int, std::span<const double> v) { return std::cos(v[0] / 300.0) + v[1] * v[1]; };
    Oracle o1({{1, 1.0}}, function_backend(f));
    Oracle o2({{1, 1.0}}, function_backend([f](int a, std::span<const double> v) { return -3.5 * f(a, v); }));
    const MultiIndexSet set(2, {idx(1, {1, 1}), idx(1, {2, 1}), idx(1, {1, 2}), idx(1, {2, 2}), idx(1, {3, 1})});
    const auto s1 = build_surrogate(set, o1, beam_families(), {"f"});
    const auto s2 = build_surrogate(set, o2, beam_families(), {"f"});
    for (const auto& p : beam_space().sample(20, 4)) EXPECT_NEAR(s2.evaluate(p)[0], -3.5 * s1.evaluate(p)[0], 1e-12);
}

TEST(Build, MissingEvaluationsAreListed) {
    Oracle o({{1, 1.0}}, function_backend([](int, std::span<const double> v) {
        if (v[0] > 1400) throw std::runtime_error("solver diverged");
        return 1.0;
    }));
    try {
        build_surrogate(MultiIndexSet(2, {idx(1, {1, 1}), idx(1, {2, 1})}), o, beam_families(), {"f"});
        FAIL();
    } catch (const OracleError& e) {
        EXPECT_NE(std::string(e.what()).find("[1,(2,1)]"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("solver diverged"), std::string::npos);
    }
}

TEST(Build, NestedSequenceErrorDecreases) {
    auto o = beam_oracle();
    const auto pts = beam_space().sample(200, 8);
    const std::vector<MultiIndexSet> seq{
        MultiIndexSet(2, {idx(1, {1, 1})}),
        MultiIndexSet(2, {idx(1, {1, 1}), idx(1, {2, 1}), idx(1, {1, 2})}),
        MultiIndexSet(2, {idx(1, {1, 1}), idx(1, {2, 1}), idx(1, {1, 2}), idx(1, {2, 2}), idx(1, {3, 1}), idx(1, {1, 3})}),
        MultiIndexSet(2, {idx(1, {1, 1}), idx(1, {2, 1}), idx(1, {1, 2}), idx(1, {2, 2}), idx(1, {3, 1}), idx(1, {1, 3}),
                          idx(2, {1, 1}), idx(2, {2, 1}), idx(2, {1, 2})}),
    };
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& set : seq) {
        const double err = max_error_vs_f2(build_surrogate(set, o, beam_families(), beam_analog::displacement_names()), pts);
        EXPECT_LT(err, prev);
        prev = err;
    }
}

TEST(Build, ShippedIndexSetReplaysTheBudgetSplit) {
    const auto set = load_index_set(std::string(MFUQ_DATA_DIR) + "/index_set_17_5.json");
    auto o = beam_oracle();
    const auto s = build_surrogate(set, o, beam_families(), beam_analog::displacement_names());
    const auto pts = s.points_per_fidelity();
    EXPECT_EQ(pts.at(1), 17u);
    EXPECT_EQ(pts.at(2), 5u);
    EXPECT_EQ(o.invocations(1), 17u);
    EXPECT_EQ(o.invocations(2), 5u);
}

TEST(Evaluate, DimensionMismatchAndExtrapolationFlag) {
    auto o = beam_oracle();
    const auto s = build_surrogate(MultiIndexSet(2, {idx(1, {1, 1}), idx(1, {2, 1})}), o, beam_families(), {"u1"});
    EXPECT_THROW(s.evaluate(Point{1290}), std::invalid_argument);
    EXPECT_FALSE(s.evaluate_flagged(Point{1290, -2.5}).extrapolated);
    EXPECT_TRUE(s.evaluate_flagged(Point{1500, -2.5}).extrapolated);
}

TEST(Serialize, RoundTripIsBitExact) {
    auto o = beam_oracle();
    const MultiIndexSet set(2, {idx(1, {1, 1}), idx(1, {2, 1}), idx(1, {1, 2}), idx(1, {2, 2}), idx(2, {1, 1})});
    const auto s = build_surrogate(set, o, beam_families(), {"u1", "e3"});
    const auto text = serialize_surrogate(s, "abc");
    std::string prov;
    const auto back = deserialize_surrogate(text, 2, &prov);
    EXPECT_EQ(prov, "abc");
    EXPECT_EQ(serialize_surrogate(back, "abc"), text);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> t(1100, 1480), l(-5.5, 0.5);
    for (int i = 0; i < 100; ++i) {
        const Point p{t(rng), l(rng)};
        const auto a = s.evaluate(p), b = back.evaluate(p);
        for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(std::bit_cast<std::uint64_t>(a[k]), std::bit_cast<std::uint64_t>(b[k]));
    }
}

TEST(Serialize, GaussianFamiliesRoundTrip) {
    auto o = beam_oracle();
    const std::vector<KnotFamily> fam{KnotFamily::weighted_gaussian_leja(1386, 20), KnotFamily::weighted_gaussian_leja(-3, 0.2)};
    const auto s = build_surrogate(MultiIndexSet(2, {idx(1, {1, 1}), idx(1, {2, 1}), idx(1, {3, 1})}), o, fam, {"e1"});
    const auto text = serialize_surrogate(s);
    EXPECT_EQ(serialize_surrogate(deserialize_surrogate(text)), text);
}

TEST(Serialize, RejectsWrongDimensionVersionAndCorruption) {
    auto o = beam_oracle();
    const auto s = build_surrogate(MultiIndexSet(2, {idx(1, {1, 1}), idx(1, {2, 1})}), o, beam_families(), {"u1"});
    const auto text = serialize_surrogate(s);
    EXPECT_THROW(deserialize_surrogate(text, 3), FormatError);
    auto bad_version = text;
    bad_version.replace(bad_version.find("\"version\": 1"), 12, "\"version\": 9");
    EXPECT_THROW(deserialize_surrogate(bad_version), FormatError);
    EXPECT_THROW(deserialize_surrogate(text.substr(0, text.size() / 2)), FormatError);
    auto bad_knot = text;
    const auto pos = bad_knot.find("\"knots\"");
    bad_knot[bad_knot.find('"', bad_knot.find('[', pos)) + 5] ^= 1;
    EXPECT_THROW(deserialize_surrogate(bad_knot), FormatError);
}

TEST(Serialize, CacheReplayReproducesTheFile) {
    const auto dir = scratch("replay");
    const auto cache = (dir / "c.log").string();
    const auto set = load_index_set(std::string(MFUQ_DATA_DIR) + "/index_set_17_5.json");
    std::string first;
    {
        Oracle o({{1, 1.0}, {2, 36.0}}, make_builtin_backend("beam-analog"), std::make_shared<EvalCache>(cache));
        first = serialize_surrogate(build_surrogate(set, o, beam_families(), beam_analog::displacement_names()));
    }
    Oracle o({{1, 1.0}, {2, 36.0}}, make_builtin_backend("beam-analog"), std::make_shared<EvalCache>(cache));
    EXPECT_EQ(serialize_surrogate(build_surrogate(set, o, beam_families(), beam_analog::displacement_names())), first);
    EXPECT_EQ(o.total_invocations(), 0u);
}

TEST(IndexSetFile, RoundTripAndValidation) {
    const auto dir = scratch("indexset");
    const MultiIndexSet set(2, {idx(1, {1, 1}), idx(1, {2, 1}), idx(2, {1, 1})});
    save_index_set(set, (dir / "s.json").string());
    EXPECT_EQ(load_index_set((dir / "s.json").string()).entries(), set.entries());
    std::ofstream(dir / "bad.json") << R"({"dim": 2, "entries": [{"alpha": 2, "beta": [1, 1]}]})";
    EXPECT_THROW(load_index_set((dir / "bad.json").string()), ConfigError);
}

TEST(Adapt, ZeroBudgetGivesTheBaseIndex) {
    auto o = beam_oracle();
    AdaptOptions opt;
    opt.max_work = 0.0;
    auto st = adapt(start_adapt(o, beam_families(), {"u1"}, opt), o, opt);
    EXPECT_EQ(st.index_set().entries(), MultiIndexSet(2, {idx(1, {1, 1})}).entries());
    EXPECT_EQ(st.stop_reason(), StopReason::MaxWork);
    EXPECT_EQ(st.total_work(), 1.0);
}

TEST(Adapt, IsotropicFunctionStructure) {
    Oracle o({{1, 1.0}}, function_backend([](int, std::span<const double> v) {
        const double x = (v[0] - 1290) / 160, y = (v[1] + 2.5) / 2.5;
        return std::exp(-(x * x + y * y));
    }));
    AdaptOptions opt;
    opt.max_work = 30;
    auto st = adapt(start_adapt(o, beam_families(), {"f"}, opt), o, opt);
    EXPECT_TRUE(st.index_set().is_downward_closed());
    EXPECT_LE(st.total_work(), 30.0);
    EXPECT_LE(o.total_invocations(), 30u);
    const auto& h = st.history();
    ASSERT_GE(h.size(), 6u);
    std::vector<double> smooth;
    for (std::size_t i = 1; i + 2 < h.size(); ++i) smooth.push_back((h[i].profit + h[i + 1].profit + h[i + 2].profit) / 3);
    for (std::size_t i = 1; i < smooth.size(); ++i) EXPECT_LE(smooth[i], smooth[i - 1] * (1 + 1e-12)) << i;
    for (const auto& c : st.candidates()) EXPECT_FALSE(st.index_set().contains(c.index));
}

TEST(Adapt, DetectsAnIrrelevantParameter) {
    Oracle o({{1, 1.0}}, function_backend([](int, std::span<const double> v) { return std::sin(v[0] / 90.0); }));
    AdaptOptions opt;
    opt.max_work = 60;
    auto st = adapt(start_adapt(o, beam_families(), {"f"}, opt), o, opt);
    EXPECT_GT(st.index_set().size(), 3u);
    for (const auto& e : st.index_set().entries()) EXPECT_LE(e.beta[1], 2) << e.to_string();
}

TEST(Adapt, FavoursTheCheapFidelity) {
    for (double budget : {40.0, 80.0, 120.0, 160.0, 200.0}) {
        auto o = beam_oracle();
        AdaptOptions opt;
        opt.max_work = budget;
        auto st = adapt(start_adapt(o, beam_families(), beam_analog::displacement_names(), opt), o, opt);
        int n1 = 0, n2 = 0;
        for (const auto& e : st.index_set().entries()) (e.alpha == 1 ? n1 : n2) += 1;
        EXPECT_LE(n2, n1) << budget;
        EXPECT_LE(st.total_work(), budget);
        EXPECT_DOUBLE_EQ(o.work_spent(), st.total_work());
    }
}

TEST(Adapt, FailedCandidatesAreSkipped) {
    Oracle o({{1, 1.0}}, function_backend([](int, std::span<const double> v) {
        if (v[1] > -0.1) throw std::runtime_error("no convergence");
        return std::cos(v[0] / 100) + v[1];
    }));
    AdaptOptions opt;
    opt.max_work = 40;
    auto st = adapt(start_adapt(o, beam_families(), {"f"}, opt), o, opt);
    for (const auto& e : st.index_set().entries()) EXPECT_EQ(e.beta[1], 1) << e.to_string();
    EXPECT_GT(st.index_set().size(), 2u);
}

TEST(Adapt, StopsOnCandidateCountAndProfitFloor) {
    auto o = beam_oracle();
    AdaptOptions opt;
    opt.max_candidates = 3;
    auto st = adapt(start_adapt(o, beam_families(), {"u1"}, opt), o, opt);
    EXPECT_EQ(st.index_set().size(), 4u);
    EXPECT_EQ(st.stop_reason(), StopReason::MaxCandidates);

    Oracle lin({{1, 1.0}}, function_backend([](int, std::span<const double> v) { return 2 * v[0] - v[1]; }));
    AdaptOptions floor;
    auto st2 = adapt(start_adapt(lin, beam_families(), {"f"}, floor), lin, floor);
    EXPECT_EQ(st2.stop_reason(), StopReason::ProfitFloor);
    EXPECT_LE(st2.index_set().size(), 5u);
}

TEST(Adapt, RerunWithWarmCacheIsIdentical) {
    const auto dir = scratch("warm");
    const auto cache = (dir / "c.log").string();
    AdaptOptions opt;
    opt.max_work = 150;
    std::string first;
    {
        Oracle o({{1, 1.0}, {2, 36.0}}, make_builtin_backend("beam-analog"), std::make_shared<EvalCache>(cache));
        first = serialize_surrogate(adaptive_build(o, beam_families(), beam_analog::displacement_names(), opt));
    }
    Oracle o({{1, 1.0}, {2, 36.0}}, make_builtin_backend("beam-analog"), std::make_shared<EvalCache>(cache));
    EXPECT_EQ(serialize_surrogate(adaptive_build(o, beam_families(), beam_analog::displacement_names(), opt)), first);
    EXPECT_EQ(o.total_invocations(), 0u);
}

TEST(ProbePoints, HaltonInsideTheFamilies) {
    const auto pts = probe_points(beam_families(), 64);
    ASSERT_EQ(pts.size(), 64u);
    EXPECT_DOUBLE_EQ(pts[0][0], 1290.0);            // radical inverse of 1 in base 2
    EXPECT_NEAR(pts[0][1], -5.0 + 5.0 / 3.0, 1e-14);  // base 3
    for (const auto& p : pts) EXPECT_TRUE(p[0] > 1130 && p[0] < 1450 && p[1] > -5 && p[1] < 0);
}
