#include "mfuq/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <regex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mfuq/errors.hpp"
#include "mfuq/forward.hpp"
#include "mfuq/hexfloat.hpp"
#include "mfuq/rng.hpp"

namespace mfuq {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& what) {
    throw ConfigError("config: " + key + ": " + what);
}

const json& require(const json& j, const std::string& key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) bad(where.empty() ? key : where + "." + key, "missing");
    return j.at(key);
}

template <class T>
T get_as(const json& j, const std::string& key) {
    try {
        return j.get<T>();
    } catch (const json::exception& e) {
        bad(key, std::string("wrong type (") + e.what() + ")");
    }
}

template <class T>
T optional_value(const json& parent, const std::string& key, T fallback, const std::string& where) {
    if (!parent.contains(key) || parent.at(key).is_null()) return fallback;
    return get_as<T>(parent.at(key), where + "." + key);
}

std::string resolve(const std::string& base, const std::string& path) {
    if (path.empty()) return path;
    const fs::path p(path);
    return p.is_absolute() ? path : (fs::path(base) / p).lexically_normal().string();
}

AdaptOptions parse_adapt(const json& j, const std::string& where) {
    AdaptOptions a;
    if (j.is_null()) return a;
    if (!j.is_object()) bad(where, "expected an object");
    a.max_work = optional_value<double>(j, "max_work", a.max_work, where);
    a.max_candidates = optional_value<std::size_t>(j, "max_candidates", a.max_candidates, where);
    a.profit_floor = optional_value<double>(j, "profit_floor", a.profit_floor, where);
    a.probe_count = optional_value<std::size_t>(j, "probe_count", a.probe_count, where);
    a.fidelity_levels = optional_value<std::vector<int>>(j, "fidelity_levels", {}, where);
    if (!(a.max_work >= 0.0)) bad(where + ".max_work", "must be >= 0");
    if (a.probe_count < 1) bad(where + ".probe_count", "must be >= 1");
    return a;
}

}  // namespace

std::vector<std::string> expand_qoi_list(const std::vector<std::string>& entries) {
    static const std::regex range(R"(^([A-Za-z_][A-Za-z_]*?)(\d+)\.\.([A-Za-z_]*)(\d+)$)");
    std::vector<std::string> out;
    for (const auto& e : entries) {
        std::smatch m;
        if (std::regex_match(e, m, range)) {
            if (!m[3].str().empty() && m[3].str() != m[1].str()) bad("qois", "range '" + e + "' mixes prefixes");
            const int a = std::stoi(m[2].str());
            const int b = std::stoi(m[4].str());
            if (a > b) bad("qois", "empty range '" + e + "'");
            for (int i = a; i <= b; ++i) out.push_back(m[1].str() + std::to_string(i));
        } else {
            if (e.empty() || e.find_first_of(" \t\n,") != std::string::npos) bad("qois", "invalid name '" + e + "'");
            out.push_back(e);
        }
    }
    std::set<std::string> seen;
    for (const auto& q : out) {
        if (!seen.insert(q).second) bad("qois", "duplicate quantity '" + q + "'");
    }
    return out;
}

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

std::uint64_t stage_seed(std::uint64_t seed, std::uint64_t stage) { return CounterRng(seed, stage).next_u64(); }

PipelineConfig parse_config(const std::string& text, const std::string& base_dir,
                            std::optional<std::uint64_t> seed_override) {
    json j;
    try {
        j = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    PipelineConfig cfg;

    const auto& params = require(j, "parameters", "");
    if (!params.is_array() || params.empty()) bad("parameters", "expected a non-empty array");
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& p = params[i];
        const std::string where = "parameters[" + std::to_string(i) + "]";
        const auto name = get_as<std::string>(require(p, "name", where), where + ".name");
        const auto label = optional_value<std::string>(p, "label", "", where);
        try {
            if (p.contains("uniform")) {
                const auto b = get_as<std::vector<double>>(p.at("uniform"), where + ".uniform");
                if (b.size() != 2) bad(where + ".uniform", "expected [lo, hi]");
                cfg.parameters.emplace_back(name, Uniform{b[0], b[1]}, label);
            } else if (p.contains("gaussian")) {
                const auto b = get_as<std::vector<double>>(p.at("gaussian"), where + ".gaussian");
                if (b.size() != 2) bad(where + ".gaussian", "expected [mean, std]");
                cfg.parameters.emplace_back(name, Gaussian{b[0], b[1]}, label);
            } else {
                bad(where, "needs \"uniform\": [lo, hi] or \"gaussian\": [mean, std]");
            }
        } catch (const std::invalid_argument& e) {
            bad(where, e.what());
        }
    }
    try {
        (void)ParamSpace(cfg.parameters);
    } catch (const std::invalid_argument& e) {
        bad("parameters", e.what());
    }

    const auto& fids = require(j, "fidelities", "");
    if (!fids.is_array() || fids.empty()) bad("fidelities", "expected a non-empty array");
    for (std::size_t i = 0; i < fids.size(); ++i) {
        const std::string where = "fidelities[" + std::to_string(i) + "]";
        cfg.fidelities.push_back({get_as<int>(require(fids[i], "alpha", where), where + ".alpha"),
                                  get_as<double>(require(fids[i], "cost", where), where + ".cost")});
        if (cfg.fidelities.back().alpha < 1) bad(where + ".alpha", "must be >= 1");
        if (!(cfg.fidelities.back().cost_weight > 0.0)) bad(where + ".cost", "must be positive");
    }

    const auto& orc = require(j, "oracle", "");
    cfg.oracle.builtin = optional_value<std::string>(orc, "builtin", "", "oracle");
    cfg.oracle.command = optional_value<std::string>(orc, "command", "", "oracle");
    cfg.oracle.workdir = resolve(base_dir, optional_value<std::string>(orc, "workdir", ".", "oracle"));
    cfg.oracle.timeout_s = optional_value<double>(orc, "timeout_s", 600.0, "oracle");
    if (cfg.oracle.builtin.empty() == cfg.oracle.command.empty()) {
        bad("oracle", "set exactly one of \"builtin\" or \"command\"");
    }
    if (!cfg.oracle.builtin.empty()) {
        const auto names = builtin_model_names();
        if (std::find(names.begin(), names.end(), cfg.oracle.builtin) == names.end()) {
            bad("oracle.builtin", "unknown model '" + cfg.oracle.builtin + "'");
        }
    }
    if (!(cfg.oracle.timeout_s > 0.0)) bad("oracle.timeout_s", "must be positive");

    cfg.lanes = optional_value<int>(j, "lanes", 1, "");
    if (cfg.lanes < 1) bad("lanes", "must be >= 1");
    if (!j.contains("seed") && !seed_override) bad("seed", "missing (runs must be seeded explicitly)");
    cfg.seed = seed_override ? *seed_override : get_as<std::uint64_t>(j.at("seed"), "seed");

    const json build = j.value("build", json::object());
    cfg.build = parse_adapt(build, "build");
    cfg.build_index_set = resolve(base_dir, optional_value<std::string>(build, "index_set", "", "build"));

    const auto& cal = require(j, "calibration", "");
    cfg.calibration_qois = expand_qoi_list(
        get_as<std::vector<std::string>>(require(cal, "qois", "calibration"), "calibration.qois"));
    if (cfg.calibration_qois.empty()) bad("calibration.qois", "must not be empty");
    cfg.observations = resolve(base_dir, optional_value<std::string>(cal, "observations", "", "calibration"));
    cfg.map.n_starts = optional_value<std::size_t>(cal, "n_starts", 20, "calibration");
    cfg.map.penalty_factor = optional_value<double>(cal, "penalty_factor", 1e3, "calibration");
    cfg.map.initial_step = optional_value<double>(cal, "initial_step", 0.05, "calibration");
    if (cfg.map.n_starts < 1) bad("calibration.n_starts", "must be >= 1");
    cfg.map.seed = stage_seed(cfg.seed, 1);

    const auto& pred = require(j, "prediction", "");
    cfg.prediction_qois = expand_qoi_list(
        get_as<std::vector<std::string>>(require(pred, "qois", "prediction"), "prediction.qois"));
    if (cfg.prediction_qois.empty()) bad("prediction.qois", "must not be empty");

    const json fwd = j.value("forward", json::object());
    cfg.forward_samples = optional_value<std::size_t>(fwd, "samples", 10000, "forward");
    if (cfg.forward_samples < 2) bad("forward.samples", "must be >= 2");
    cfg.forward_build = parse_adapt(fwd.value("build", json()), "forward.build");
    if (fwd.contains("bandwidth") && !fwd.at("bandwidth").is_null()) {
        cfg.bandwidth = get_as<double>(fwd.at("bandwidth"), "forward.bandwidth");
        if (!(*cfg.bandwidth > 0.0)) bad("forward.bandwidth", "must be positive");
    }
    cfg.density_qois = expand_qoi_list(optional_value<std::vector<std::string>>(fwd, "density_qois", {}, "forward"));
    for (const auto& q : cfg.density_qois) {
        if (std::find(cfg.prediction_qois.begin(), cfg.prediction_qois.end(), q) == cfg.prediction_qois.end()) {
            bad("forward.density_qois", "'" + q + "' is not a prediction quantity");
        }
    }

    if (j.contains("synthetic")) {
        const auto& syn = j.at("synthetic");
        SyntheticConfig s;
        s.truth = get_as<Point>(require(syn, "truth", "synthetic"), "synthetic.truth");
        s.noise_std = optional_value<double>(syn, "noise_std", 0.0, "synthetic");
        if (s.truth.size() != cfg.parameters.size()) bad("synthetic.truth", "wrong dimension");
        if (!(s.noise_std >= 0.0)) bad("synthetic.noise_std", "must be >= 0");
        cfg.synthetic = s;
    }

    json effective = j;
    effective.erase("lanes");
    effective["seed"] = cfg.seed;
    cfg.provenance = fnv1a_hex(effective.dump());
    return cfg;
}

PipelineConfig load_config(const std::string& path, std::optional<std::uint64_t> seed_override) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), fs::path(path).parent_path().string(), seed_override);
}

// ---------------------------------------------------------------------------
// Shared plumbing

namespace {

void say(const RunOptions& run, const std::string& msg) {
    if (run.log) *run.log << msg << "\n";
}

fs::path out_path(const RunOptions& run, const std::string& name) { return fs::path(run.out_dir) / name; }

void ensure_dir(const fs::path& p) {
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw ConfigError("cannot create directory " + p.string() + ": " + ec.message());
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + p.string());
    out << text;
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("missing artifact " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string index_line(const ExtMultiIndex& idx, int coefficient) {
    return idx.to_string() + " c=" + std::to_string(coefficient);
}

std::string describe_state(const PipelineConfig& cfg, const std::string& title, const std::vector<std::string>& qois,
                           const AdaptState& state, const MiscSurrogate& s) {
    std::ostringstream r;
    r << "# provenance=" << cfg.provenance << "\n";
    r << title << "\n";
    r << "oracle: " << (cfg.oracle.builtin.empty() ? "external: " + cfg.oracle.command : "builtin: " + cfg.oracle.builtin)
      << "\n";
    r << "qois: " << qois.size() << "\n";
    r << "stop_reason: " << to_string(state.stop_reason()) << "\n";
    r << "index_set_size: " << s.index_set().size() << "\n";
    for (const auto& [f, n] : state.evaluations_per_fidelity()) {
        r << "fidelity " << f << ": points " << n << ", work " << format_real(state.work_per_fidelity().at(f))
          << "\n";
    }
    r << "total_work: " << format_real(state.total_work()) << "\n";
    r << "index set:\n";
    for (const auto& idx : s.index_set().entries()) {
        const auto it = s.coefficients().find(idx);
        r << "  " << index_line(idx, it == s.coefficients().end() ? 0 : it->second) << "\n";
    }
    r << "history:\n";
    for (std::size_t i = 0; i < state.history().size(); ++i) {
        const auto& h = state.history()[i];
        r << "  " << i << " " << h.selected.to_string() << " profit=" << format_real(h.profit)
          << " work=" << format_real(h.work_spent) << "\n";
    }
    return r.str();
}

struct BuildOutcome {
    MiscSurrogate surrogate;
    std::string report;
};

BuildOutcome run_adaptive(const PipelineConfig& cfg, Oracle& oracle, std::vector<KnotFamily> families,
                          const std::vector<std::string>& qois, const AdaptOptions& options, const std::string& title) {
    auto state = start_adapt(oracle, std::move(families), qois, options);
    state = adapt(std::move(state), oracle, options);
    auto s = state.surrogate();
    auto report = describe_state(cfg, title, qois, state, s);
    return {std::move(s), std::move(report)};
}

void log_invocations(const RunOptions& run, const Oracle& oracle, const std::string& what) {
    std::ostringstream m;
    m << what << ": " << oracle.total_invocations() << " oracle invocations";
    for (const auto& f : oracle.fidelities()) m << " [f" << f.alpha << ": " << oracle.invocations(f.alpha) << "]";
    m << ", " << oracle.cache().distinct_points() << " points cached";
    say(run, m.str());
}

}  // namespace

Oracle make_oracle(const PipelineConfig& cfg, const RunOptions& run, const std::string& stage) {
    std::shared_ptr<ModelBackend> backend;
    if (!cfg.oracle.builtin.empty()) {
        backend = make_builtin_backend(cfg.oracle.builtin);
    } else {
        backend = std::make_shared<ExternalProcessBackend>(
            ExternalProcessBackend::Options{cfg.oracle.command, cfg.oracle.workdir, cfg.oracle.timeout_s});
    }
    ensure_dir(out_path(run, "cache"));
    auto cache = std::make_shared<EvalCache>(out_path(run, "cache/" + stage + ".log").string());
    try {
        Oracle oracle(cfg.fidelities, std::move(backend), std::move(cache));
        oracle.set_lanes(run.lanes.value_or(cfg.lanes));
        return oracle;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: fidelities: ") + e.what());
    }
}

std::vector<KnotFamily> prior_families(const ParamSpace& space) {
    std::vector<KnotFamily> out;
    for (const auto& p : space.params()) {
        if (const auto* u = std::get_if<Uniform>(&p.distribution())) {
            out.push_back(KnotFamily::symmetric_leja(u->lo, u->hi));
        } else {
            const auto& g = std::get<Gaussian>(p.distribution());
            out.push_back(KnotFamily::weighted_gaussian_leja(g.mean, g.std));
        }
    }
    return out;
}

std::vector<KnotFamily> posterior_families(const GaussianPosterior& post) {
    std::vector<KnotFamily> out;
    const auto sd = post.stddevs();
    for (std::size_t n = 0; n < post.dim(); ++n) {
        if (!(sd[n] > 0.0)) throw NumericalError("posterior std of '" + post.names[n] + "' is zero");
        out.push_back(KnotFamily::weighted_gaussian_leja(post.mean[n], sd[n]));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Commands

void cmd_build(const PipelineConfig& cfg, const RunOptions& run) {
    ensure_dir(run.out_dir);
    auto oracle = make_oracle(cfg, run, "build");
    const auto space = cfg.space();
    std::string report;
    std::optional<MiscSurrogate> s;
    if (!cfg.build_index_set.empty()) {
        const auto set = load_index_set(cfg.build_index_set);
        if (set.dim() != space.dim()) throw ConfigError("index set dimension does not match the parameters");
        s = build_surrogate(set, oracle, prior_families(space), cfg.calibration_qois, cfg.build.fidelity_levels);
        std::ostringstream r;
        r << "# provenance=" << cfg.provenance << "\nbuild (replayed index set)\n";
        double total = 0.0;
        for (const auto& [f, n] : s->points_per_fidelity()) {
            const double w = oracle.cost_weight(f) * static_cast<double>(n);
            total += w;
            r << "fidelity " << f << ": points " << n << ", work " << format_real(w) << "\n";
        }
        r << "total_work: " << format_real(total) << "\nindex set:\n";
        for (const auto& idx : s->index_set().entries()) {
            const auto it = s->coefficients().find(idx);
            r << "  " << index_line(idx, it == s->coefficients().end() ? 0 : it->second) << "\n";
        }
        report = r.str();
    } else {
        auto out = run_adaptive(cfg, oracle, prior_families(space), cfg.calibration_qois, cfg.build, "build");
        s = std::move(out.surrogate);
        report = std::move(out.report);
    }
    save_surrogate(*s, out_path(run, "surrogate.json").string(), cfg.provenance);
    save_index_set(s->index_set(), out_path(run, "index_set.json").string());
    write_text(out_path(run, "build_report.txt"), report);
    log_invocations(run, oracle, "build");
}

void cmd_calibrate(const PipelineConfig& cfg, const RunOptions& run) {
    if (cfg.observations.empty()) throw ConfigError("config: calibration.observations is not set");
    const auto space = cfg.space();
    const auto s = load_surrogate(out_path(run, "surrogate.json").string(), space.dim());
    const auto obs = ObservationSet::load_csv(cfg.observations);
    const auto model = surrogate_forward_map(s, obs);
    const auto post = calibrate(model, obs, space, cfg.map);
    for (const auto& w : post.warnings) say(run, "warning: " + w);
    save_posterior(post, out_path(run, "posterior.json").string(), cfg.provenance);

    std::ostringstream t;
    t << "# provenance=" << cfg.provenance << "\n";
    t << "parameter,stage,mean,std,cov,lower_3sigma,upper_3sigma\n";
    const auto sd = post.stddevs();
    auto row = [&t](const std::string& name, const char* stage, double mean, double std) {
        const double cov = mean != 0.0 ? std / std::abs(mean) : std::numeric_limits<double>::infinity();
        t << name << "," << stage << "," << format_real(mean) << "," << format_real(std) << "," << format_real(cov)
          << "," << format_real(mean - 3.0 * std) << "," << format_real(mean + 3.0 * std) << "\n";
    };
    for (std::size_t n = 0; n < space.dim(); ++n) {
        row(space[n].name(), "prior", space[n].mean(), space[n].stddev());
        row(space[n].name(), "posterior", post.mean[n], sd[n]);
    }
    write_text(out_path(run, "calibration_table.csv"), t.str());
    std::ostringstream m;
    m << "calibrate: v_MAP = (";
    for (std::size_t n = 0; n < post.dim(); ++n) m << (n ? ", " : "") << post.mean[n];
    m << "), sigma_meas = " << post.sigma_meas;
    say(run, m.str());
}

void cmd_forward(const PipelineConfig& cfg, const RunOptions& run) {
    const auto space = cfg.space();
    const auto post = load_posterior(out_path(run, "posterior.json").string());
    if (post.dim() != space.dim()) throw ConfigError("posterior dimension does not match the parameters");
    auto oracle = make_oracle(cfg, run, "forward");

    auto prior_build = run_adaptive(cfg, oracle, prior_families(space), cfg.prediction_qois, cfg.forward_build,
                                    "forward build (prior knots)");
    auto post_build = run_adaptive(cfg, oracle, posterior_families(post), cfg.prediction_qois, cfg.forward_build,
                                   "forward build (posterior knots)");
    save_surrogate(prior_build.surrogate, out_path(run, "forward_prior_surrogate.json").string(), cfg.provenance);
    save_surrogate(post_build.surrogate, out_path(run, "forward_posterior_surrogate.json").string(), cfg.provenance);
    log_invocations(run, oracle, "forward builds");

    const auto prior_samples = push_samples(prior_build.surrogate, space, cfg.forward_samples, stage_seed(cfg.seed, 2));
    const auto post_samples = push_samples(post_build.surrogate, post, cfg.forward_samples, stage_seed(cfg.seed, 3));
    const auto prior_bands = band_summary(prior_samples, cfg.bandwidth);
    const auto post_bands = band_summary(post_samples, cfg.bandwidth);
    write_bands_csv(out_path(run, "bands_prior.csv").string(), prior_bands, cfg.provenance);
    write_bands_csv(out_path(run, "bands_posterior.csv").string(), post_bands, cfg.provenance);

    if (!cfg.density_qois.empty()) ensure_dir(out_path(run, "densities"));
    for (const auto& q : cfg.density_qois) {
        const auto j = static_cast<std::size_t>(
            std::find(cfg.prediction_qois.begin(), cfg.prediction_qois.end(), q) - cfg.prediction_qois.begin());
        write_density_csv(out_path(run, "densities/prior_" + q + ".csv").string(),
                          kde(prior_samples.column(j), cfg.bandwidth), cfg.provenance);
        write_density_csv(out_path(run, "densities/posterior_" + q + ".csv").string(),
                          kde(post_samples.column(j), cfg.bandwidth), cfg.provenance);
    }

    const double reduction = uncertainty_reduction(prior_bands, post_bands);
    std::ostringstream r;
    r << "# provenance=" << cfg.provenance << "\n";
    r << "samples: " << cfg.forward_samples << "\n";
    r << "prediction_qois: " << cfg.prediction_qois.size() << "\n";
    r << "uncertainty_reduction_percent: " << format_real(reduction) << "\n";
    r << "prior_extrapolated_fraction: " << format_real(prior_samples.extrapolated_fraction()) << "\n";
    r << "posterior_extrapolated_fraction: " << format_real(post_samples.extrapolated_fraction()) << "\n";
    r << "\n" << prior_build.report.substr(prior_build.report.find('\n') + 1);
    r << "\n" << post_build.report.substr(post_build.report.find('\n') + 1);
    write_text(out_path(run, "forward_report.txt"), r.str());
    say(run, "forward: uncertainty reduction " + format_real(reduction) + "%");
    if (post_samples.extrapolated > 0) {
        say(run, "forward: " + format_real(100.0 * post_samples.extrapolated_fraction()) +
                     "% of posterior samples lie outside the posterior surrogate's nominal domain");
    }
}

std::string cmd_report(const RunOptions& run) {
    const std::vector<std::string> needed = {"build_report.txt", "calibration_table.csv", "posterior.json",
                                             "forward_report.txt", "bands_prior.csv", "bands_posterior.csv"};
    std::string missing;
    for (const auto& n : needed) {
        if (!fs::exists(out_path(run, n))) missing += (missing.empty() ? "" : ", ") + n;
    }
    if (!missing.empty()) throw ConfigError("report: missing artifacts in " + run.out_dir + ": " + missing);

    const auto post = load_posterior(out_path(run, "posterior.json").string());
    std::ostringstream r;
    r << "== build\n" << read_text(out_path(run, "build_report.txt"));
    r << "\n== calibration\n" << read_text(out_path(run, "calibration_table.csv"));
    r << "sigma_meas: " << format_real(post.sigma_meas) << (post.sigma_floored ? " (floored)" : "") << "\n";
    r << "misfit_at_map: " << format_real(post.misfit) << "\n";
    const auto rho = post.correlation();
    r << "posterior correlation:\n";
    for (Eigen::Index i = 0; i < rho.rows(); ++i) {
        r << " ";
        for (Eigen::Index k = 0; k < rho.cols(); ++k) r << " " << format_real(rho(i, k));
        r << "\n";
    }
    for (const auto& w : post.warnings) r << "warning: " << w << "\n";
    r << "\n== forward\n" << read_text(out_path(run, "forward_report.txt"));
    const auto text = r.str();
    write_text(out_path(run, "report.txt"), text);
    return text;
}

void cmd_synth_obs(const PipelineConfig& cfg, const RunOptions& run) {
    if (!cfg.synthetic) throw ConfigError("config: synthetic section is required for synth-obs");
    ensure_dir(run.out_dir);
    const auto& syn = *cfg.synthetic;
    std::vector<double> clean;
    if (cfg.oracle.builtin == "beam-analog") {
        for (const auto& q : cfg.calibration_qois) clean.push_back(beam_analog::exact(q, syn.truth));
    } else {
        auto oracle = make_oracle(cfg, run, "synthetic");
        const int top = oracle.fidelities().back().alpha;
        const std::vector<Point> pts{syn.truth};
        const auto res = oracle.eval_batch(top, pts, cfg.calibration_qois);
        if (!res[0].ok()) throw OracleError("synthetic truth could not be evaluated: " + *res[0].error);
        clean = res[0].values;
    }
    CounterRng rng(stage_seed(cfg.seed, 4));
    std::vector<Observation> entries;
    for (std::size_t k = 0; k < clean.size(); ++k) {
        entries.push_back({cfg.calibration_qois[k], clean[k] + syn.noise_std * rng.normal()});
    }
    ObservationSet(entries).save_csv(out_path(run, "observations.csv").string(), cfg.provenance);
}

}  // namespace mfuq
