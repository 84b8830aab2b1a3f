#include "mfuq/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mfuq/errors.hpp"
#include "mfuq/hexfloat.hpp"

namespace mfuq {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Observations

ObservationSet::ObservationSet(std::vector<Observation> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) {
        throw ConfigError("observation set is empty");
    }
    std::set<std::string> seen;
    for (const auto& e : entries_) {
        if (!std::isfinite(e.value)) throw ConfigError("observation '" + e.qoi + "' is not finite");
        if (!seen.insert(e.qoi).second) throw ConfigError("observation '" + e.qoi + "' appears twice");
    }
}

ObservationSet ObservationSet::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read observation file " + path);
    std::vector<Observation> entries;
    std::string line;
    bool header = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line != "qoi,value") throw ConfigError(path + ": expected header 'qoi,value'");
            header = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos || comma == 0) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'qoi,value'");
        }
        const std::string value = line.substr(comma + 1);
        char* end = nullptr;
        const double x = std::strtod(value.c_str(), &end);
        if (value.empty() || *end != '\0') {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": bad value '" + value + "'");
        }
        entries.push_back({line.substr(0, comma), x});
    }
    if (!header) throw ConfigError(path + ": missing header 'qoi,value'");
    return ObservationSet(std::move(entries));
}

void ObservationSet::save_csv(const std::string& path, const std::string& provenance) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    if (!provenance.empty()) out << "# provenance=" << provenance << "\n";
    out << "qoi,value\n";
    for (const auto& e : entries_) out << e.qoi << "," << format_real(e.value) << "\n";
}

std::vector<std::string> ObservationSet::names() const {
    std::vector<std::string> out;
    for (const auto& e : entries_) out.push_back(e.qoi);
    return out;
}

std::vector<double> ObservationSet::values() const {
    std::vector<double> out;
    for (const auto& e : entries_) out.push_back(e.value);
    return out;
}

double ObservationSet::max_abs_value() const {
    double m = 0.0;
    for (const auto& e : entries_) m = std::max(m, std::abs(e.value));
    return m;
}

ForwardMap surrogate_forward_map(const MiscSurrogate& surrogate, const ObservationSet& obs) {
    const auto& names = surrogate.qoi_names();
    std::vector<std::size_t> pick;
    std::string missing;
    for (const auto& e : obs.entries()) {
        auto it = std::find(names.begin(), names.end(), e.qoi);
        if (it == names.end()) {
            missing += (missing.empty() ? "" : ", ") + e.qoi;
        } else {
            pick.push_back(static_cast<std::size_t>(it - names.begin()));
        }
    }
    if (!missing.empty()) throw ConfigError("surrogate does not provide observed quantities: " + missing);
    return [&surrogate, pick](std::span<const double> v) {
        const auto all = surrogate.evaluate(v);
        std::vector<double> out(pick.size());
        for (std::size_t k = 0; k < pick.size(); ++k) out[k] = all[pick[k]];
        return out;
    };
}

// ---------------------------------------------------------------------------
// Likelihood

double misfit(const ForwardMap& model, const ObservationSet& obs, std::span<const double> v) {
    const auto pred = model(v);
    if (pred.size() != obs.size()) {
        throw std::invalid_argument("model returned " + std::to_string(pred.size()) + " values for " +
                                    std::to_string(obs.size()) + " observations");
    }
    double s = 0.0;
    for (std::size_t k = 0; k < pred.size(); ++k) {
        const double r = obs.entries()[k].value - pred[k];
        s += r * r;
    }
    return s;
}

double log_likelihood(double misfit_value, std::size_t K, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    return -static_cast<double>(K) * std::log(sigma * std::sqrt(2.0 * std::numbers::pi)) -
           misfit_value / (2.0 * sigma * sigma);
}

double log_likelihood(const ForwardMap& model, const ObservationSet& obs, std::span<const double> v, double sigma) {
    return log_likelihood(misfit(model, obs, v), obs.size(), sigma);
}

// ---------------------------------------------------------------------------
// Nelder-Mead

NelderMeadResult nelder_mead(const Objective& f, Point x0, const NelderMeadOptions& options) {
    const std::size_t n = x0.size();
    if (n == 0) throw std::invalid_argument("nelder_mead needs at least one coordinate");
    if (!options.initial_step.empty() && options.initial_step.size() != n) {
        throw std::invalid_argument("initial_step has the wrong length");
    }
    NelderMeadResult res;
    auto eval = [&](const Point& x) {
        ++res.evaluations;
        const double y = f(x);
        return std::isfinite(y) ? y : std::numeric_limits<double>::infinity();
    };

    std::vector<Point> v(n + 1, x0);
    std::vector<double> fv(n + 1);
    fv[0] = f(x0);
    ++res.evaluations;
    if (!std::isfinite(fv[0])) throw NumericalError("objective is not finite at the starting point");
    for (std::size_t i = 0; i < n; ++i) {
        double step = options.initial_step.empty() ? (x0[i] != 0.0 ? 0.05 * x0[i] : 0.00025) : options.initial_step[i];
        v[i + 1][i] += step;
        fv[i + 1] = eval(v[i + 1]);
    }

    std::vector<std::size_t> order(n + 1);
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        std::vector<Point> v2;
        std::vector<double> f2;
        for (auto i : order) {
            v2.push_back(std::move(v[i]));
            f2.push_back(fv[i]);
        }
        v = std::move(v2);
        fv = std::move(f2);
    };
    sort_simplex();

    auto affine = [n](const Point& a, const Point& b, double t) {  // a + t (b - a)
        Point out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + t * (b[i] - a[i]);
        return out;
    };

    Point xbar(n);
    while (res.iterations < options.max_iter) {
        double fspread = 0.0;
        double xspread = 0.0;
        double xscale = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            fspread = std::max(fspread, std::abs(fv[i] - fv[0]));
            for (std::size_t d = 0; d < n; ++d) xspread = std::max(xspread, std::abs(v[i][d] - v[0][d]));
        }
        for (double x : v[0]) xscale = std::max(xscale, std::abs(x));
        const double xtol = std::max(options.tol_x, 10.0 * std::numeric_limits<double>::epsilon() * xscale);
        const double ftol = std::max(options.tol_f, 10.0 * std::numeric_limits<double>::epsilon() * std::abs(fv[0]));
        if (fspread <= ftol && xspread <= xtol) {
            res.converged = true;
            break;
        }
        ++res.iterations;

        std::fill(xbar.begin(), xbar.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t d = 0; d < n; ++d) xbar[d] += v[i][d] / static_cast<double>(n);
        }
        const Point xr = affine(xbar, v[n], -1.0);
        const double fr = eval(xr);
        if (fr < fv[0]) {
            const Point xe = affine(xbar, v[n], -2.0);
            const double fe = eval(xe);
            if (fe < fr) {
                v[n] = xe;
                fv[n] = fe;
            } else {
                v[n] = xr;
                fv[n] = fr;
            }
        } else if (fr < fv[n - 1]) {
            v[n] = xr;
            fv[n] = fr;
        } else {
            bool shrink = false;
            if (fr < fv[n]) {
                const Point xc = affine(xbar, xr, 0.5);
                const double fc = eval(xc);
                if (fc <= fr) {
                    v[n] = xc;
                    fv[n] = fc;
                } else {
                    shrink = true;
                }
            } else {
                const Point xcc = affine(xbar, v[n], 0.5);
                const double fcc = eval(xcc);
                if (fcc < fv[n]) {
                    v[n] = xcc;
                    fv[n] = fcc;
                } else {
                    shrink = true;
                }
            }
            if (shrink) {
                for (std::size_t i = 1; i <= n; ++i) {
                    v[i] = affine(v[0], v[i], 0.5);
                    fv[i] = eval(v[i]);
                }
            }
        }
        sort_simplex();
    }
    res.x = v[0];
    res.f = fv[0];
    return res;
}

// ---------------------------------------------------------------------------
// MAP

MapResult find_map(const ForwardMap& model, const ObservationSet& obs, const ParamSpace& space,
                   const MapOptions& options) {
    if (options.n_starts < 1) throw std::invalid_argument("find_map needs at least one start");
    const std::size_t N = space.dim();
    const Point center = space.center();
    std::vector<double> width(N);
    for (std::size_t n = 0; n < N; ++n) width[n] = space[n].scale_width();

    MapResult result;
    auto to_v = [&](std::span<const double> u) {
        Point v(N);
        for (std::size_t n = 0; n < N; ++n) v[n] = center[n] + width[n] * u[n];
        return v;
    };
    auto raw = [&](const Point& v) {
        ++result.evaluations;
        return misfit(model, obs, v);
    };
    const double mu = options.penalty_factor * raw(center);
    auto penalty = [&](const Point& v) {
        double p = 0.0;
        for (std::size_t n = 0; n < N; ++n) {
            const auto* box = std::get_if<Uniform>(&space[n].distribution());
            if (!box) continue;
            const double d = v[n] < box->lo ? box->lo - v[n] : (v[n] > box->hi ? v[n] - box->hi : 0.0);
            p += (d / width[n]) * (d / width[n]);
        }
        return mu * p;
    };
    const Objective objective = [&](std::span<const double> u) {
        const Point v = to_v(u);
        return raw(v) + penalty(v);
    };

    NelderMeadOptions nm = options.nelder_mead;
    nm.initial_step.assign(N, options.initial_step);
    const auto starts = space.sample(options.n_starts, options.seed);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : starts) {
        StartReport rep;
        rep.initial = s;
        Point u0(N);
        for (std::size_t n = 0; n < N; ++n) u0[n] = (s[n] - center[n]) / width[n];
        try {
            auto r = nelder_mead(objective, u0, nm);
            rep.iterations = r.iterations;
            // Restart from the result to escape a collapsed simplex.
            for (int restart = 0; restart < 5; ++restart) {
                auto again = nelder_mead(objective, r.x, nm);
                rep.iterations += again.iterations;
                const bool improved = again.f < r.f - nm.tol_f;
                if (again.f <= r.f) r = std::move(again);
                if (!improved) break;
            }
            rep.final = to_v(r.x);
            rep.objective = r.f;
            rep.misfit = raw(rep.final);
            rep.converged = r.converged;
        } catch (const NumericalError&) {
            rep.final = s;
            rep.objective = rep.misfit = std::numeric_limits<double>::infinity();
        }
        if (rep.objective < best) {
            best = rep.objective;
            result.v_map = rep.final;
            result.misfit = rep.misfit;
        }
        result.starts.push_back(std::move(rep));
    }
    if (!std::isfinite(best)) throw NumericalError("every MAP start failed: the misfit is not finite");
    return result;
}

// ---------------------------------------------------------------------------
// Noise level and covariance

SigmaEstimate estimate_sigma(double misfit_value, const ObservationSet& obs) {
    if (!(misfit_value >= 0.0) || !std::isfinite(misfit_value)) {
        throw NumericalError("misfit at the MAP is not a finite non-negative number");
    }
    const double sigma = std::sqrt(misfit_value / static_cast<double>(obs.size()));
    if (sigma > 0.0) return {sigma, false};
    const double floor = 1e-12 * obs.max_abs_value();
    if (!(floor > 0.0)) throw NumericalError("zero misfit and all observations zero: sigma is undefined");
    return {floor, true};
}

SigmaEstimate estimate_sigma(const ForwardMap& model, const ObservationSet& obs, std::span<const double> v_map) {
    return estimate_sigma(misfit(model, obs, v_map), obs);
}

LaplaceResult laplace_covariance(const ForwardMap& model, const ParamSpace& space, std::span<const double> v_map,
                                 double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    const std::size_t N = space.dim();
    if (v_map.size() != N) throw std::invalid_argument("v_map has the wrong dimension");
    const Point v0(v_map.begin(), v_map.end());
    const auto f0 = model(v0);
    const std::size_t K = f0.size();

    LaplaceResult out;
    out.jacobian.resize(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(N));
    for (std::size_t n = 0; n < N; ++n) {
        const double h = 1e-4 * space[n].scale_width();
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        if (const auto* box = std::get_if<Uniform>(&space[n].distribution())) {
            lo = box->lo;
            hi = box->hi;
        }
        Point vp = v0;
        Point vm = v0;
        double denom = 2.0 * h;
        const bool inside = v0[n] >= lo && v0[n] <= hi;
        if (inside && v0[n] - h < lo && v0[n] + h <= hi) {
            vp[n] += h;  // forward
            denom = h;
        } else if (inside && v0[n] + h > hi && v0[n] - h >= lo) {
            vm[n] -= h;  // backward
            denom = h;
        } else {
            vp[n] += h;
            vm[n] -= h;
        }
        const auto fp = vp == v0 ? f0 : model(vp);
        const auto fm = vm == v0 ? f0 : model(vm);
        for (std::size_t k = 0; k < K; ++k) {
            out.jacobian(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n)) = (fp[k] - fm[k]) / denom;
        }
    }

    const Eigen::MatrixXd jtj = out.jacobian.transpose() * out.jacobian;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jtj);
    if (eig.info() != Eigen::Success) throw NumericalError("eigen-decomposition of J^T J failed");
    const auto& lambda = eig.eigenvalues();
    const double lmax = lambda.maxCoeff();
    if (!(lmax > 0.0) || !std::isfinite(lmax)) {
        throw NumericalError("the model does not respond to any parameter at the MAP");
    }
    const double cutoff = 1e-12 * lmax;
    Eigen::MatrixXd inv = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    bool singular = false;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        const Eigen::VectorXd q = eig.eigenvectors().col(i);
        if (lambda(i) > cutoff) {
            inv += q * q.transpose() / lambda(i);
        } else {
            singular = true;
            out.flat_directions.push_back(q);
        }
    }
    if (!singular) inv = jtj.llt().solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N)));
    out.covariance = sigma * sigma * 0.5 * (inv + inv.transpose());
    return out;
}

std::vector<double> GaussianPosterior::stddevs() const {
    std::vector<double> out(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
        out[i] = std::sqrt(std::max(0.0, covariance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i))));
    }
    return out;
}

Eigen::MatrixXd GaussianPosterior::correlation() const {
    const auto s = stddevs();
    Eigen::MatrixXd rho = covariance;
    for (Eigen::Index i = 0; i < rho.rows(); ++i) {
        for (Eigen::Index j = 0; j < rho.cols(); ++j) {
            const double d = s[static_cast<std::size_t>(i)] * s[static_cast<std::size_t>(j)];
            rho(i, j) = d > 0.0 ? rho(i, j) / d : 0.0;
        }
    }
    return rho;
}

GaussianPosterior calibrate(const ForwardMap& model, const ObservationSet& obs, const ParamSpace& space,
                            const MapOptions& options) {
    GaussianPosterior post;
    for (const auto& p : space.params()) post.names.push_back(p.name());
    auto map = find_map(model, obs, space, options);
    post.mean = map.v_map;
    post.misfit = map.misfit;
    post.multistart = std::move(map.starts);
    const auto sig = estimate_sigma(map.misfit, obs);
    post.sigma_meas = sig.sigma;
    post.sigma_floored = sig.floored;
    if (sig.floored) post.warnings.push_back("misfit at the MAP is zero; sigma_meas set to the floor");
    auto lap = laplace_covariance(model, space, post.mean, post.sigma_meas);
    post.covariance = std::move(lap.covariance);
    for (const auto& q : lap.flat_directions) {
        std::ostringstream msg;
        msg << "J^T J is singular; flat direction (";
        for (Eigen::Index i = 0; i < q.size(); ++i) msg << (i ? ", " : "") << q(i);
        msg << ")";
        post.warnings.push_back(msg.str());
    }
    return post;
}

// ---------------------------------------------------------------------------
// Posterior file

namespace {

json hex_vec(std::span<const double> xs) {
    json a = json::array();
    for (double x : xs) a.push_back(to_hex(x));
    return a;
}

Point unhex_vec(const json& a) {
    Point out;
    for (const auto& x : a) out.push_back(from_hex(x.get<std::string>()));
    return out;
}

}  // namespace

std::string serialize_posterior(const GaussianPosterior& post, const std::string& provenance) {
    const auto N = static_cast<Eigen::Index>(post.dim());
    std::vector<double> cov;
    for (Eigen::Index i = 0; i < N; ++i) {
        for (Eigen::Index j = 0; j < N; ++j) cov.push_back(post.covariance(i, j));
    }
    json j;
    j["format"] = "mfuq-gaussian-posterior";
    j["version"] = 1;
    j["names"] = post.names;
    j["mean"] = hex_vec(post.mean);
    j["covariance"] = hex_vec(cov);
    j["sigma_meas"] = to_hex(post.sigma_meas);
    j["sigma_floored"] = post.sigma_floored;
    j["misfit"] = to_hex(post.misfit);
    j["warnings"] = post.warnings;
    j["provenance"] = provenance;
    j["multistart"] = json::array();
    for (const auto& s : post.multistart) {
        j["multistart"].push_back({{"initial", hex_vec(s.initial)},
                                   {"final", hex_vec(s.final)},
                                   {"misfit", to_hex(s.misfit)},
                                   {"objective", to_hex(s.objective)},
                                   {"iterations", s.iterations},
                                   {"converged", s.converged}});
    }
    json readable;
    readable["mean"] = post.mean;
    readable["std"] = post.stddevs();
    readable["sigma_meas"] = post.sigma_meas;
    j["readable"] = readable;
    return j.dump(1) + "\n";
}

GaussianPosterior deserialize_posterior(const std::string& text, std::string* provenance) {
    try {
        const json j = json::parse(text);
        if (j.at("format").get<std::string>() != "mfuq-gaussian-posterior" || j.at("version").get<int>() != 1) {
            throw FormatError("not a version-1 posterior file");
        }
        GaussianPosterior post;
        post.names = j.at("names").get<std::vector<std::string>>();
        post.mean = unhex_vec(j.at("mean"));
        const auto cov = unhex_vec(j.at("covariance"));
        const auto N = post.mean.size();
        if (post.names.size() != N || cov.size() != N * N || N == 0) {
            throw FormatError("posterior dimensions are inconsistent");
        }
        post.covariance.resize(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
        for (std::size_t i = 0; i < N; ++i) {
            for (std::size_t k = 0; k < N; ++k) {
                post.covariance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = cov[i * N + k];
            }
        }
        post.sigma_meas = from_hex(j.at("sigma_meas").get<std::string>());
        post.sigma_floored = j.at("sigma_floored").get<bool>();
        post.misfit = from_hex(j.at("misfit").get<std::string>());
        post.warnings = j.at("warnings").get<std::vector<std::string>>();
        for (const auto& s : j.at("multistart")) {
            StartReport r;
            r.initial = unhex_vec(s.at("initial"));
            r.final = unhex_vec(s.at("final"));
            r.misfit = from_hex(s.at("misfit").get<std::string>());
            r.objective = from_hex(s.at("objective").get<std::string>());
            r.iterations = s.at("iterations").get<std::size_t>();
            r.converged = s.at("converged").get<bool>();
            post.multistart.push_back(std::move(r));
        }
        if (provenance) *provenance = j.value("provenance", std::string{});
        return post;
    } catch (const json::exception& e) {
        throw FormatError(std::string("corrupted posterior: ") + e.what());
    }
}

void save_posterior(const GaussianPosterior& post, const std::string& path, const std::string& provenance) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << serialize_posterior(post, provenance);
}

GaussianPosterior load_posterior(const std::string& path, std::string* provenance) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read posterior file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return deserialize_posterior(ss.str(), provenance);
}

}  // namespace mfuq
