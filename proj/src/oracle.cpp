#include "mfuq/oracle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "mfuq/errors.hpp"

namespace mfuq {

FunctionBackend::FunctionBackend(std::string name, Scalar fn, std::vector<std::pair<double, double>> domain,
                                 std::vector<int> fidelities)
    : name_(std::move(name)), fn_(std::move(fn)), domain_(std::move(domain)), fidelities_(std::move(fidelities)) {}

EvalResult FunctionBackend::evaluate_one(const EvalRequest& req) const {
    EvalResult res;
    if (!fidelities_.empty() &&
        std::find(fidelities_.begin(), fidelities_.end(), req.alpha) == fidelities_.end()) {
        res.error = "fidelity " + std::to_string(req.alpha) + " not provided by " + name_;
        return res;
    }
    if (!domain_.empty() && domain_.size() != req.params.size()) {
        res.error = "point dimension " + std::to_string(req.params.size()) + " does not match model";
        return res;
    }
    for (std::size_t n = 0; n < req.params.size(); ++n) {
        const double x = req.params[n];
        if (!std::isfinite(x) || (!domain_.empty() && (x < domain_[n].first || x > domain_[n].second))) {
            res.error = "parameter " + std::to_string(n) + " = " + std::to_string(x) + " outside model domain";
            return res;
        }
    }
    res.values.reserve(req.qois.size());
    try {
        for (const auto& q : req.qois) {
            res.values.push_back(fn_(req.alpha, req.params, q));
        }
    } catch (const std::exception& e) {
        res.values.clear();
        res.error = e.what();
    }
    return res;
}

std::vector<EvalResult> FunctionBackend::evaluate(std::span<const EvalRequest> requests, int /*lanes*/) {
    std::vector<EvalResult> out;
    out.reserve(requests.size());
    for (const auto& r : requests) {
        out.push_back(evaluate_one(r));
    }
    return out;
}

namespace beam_analog {

namespace {

// "u3" -> ('u', 3); throws on anything else.
std::pair<char, int> parse_qoi(std::string_view qoi) {
    if (qoi.size() < 2 || (qoi[0] != 'u' && qoi[0] != 'e')) {
        throw std::invalid_argument("unknown qoi '" + std::string(qoi) + "'");
    }
    int k = 0;
    auto [ptr, ec] = std::from_chars(qoi.data() + 1, qoi.data() + qoi.size(), k);
    const int limit = qoi[0] == 'u' ? n_displacements : n_strains;
    if (ec != std::errc{} || ptr != qoi.data() + qoi.size() || k < 1 || k > limit) {
        throw std::invalid_argument("unknown qoi '" + std::string(qoi) + "'");
    }
    return {qoi[0], k};
}

}  // namespace

double exact(std::string_view qoi, std::span<const double> v) {
    if (v.size() != 2) {
        throw std::invalid_argument("beam-analog expects 2 parameters");
    }
    const auto [kind, k] = parse_qoi(qoi);
    const double tau = std::tanh((v[0] - 1290.0) / 160.0);
    const double ell = (v[1] + 2.5) / 2.5;
    if (kind == 'u') {
        const double s = (6.0 - k) / 3.0;
        const double r = k / 3.0;
        return 0.1 * k * (1.0 + 0.3 * s * tau) * (1.0 + 0.15 * r * ell);
    }
    return (1.5 - 0.01 * k) * 1e-3 * (1.0 + 0.2 * tau + 0.1 * std::sin(std::numbers::pi * ell / 2.0));
}

double value(int alpha, std::string_view qoi, std::span<const double> v) {
    if (alpha < 1 || alpha > static_cast<int>(fidelity_bias.size())) {
        throw std::invalid_argument("beam-analog has no fidelity " + std::to_string(alpha));
    }
    const double delta = fidelity_bias[static_cast<std::size_t>(alpha - 1)];
    return exact(qoi, v) * (1.0 + delta * std::cos(v[0] / 200.0) * std::cos(v[1]));
}

std::vector<std::string> displacement_names() {
    std::vector<std::string> out;
    for (int k = 1; k <= n_displacements; ++k) out.push_back("u" + std::to_string(k));
    return out;
}

std::vector<std::string> strain_names() {
    std::vector<std::string> out;
    for (int j = 1; j <= n_strains; ++j) out.push_back("e" + std::to_string(j));
    return out;
}

std::vector<std::pair<double, double>> validity_box() { return {{500.0, 2100.0}, {-10.0, 5.0}}; }

}  // namespace beam_analog

std::vector<std::string> builtin_model_names() { return {"beam-analog"}; }

std::unique_ptr<ModelBackend> make_builtin_backend(std::string_view name) {
    if (name == "beam-analog") {
        return std::make_unique<FunctionBackend>(
            "builtin: beam-analog",
            [](int alpha, std::span<const double> v, std::string_view qoi) {
                return beam_analog::value(alpha, qoi, v);
            },
            beam_analog::validity_box(), std::vector<int>{1, 2});
    }
    throw ConfigError("unknown builtin model '" + std::string(name) + "' (known: beam-analog)");
}

Oracle::Oracle(std::vector<FidelitySpec> fidelities, std::shared_ptr<ModelBackend> backend,
               std::shared_ptr<EvalCache> cache)
    : fidelities_(std::move(fidelities)), backend_(std::move(backend)), cache_(std::move(cache)) {
    if (fidelities_.empty()) {
        throw std::invalid_argument("oracle needs at least one fidelity");
    }
    if (!backend_) {
        throw std::invalid_argument("oracle needs a backend");
    }
    std::sort(fidelities_.begin(), fidelities_.end(),
              [](const FidelitySpec& a, const FidelitySpec& b) { return a.alpha < b.alpha; });
    for (std::size_t i = 0; i < fidelities_.size(); ++i) {
        if (!(fidelities_[i].cost_weight > 0.0)) {
            throw std::invalid_argument("fidelity cost weights must be positive");
        }
        if (i > 0 && (fidelities_[i].alpha == fidelities_[i - 1].alpha ||
                      fidelities_[i].cost_weight <= fidelities_[i - 1].cost_weight)) {
            throw std::invalid_argument("fidelity cost weights must strictly increase with alpha");
        }
    }
    if (!cache_) {
        cache_ = std::make_shared<EvalCache>();
    }
}

bool Oracle::has_fidelity(int alpha) const {
    return std::any_of(fidelities_.begin(), fidelities_.end(),
                       [&](const FidelitySpec& f) { return f.alpha == alpha; });
}

double Oracle::cost_weight(int alpha) const {
    for (const auto& f : fidelities_) {
        if (f.alpha == alpha) return f.cost_weight;
    }
    throw std::invalid_argument("fidelity " + std::to_string(alpha) + " is not registered");
}

void Oracle::set_lanes(int lanes) {
    if (lanes < 1) {
        throw std::invalid_argument("lanes must be >= 1");
    }
    lanes_ = lanes;
}

std::size_t Oracle::count_uncached(int alpha, std::span<const Point> points,
                                   std::span<const std::string> qois) const {
    std::set<std::string> missing;
    for (const auto& p : points) {
        for (const auto& q : qois) {
            if (!cache_->lookup(alpha, p, q)) {
                missing.insert(EvalCache::point_key(p));
                break;
            }
        }
    }
    return missing.size();
}

std::vector<EvalResult> Oracle::eval_batch(int alpha, std::span<const Point> points,
                                           std::span<const std::string> qois) {
    cost_weight(alpha);  // validates registration
    std::vector<EvalResult> results(points.size());
    std::vector<EvalRequest> requests;
    std::map<std::string, std::size_t> request_of_key;
    std::vector<std::size_t> request_of_point(points.size(), SIZE_MAX);

    for (std::size_t i = 0; i < points.size(); ++i) {
        std::vector<double> vals;
        vals.reserve(qois.size());
        for (const auto& q : qois) {
            auto hit = cache_->lookup(alpha, points[i], q);
            if (!hit) break;
            vals.push_back(*hit);
        }
        if (vals.size() == qois.size()) {
            results[i].values = std::move(vals);
            continue;
        }
        const auto key = EvalCache::point_key(points[i]);
        auto [it, fresh] = request_of_key.emplace(key, requests.size());
        if (fresh) {
            requests.push_back(EvalRequest{alpha, points[i], {qois.begin(), qois.end()}});
        }
        request_of_point[i] = it->second;
    }
    if (requests.empty()) {
        return results;
    }

    auto answers = backend_->evaluate(requests, lanes_);
    if (answers.size() != requests.size()) {
        throw OracleError("backend returned " + std::to_string(answers.size()) + " results for " +
                          std::to_string(requests.size()) + " requests");
    }
    invocations_[alpha] += requests.size();
    for (std::size_t r = 0; r < requests.size(); ++r) {
        if (!answers[r].ok()) continue;
        if (answers[r].values.size() != qois.size()) {
            throw OracleError("backend returned " + std::to_string(answers[r].values.size()) +
                              " values for " + std::to_string(qois.size()) + " qois");
        }
        for (std::size_t q = 0; q < qois.size(); ++q) {
            cache_->insert(alpha, requests[r].params, qois[q], answers[r].values[q]);
        }
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (request_of_point[i] != SIZE_MAX) {
            results[i] = answers[request_of_point[i]];
        }
    }
    return results;
}

std::size_t Oracle::invocations(int alpha) const {
    auto it = invocations_.find(alpha);
    return it == invocations_.end() ? 0 : it->second;
}

std::size_t Oracle::total_invocations() const {
    std::size_t n = 0;
    for (const auto& [a, c] : invocations_) n += c;
    return n;
}

double Oracle::work_spent() const {
    double w = 0.0;
    for (const auto& [a, c] : invocations_) w += cost_weight(a) * static_cast<double>(c);
    return w;
}

}  // namespace mfuq
