#include "mfuq/misc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mfuq/errors.hpp"
#include "mfuq/hexfloat.hpp"

namespace mfuq {

using nlohmann::json;

// ---------------------------------------------------------------------------
// MiscSurrogate

MiscSurrogate::MiscSurrogate(MultiIndexSet index_set, std::vector<KnotFamily> families,
                             std::vector<std::string> qoi_names, std::vector<int> fidelity_levels,
                             std::map<ExtMultiIndex, TensorInterpolant> interpolants)
    : index_set_(std::move(index_set)),
      families_(std::move(families)),
      qoi_names_(std::move(qoi_names)),
      fidelity_levels_(std::move(fidelity_levels)),
      coefficients_(combination_coefficients(index_set_)) {
    if (index_set_.empty()) {
        throw std::invalid_argument("surrogate index set is empty");
    }
    if (index_set_.dim() != families_.size()) {
        throw std::invalid_argument("index set dimension does not match the knot families");
    }
    if (qoi_names_.empty()) {
        throw std::invalid_argument("surrogate needs at least one qoi");
    }
    if (static_cast<int>(fidelity_levels_.size()) < index_set_.max_alpha()) {
        throw std::invalid_argument("index set uses more fidelity levels than mapped");
    }
    for (const auto& [idx, c] : coefficients_) {
        auto it = interpolants.find(idx);
        if (it == interpolants.end()) {
            throw std::invalid_argument("missing interpolant for " + idx.to_string());
        }
        if (it->second.n_values() != qoi_names_.size() || it->second.grid().dim() != families_.size()) {
            throw std::invalid_argument("interpolant " + idx.to_string() + " has the wrong shape");
        }
        interpolants_.emplace(idx, std::move(it->second));
    }
}

bool MiscSurrogate::in_domain(std::span<const double> v) const {
    for (std::size_t n = 0; n < families_.size(); ++n) {
        const auto [lo, hi] = families_[n].nominal_domain();
        if (!(v[n] >= lo && v[n] <= hi)) return false;
    }
    return true;
}

MiscEvaluation MiscSurrogate::evaluate_flagged(std::span<const double> v) const {
    if (v.size() != dim()) {
        throw std::invalid_argument("surrogate expects points of dimension " + std::to_string(dim()) + ", got " +
                                    std::to_string(v.size()));
    }
    MiscEvaluation out;
    out.values.assign(qoi_names_.size(), 0.0);
    for (const auto& [idx, c] : coefficients_) {
        interpolants_.at(idx).accumulate(v, static_cast<double>(c), out.values);
    }
    out.extrapolated = !in_domain(v);
    return out;
}

std::vector<double> MiscSurrogate::evaluate(std::span<const double> v) const {
    return evaluate_flagged(v).values;
}

std::map<int, std::size_t> MiscSurrogate::points_per_fidelity() const {
    std::map<int, std::set<std::string>> keys;
    for (const auto& [idx, itp] : interpolants_) {
        auto& bucket = keys[fidelity_levels_[static_cast<std::size_t>(idx.alpha - 1)]];
        for (std::size_t p = 0; p < itp.grid().size(); ++p) {
            bucket.insert(EvalCache::point_key(itp.grid().point(p)));
        }
    }
    std::map<int, std::size_t> out;
    for (const auto& [f, s] : keys) out[f] = s.size();
    return out;
}

// ---------------------------------------------------------------------------
// Grid evaluation shared by build and adapt

namespace {

struct GridEvaluation {
    std::map<ExtMultiIndex, TensorInterpolant> interpolants;
    std::map<ExtMultiIndex, std::string> failures;
};

GridEvaluation evaluate_grids(Oracle& oracle, const std::vector<int>& levels, std::span<const KnotFamily> families,
                              const std::vector<std::string>& qois, const std::vector<ExtMultiIndex>& indices) {
    GridEvaluation out;
    std::map<int, std::vector<ExtMultiIndex>> by_level;
    for (const auto& idx : indices) by_level[idx.alpha].push_back(idx);

    for (const auto& [level, group] : by_level) {
        const int fidelity = levels.at(static_cast<std::size_t>(level - 1));
        std::vector<TensorGrid> grids;
        std::vector<Point> unique;
        std::map<std::string, std::size_t> slot;
        for (const auto& idx : group) {
            grids.push_back(build_grid(idx.beta, families));
            for (std::size_t p = 0; p < grids.back().size(); ++p) {
                auto pt = grids.back().point(p);
                if (slot.emplace(EvalCache::point_key(pt), unique.size()).second) unique.push_back(std::move(pt));
            }
        }
        const auto results = oracle.eval_batch(fidelity, unique, qois);
        for (std::size_t g = 0; g < group.size(); ++g) {
            const auto& grid = grids[g];
            std::vector<double> values;
            values.reserve(grid.size() * qois.size());
            std::string failure;
            for (std::size_t p = 0; p < grid.size() && failure.empty(); ++p) {
                const auto pt = grid.point(p);
                const auto& r = results[slot.at(EvalCache::point_key(pt))];
                if (!r.ok()) {
                    std::ostringstream msg;
                    msg << "fidelity " << fidelity << " at (";
                    for (std::size_t n = 0; n < pt.size(); ++n) msg << (n ? ", " : "") << pt[n];
                    msg << "): " << *r.error;
                    failure = msg.str();
                } else {
                    values.insert(values.end(), r.values.begin(), r.values.end());
                }
            }
            if (!failure.empty()) {
                out.failures.emplace(group[g], failure);
            } else {
                out.interpolants.emplace(group[g], TensorInterpolant(grid, std::move(values), qois.size()));
            }
        }
    }
    return out;
}

std::vector<int> resolve_levels(const Oracle& oracle, std::vector<int> levels) {
    if (levels.empty()) return all_fidelity_levels(oracle);
    for (int f : levels) {
        if (!oracle.has_fidelity(f)) {
            throw std::invalid_argument("fidelity " + std::to_string(f) + " is not registered with the oracle");
        }
    }
    return levels;
}

std::vector<int> first_primes(std::size_t count) {
    std::vector<int> primes;
    for (int n = 2; primes.size() < count; ++n) {
        if (std::none_of(primes.begin(), primes.end(), [n](int p) { return n % p == 0; })) primes.push_back(n);
    }
    return primes;
}

double radical_inverse(std::size_t i, int base) {
    double f = 1.0;
    double r = 0.0;
    while (i > 0) {
        f /= base;
        r += f * static_cast<double>(i % static_cast<std::size_t>(base));
        i /= static_cast<std::size_t>(base);
    }
    return r;
}

}  // namespace

std::vector<int> all_fidelity_levels(const Oracle& oracle) {
    std::vector<int> out;
    for (const auto& f : oracle.fidelities()) out.push_back(f.alpha);
    return out;
}

MiscSurrogate build_surrogate(const MultiIndexSet& index_set, Oracle& oracle, std::vector<KnotFamily> families,
                              std::vector<std::string> qois, std::vector<int> fidelity_levels) {
    fidelity_levels = resolve_levels(oracle, std::move(fidelity_levels));
    if (index_set.max_alpha() > static_cast<int>(fidelity_levels.size())) {
        throw std::invalid_argument("index set needs " + std::to_string(index_set.max_alpha()) +
                                    " fidelity levels, oracle provides " + std::to_string(fidelity_levels.size()));
    }
    const auto coeffs = combination_coefficients(index_set);
    std::vector<ExtMultiIndex> needed;
    for (const auto& [idx, c] : coeffs) needed.push_back(idx);
    auto evaluated = evaluate_grids(oracle, fidelity_levels, families, qois, needed);
    if (!evaluated.failures.empty()) {
        std::string msg = "surrogate build is missing evaluations:";
        for (const auto& [idx, why] : evaluated.failures) msg += "\n  " + idx.to_string() + " " + why;
        throw OracleError(msg);
    }
    return MiscSurrogate(index_set, std::move(families), std::move(qois), std::move(fidelity_levels),
                         std::move(evaluated.interpolants));
}

std::vector<Point> probe_points(std::span<const KnotFamily> families, std::size_t count) {
    const auto primes = first_primes(families.size());
    std::vector<Point> out(count, Point(families.size()));
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t n = 0; n < families.size(); ++n) {
            out[i][n] = families[n].from_unit(radical_inverse(i + 1, primes[n]));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Adaptive loop

const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::None: return "none";
        case StopReason::MaxWork: return "max_work";
        case StopReason::MaxCandidates: return "max_candidates";
        case StopReason::ProfitFloor: return "profit_floor";
        case StopReason::NoCandidates: return "no_candidates";
    }
    return "unknown";
}

AdaptState::AdaptState(std::vector<KnotFamily> families, std::vector<std::string> qois,
                       std::vector<int> fidelity_levels, std::size_t probe_count)
    : families_(std::move(families)),
      qois_(std::move(qois)),
      fidelity_levels_(std::move(fidelity_levels)),
      probes_(probe_points(families_, probe_count)),
      index_set_(families_.size()) {}

double AdaptState::total_work() const {
    double w = 0.0;
    for (const auto& [f, x] : work_) w += x;
    return w;
}

MiscSurrogate AdaptState::surrogate() const {
    std::map<ExtMultiIndex, TensorInterpolant> itps;
    for (const auto& [idx, c] : coefficients_) itps.emplace(idx, interpolants_.at(idx));
    return MiscSurrogate(index_set_, families_, qois_, fidelity_levels_, std::move(itps));
}

std::vector<double> AdaptState::surrogate_at_probes(const std::map<ExtMultiIndex, int>& coeffs) const {
    std::vector<double> out(probes_.size() * qois_.size(), 0.0);
    for (const auto& [idx, c] : coeffs) {
        const auto& pv = probe_values_.at(idx);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += c * pv[i];
    }
    return out;
}

void AdaptState::commit(const ExtMultiIndex& idx) {
    index_set_.insert(idx);
    coefficients_ = combination_coefficients(index_set_);
    const auto& grid = interpolants_.at(idx).grid();
    auto& owned = owned_points_[idx.alpha];
    for (std::size_t p = 0; p < grid.size(); ++p) owned.insert(EvalCache::point_key(grid.point(p)));
}

namespace {

// Runs the batch, charges the ledger and records probe values.
void evaluate_into_state(Oracle& oracle, const std::vector<int>& levels, std::span<const KnotFamily> families,
                         const std::vector<std::string>& qois, const std::vector<ExtMultiIndex>& indices,
                         const std::vector<Point>& probes, std::map<ExtMultiIndex, TensorInterpolant>& interpolants,
                         std::map<ExtMultiIndex, std::vector<double>>& probe_values, std::set<ExtMultiIndex>& failed,
                         std::map<int, std::set<std::string>>& requested, std::map<int, double>& work,
                         std::map<int, std::size_t>& evaluations) {
    for (const auto& idx : indices) {
        const int fidelity = levels.at(static_cast<std::size_t>(idx.alpha - 1));
        const auto grid = build_grid(idx.beta, families);
        for (std::size_t p = 0; p < grid.size(); ++p) {
            if (requested[fidelity].insert(EvalCache::point_key(grid.point(p))).second) {
                evaluations[fidelity] += 1;
                work[fidelity] += oracle.cost_weight(fidelity);
            }
        }
    }
    auto evaluated = evaluate_grids(oracle, levels, families, qois, indices);
    for (auto& [idx, why] : evaluated.failures) failed.insert(idx);
    for (auto& [idx, itp] : evaluated.interpolants) {
        std::vector<double> pv;
        pv.reserve(probes.size() * qois.size());
        for (const auto& p : probes) {
            const auto vals = itp.evaluate(p);
            pv.insert(pv.end(), vals.begin(), vals.end());
        }
        probe_values.emplace(idx, std::move(pv));
        interpolants.emplace(idx, std::move(itp));
    }
}

}  // namespace

AdaptState start_adapt(Oracle& oracle, std::vector<KnotFamily> families, std::vector<std::string> qois,
                       const AdaptOptions& options) {
    AdaptState state(std::move(families), std::move(qois), resolve_levels(oracle, options.fidelity_levels),
                     options.probe_count);
    const auto base = base_index(state.families_.size());
    evaluate_into_state(oracle, state.fidelity_levels_, state.families_, state.qois_, {base}, state.probes_,
                        state.interpolants_, state.probe_values_, state.failed_, state.requested_, state.work_,
                        state.evaluations_);
    if (!state.interpolants_.contains(base)) {
        throw OracleError("adaptive build: the base index " + base.to_string() + " could not be evaluated");
    }
    state.commit(base);
    state.history_.push_back(AdaptStep{base, 0.0, state.total_work()});
    return state;
}

AdaptState adapt(AdaptState state, Oracle& oracle, const AdaptOptions& options) {
    const auto max_level = static_cast<int>(state.fidelity_levels_.size());
    const std::size_t n_qoi = state.qois_.size();
    const double n_probes = static_cast<double>(state.probes_.size());
    state.stop_reason_ = StopReason::None;

    for (;;) {
        if (state.history_.size() - 1 >= options.max_candidates) {
            state.stop_reason_ = StopReason::MaxCandidates;
            break;
        }
        std::vector<ExtMultiIndex> margin;
        for (auto& idx : reduced_margin(state.index_set_)) {
            if (idx.alpha <= max_level && !state.failed_.contains(idx)) margin.push_back(std::move(idx));
        }

        // Plan evaluations for the candidates that fit into the remaining budget.
        std::vector<ExtMultiIndex> to_evaluate;
        std::set<std::pair<int, std::string>> planned;
        double planned_work = 0.0;
        std::set<ExtMultiIndex> unaffordable;
        for (const auto& idx : margin) {
            if (state.interpolants_.contains(idx)) continue;
            const int fidelity = state.fidelity_of(idx.alpha);
            const auto grid = build_grid(idx.beta, state.families_);
            double cost = 0.0;
            std::vector<std::pair<int, std::string>> fresh;
            const auto& seen = state.requested_[fidelity];
            for (const auto& pt : grid.points()) {
                auto key = std::make_pair(fidelity, EvalCache::point_key(pt));
                if (!planned.contains(key) && !seen.contains(key.second)) {
                    fresh.push_back(std::move(key));
                    cost += oracle.cost_weight(fidelity);
                }
            }
            if (state.total_work() + planned_work + cost > options.max_work) {
                unaffordable.insert(idx);
                continue;
            }
            planned_work += cost;
            planned.insert(fresh.begin(), fresh.end());
            to_evaluate.push_back(idx);
        }
        if (!to_evaluate.empty()) {
            evaluate_into_state(oracle, state.fidelity_levels_, state.families_, state.qois_, to_evaluate,
                                state.probes_, state.interpolants_, state.probe_values_, state.failed_,
                                state.requested_, state.work_, state.evaluations_);
        }

        // Score every evaluated candidate against the current set.
        const auto current = state.surrogate_at_probes(state.coefficients_);
        state.candidates_.clear();
        const Candidate* best = nullptr;
        for (const auto& idx : margin) {
            Candidate cand{idx};
            if (unaffordable.contains(idx)) {
                cand.status = CandidateStatus::Unaffordable;
            } else if (!state.interpolants_.contains(idx)) {
                cand.status = CandidateStatus::Failed;
            } else {
                MultiIndexSet enlarged = state.index_set_;
                enlarged.insert(idx);
                const auto tentative = state.surrogate_at_probes(combination_coefficients(enlarged));
                double change = 0.0;
                for (std::size_t i = 0; i < tentative.size(); ++i) change += std::abs(tentative[i] - current[i]);
                change /= n_probes;

                const int fidelity = state.fidelity_of(idx.alpha);
                const auto& grid = state.interpolants_.at(idx).grid();
                const auto& owned = state.owned_points_[idx.alpha];
                for (std::size_t p = 0; p < grid.size(); ++p) {
                    if (!owned.contains(EvalCache::point_key(grid.point(p)))) ++cand.new_points;
                }
                cand.delta_work = oracle.cost_weight(fidelity) * static_cast<double>(std::max<std::size_t>(cand.new_points, 1));
                cand.profit = change / cand.delta_work;
            }
            state.candidates_.push_back(std::move(cand));
        }
        for (const auto& c : state.candidates_) {
            if (c.status == CandidateStatus::Ready && (!best || c.profit > best->profit)) best = &c;
        }
        if (!best) {
            state.stop_reason_ = unaffordable.empty() ? StopReason::NoCandidates : StopReason::MaxWork;
            break;
        }

        double range = 0.0;
        for (std::size_t q = 0; q < n_qoi; ++q) {
            double lo = current[q];
            double hi = current[q];
            for (std::size_t p = 0; p < state.probes_.size(); ++p) {
                lo = std::min(lo, current[p * n_qoi + q]);
                hi = std::max(hi, current[p * n_qoi + q]);
            }
            range = std::max(range, hi - lo);
        }
        if (best->profit <= options.profit_floor * range) {
            state.stop_reason_ = StopReason::ProfitFloor;
            break;
        }

        const ExtMultiIndex chosen = best->index;
        const double profit = best->profit;
        state.commit(chosen);
        state.history_.push_back(AdaptStep{chosen, profit, state.total_work()});
    }
    return state;
}

MiscSurrogate adaptive_build(Oracle& oracle, std::vector<KnotFamily> families, std::vector<std::string> qois,
                             const AdaptOptions& options) {
    auto state = start_adapt(oracle, std::move(families), std::move(qois), options);
    return adapt(std::move(state), oracle, options).surrogate();
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json hex_array(std::span<const double> xs) {
    json arr = json::array();
    for (double x : xs) arr.push_back(to_hex(x));
    return arr;
}

std::vector<double> from_hex_array(const json& arr) {
    std::vector<double> out;
    out.reserve(arr.size());
    for (const auto& x : arr) out.push_back(from_hex(x.get<std::string>()));
    return out;
}

const char* kind_name(LejaKind k) {
    return k == LejaKind::Symmetric ? "symmetric_leja" : "weighted_gaussian_leja";
}

}  // namespace

std::string serialize_surrogate(const MiscSurrogate& s, const std::string& provenance) {
    std::vector<std::size_t> max_knots(s.dim(), 1);
    for (const auto& [idx, itp] : s.interpolants()) {
        for (std::size_t n = 0; n < s.dim(); ++n) max_knots[n] = std::max(max_knots[n], itp.grid().knots(n).size());
    }
    json j;
    j["format"] = "mfuq-misc-surrogate";
    j["version"] = surrogate_format_version;
    j["dim"] = s.dim();
    j["qois"] = s.qoi_names();
    j["fidelity_levels"] = s.fidelity_levels();
    j["provenance"] = provenance;
    j["families"] = json::array();
    for (std::size_t n = 0; n < s.dim(); ++n) {
        const auto& fam = s.families()[n];
        const auto [a, b] = fam.parameters();
        j["families"].push_back(
            {{"kind", kind_name(fam.kind())}, {"a", to_hex(a)}, {"b", to_hex(b)}, {"knots", hex_array(fam.knots(max_knots[n]))}});
    }
    j["index_set"] = json::array();
    for (const auto& idx : s.index_set().entries()) {
        auto it = s.coefficients().find(idx);
        j["index_set"].push_back({{"alpha", idx.alpha}, {"beta", idx.beta}, {"coefficient", it == s.coefficients().end() ? 0 : it->second}});
    }
    j["grids"] = json::array();
    for (const auto& [idx, itp] : s.interpolants()) {
        j["grids"].push_back({{"alpha", idx.alpha}, {"beta", idx.beta}, {"values", hex_array(itp.values())}});
    }
    return j.dump(1) + "\n";
}

MiscSurrogate deserialize_surrogate(const std::string& text, std::optional<std::size_t> expected_dim,
                                    std::string* provenance) {
    try {
        const json j = json::parse(text);
        if (j.at("format").get<std::string>() != "mfuq-misc-surrogate") {
            throw FormatError("not a surrogate file");
        }
        if (j.at("version").get<int>() != surrogate_format_version) {
            throw FormatError("unsupported surrogate version " + std::to_string(j.at("version").get<int>()));
        }
        const auto dim = j.at("dim").get<std::size_t>();
        if (expected_dim && *expected_dim != dim) {
            throw FormatError("surrogate has dimension " + std::to_string(dim) + ", expected " +
                              std::to_string(*expected_dim));
        }
        const auto qois = j.at("qois").get<std::vector<std::string>>();
        const auto levels = j.at("fidelity_levels").get<std::vector<int>>();
        if (j.at("families").size() != dim) {
            throw FormatError("surrogate lists " + std::to_string(j.at("families").size()) + " families for dimension " +
                              std::to_string(dim));
        }
        std::vector<KnotFamily> families;
        std::vector<std::vector<double>> stored_knots;
        for (const auto& f : j.at("families")) {
            const auto kind = f.at("kind").get<std::string>();
            const double a = from_hex(f.at("a").get<std::string>());
            const double b = from_hex(f.at("b").get<std::string>());
            if (kind == "symmetric_leja") {
                families.push_back(KnotFamily::symmetric_leja(a, b));
            } else if (kind == "weighted_gaussian_leja") {
                families.push_back(KnotFamily::weighted_gaussian_leja(a, b));
            } else {
                throw FormatError("unknown knot family '" + kind + "'");
            }
            stored_knots.push_back(from_hex_array(f.at("knots")));
            if (stored_knots.back().empty() || families.back().knots(stored_knots.back().size()) != stored_knots.back()) {
                throw FormatError("stored knots do not match the regenerated " + kind + " sequence");
            }
        }
        MultiIndexSet set(dim);
        std::map<ExtMultiIndex, int> stored_coeffs;
        for (const auto& e : j.at("index_set")) {
            ExtMultiIndex idx{e.at("alpha").get<int>(), e.at("beta").get<std::vector<int>>()};
            if (idx.beta.size() != dim) throw FormatError("index " + idx.to_string() + " has the wrong dimension");
            set.insert(idx);
            if (int c = e.at("coefficient").get<int>(); c != 0) stored_coeffs[idx] = c;
        }
        if (!set.is_downward_closed()) throw FormatError("stored index set is not downward closed");
        if (combination_coefficients(set) != stored_coeffs) throw FormatError("stored coefficients are inconsistent");

        std::map<ExtMultiIndex, TensorInterpolant> itps;
        for (const auto& g : j.at("grids")) {
            ExtMultiIndex idx{g.at("alpha").get<int>(), g.at("beta").get<std::vector<int>>()};
            if (idx.beta.size() != dim) throw FormatError("grid " + idx.to_string() + " has the wrong dimension");
            std::vector<std::vector<double>> knots;
            for (std::size_t n = 0; n < dim; ++n) {
                const auto m = level_to_knots(static_cast<std::size_t>(idx.beta[n]));
                if (m > stored_knots[n].size()) throw FormatError("grid " + idx.to_string() + " exceeds stored knots");
                knots.emplace_back(stored_knots[n].begin(), stored_knots[n].begin() + static_cast<std::ptrdiff_t>(m));
            }
            itps.emplace(idx, TensorInterpolant(TensorGrid(idx.beta, std::move(knots)), from_hex_array(g.at("values")),
                                                qois.size()));
        }
        if (provenance) *provenance = j.value("provenance", std::string{});
        return MiscSurrogate(std::move(set), std::move(families), qois, levels, std::move(itps));
    } catch (const json::exception& e) {
        throw FormatError(std::string("corrupted surrogate: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("corrupted surrogate: ") + e.what());
    }
}

void save_surrogate(const MiscSurrogate& s, const std::string& path, const std::string& provenance) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << serialize_surrogate(s, provenance);
}

MiscSurrogate load_surrogate(const std::string& path, std::optional<std::size_t> expected_dim,
                             std::string* provenance) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read surrogate file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return deserialize_surrogate(ss.str(), expected_dim, provenance);
}

MultiIndexSet load_index_set(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read index-set file " + path);
    try {
        const json j = json::parse(in, nullptr, true, true);
        MultiIndexSet set(j.at("dim").get<std::size_t>());
        for (const auto& e : j.at("entries")) {
            set.insert(ExtMultiIndex{e.at("alpha").get<int>(), e.at("beta").get<std::vector<int>>()});
        }
        if (!set.is_downward_closed()) throw ConfigError("index set in " + path + " is not downward closed");
        return set;
    } catch (const json::exception& e) {
        throw ConfigError("malformed index-set file " + path + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError("malformed index-set file " + path + ": " + e.what());
    }
}

void save_index_set(const MultiIndexSet& set, const std::string& path) {
    json j;
    j["dim"] = set.dim();
    j["entries"] = json::array();
    for (const auto& e : set.entries()) j["entries"].push_back({{"alpha", e.alpha}, {"beta", e.beta}});
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << j.dump(1) << "\n";
}

}  // namespace mfuq
