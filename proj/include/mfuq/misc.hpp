#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mfuq/interp.hpp"
#include "mfuq/leja.hpp"
#include "mfuq/multiindex.hpp"
#include "mfuq/oracle.hpp"

namespace mfuq {

struct MiscEvaluation {
    std::vector<double> values;
    bool extrapolated = false;  // some coordinate lies outside the families' nominal domain
};

/**
 * Multi-index stochastic collocation surrogate
 *
 *   S_I f(v) = sum_{[a,b] in I} c_{a,b} U_{a,m(b)}(v).
 *
 * Level a of the index set maps to oracle fidelity fidelity_levels[a - 1].
 * Only interpolants with c != 0 are stored.
 */
class MiscSurrogate {
public:
    MiscSurrogate(MultiIndexSet index_set, std::vector<KnotFamily> families, std::vector<std::string> qoi_names,
                  std::vector<int> fidelity_levels, std::map<ExtMultiIndex, TensorInterpolant> interpolants);

    std::size_t dim() const { return families_.size(); }
    const MultiIndexSet& index_set() const { return index_set_; }
    const std::map<ExtMultiIndex, int>& coefficients() const { return coefficients_; }
    const std::map<ExtMultiIndex, TensorInterpolant>& interpolants() const { return interpolants_; }
    const std::vector<KnotFamily>& families() const { return families_; }
    const std::vector<std::string>& qoi_names() const { return qoi_names_; }
    const std::vector<int>& fidelity_levels() const { return fidelity_levels_; }

    std::vector<double> evaluate(std::span<const double> v) const;
    MiscEvaluation evaluate_flagged(std::span<const double> v) const;
    bool in_domain(std::span<const double> v) const;

    /// Distinct grid points behind the stored interpolants, per oracle fidelity.
    std::map<int, std::size_t> points_per_fidelity() const;

private:
    MultiIndexSet index_set_;
    std::vector<KnotFamily> families_;
    std::vector<std::string> qoi_names_;
    std::vector<int> fidelity_levels_;
    std::map<ExtMultiIndex, int> coefficients_;
    std::map<ExtMultiIndex, TensorInterpolant> interpolants_;
};

/// Default level map: every oracle fidelity, lowest first.
std::vector<int> all_fidelity_levels(const Oracle& oracle);

/// Evaluates the grids of all c != 0 entries of `index_set` and assembles the
/// surrogate. Throws OracleError listing the points that could not be evaluated.
MiscSurrogate build_surrogate(const MultiIndexSet& index_set, Oracle& oracle, std::vector<KnotFamily> families,
                              std::vector<std::string> qois, std::vector<int> fidelity_levels = {});

struct AdaptOptions {
    double max_work = std::numeric_limits<double>::infinity();
    std::size_t max_candidates = std::numeric_limits<std::size_t>::max();
    double profit_floor = 1e-8;  // relative to the surrogate's range over the probes
    std::size_t probe_count = 64;
    std::vector<int> fidelity_levels;  // empty: all oracle fidelities
};

enum class StopReason { None, MaxWork, MaxCandidates, ProfitFloor, NoCandidates };
const char* to_string(StopReason r);

enum class CandidateStatus { Ready, Unaffordable, Failed };

struct Candidate {
    ExtMultiIndex index;
    CandidateStatus status = CandidateStatus::Ready;
    double profit = 0.0;
    double delta_work = 0.0;  // cost_weight * points new to the committed set
    std::size_t new_points = 0;
};

struct AdaptStep {
    ExtMultiIndex selected;
    double profit = 0.0;
    double work_spent = 0.0;  // cumulative ledger after the step
};

/// State of the adaptive enlargement loop. Every grid ever evaluated keeps
/// its interpolant and its values at the probe points.
class AdaptState {
public:
    AdaptState(std::vector<KnotFamily> families, std::vector<std::string> qois, std::vector<int> fidelity_levels,
               std::size_t probe_count);

    const MultiIndexSet& index_set() const { return index_set_; }
    const std::vector<Candidate>& candidates() const { return candidates_; }
    const std::vector<AdaptStep>& history() const { return history_; }
    StopReason stop_reason() const { return stop_reason_; }

    /// Work units and distinct points requested by the build, keyed by oracle
    /// fidelity. Points are charged whether or not the oracle cache held them,
    /// so a warm cache does not change the construction.
    const std::map<int, double>& work_per_fidelity() const { return work_; }
    const std::map<int, std::size_t>& evaluations_per_fidelity() const { return evaluations_; }
    double total_work() const;

    MiscSurrogate surrogate() const;

private:
    friend AdaptState start_adapt(Oracle&, std::vector<KnotFamily>, std::vector<std::string>, const AdaptOptions&);
    friend AdaptState adapt(AdaptState, Oracle&, const AdaptOptions&);

    int fidelity_of(int level) const { return fidelity_levels_.at(static_cast<std::size_t>(level - 1)); }
    std::vector<double> surrogate_at_probes(const std::map<ExtMultiIndex, int>& coeffs) const;
    void commit(const ExtMultiIndex& idx);

    std::vector<KnotFamily> families_;
    std::vector<std::string> qois_;
    std::vector<int> fidelity_levels_;
    std::vector<Point> probes_;

    MultiIndexSet index_set_;
    std::map<ExtMultiIndex, int> coefficients_;
    std::map<ExtMultiIndex, TensorInterpolant> interpolants_;
    std::map<ExtMultiIndex, std::vector<double>> probe_values_;  // probe-major, qoi fastest
    std::map<int, std::set<std::string>> owned_points_;          // by level
    std::set<ExtMultiIndex> failed_;
    std::map<int, std::set<std::string>> requested_;             // by fidelity

    std::vector<Candidate> candidates_;
    std::vector<AdaptStep> history_;
    std::map<int, double> work_;
    std::map<int, std::size_t> evaluations_;
    StopReason stop_reason_ = StopReason::None;
};

/// Evaluates the base index [1, (1, ..., 1)] (always, regardless of budget).
AdaptState start_adapt(Oracle& oracle, std::vector<KnotFamily> families, std::vector<std::string> qois,
                       const AdaptOptions& options);

/**
 * Adaptive a-posteriori enlargement. Each iteration evaluates every
 * affordable reduced-margin candidate, scores it by
 *
 *   profit = mean_probes sum_qoi |S_{I+cand} - S_I| / (cost_weight * new points),
 *
 * and commits the best one, until the work budget, the candidate count or
 * the profit floor stops it. Every requested point counts against max_work
 * once, including points of candidates that are never selected.
 */
AdaptState adapt(AdaptState state, Oracle& oracle, const AdaptOptions& options);

MiscSurrogate adaptive_build(Oracle& oracle, std::vector<KnotFamily> families, std::vector<std::string> qois,
                             const AdaptOptions& options);

/// Halton points (bases 2, 3, 5, ...) mapped through the families.
std::vector<Point> probe_points(std::span<const KnotFamily> families, std::size_t count);

/**
 * Surrogate container (JSON text). Reals are 16-hex-digit IEEE-754 images:
 *
 *   { "format": "mfuq-misc-surrogate", "version": 1, "dim": N,
 *     "qois": [...], "fidelity_levels": [...],
 *     "families": [{"kind": "symmetric_leja"|"weighted_gaussian_leja",
 *                   "a": hex, "b": hex, "knots": [hex, ...]}, ...],
 *     "index_set": [{"alpha": a, "beta": [...], "coefficient": c}, ...],
 *     "grids": [{"alpha": a, "beta": [...], "values": [hex, ...]}, ...],
 *     "provenance": "..." }
 */
inline constexpr int surrogate_format_version = 1;

std::string serialize_surrogate(const MiscSurrogate& s, const std::string& provenance = {});
MiscSurrogate deserialize_surrogate(const std::string& text, std::optional<std::size_t> expected_dim = std::nullopt,
                                    std::string* provenance = nullptr);
void save_surrogate(const MiscSurrogate& s, const std::string& path, const std::string& provenance = {});
MiscSurrogate load_surrogate(const std::string& path, std::optional<std::size_t> expected_dim = std::nullopt,
                             std::string* provenance = nullptr);

/// Index-set file used to replay a construction: {"dim": N, "entries": [{"alpha": a, "beta": [...]}, ...]}.
MultiIndexSet load_index_set(const std::string& path);
void save_index_set(const MultiIndexSet& set, const std::string& path);

}  // namespace mfuq
