#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "mfuq/params.hpp"

namespace mfuq {

struct FidelitySpec {
    int alpha = 1;
    double cost_weight = 1.0;
};

struct EvalRequest {
    int alpha = 1;
    Point params;
    std::vector<std::string> qois;
};

struct EvalResult {
    std::vector<double> values;        // one per requested QoI when ok
    std::optional<std::string> error;  // failure record

    bool ok() const { return !error.has_value(); }
};

/// Something that can compute f_alpha(v). Per-request failures are reported
/// in the result; protocol violations throw OracleError for the whole batch.
class ModelBackend {
public:
    virtual ~ModelBackend() = default;

    virtual std::vector<EvalResult> evaluate(std::span<const EvalRequest> requests, int lanes) = 0;
    virtual std::string description() const = 0;
};

/// Backend defined by a scalar function (alpha, v, qoi) -> value, with an
/// optional validity box. Used for builtin analytic models and in tests.
class FunctionBackend : public ModelBackend {
public:
    using Scalar = std::function<double(int alpha, std::span<const double> v, std::string_view qoi)>;

    FunctionBackend(std::string name, Scalar fn, std::vector<std::pair<double, double>> domain = {},
                    std::vector<int> fidelities = {});

    std::vector<EvalResult> evaluate(std::span<const EvalRequest> requests, int lanes) override;
    std::string description() const override { return name_; }

private:
    EvalResult evaluate_one(const EvalRequest& req) const;

    std::string name_;
    Scalar fn_;
    std::vector<std::pair<double, double>> domain_;
    std::vector<int> fidelities_;
};

/**
 * Synthetic two-fidelity "beam-analog" model, v = (T_A, L) with
 * L = log10 h_p. Every constant below is synthetic.
 *
 *   tau = (T_A - 1290) / 160,  ell = (L + 2.5) / 2.5
 *   u_k = 0.1 k (1 + 0.3 s_k tanh(tau)) (1 + 0.15 r_k ell),   k = 1..5,
 *         s_k = (6 - k) / 3,  r_k = k / 3
 *   e_j = (1.5 - 0.01 j) 1e-3 (1 + 0.2 tanh(tau) + 0.1 sin(pi ell / 2)),  j = 1..120
 *   f_alpha = f_exact (1 + delta_alpha cos(T_A / 200) cos(L)),
 *         delta_1 = 0.05, delta_2 = 0.05 / 36
 *
 * The ridge weights s_k, r_k give each displacement its own mix of T_A and
 * L sensitivity (u_3 has s = r = 1), so five displacements identify both
 * parameters. Validity box: T_A in [500, 2100], L in [-10, 5].
 */
namespace beam_analog {

inline constexpr std::array<double, 2> fidelity_bias = {0.05, 0.05 / 36.0};
inline constexpr double cost_ratio = 36.0;
inline constexpr int n_displacements = 5;
inline constexpr int n_strains = 120;

double exact(std::string_view qoi, std::span<const double> v);
double value(int alpha, std::string_view qoi, std::span<const double> v);
std::vector<std::string> displacement_names();
std::vector<std::string> strain_names();
std::vector<std::pair<double, double>> validity_box();

}  // namespace beam_analog

/// Builtin model registry. Known names: "beam-analog". Throws ConfigError otherwise.
std::unique_ptr<ModelBackend> make_builtin_backend(std::string_view name);
std::vector<std::string> builtin_model_names();

/// Line-protocol bridge to an external simulator process. One child per lane,
/// started with `/bin/sh -c <command>` inside `workdir`.
class ExternalProcessBackend : public ModelBackend {
public:
    struct Options {
        std::string command;
        std::string workdir = ".";
        double timeout_s = 600.0;
    };

    explicit ExternalProcessBackend(Options options);
    ~ExternalProcessBackend() override;
    ExternalProcessBackend(const ExternalProcessBackend&) = delete;
    ExternalProcessBackend& operator=(const ExternalProcessBackend&) = delete;

    std::vector<EvalResult> evaluate(std::span<const EvalRequest> requests, int lanes) override;
    std::string description() const override { return "external: " + options_.command; }

private:
    struct Child;

    std::unique_ptr<Child> spawn() const;

    Options options_;
    std::vector<std::unique_ptr<Child>> children_;
    std::int64_t next_id_ = 0;
};

/// Encodes one protocol request line (without trailing newline).
std::string encode_request(std::int64_t id, const EvalRequest& req);

/**
 * Persistent map (alpha, exact point bits, qoi) -> value. When attached to a
 * file, every insert is appended as one line:
 *
 *   <alpha> <hex(v_1)>,...,<hex(v_N)> <qoi> <hex(value)>
 *
 * Safe for concurrent readers; writers are serialized.
 */
class EvalCache {
public:
    EvalCache() = default;
    /// Loads existing records from `path` (if present) and appends new ones to it.
    explicit EvalCache(std::string path);

    std::optional<double> lookup(int alpha, std::span<const double> v, const std::string& qoi) const;
    void insert(int alpha, std::span<const double> v, const std::string& qoi, double value);

    std::size_t size() const;
    std::size_t distinct_points() const;
    std::map<int, std::size_t> distinct_points_per_alpha() const;

    static std::string point_key(std::span<const double> v);

private:
    using Key = std::tuple<int, std::string, std::string>;

    mutable std::shared_mutex mutex_;
    std::map<Key, double> values_;
    std::string path_;
    std::ofstream log_;
};

/// f_alpha(v) provider: registered fidelities + backend + cache + work ledger.
class Oracle {
public:
    Oracle(std::vector<FidelitySpec> fidelities, std::shared_ptr<ModelBackend> backend,
           std::shared_ptr<EvalCache> cache = nullptr);

    const std::vector<FidelitySpec>& fidelities() const { return fidelities_; }
    double cost_weight(int alpha) const;
    bool has_fidelity(int alpha) const;

    void set_lanes(int lanes);
    int lanes() const { return lanes_; }

    /// Cache first, misses to the backend; results in request order.
    std::vector<EvalResult> eval_batch(int alpha, std::span<const Point> points,
                                       std::span<const std::string> qois);

    /// Distinct points of the batch that would reach the backend.
    std::size_t count_uncached(int alpha, std::span<const Point> points,
                               std::span<const std::string> qois) const;

    std::size_t invocations(int alpha) const;
    std::size_t total_invocations() const;
    double work_spent() const;

    EvalCache& cache() { return *cache_; }
    const EvalCache& cache() const { return *cache_; }

private:
    std::vector<FidelitySpec> fidelities_;
    std::shared_ptr<ModelBackend> backend_;
    std::shared_ptr<EvalCache> cache_;
    std::map<int, std::size_t> invocations_;
    int lanes_ = 1;
};

}  // namespace mfuq
