#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfuq/misc.hpp"
#include "mfuq/params.hpp"

namespace mfuq {

struct Observation {
    std::string qoi;
    double value;
};

/// Measured values u_{k,exp}, one per named quantity of interest.
class ObservationSet {
public:
    explicit ObservationSet(std::vector<Observation> entries);

    /// CSV with header `qoi,value`; lines starting with '#' are skipped.
    static ObservationSet load_csv(const std::string& path);
    void save_csv(const std::string& path, const std::string& provenance = {}) const;

    std::size_t size() const { return entries_.size(); }
    const std::vector<Observation>& entries() const { return entries_; }
    std::vector<std::string> names() const;
    std::vector<double> values() const;
    double max_abs_value() const;

private:
    std::vector<Observation> entries_;
};

/// Model predictions for the observed quantities, in observation order.
using ForwardMap = std::function<std::vector<double>(std::span<const double>)>;

/// Throws ConfigError naming the observed quantities the surrogate lacks.
ForwardMap surrogate_forward_map(const MiscSurrogate& surrogate, const ObservationSet& obs);

/// sum_k (u_{k,exp} - u_k(v))^2
double misfit(const ForwardMap& model, const ObservationSet& obs, std::span<const double> v);

/// -K log(sigma sqrt(2 pi)) - misfit / (2 sigma^2)
double log_likelihood(double misfit_value, std::size_t K, double sigma);
double log_likelihood(const ForwardMap& model, const ObservationSet& obs, std::span<const double> v, double sigma);

struct NelderMeadOptions {
    double tol_f = 1e-14;  // spread of simplex values
    double tol_x = 1e-10;  // max-norm distance of vertices from the best one
    std::size_t max_iter = 5000;
    std::vector<double> initial_step;  // per coordinate; empty: 5% of |x0_i| (0.00025 at zero)
};

struct NelderMeadResult {
    Point x;
    double f = 0.0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Downhill simplex with reflection 1, expansion 2, contraction 0.5 and shrink 0.5.
NelderMeadResult nelder_mead(const Objective& f, Point x0, const NelderMeadOptions& options = {});

struct MapOptions {
    std::size_t n_starts = 20;
    std::uint64_t seed = 1;
    double penalty_factor = 1e3;  // 0 disables the box penalty
    double initial_step = 0.05;   // fraction of each parameter's width
    NelderMeadOptions nelder_mead;
};

struct StartReport {
    Point initial;
    Point final;
    double misfit = 0.0;
    double objective = 0.0;  // misfit plus box penalty; starts are ranked by it
    std::size_t iterations = 0;
    bool converged = false;
};

struct MapResult {
    Point v_map;
    double misfit = 0.0;
    std::vector<StartReport> starts;
    std::size_t evaluations = 0;
};

/**
 * Multi-start minimisation of the misfit. Starts are prior samples. Outside
 * the uniform box the objective gains
 *
 *   penalty_factor * misfit(center) * sum_n (dist_n / width_n)^2.
 *
 * The search runs in coordinates scaled by each parameter's width.
 */
MapResult find_map(const ForwardMap& model, const ObservationSet& obs, const ParamSpace& space,
                   const MapOptions& options = {});

struct SigmaEstimate {
    double sigma = 0.0;
    bool floored = false;  // misfit was zero; sigma = 1e-12 * max |u_exp|
};

SigmaEstimate estimate_sigma(double misfit_value, const ObservationSet& obs);
SigmaEstimate estimate_sigma(const ForwardMap& model, const ObservationSet& obs, std::span<const double> v_map);

struct LaplaceResult {
    Eigen::MatrixXd covariance;
    Eigen::MatrixXd jacobian;
    std::vector<Eigen::VectorXd> flat_directions;  // null space of J^T J when pseudo-inverted
};

/// Sigma_post = sigma^2 (J^T J)^{-1} with J from finite differences of step
/// 1e-4 * width per parameter.
LaplaceResult laplace_covariance(const ForwardMap& model, const ParamSpace& space, std::span<const double> v_map,
                                 double sigma);

struct GaussianPosterior {
    std::vector<std::string> names;
    Point mean;
    Eigen::MatrixXd covariance;
    double sigma_meas = 0.0;
    bool sigma_floored = false;
    double misfit = 0.0;
    std::vector<StartReport> multistart;
    std::vector<std::string> warnings;

    std::size_t dim() const { return mean.size(); }
    std::vector<double> stddevs() const;
    Eigen::MatrixXd correlation() const;
};

/// find_map, estimate_sigma and laplace_covariance in sequence.
GaussianPosterior calibrate(const ForwardMap& model, const ObservationSet& obs, const ParamSpace& space,
                            const MapOptions& options = {});

std::string serialize_posterior(const GaussianPosterior& post, const std::string& provenance = {});
GaussianPosterior deserialize_posterior(const std::string& text, std::string* provenance = nullptr);
void save_posterior(const GaussianPosterior& post, const std::string& path, const std::string& provenance = {});
GaussianPosterior load_posterior(const std::string& path, std::string* provenance = nullptr);

}  // namespace mfuq
