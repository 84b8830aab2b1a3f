#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mfuq/bayes.hpp"
#include "mfuq/misc.hpp"
#include "mfuq/oracle.hpp"
#include "mfuq/params.hpp"

namespace mfuq {

struct OracleConfig {
    std::string builtin;  // builtin model name, or empty for an external command
    std::string command;
    std::string workdir = ".";
    double timeout_s = 600.0;
};

struct SyntheticConfig {
    Point truth;
    double noise_std = 0.0;
};

struct PipelineConfig {
    std::vector<ParamSpec> parameters;
    std::vector<FidelitySpec> fidelities;
    OracleConfig oracle;
    int lanes = 1;
    std::uint64_t seed = 0;

    AdaptOptions build;
    std::string build_index_set;  // optional replay file; overrides the adaptive build

    std::vector<std::string> calibration_qois;
    std::string observations;
    MapOptions map;

    std::vector<std::string> prediction_qois;
    std::size_t forward_samples = 10000;
    AdaptOptions forward_build;
    std::optional<double> bandwidth;
    std::vector<std::string> density_qois;

    std::optional<SyntheticConfig> synthetic;

    std::string provenance;  // hash of the effective configuration

    ParamSpace space() const { return ParamSpace(parameters); }
};

/**
 * Parses the JSON pipeline configuration (comments allowed). Relative paths
 * are resolved against `base_dir`. QoI lists accept ranges such as "e1..e120".
 * Throws ConfigError with the offending key on any schema violation.
 */
PipelineConfig parse_config(const std::string& text, const std::string& base_dir,
                            std::optional<std::uint64_t> seed_override = std::nullopt);
PipelineConfig load_config(const std::string& path, std::optional<std::uint64_t> seed_override = std::nullopt);

std::vector<std::string> expand_qoi_list(const std::vector<std::string>& entries);

/// 64-bit FNV-1a as 16 hex digits.
std::string fnv1a_hex(const std::string& data);

/// Seed for a named pipeline stage, derived from the configuration seed.
std::uint64_t stage_seed(std::uint64_t seed, std::uint64_t stage);

struct RunOptions {
    std::string out_dir = "out";
    std::optional<int> lanes;
    std::ostream* log = nullptr;  // progress messages; nullptr for quiet
};

/// Oracle with a persistent cache at <out>/cache/<stage>.log.
Oracle make_oracle(const PipelineConfig& cfg, const RunOptions& run, const std::string& stage);

std::vector<KnotFamily> prior_families(const ParamSpace& space);
std::vector<KnotFamily> posterior_families(const GaussianPosterior& post);

/// Adaptive (or replayed) build of the calibration surrogate on the prior space.
void cmd_build(const PipelineConfig& cfg, const RunOptions& run);
/// MAP, noise level and Laplace covariance from <out>/surrogate.json.
void cmd_calibrate(const PipelineConfig& cfg, const RunOptions& run);
/// Prior- and posterior-based forward UQ of the prediction quantities.
void cmd_forward(const PipelineConfig& cfg, const RunOptions& run);
/// Consolidates the artifacts of <out> into <out>/report.txt and returns its text.
std::string cmd_report(const RunOptions& run);
/// Writes <out>/observations.csv from the synthetic truth plus Gaussian noise.
void cmd_synth_obs(const PipelineConfig& cfg, const RunOptions& run);

}  // namespace mfuq
