#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfuq/bayes.hpp"
#include "mfuq/misc.hpp"
#include "mfuq/params.hpp"

namespace mfuq {

/// Surrogate outputs for S parameter draws, sample-major (qoi fastest).
struct SampleMatrix {
    std::vector<std::string> qoi_names;
    std::size_t samples = 0;
    std::vector<double> values;
    std::size_t extrapolated = 0;  // draws outside the surrogate's nominal domain

    std::vector<double> column(std::size_t qoi) const;
    double extrapolated_fraction() const;
};

/// Draws mean + R z with R R^T = covariance (symmetric square root).
std::vector<Point> sample_posterior(const GaussianPosterior& post, std::size_t count, std::uint64_t seed);

SampleMatrix push_points(const MiscSurrogate& surrogate, std::span<const Point> points);
SampleMatrix push_samples(const MiscSurrogate& surrogate, const ParamSpace& space, std::size_t S, std::uint64_t seed);
SampleMatrix push_samples(const MiscSurrogate& surrogate, const GaussianPosterior& post, std::size_t S,
                          std::uint64_t seed);

/// Gaussian-kernel density on an equispaced grid over [min - 3 bw, max + 3 bw].
struct PdfEstimate {
    double bandwidth = 0.0;
    std::vector<double> abscissa;
    std::vector<double> density;
    bool degenerate = false;  // all samples equal; abscissa holds the common value only

    /// Grid spacing, i.e. the resolution of mode().
    double resolution() const;
};

inline constexpr std::size_t kde_grid_size = 512;

/// 0.9 min(std, IQR / 1.34) S^(-1/5); falls back to std when the IQR is zero.
double silverman_bandwidth(std::span<const double> samples);

PdfEstimate kde(std::span<const double> samples, std::optional<double> bandwidth = std::nullopt,
                std::size_t grid_size = kde_grid_size);

/// Abscissa of the largest density value; ties go to the smallest abscissa.
double mode(const PdfEstimate& pdf);

/// Linear interpolation between order statistics at h = (S - 1) p + 1.
std::vector<double> quantiles(std::span<const double> samples, std::span<const double> probs);

struct Band {
    std::string qoi;
    double mode = 0.0;
    double mode_resolution = 0.0;
    double q05 = 0.0;
    double q95 = 0.0;
    double extrapolated_fraction = 0.0;

    double width() const { return q95 - q05; }
};

std::vector<Band> band_summary(const SampleMatrix& samples, std::optional<double> bandwidth = std::nullopt);

/// 100 * mean_j (W_prior,j - W_post,j) / W_prior,j with W = q95 - q05.
double uncertainty_reduction(std::span<const Band> prior, std::span<const Band> post);

void write_bands_csv(const std::string& path, std::span<const Band> bands, const std::string& provenance = {});
void write_density_csv(const std::string& path, const PdfEstimate& pdf, const std::string& provenance = {});

}  // namespace mfuq
