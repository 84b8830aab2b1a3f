#include "mfuq/forward.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "mfuq/errors.hpp"
#include "mfuq/hexfloat.hpp"
#include "mfuq/rng.hpp"

namespace mfuq {

std::vector<double> SampleMatrix::column(std::size_t qoi) const {
    const std::size_t J = qoi_names.size();
    std::vector<double> out(samples);
    for (std::size_t s = 0; s < samples; ++s) out[s] = values[s * J + qoi];
    return out;
}

double SampleMatrix::extrapolated_fraction() const {
    return samples == 0 ? 0.0 : static_cast<double>(extrapolated) / static_cast<double>(samples);
}

std::vector<Point> sample_posterior(const GaussianPosterior& post, std::size_t count, std::uint64_t seed) {
    const auto N = static_cast<Eigen::Index>(post.dim());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(post.covariance);
    if (eig.info() != Eigen::Success) throw NumericalError("posterior covariance cannot be factored");
    const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd R = eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();

    CounterRng rng(seed);
    std::vector<Point> out(count, Point(post.dim()));
    Eigen::VectorXd z(N);
    for (auto& p : out) {
        for (Eigen::Index i = 0; i < N; ++i) z(i) = rng.normal();
        const Eigen::VectorXd x = R * z;
        for (Eigen::Index i = 0; i < N; ++i) p[static_cast<std::size_t>(i)] = post.mean[static_cast<std::size_t>(i)] + x(i);
    }
    return out;
}

SampleMatrix push_points(const MiscSurrogate& surrogate, std::span<const Point> points) {
    SampleMatrix m;
    m.qoi_names = surrogate.qoi_names();
    m.samples = points.size();
    m.values.reserve(points.size() * m.qoi_names.size());
    for (const auto& p : points) {
        auto r = surrogate.evaluate_flagged(p);
        if (r.extrapolated) ++m.extrapolated;
        m.values.insert(m.values.end(), r.values.begin(), r.values.end());
    }
    return m;
}

SampleMatrix push_samples(const MiscSurrogate& surrogate, const ParamSpace& space, std::size_t S, std::uint64_t seed) {
    if (S < 2) throw std::invalid_argument("push_samples needs S >= 2");
    return push_points(surrogate, space.sample(S, seed));
}

SampleMatrix push_samples(const MiscSurrogate& surrogate, const GaussianPosterior& post, std::size_t S,
                          std::uint64_t seed) {
    if (S < 2) throw std::invalid_argument("push_samples needs S >= 2");
    return push_points(surrogate, sample_posterior(post, S, seed));
}

// ---------------------------------------------------------------------------
// Density estimation

double PdfEstimate::resolution() const {
    return abscissa.size() < 2 ? 0.0 : (abscissa.back() - abscissa.front()) / static_cast<double>(abscissa.size() - 1);
}

std::vector<double> quantiles(std::span<const double> samples, std::span<const double> probs) {
    if (samples.size() < 2) throw std::invalid_argument("quantiles need at least two samples");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double S = static_cast<double>(sorted.size());
    std::vector<double> out;
    for (double p : probs) {
        if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile probability must lie in (0, 1)");
        const double h = (S - 1.0) * p;  // zero-based position
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const double frac = h - static_cast<double>(lo);
        const double a = sorted[lo];
        out.push_back(lo + 1 < sorted.size() && frac > 0.0 ? a + frac * (sorted[lo + 1] - a) : a);
    }
    return out;
}

double silverman_bandwidth(std::span<const double> samples) {
    const double S = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= S;
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (S - 1.0));
    const std::array<double, 2> probs{0.25, 0.75};
    const auto q = quantiles(samples, probs);
    const double iqr = q[1] - q[0];
    const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
    return 0.9 * spread * std::pow(S, -0.2);
}

PdfEstimate kde(std::span<const double> samples, std::optional<double> bandwidth, std::size_t grid_size) {
    if (samples.size() < 2) throw std::invalid_argument("kde needs at least two samples");
    if (grid_size < 2) throw std::invalid_argument("kde grid needs at least two points");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    PdfEstimate pdf;
    if (sorted.front() == sorted.back()) {
        pdf.degenerate = true;
        pdf.abscissa = {sorted.front()};
        pdf.density = {0.0};
        return pdf;
    }
    const double bw = bandwidth ? *bandwidth : silverman_bandwidth(sorted);
    if (!(bw > 0.0) || !std::isfinite(bw)) throw NumericalError("kde bandwidth must be positive");
    pdf.bandwidth = bw;
    const double lo = sorted.front() - 3.0 * bw;
    const double hi = sorted.back() + 3.0 * bw;
    const double step = (hi - lo) / static_cast<double>(grid_size - 1);
    pdf.abscissa.resize(grid_size);
    pdf.density.resize(grid_size);
    // Contributions beyond 8.5 bandwidths are below exp(-36) and skipped.
    const double reach = 8.5 * bw;
    const double norm = 1.0 / (static_cast<double>(sorted.size()) * bw * std::sqrt(2.0 * std::numbers::pi));
    for (std::size_t g = 0; g < grid_size; ++g) {
        const double x = g + 1 == grid_size ? hi : lo + static_cast<double>(g) * step;
        auto first = std::lower_bound(sorted.begin(), sorted.end(), x - reach);
        auto last = std::upper_bound(first, sorted.end(), x + reach);
        double sum = 0.0;
        for (auto it = first; it != last; ++it) {
            const double z = (x - *it) / bw;
            sum += std::exp(-0.5 * z * z);
        }
        pdf.abscissa[g] = x;
        pdf.density[g] = norm * sum;
    }
    return pdf;
}

double mode(const PdfEstimate& pdf) {
    if (pdf.abscissa.empty()) throw std::invalid_argument("empty density estimate");
    if (pdf.degenerate) return pdf.abscissa.front();
    const auto it = std::max_element(pdf.density.begin(), pdf.density.end());
    return pdf.abscissa[static_cast<std::size_t>(it - pdf.density.begin())];
}

std::vector<Band> band_summary(const SampleMatrix& samples, std::optional<double> bandwidth) {
    std::vector<Band> out;
    const std::array<double, 2> probs{0.05, 0.95};
    for (std::size_t j = 0; j < samples.qoi_names.size(); ++j) {
        const auto col = samples.column(j);
        const auto pdf = kde(col, bandwidth);
        const auto q = quantiles(col, probs);
        out.push_back(Band{samples.qoi_names[j], mode(pdf), pdf.resolution(), q[0], q[1],
                           samples.extrapolated_fraction()});
    }
    return out;
}

double uncertainty_reduction(std::span<const Band> prior, std::span<const Band> post) {
    if (prior.empty() || prior.size() != post.size()) {
        throw std::invalid_argument("band summaries must cover the same quantities");
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < prior.size(); ++j) {
        if (prior[j].qoi != post[j].qoi) {
            throw std::invalid_argument("band summaries differ at '" + prior[j].qoi + "' / '" + post[j].qoi + "'");
        }
        const double w = prior[j].width();
        if (!(w > 0.0)) throw NumericalError("prior band of '" + prior[j].qoi + "' has zero width");
        sum += (w - post[j].width()) / w;
    }
    return 100.0 * sum / static_cast<double>(prior.size());
}

void write_bands_csv(const std::string& path, std::span<const Band> bands, const std::string& provenance) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    if (!provenance.empty()) out << "# provenance=" << provenance << "\n";
    out << "qoi,mode,q05,q95,extrapolated_fraction\n";
    for (const auto& b : bands) {
        out << b.qoi << "," << format_real(b.mode) << "," << format_real(b.q05) << "," << format_real(b.q95) << ","
            << format_real(b.extrapolated_fraction) << "\n";
    }
}

void write_density_csv(const std::string& path, const PdfEstimate& pdf, const std::string& provenance) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    if (!provenance.empty()) out << "# provenance=" << provenance << "\n";
    out << "abscissa,density\n";
    for (std::size_t g = 0; g < pdf.abscissa.size(); ++g) {
        out << format_real(pdf.abscissa[g]) << "," << format_real(pdf.density[g]) << "\n";
    }
}

}  // namespace mfuq
