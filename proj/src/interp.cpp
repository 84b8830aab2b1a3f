#include "mfuq/interp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mfuq {

namespace {

constexpr double coincidence_tol = 1e-14;

double knot_span(std::span<const double> knots) {
    const auto [lo, hi] = std::minmax_element(knots.begin(), knots.end());
    return *hi - *lo;
}

}  // namespace

TensorGrid::TensorGrid(std::vector<int> beta, std::vector<std::vector<double>> per_dim_knots)
    : beta_(std::move(beta)), knots_(std::move(per_dim_knots)), size_(1) {
    if (beta_.size() != knots_.size()) {
        throw std::invalid_argument("tensor grid: beta and knot lists differ in dimension");
    }
    for (const auto& k : knots_) {
        if (k.empty()) {
            throw std::invalid_argument("tensor grid: empty knot list");
        }
        size_ *= k.size();
    }
}

Point TensorGrid::point(std::size_t index) const {
    Point p(knots_.size());
    for (std::size_t n = knots_.size(); n-- > 0;) {
        const auto m = knots_[n].size();
        p[n] = knots_[n][index % m];
        index /= m;
    }
    return p;
}

std::vector<Point> TensorGrid::points() const {
    std::vector<Point> out;
    out.reserve(size_);
    for (std::size_t i = 0; i < size_; ++i) {
        out.push_back(point(i));
    }
    return out;
}

TensorGrid build_grid(const std::vector<int>& beta, std::span<const KnotFamily> families) {
    if (beta.size() != families.size()) {
        throw std::invalid_argument("build_grid: beta has dimension " + std::to_string(beta.size()) +
                                    " but " + std::to_string(families.size()) + " families given");
    }
    std::vector<std::vector<double>> knots;
    knots.reserve(beta.size());
    for (std::size_t n = 0; n < beta.size(); ++n) {
        if (beta[n] < 1) {
            throw std::invalid_argument("build_grid: beta components must be >= 1");
        }
        knots.push_back(families[n].knots(level_to_knots(static_cast<std::size_t>(beta[n]))));
    }
    return TensorGrid(beta, std::move(knots));
}

std::vector<double> barycentric_weights(std::span<const double> knots) {
    const std::size_t m = knots.size();
    const double span = knot_span(knots);
    std::vector<double> w(m, 1.0);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t k = 0; k < m; ++k) {
            if (k == j) continue;
            const double d = knots[j] - knots[k];
            const double scale = std::max({std::abs(knots[j]), std::abs(knots[k]), span});
            if (std::abs(d) <= coincidence_tol * scale) {
                throw std::invalid_argument("interpolation knots coincide");
            }
            // Dividing by span keeps the products O(1) for wide intervals.
            w[j] *= span / d;
        }
    }
    const double wmax = std::abs(*std::max_element(w.begin(), w.end(), [](double a, double b) {
        return std::abs(a) < std::abs(b);
    }));
    for (auto& x : w) x /= wmax;
    return w;
}

TensorInterpolant::TensorInterpolant(TensorGrid grid, std::vector<double> values, std::size_t n_values)
    : grid_(std::move(grid)), values_(std::move(values)), n_values_(n_values) {
    if (n_values_ == 0 || values_.size() != grid_.size() * n_values_) {
        throw std::invalid_argument("tensor interpolant: expected " +
                                    std::to_string(grid_.size() * n_values_) + " values, got " +
                                    std::to_string(values_.size()));
    }
    bary_weights_.reserve(grid_.dim());
    for (std::size_t n = 0; n < grid_.dim(); ++n) {
        bary_weights_.push_back(barycentric_weights(grid_.knots(n)));
    }
}

void TensorInterpolant::basis(std::size_t n, double x, std::vector<double>& out) const {
    const auto& knots = grid_.knots(n);
    const auto& w = bary_weights_[n];
    const std::size_t m = knots.size();
    out.assign(m, 0.0);
    if (m == 1) {
        out[0] = 1.0;
        return;
    }
    const double span = knot_span(knots);
    for (std::size_t j = 0; j < m; ++j) {
        const double scale = std::max(std::abs(knots[j]), span);
        if (std::abs(x - knots[j]) <= coincidence_tol * scale) {
            out[j] = 1.0;
            return;
        }
    }
    double denom = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        out[j] = w[j] / (x - knots[j]);
        denom += out[j];
    }
    for (auto& b : out) b /= denom;
}

void TensorInterpolant::accumulate(std::span<const double> v, double scale, std::span<double> out) const {
    const std::size_t dim = grid_.dim();
    if (v.size() != dim) {
        throw std::invalid_argument("interpolate: point dimension mismatch");
    }
    if (out.size() != n_values_) {
        throw std::invalid_argument("interpolate: output size mismatch");
    }
    std::vector<std::vector<double>> bases(dim);
    for (std::size_t n = 0; n < dim; ++n) {
        basis(n, v[n], bases[n]);
    }
    // Odometer over grid indices, last dimension fastest.
    std::vector<std::size_t> idx(dim, 0);
    for (std::size_t p = 0; p < grid_.size(); ++p) {
        double weight = scale;
        for (std::size_t n = 0; n < dim; ++n) {
            weight *= bases[n][idx[n]];
        }
        if (weight != 0.0) {
            const double* row = values_.data() + p * n_values_;
            for (std::size_t q = 0; q < n_values_; ++q) {
                out[q] += weight * row[q];
            }
        }
        for (std::size_t n = dim; n-- > 0;) {
            if (++idx[n] < bases[n].size()) break;
            idx[n] = 0;
        }
    }
}

std::vector<double> TensorInterpolant::evaluate(std::span<const double> v) const {
    std::vector<double> out(n_values_, 0.0);
    accumulate(v, 1.0, out);
    return out;
}

}  // namespace mfuq
