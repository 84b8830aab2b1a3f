#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mfuq/leja.hpp"
#include "mfuq/params.hpp"

namespace mfuq {

/// Cartesian knot grid T_{m(beta)}. Points are enumerated in row-major
/// order of the per-dimension knot indices (last dimension fastest).
class TensorGrid {
public:
    TensorGrid(std::vector<int> beta, std::vector<std::vector<double>> per_dim_knots);

    const std::vector<int>& beta() const { return beta_; }
    std::size_t dim() const { return knots_.size(); }
    const std::vector<double>& knots(std::size_t n) const { return knots_[n]; }
    std::size_t size() const { return size_; }

    Point point(std::size_t index) const;
    std::vector<Point> points() const;

private:
    std::vector<int> beta_;
    std::vector<std::vector<double>> knots_;
    std::size_t size_;
};

TensorGrid build_grid(const std::vector<int>& beta, std::span<const KnotFamily> families);

/// Lagrange interpolant over a TensorGrid, possibly vector valued. Values
/// are stored point-major: values[p * n_values + q].
class TensorInterpolant {
public:
    TensorInterpolant(TensorGrid grid, std::vector<double> values, std::size_t n_values);

    const TensorGrid& grid() const { return grid_; }
    std::size_t n_values() const { return n_values_; }
    const std::vector<double>& values() const { return values_; }

    /// Adds scale * U(v) into out (length n_values).
    void accumulate(std::span<const double> v, double scale, std::span<double> out) const;
    std::vector<double> evaluate(std::span<const double> v) const;

private:
    void basis(std::size_t n, double x, std::vector<double>& out) const;

    TensorGrid grid_;
    std::vector<double> values_;
    std::size_t n_values_;
    std::vector<std::vector<double>> bary_weights_;
};

/// Barycentric weights 1 / prod_{k != j} (x_j - x_k), rescaled to max |w| = 1.
/// Throws on knots coinciding within 1e-14 relative.
std::vector<double> barycentric_weights(std::span<const double> knots);

}  // namespace mfuq
