#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace mfuq {

/// Level-to-knots map m(i) = 2i - 1.
std::size_t level_to_knots(std::size_t level);

enum class LejaKind {
    Symmetric,         // uniform weight on [-1, 1]
    WeightedGaussian,  // standard normal weight
};

/// Candidate-grid resolution used by the greedy Leja search.
struct LejaGrid {
    static constexpr std::size_t symmetric_intervals = 100000;        // 1e5 + 1 candidates on [-1, 1]
    static constexpr std::size_t gaussian_intervals = 200000;         // 2e5 + 1 candidates on [-c, c]
    static constexpr double gaussian_half_width = 10.0;               // c
    static constexpr double tie_tolerance = 1e-12;                    // on the log objective
};

/**
 * First `count` knots of the reference Leja sequence.
 *
 * Symmetric: x1 = 0; even steps maximize sum_j log|x - x_j| over the
 * candidate grid, odd steps append the mirror of the previous knot. Step 2
 * resolves the +-1 tie toward +1.
 *
 * WeightedGaussian: x1 = 0; every further step maximizes
 * -x^2/4 + sum_j log|x - x_j| (i.e. sqrt(w) * prod |x - x_j| with
 * w = exp(-x^2/2)).
 *
 * Ties (objective within tie_tolerance of the max) go to the smallest
 * abscissa. Sequences are computed once and cached process-wide; any
 * prefix is bit-identical across calls.
 */
std::vector<double> reference_leja(LejaKind kind, std::size_t count);

std::vector<double> affine_map_interval(std::span<const double> reference, double lo, double hi);
std::vector<double> affine_map_gaussian(std::span<const double> reference, double mean, double std);

/// Nested univariate knot family bound to a physical interval or Gaussian.
class KnotFamily {
public:
    static KnotFamily symmetric_leja(double lo, double hi);
    static KnotFamily weighted_gaussian_leja(double mean, double std);

    LejaKind kind() const { return kind_; }
    /// (lo, hi) for symmetric families, (mean, std) for Gaussian ones.
    std::pair<double, double> parameters() const { return {a_, b_}; }

    std::vector<double> knots(std::size_t count) const;

    /// Box the surrogate is considered valid on: [lo, hi], or mean +- 3 std.
    std::pair<double, double> nominal_domain() const;

    /// Maps u in (0, 1) to the family's distribution (probe placement).
    double from_unit(double u) const;

    bool operator==(const KnotFamily&) const = default;

private:
    KnotFamily(LejaKind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}

    LejaKind kind_;
    double a_;
    double b_;
};

}  // namespace mfuq
