#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace mfuq {

using Point = std::vector<double>;

struct Uniform {
    double lo;
    double hi;
};

struct Gaussian {
    double mean;
    double std;
};

using Distribution = std::variant<Uniform, Gaussian>;

/// One uncertain parameter. The parameter is the (possibly transformed)
/// variable itself; `transform_label` only documents the transform.
class ParamSpec {
public:
    ParamSpec(std::string name, Distribution dist, std::string transform_label = {});

    const std::string& name() const { return name_; }
    const Distribution& distribution() const { return dist_; }
    const std::string& transform_label() const { return transform_label_; }

    bool is_uniform() const { return std::holds_alternative<Uniform>(dist_); }

    double density(double x) const;
    double mean() const;
    double stddev() const;

    /// Width used for scaling (finite differences, penalties, initial simplex):
    /// hi - lo for uniform, 6 std for Gaussian.
    double scale_width() const;

private:
    std::string name_;
    Distribution dist_;
    std::string transform_label_;
};

/// Product space of independent parameters: Gamma = Gamma_1 x ... x Gamma_N.
class ParamSpace {
public:
    explicit ParamSpace(std::vector<ParamSpec> params);

    std::size_t dim() const { return params_.size(); }
    const std::vector<ParamSpec>& params() const { return params_; }
    const ParamSpec& operator[](std::size_t i) const { return params_[i]; }

    double prior_density(std::span<const double> v) const;

    /// `count` draws; coordinate n of draw i is taken from the marginal of
    /// parameter n. Deterministic in (space, count, seed).
    std::vector<Point> sample(std::size_t count, std::uint64_t seed) const;

    Point center() const;

private:
    void check_dim(std::span<const double> v) const;

    std::vector<ParamSpec> params_;
};

}  // namespace mfuq
