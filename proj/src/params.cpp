#include "mfuq/params.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "mfuq/rng.hpp"

namespace mfuq {

ParamSpec::ParamSpec(std::string name, Distribution dist, std::string transform_label)
    : name_(std::move(name)), dist_(dist), transform_label_(std::move(transform_label)) {
    if (name_.empty()) {
        throw std::invalid_argument("parameter name must not be empty");
    }
    if (const auto* u = std::get_if<Uniform>(&dist_)) {
        if (!(u->lo < u->hi)) {
            throw std::invalid_argument("uniform parameter '" + name_ + "' requires lo < hi");
        }
    } else {
        const auto& g = std::get<Gaussian>(dist_);
        if (!(g.std > 0.0) || !std::isfinite(g.mean)) {
            throw std::invalid_argument("gaussian parameter '" + name_ + "' requires std > 0");
        }
    }
}

double ParamSpec::density(double x) const {
    if (const auto* u = std::get_if<Uniform>(&dist_)) {
        return (x >= u->lo && x <= u->hi) ? 1.0 / (u->hi - u->lo) : 0.0;
    }
    const auto& g = std::get<Gaussian>(dist_);
    const double z = (x - g.mean) / g.std;
    return std::exp(-0.5 * z * z) / (g.std * std::sqrt(2.0 * std::numbers::pi));
}

double ParamSpec::mean() const {
    if (const auto* u = std::get_if<Uniform>(&dist_)) {
        return 0.5 * (u->lo + u->hi);
    }
    return std::get<Gaussian>(dist_).mean;
}

double ParamSpec::stddev() const {
    if (const auto* u = std::get_if<Uniform>(&dist_)) {
        return (u->hi - u->lo) / std::sqrt(12.0);
    }
    return std::get<Gaussian>(dist_).std;
}

double ParamSpec::scale_width() const {
    if (const auto* u = std::get_if<Uniform>(&dist_)) {
        return u->hi - u->lo;
    }
    return 6.0 * std::get<Gaussian>(dist_).std;
}

ParamSpace::ParamSpace(std::vector<ParamSpec> params) : params_(std::move(params)) {
    if (params_.empty()) {
        throw std::invalid_argument("parameter space needs at least one parameter");
    }
    std::set<std::string> names;
    for (const auto& p : params_) {
        if (!names.insert(p.name()).second) {
            throw std::invalid_argument("duplicate parameter name '" + p.name() + "'");
        }
    }
}

void ParamSpace::check_dim(std::span<const double> v) const {
    if (v.size() != params_.size()) {
        throw std::invalid_argument("point has dimension " + std::to_string(v.size()) +
                                    ", parameter space has " + std::to_string(params_.size()));
    }
}

double ParamSpace::prior_density(std::span<const double> v) const {
    check_dim(v);
    double rho = 1.0;
    for (std::size_t n = 0; n < params_.size(); ++n) {
        rho *= params_[n].density(v[n]);
    }
    return rho;
}

std::vector<Point> ParamSpace::sample(std::size_t count, std::uint64_t seed) const {
    if (count < 1) {
        throw std::invalid_argument("sample count must be >= 1");
    }
    CounterRng rng(seed);
    std::vector<Point> out(count, Point(params_.size()));
    for (auto& point : out) {
        for (std::size_t n = 0; n < params_.size(); ++n) {
            if (const auto* u = std::get_if<Uniform>(&params_[n].distribution())) {
                point[n] = u->lo + rng.uniform() * (u->hi - u->lo);
            } else {
                const auto& g = std::get<Gaussian>(params_[n].distribution());
                point[n] = g.mean + g.std * rng.normal();
            }
        }
    }
    return out;
}

Point ParamSpace::center() const {
    Point c(params_.size());
    for (std::size_t n = 0; n < params_.size(); ++n) {
        c[n] = params_[n].mean();
    }
    return c;
}

}  // namespace mfuq
