#include "mfuq/leja.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

namespace mfuq {

std::size_t level_to_knots(std::size_t level) {
    if (level == 0) {
        throw std::invalid_argument("level_to_knots: level must be >= 1");
    }
    return 2 * level - 1;
}

namespace {

// Incremental greedy search. log_obj[i] accumulates the log objective of
// candidate i against every knot added so far.
class LejaBuilder {
public:
    explicit LejaBuilder(LejaKind kind) : kind_(kind) {
        const bool sym = kind == LejaKind::Symmetric;
        const std::size_t m = sym ? LejaGrid::symmetric_intervals : LejaGrid::gaussian_intervals;
        const double c = sym ? 1.0 : LejaGrid::gaussian_half_width;
        candidates_.resize(m + 1);
        // Integer numerators keep the grid exactly symmetric: x_{m-i} == -x_i.
        for (std::size_t i = 0; i <= m; ++i) {
            const double num = static_cast<double>(2 * static_cast<long long>(i) - static_cast<long long>(m));
            candidates_[i] = c * num / static_cast<double>(m);
        }
        log_obj_.resize(candidates_.size());
        for (std::size_t i = 0; i < candidates_.size(); ++i) {
            const double x = candidates_[i];
            log_obj_[i] = sym ? 0.0 : -0.25 * x * x;
        }
        push(0.0);
    }

    void extend_to(std::size_t count) {
        while (knots_.size() < count) {
            const std::size_t step = knots_.size() + 1;  // 1-based index of the knot being added
            if (kind_ == LejaKind::Symmetric && step % 2 == 1) {
                push(-knots_.back());
            } else {
                push(argmax(kind_ == LejaKind::Symmetric && step == 2));
            }
        }
    }

    const std::vector<double>& knots() const { return knots_; }

private:
    void push(double x) {
        knots_.push_back(x);
        for (std::size_t i = 0; i < candidates_.size(); ++i) {
            const double d = std::abs(candidates_[i] - x);
            log_obj_[i] += d > 0.0 ? std::log(d) : -std::numeric_limits<double>::infinity();
        }
    }

    double argmax(bool prefer_largest) const {
        double best = -std::numeric_limits<double>::infinity();
        for (double v : log_obj_) {
            best = std::max(best, v);
        }
        const double cutoff = best - LejaGrid::tie_tolerance * std::max(1.0, std::abs(best));
        if (prefer_largest) {
            for (std::size_t i = candidates_.size(); i-- > 0;) {
                if (log_obj_[i] >= cutoff) return candidates_[i];
            }
        }
        for (std::size_t i = 0; i < candidates_.size(); ++i) {
            if (log_obj_[i] >= cutoff) return candidates_[i];
        }
        throw std::logic_error("Leja search found no admissible candidate");
    }

    LejaKind kind_;
    std::vector<double> candidates_;
    std::vector<double> log_obj_;
    std::vector<double> knots_;
};

struct SequenceCache {
    std::mutex mutex;
    std::unique_ptr<LejaBuilder> symmetric;
    std::unique_ptr<LejaBuilder> gaussian;
};

SequenceCache& cache() {
    static SequenceCache instance;
    return instance;
}

}  // namespace

std::vector<double> reference_leja(LejaKind kind, std::size_t count) {
    if (count < 1) {
        throw std::invalid_argument("knot count must be >= 1");
    }
    auto& c = cache();
    std::lock_guard lock(c.mutex);
    auto& slot = kind == LejaKind::Symmetric ? c.symmetric : c.gaussian;
    if (!slot) {
        slot = std::make_unique<LejaBuilder>(kind);
    }
    slot->extend_to(count);
    const auto& all = slot->knots();
    return {all.begin(), all.begin() + static_cast<std::ptrdiff_t>(count)};
}

std::vector<double> affine_map_interval(std::span<const double> reference, double lo, double hi) {
    if (!(lo < hi)) {
        throw std::invalid_argument("affine_map_interval: degenerate target interval");
    }
    std::vector<double> out(reference.size());
    std::transform(reference.begin(), reference.end(), out.begin(),
                   [&](double x) { return std::lerp(lo, hi, 0.5 * (x + 1.0)); });
    return out;
}

std::vector<double> affine_map_gaussian(std::span<const double> reference, double mean, double std) {
    if (!(std > 0.0)) {
        throw std::invalid_argument("affine_map_gaussian: std must be positive");
    }
    std::vector<double> out(reference.size());
    std::transform(reference.begin(), reference.end(), out.begin(),
                   [&](double x) { return mean + std * x; });
    return out;
}

KnotFamily KnotFamily::symmetric_leja(double lo, double hi) {
    if (!(lo < hi)) {
        throw std::invalid_argument("symmetric Leja family requires lo < hi");
    }
    return KnotFamily(LejaKind::Symmetric, lo, hi);
}

KnotFamily KnotFamily::weighted_gaussian_leja(double mean, double std) {
    if (!(std > 0.0)) {
        throw std::invalid_argument("weighted Gaussian Leja family requires std > 0");
    }
    return KnotFamily(LejaKind::WeightedGaussian, mean, std);
}

std::vector<double> KnotFamily::knots(std::size_t count) const {
    const auto ref = reference_leja(kind_, count);
    return kind_ == LejaKind::Symmetric ? affine_map_interval(ref, a_, b_)
                                        : affine_map_gaussian(ref, a_, b_);
}

std::pair<double, double> KnotFamily::nominal_domain() const {
    if (kind_ == LejaKind::Symmetric) {
        return {a_, b_};
    }
    return {a_ - 3.0 * b_, a_ + 3.0 * b_};
}

double KnotFamily::from_unit(double u) const {
    if (kind_ == LejaKind::Symmetric) {
        return std::lerp(a_, b_, u);
    }
    return a_ + b_ * boost::math::quantile(boost::math::normal(), u);
}

}  // namespace mfuq
