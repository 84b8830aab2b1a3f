#include "mfuq/multiindex.hpp"

#include <stdexcept>

namespace mfuq {

std::string ExtMultiIndex::to_string() const {
    std::string s = "[" + std::to_string(alpha) + ",(";
    for (std::size_t n = 0; n < beta.size(); ++n) {
        if (n) s += ",";
        s += std::to_string(beta[n]);
    }
    return s + ")]";
}

ExtMultiIndex base_index(std::size_t dim) {
    return ExtMultiIndex{1, std::vector<int>(dim, 1)};
}

MultiIndexSet::MultiIndexSet(std::size_t dim, std::initializer_list<ExtMultiIndex> entries) : dim_(dim) {
    for (const auto& e : entries) insert(e);
}

void MultiIndexSet::insert(const ExtMultiIndex& idx) {
    if (idx.beta.size() != dim_) {
        throw std::invalid_argument("multi-index " + idx.to_string() + " has wrong dimension");
    }
    for (std::size_t k = 0; k <= dim_; ++k) {
        if (idx.component(k) < 1) {
            throw std::invalid_argument("multi-index components must be >= 1: " + idx.to_string());
        }
    }
    entries_.insert(idx);
}

int MultiIndexSet::max_alpha() const {
    int a = 0;
    for (const auto& e : entries_) a = std::max(a, e.alpha);
    return a;
}

bool MultiIndexSet::is_downward_closed() const { return mfuq::is_downward_closed(entries_); }

bool is_downward_closed(const std::set<ExtMultiIndex>& entries) {
    for (const auto& e : entries) {
        for (std::size_t k = 0; k <= e.dim(); ++k) {
            if (e.component(k) > 1) {
                ExtMultiIndex back = e;
                --back.component(k);
                if (!entries.contains(back)) return false;
            }
        }
    }
    return true;
}

std::map<ExtMultiIndex, int> combination_coefficients(const MultiIndexSet& set) {
    if (!set.is_downward_closed()) {
        throw std::invalid_argument("combination coefficients require a downward-closed set");
    }
    const std::size_t width = set.dim() + 1;
    std::map<ExtMultiIndex, int> coeffs;
    for (const auto& e : set.entries()) {
        int c = 0;
        for (std::size_t mask = 0; mask < (std::size_t{1} << width); ++mask) {
            ExtMultiIndex shifted = e;
            int parity = 0;
            for (std::size_t k = 0; k < width; ++k) {
                if (mask & (std::size_t{1} << k)) {
                    ++shifted.component(k);
                    ++parity;
                }
            }
            if (set.contains(shifted)) {
                c += (parity % 2 == 0) ? 1 : -1;
            }
        }
        if (c != 0) coeffs.emplace(e, c);
    }
    return coeffs;
}

std::vector<ExtMultiIndex> reduced_margin(const MultiIndexSet& set) {
    std::set<ExtMultiIndex> out;
    const std::size_t width = set.dim() + 1;
    auto admissible = [&](const ExtMultiIndex& cand) {
        for (std::size_t k = 0; k < width; ++k) {
            if (cand.component(k) > 1) {
                ExtMultiIndex back = cand;
                --back.component(k);
                if (!set.contains(back)) return false;
            }
        }
        return true;
    };
    if (set.empty()) {
        out.insert(base_index(set.dim()));
    }
    for (const auto& e : set.entries()) {
        for (std::size_t k = 0; k < width; ++k) {
            ExtMultiIndex cand = e;
            ++cand.component(k);
            if (!set.contains(cand) && admissible(cand)) out.insert(cand);
        }
    }
    return {out.begin(), out.end()};
}

}  // namespace mfuq
