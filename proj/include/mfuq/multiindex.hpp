#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace mfuq {

/// Extended multi-index [alpha, beta]: fidelity level plus per-dimension grid levels.
struct ExtMultiIndex {
    int alpha = 1;
    std::vector<int> beta;

    auto operator<=>(const ExtMultiIndex&) const = default;
    bool operator==(const ExtMultiIndex&) const = default;

    std::size_t dim() const { return beta.size(); }
    /// Component k of the flattened (1 + N)-vector [alpha, beta_1, ..., beta_N].
    int component(std::size_t k) const { return k == 0 ? alpha : beta[k - 1]; }
    int& component(std::size_t k) { return k == 0 ? alpha : beta[k - 1]; }

    std::string to_string() const;
};

ExtMultiIndex base_index(std::size_t dim);

/// Finite set I of extended multi-indices, kept in lexicographic order.
class MultiIndexSet {
public:
    explicit MultiIndexSet(std::size_t dim) : dim_(dim) {}
    MultiIndexSet(std::size_t dim, std::initializer_list<ExtMultiIndex> entries);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const std::set<ExtMultiIndex>& entries() const { return entries_; }

    bool contains(const ExtMultiIndex& idx) const { return entries_.contains(idx); }
    void insert(const ExtMultiIndex& idx);
    int max_alpha() const;

    bool is_downward_closed() const;

private:
    std::size_t dim_;
    std::set<ExtMultiIndex> entries_;
};

/// True iff every backward neighbor of every entry is present.
bool is_downward_closed(const std::set<ExtMultiIndex>& entries);

/// c_{alpha,beta} = sum over i in {0,1}, j in {0,1}^N with [alpha+i, beta+j] in I
/// of (-1)^(i + |j|_1). Zero coefficients are omitted.
std::map<ExtMultiIndex, int> combination_coefficients(const MultiIndexSet& set);

/// Indices outside I whose every backward neighbor lies in I.
std::vector<ExtMultiIndex> reduced_margin(const MultiIndexSet& set);

}  // namespace mfuq
