#include "mfuq/oracle.hpp"

#include <cstring>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include "mfuq/errors.hpp"
#include "mfuq/hexfloat.hpp"

namespace mfuq {

std::string EvalCache::point_key(std::span<const double> v) {
    std::string key(v.size() * sizeof(double), '\0');
    if (!v.empty()) std::memcpy(key.data(), v.data(), key.size());
    return key;
}

EvalCache::EvalCache(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_);
    if (!in) return;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream fields(line);
        int alpha = 0;
        std::string coords, qoi, value;
        if (!(fields >> alpha >> coords >> qoi >> value)) {
            throw FormatError("cache " + path_ + ":" + std::to_string(lineno) + ": malformed record");
        }
        std::vector<double> v;
        std::istringstream cs(coords);
        std::string tok;
        while (std::getline(cs, tok, ',')) v.push_back(from_hex(tok));
        values_[Key{alpha, point_key(v), qoi}] = from_hex(value);
    }
}

std::optional<double> EvalCache::lookup(int alpha, std::span<const double> v, const std::string& qoi) const {
    std::shared_lock lock(mutex_);
    auto it = values_.find(Key{alpha, point_key(v), qoi});
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

void EvalCache::insert(int alpha, std::span<const double> v, const std::string& qoi, double value) {
    if (qoi.empty() || qoi.find_first_of(" \t\n\r") != std::string::npos) {
        throw std::invalid_argument("qoi names must be non-empty and free of whitespace: '" + qoi + "'");
    }
    std::unique_lock lock(mutex_);
    auto [it, fresh] = values_.insert_or_assign(Key{alpha, point_key(v), qoi}, value);
    if (!fresh || path_.empty()) return;
    if (!log_.is_open()) {
        log_.open(path_, std::ios::app);
        if (!log_) {
            throw OracleError("cannot append to cache file " + path_);
        }
    }
    auto& out = log_;
    out << alpha << ' ';
    for (std::size_t n = 0; n < v.size(); ++n) {
        if (n) out << ',';
        out << to_hex(v[n]);
    }
    out << ' ' << qoi << ' ' << to_hex(value) << '\n';
    out.flush();
}

std::size_t EvalCache::size() const {
    std::shared_lock lock(mutex_);
    return values_.size();
}

std::size_t EvalCache::distinct_points() const {
    std::size_t n = 0;
    for (const auto& [a, c] : distinct_points_per_alpha()) n += c;
    return n;
}

std::map<int, std::size_t> EvalCache::distinct_points_per_alpha() const {
    std::shared_lock lock(mutex_);
    std::set<std::pair<int, std::string>> seen;
    for (const auto& [key, v] : values_) {
        seen.emplace(std::get<0>(key), std::get<1>(key));
    }
    std::map<int, std::size_t> out;
    for (const auto& [a, k] : seen) ++out[a];
    return out;
}

}  // namespace mfuq
