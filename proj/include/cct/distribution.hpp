#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "cct/rng.hpp"

namespace cct {

// Discrete probability distribution with sparse support over point indices.
// Support is kept sorted by index; weights are strictly positive and sum to 1
// after construction. Sampling uses a precomputed alias table, so draws cost
// two RNG calls each.
class DiscreteDistribution {
public:
    DiscreteDistribution() = default;

    // Pairs may be unsorted and may repeat indices (weights accumulate).
    // Weights must be nonnegative with a positive sum; they are normalized.
    static DiscreteDistribution from_pairs(std::vector<std::pair<std::uint64_t, double>> pairs);
    // Dense weights over indices 0..w.size()-1; zeros are dropped.
    static DiscreteDistribution from_weights(const std::vector<double>& w);
    static DiscreteDistribution uniform(std::uint64_t n);
    static DiscreteDistribution point_mass(std::uint64_t idx);

    std::size_t support_size() const { return idx_.size(); }
    const std::vector<std::uint64_t>& support() const { return idx_; }
    const std::vector<double>& weights() const { return w_; }
    double mass(std::uint64_t idx) const;  // 0 outside support

    std::uint64_t sample(Rng& rng) const;

    // Conditional distribution given the predicate; second element is the
    // probability of the condition (distribution empty when it is 0).
    std::pair<DiscreteDistribution, double> restrict_to(
        const std::function<bool(std::uint64_t)>& keep) const;

    // Pushforward under a map of point indices (e.g. point -> cell rep).
    DiscreteDistribution map_through(const std::function<std::uint64_t(std::uint64_t)>& f) const;

    friend double tv_distance(const DiscreteDistribution& a, const DiscreteDistribution& b);

    // CSV: header "index,prob", one row per support point, max-precision
    // decimals with '.' separator. Binary: magic "CCTD1", u64 count, then
    // (u64 index, double prob) pairs, little-endian.
    void save_csv(std::ostream& os) const;
    void save_binary(std::ostream& os) const;
    static DiscreteDistribution load_csv(std::istream& is);
    static DiscreteDistribution load_binary(std::istream& is);
    void save_file(const std::string& path) const;  // picks format by extension (.csv else binary)
    static DiscreteDistribution load_file(const std::string& path);

private:
    void finalize();  // normalize, build alias table

    std::vector<std::uint64_t> idx_;
    std::vector<double> w_;
    std::vector<double> accept_;      // alias table acceptance thresholds
    std::vector<std::uint32_t> alias_;
};

double tv_distance(const DiscreteDistribution& a, const DiscreteDistribution& b);

}  // namespace cct
