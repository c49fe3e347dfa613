#pragma once

#include <cstdint>
#include <tuple>
#include <vector>

#include "cct/distribution.hpp"
#include "cct/domain.hpp"

namespace cct {

// Transport plan between two distributions: (source point, target point,
// mass) triples with positive mass.
struct Coupling {
    std::vector<std::tuple<std::uint64_t, std::uint64_t, double>> flows;

    double cost(const Space& s) const;
    // Marginal consistency check; returns max deviation from (mu, nu).
    double marginal_error(const DiscreteDistribution& mu, const DiscreteDistribution& nu) const;
};

// Earth mover's distance between mu and nu under the space metric, by
// successive shortest paths on the bipartite transportation graph.
// Exact up to floating-point roundoff. Optionally returns an optimal plan.
double emd(const Space& s, const DiscreteDistribution& mu, const DiscreteDistribution& nu,
           Coupling* plan = nullptr);

}  // namespace cct
