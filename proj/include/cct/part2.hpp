#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cct/distribution.hpp"
#include "cct/generators.hpp"
#include "cct/oracle.hpp"
#include "cct/random_cluster.hpp"

namespace cct {

// (1/n^2) sum of the closed-form expected join matrix, in O(n) via symmetry.
double expected_phi_mean(bool cycle, std::int64_t n, double rho);

// ---------- zero-query uniformity tester ----------

struct Alg1Config {
    bool cycle = false;
    std::int64_t n = 0;
    double eps = 0.0;
    double rho = 0.0;
    // alpha and beta follow the correctness proofs; c and L come from the
    // calibration routine (the analysis fixes asymptotics, not constants).
    double alpha = 24.0;
    double beta = 0.25;
    double c = 0.0856;
    double L = 0.1;

    std::int64_t sample_budget() const;   // m = c * (sqrt(n)/eps^2) * (ln^2 n / rho^1.5)
    double concentration_cutoff() const;  // alpha * ln n
    double threshold() const;             // phi mean + beta * eps^2 * rho / n
    void validate() const;  // rho >= L ln^{4/5} n / (n^{1/5} eps^{4/5}); beta <= 1/3
};

struct Alg1Result {
    bool accept = false;
    bool step1_reject = false;  // concentration cutoff hit
    std::int64_t max_count = 0;
    double y = 0.0;
    double threshold = 0.0;
    std::int64_t m = 0;
    std::uint64_t samples_used = 0;
};

// Two-step tester over clustered samples only; throws if the session ever
// answers a label query during the run.
Alg1Result algorithm1(OracleSession& session, const Alg1Config& cfg);

// ---------- Poissonized counts ----------

struct ClusteredCounts {
    std::vector<std::int64_t> t;  // per-element counts, T_j ~ Poi(m mu_j) independent
    std::vector<std::int64_t> x;  // per-cell sums X_i
    std::int64_t total = 0;
};

ClusteredCounts clustered_poisson_counts(const DiscreteDistribution& mu,
                                         const RandomClusterDraw& draw, std::int64_t m,
                                         std::uint64_t seed);

// (1/m^2) sum X_i (X_i - 1).
double y_statistic(const std::vector<std::int64_t>& x, std::int64_t m);

// Exact integer T^T Phi T - |T|_1; equals m^2 times the Y statistic.
std::int64_t y_quadratic_exact(const ClusteredCounts& counts, const JoinMatrix& join);

// ---------- cell learning by binary search ----------

struct LearnedCells {
    bool rejected = false;  // cell cap hit
    // Partition in interval-clustering convention: sorted starts; on the
    // cycle the run of starts.back() may wrap through 0.
    std::vector<std::int64_t> starts;
    std::vector<std::uint64_t> reps;  // label value per cell
    std::uint64_t labels_used = 0;
};

// Walks the 1D domain cell by cell, binary-searching each right endpoint
// (gallop + bisect; monotone because cells are intervals). The possible
// wrapping cell of a cycle is resolved first from both sides of 0.
LearnedCells learn_cells_by_binary_search(OracleSession& session, bool cycle,
                                          std::int64_t cap);

// ---------- identity testing ----------

struct IdentityResult {
    bool accept = false;
    std::uint64_t samples_used = 0;
    std::int64_t budget = 0;
    bool budget_shortfall = false;  // capped below the prescribed budget
};

// Chi-squared identity test against an explicit target with the largest
// entry removed; Poissonized budget c_mult * max{1/delta, ||p^-max||_{2/3} /
// delta^2}. Accepts mu = p and rejects TV(mu, p) >= 2*delta, each with the
// configured failure probability once c_mult is calibrated.
IdentityResult instance_optimal_identity(const std::function<std::uint64_t()>& draw,
                                         const std::vector<double>& target, double delta,
                                         Rng& rng, double c_mult,
                                         std::int64_t max_samples = 0);

// ---------- query-based uniformity tester ----------

struct SingletonTesterConfig {
    std::int64_t n = 0;
    double eps = 0.0;
    double rho = 0.0;
    bool cycle = false;
    double c1 = 200.0;       // cell-count cap multiplier
    double c2 = 1.0 / 16.0;  // proximity multiplier
    double c_id = 4.0;       // identity budget multiplier (calibrated)
    double L = 0.1;

    std::int64_t cell_cap() const;
    double singleton_cap() const;  // 3 rho^2 n
    double proximity() const;      // c2 rho^2 eps
    void validate() const;         // rho >= L (n eps)^{-1/4}
};

enum class SingletonOutcome { accepted, cell_cap_reject, singleton_cap_reject, identity_reject };

struct SingletonResult {
    bool accept = false;
    SingletonOutcome outcome = SingletonOutcome::accepted;
    std::uint64_t labels_used = 0;
    std::uint64_t samples_used = 0;
    std::size_t num_cells = 0;
    std::size_t num_singletons = 0;
};

// Learns the clustering with label queries, rejects on the structural caps,
// then runs the identity test on the singleton-refined clustering.
SingletonResult singleton_tester(OracleSession& session, const SingletonTesterConfig& cfg);

}  // namespace cct
