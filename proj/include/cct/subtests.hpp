#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cct/distribution.hpp"
#include "cct/domain.hpp"

namespace cct {

// Leading constants for the sub-tester sample budgets. The statistics fix the
// rates (sqrt(k)/eps^2 for identity against a known target, additionally
// k^{2/3}/eps^{4/3} for two unknown streams); the constants come from
// calibrate_subtests and the defaults below are its output, padded.
struct SubtestCalibration {
    double c_identity = 1.4;
    double c_equivalence = 2.1;
};

// Sample budget for tv_identity_subtest against nu at distance eps_tv. Scales
// with (sum_i nu_i^{2/3})^{3/2}, which is sqrt(support) for uniform nu and
// smaller for skewed nu, and with ln(1/fail_prob).
std::uint64_t tv_identity_budget(const DiscreteDistribution& nu, double eps_tv,
                                 double fail_prob, const SubtestCalibration& cal = {});

// Per-stream budget for tv_equivalence_subtest over a domain of at most
// domain_size elements.
std::uint64_t tv_equivalence_budget(std::uint64_t domain_size, double eps_tv,
                                    double fail_prob, const SubtestCalibration& cal = {});

// One-sided identity test against the known nu: accepts mu = nu and rejects
// TV(mu, nu) >= eps_tv, each with failure probability <= fail_prob. Uses the
// first tv_identity_budget(...) entries of samples; throws std::invalid_argument
// if fewer are supplied (short inputs are an error, never a quiet accept).
// Statistic: bias-corrected chi-squared with cells weighted by nu_i^{-2/3},
// plus an immediate reject on any draw outside supp(nu). Deterministic in its
// inputs. Returns true to accept.
bool tv_identity_subtest(std::span<const std::uint64_t> samples,
                         const DiscreteDistribution& nu, double eps_tv, double fail_prob,
                         const SubtestCalibration& cal = {});

// Two-sample analogue: accepts mu = nu, rejects TV >= eps_tv, from equal-size
// draws of both. Uses the first tv_equivalence_budget(...) entries of each
// span and throws if either is shorter. Statistic: count-difference collision
// statistic, each cell normalized by its total count. Returns true to accept.
bool tv_equivalence_subtest(std::span<const std::uint64_t> samples_a,
                            std::span<const std::uint64_t> samples_b,
                            std::uint64_t domain_size, double eps_tv, double fail_prob,
                            const SubtestCalibration& cal = {});

// ---------- dyadic block hierarchy on the grid ----------

// Number of refinement levels the EMD testers use at distance eps:
// ceil(log2(2/eps)), so the finest level has block diameter <= eps/2.
int emd_levels(double eps);

// Axis split at a level: the axis is cut into a power-of-two number of runs
// with boundaries floor(j*n/B). Powers of two make consecutive levels nest;
// B is large enough that every block has diameter <= 2^-level (via
// points_per_block, so this respects the space's metric).
std::int64_t dyadic_blocks_per_axis(const Space& s, int level);

// Block id of a point at a level; ids use base dyadic_blocks_per_axis with
// axis 0 fastest, matching Space::encode.
std::uint64_t dyadic_block_of(const Space& s, std::uint64_t point_idx, int level);

// Covered box of a nonempty block id.
Box dyadic_block_box(const Space& s, std::uint64_t block_id, int level);

// Pushforward of p onto level blocks.
DiscreteDistribution coarsen_dyadic(const Space& s, const DiscreteDistribution& p, int level);

// Upper bound on EMD(mu, nu) through the block hierarchy:
//   sum_{i=1..levels} 2^{-(i-1)} * TV(mu|level i, nu|level i)
//   + E_{x~mu}[diam of x's finest-level block].
double hierarchical_emd_bound(const Space& s, const DiscreteDistribution& mu,
                              const DiscreteDistribution& nu, int levels);

// Materialized ladder of the nested dyadic partitions for a distance eps:
// level i splits every axis into blocks_per_axis[i-1] runs and its cells
// have diameter at most 2^-i; the finest level satisfies 2^-levels <= eps/2.
// Each level refines the previous one.
struct HierarchicalClustering {
    const Space* space = nullptr;
    int levels = 0;
    std::vector<std::int64_t> blocks_per_axis;

    static HierarchicalClustering build(const Space& s, double eps);

    double level_diam_bound(int level) const;
    std::uint64_t block_of(int level, std::uint64_t point_idx) const;
    // Size of the level's block id space (trailing ids may be empty when an
    // axis size is not a power of two).
    std::uint64_t num_blocks(int level) const;
};

// ---------- EMD testers on the grid ----------

struct EmdTestResult {
    bool accept = true;
    int levels = 0;
    int rejected_level = 0;           // 1-based; 0 when accepted
    std::uint64_t samples_used = 0;   // per source; less than the budget on early reject
};

// Tests mu (via draw_mu) against the known nu under EMD: accepts mu = nu and
// rejects EMD(mu, nu) > eps, each with probability >= 2/3. Runs one TV
// identity sub-test per level at distance eps * 2^{i-1} / (2*levels) and
// per-level failure 1/(3*levels); any level rejecting rejects the run.
// Deterministic given the draw sequence.
EmdTestResult emd_identity_tester_hypergrid(const std::function<std::uint64_t()>& draw_mu,
                                            const DiscreteDistribution& nu, double eps,
                                            const Space& s, const SubtestCalibration& cal = {});

// Two-stream analogue with equivalence sub-tests; draws the same number of
// samples from each source.
EmdTestResult emd_equivalence_tester_hypergrid(const std::function<std::uint64_t()>& draw_a,
                                               const std::function<std::uint64_t()>& draw_b,
                                               double eps, const Space& s,
                                               const SubtestCalibration& cal = {});

// Total draws the testers consume when no level rejects (the sum of per-level
// budgets). The identity figure doubles as the guarded testers' sample count m.
std::uint64_t emd_identity_sample_budget(const Space& s, const DiscreteDistribution& nu,
                                         double eps, const SubtestCalibration& cal = {});
std::uint64_t emd_equivalence_sample_budget(const Space& s, double eps,
                                            const SubtestCalibration& cal = {});

// ---------- calibration ----------

struct CalibrationProbe {
    std::string name;
    std::uint64_t support = 0;
    double eps = 0.0;
    double fail_prob = 0.0;
    std::uint64_t minimal_budget = 0;  // smallest m meeting the error target
    double implied_constant = 0.0;     // minimal_budget / (rate formula)
};

struct CalibrationReport {
    SubtestCalibration constants;  // max implied constant per family, padded 1.5x
    std::vector<CalibrationProbe> probes;
    std::uint64_t trials = 0;
};

// Binary search on the sample budget until both error rates (target vs target,
// and target vs a TV-eps-far perturbation) drop to fail_prob over `trials`
// runs, across a small family of support sizes, distances and target shapes.
CalibrationReport calibrate_subtests(std::uint64_t seed, std::uint64_t trials = 400);

}  // namespace cct
