#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cct/cell_procedures.hpp"
#include "cct/distribution.hpp"
#include "cct/domain.hpp"
#include "cct/oracle.hpp"
#include "cct/subtests.hpp"

namespace cct {

// Parameters of the clustering guard and the guarded testers built on it.
// eps is the testing distance, Delta the diameter threshold below which
// cells are considered harmless, delta the target failure probability,
// beta the slack between the accepted and rejected diameter regimes.
struct GuardParams {
    double eps = 0.0;
    double Delta = 0.0;
    double delta = 1.0 / 6.0;
    double beta = 0.25;

    // Mass threshold for harmless large cells: a clustering is
    // high-probability-low-diameter when Pr[cell diam > Delta] <= c_beta*eps.
    double c_beta() const;
    // c_beta at the default beta = 1/4.
    static double c();
    // Draw count scale k = (2/beta) ln 24 and per-run draw count s = ceil(k/eps).
    double k() const;
    std::uint64_t s() const;

    // Throws std::invalid_argument unless 0 < 2*Delta < eps < 1/2,
    // Delta <= beta*eps/2, delta in (0,1/2), beta in (0,1).
    void validate() const;
};

enum class Verdict { accept, reject, cluster_reject };

const char* to_string(Verdict v);

// Outcome of a guarded tester run plus its resource usage. The declared
// budgets are upper bounds computed before the run from the binding's
// per-call query caps; a budget of 0 means the binding declared no cap.
struct TesterVerdict {
    Verdict verdict = Verdict::cluster_reject;
    std::vector<std::uint64_t> samples_used;  // one entry per session input
    std::uint64_t labels_used = 0;
    std::uint64_t sample_budget = 0;
    std::uint64_t label_budget = 0;
    std::uint32_t runs = 1;  // vote repetitions used to reach gp.delta
};

// A cell-rejection procedure bound to one session handle: called on a
// representative returned by SAMP, answers accept / reject / bot. The
// failure budget is baked in by the caller.
using RejectProc = std::function<RejectVerdict(OracleSession&, std::uint64_t)>;

// A cell-discovery procedure: returns a container holding the whole cell
// of the given representative, or cluster_reject.
using DiscoverProc = std::function<DiscoveryResult(OracleSession&, std::uint64_t)>;

struct ClusteringGuardResult {
    bool accept = false;
    std::uint64_t samples_used = 0;
    std::uint64_t labels_used = 0;
    std::uint32_t runs = 1;
};

// Screens the hidden clustering against the sampled distribution: draws
// gp.s() representatives per run and runs the rejection procedure on each,
// rejecting on any reject or bot answer. Guarantees, each with probability
// at least 1 - gp.delta: high-probability-low-diameter clusterings (with
// the procedure's own failure at most 1/(24 s)) pass, and clusterings with
// E[cell diam] > beta*eps fail. One run reaches delta = 1/12; smaller
// targets take a majority over ceil(18 ln(1/delta)) runs.
ClusteringGuardResult test_clustering(OracleSession& session, const GuardParams& gp,
                                      const RejectProc& reject_proc,
                                      std::size_t which = 0);

// Same guard run against a caller-supplied representative stream instead
// of a session input, used when one side of an equivalence test is being
// simulated through label queries.
ClusteringGuardResult test_clustering_stream(OracleSession& session, const GuardParams& gp,
                                             const RejectProc& reject_proc,
                                             const std::function<std::uint64_t()>& draw_rep);

enum class ContainerStatus { ok, reject, cluster_reject };

struct ContainerSampleResult {
    ContainerStatus status = ContainerStatus::cluster_reject;
    std::vector<std::uint64_t> samples;   // m domain points when status == ok
    std::uint64_t resample_attempts = 0;  // inner-loop label queries
    std::uint64_t labels_used = 0;        // discovery plus inner loop
    std::uint64_t counter_cap = 0;        // global failed-resample allowance
};

// Draws m points distributed as: pick a cell by sampling the session input,
// then resample that cell from nu_target conditioned on the discovered
// container until a label query confirms the cell. A container with zero
// nu_target mass is a reject; more than ceil(24 m / alpha) failed
// resamples across the whole run is a cluster_reject. For containers of
// relative cell mass >= alpha, each sample costs <= 1/alpha resamples in
// expectation and the allowance is exceeded with probability <= 1/24.
ContainerSampleResult container_sample(OracleSession& session, std::uint64_t m,
                                       double alpha, const DiscreteDistribution& nu_target,
                                       const DiscoverProc& discover_proc,
                                       std::size_t which = 0);

// How a universe preset wires the guard and the sampler: a rejection
// procedure for over-diameter cells, optionally a discovery procedure for
// container resampling (bindings without one test identity by simulating
// the reference stream with one label query per draw), the promised
// resample hit rate alpha, and per-call label caps (0 = no declared cap).
struct UniverseBinding {
    std::string name;
    double alpha = 1.0;
    std::uint64_t qreject_cap = 0;
    std::uint64_t qcell_cap = 0;
    std::function<RejectVerdict(OracleSession&, std::uint64_t, double)> reject;
    std::function<DiscoveryResult(OracleSession&, std::uint64_t, double)> discover;

    bool has_discovery() const { return static_cast<bool>(discover); }
};

struct BindingOptions {
    // Convex-body presets: promised inner-ball radius in axis steps.
    double body_inner_ball = 4.0;
};

// Preset names accepted by make_universe_binding.
std::vector<std::string> universe_binding_names();

// Builds a named preset binding for the given space, validating that the
// space and guard parameters are compatible with the preset's procedures.
// Throws std::invalid_argument on an unknown name or incompatible setup.
UniverseBinding make_universe_binding(const std::string& preset, const Space& s,
                                      const GuardParams& gp, const BindingOptions& opts = {});

struct GuardedConfig {
    // Failure-budget constant: discovery runs at b/m, rejection at b*eps.
    // Both are additionally clamped to what the guard and sampler
    // guarantees require (1/(24 s) and 1/(24 m)).
    double b = 1.0 / 24.0;
    SubtestCalibration cal{};
};

// Tests the session's input against the known distribution nu at distance
// gp.eps under the earth-mover metric, with the clustering screened first:
// the verdict is cluster_reject when the guard fires or container sampling
// gives up, otherwise accept / reject from the earth-mover identity tester
// run at distance eps/2 on the container samples (or, for bindings without
// discovery, from the equivalence tester against a label-simulated
// reference stream). gp.delta <= 1/6 is reached by a plurality vote.
TesterVerdict diameter_guarded_identity(OracleSession& session, const DiscreteDistribution& nu,
                                        const GuardParams& gp, const UniverseBinding& binding,
                                        const GuardedConfig& cfg = {});

// Two-input version: screens the clustering against both inputs, then runs
// the earth-mover equivalence tester at distance eps/2 directly on the two
// representative streams. The session must have at least two inputs.
TesterVerdict diameter_guarded_equivalence(OracleSession& session, const GuardParams& gp,
                                           const UniverseBinding& binding,
                                           const GuardedConfig& cfg = {});

}  // namespace cct
