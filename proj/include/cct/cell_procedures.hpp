#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "cct/domain.hpp"
#include "cct/oracle.hpp"

namespace cct {

// Ordered record of every LABEL query a procedure issued, for debugging.
struct QueryRecord {
    std::uint64_t idx;    // queried point
    std::uint64_t label;  // rep the oracle returned
};

struct QueryTrace {
    std::vector<QueryRecord> records;

    void clear() { records.clear(); }
    // One JSON object per line: {"idx":..,"label":..}
    void write_jsonl(std::ostream& os) const;
};

// Point set returned by a discovery procedure. Either a full lattice box
// (intervals are the d = 1 case) or an explicit sorted list of point indices.
class Container {
public:
    Container() = default;
    static Container from_box(const Box& b);
    static Container from_points(std::vector<std::uint64_t> pts);  // any order

    bool is_box() const { return boxed_; }
    const Box& box() const { return box_; }
    const std::vector<std::uint64_t>& points() const { return pts_; }

    bool contains(const Space& s, std::uint64_t idx) const;
    std::uint64_t num_points(const Space& s) const;
    std::uint64_t sample(const Space& s, Rng& rng) const;  // uniform over the container
    // Farthest-pair distance; 0 for a single point.
    double diam(const Space& s) const;

private:
    bool boxed_ = false;
    Box box_{};
    std::vector<std::uint64_t> pts_;
};

enum class DiscoveryOutcome { container, cluster_reject };

struct DiscoveryResult {
    DiscoveryOutcome outcome = DiscoveryOutcome::cluster_reject;
    Container container;  // meaningful when outcome == container
    std::uint64_t queries_used = 0;
};

enum class RejectOutcome { accept, reject, bot };

struct RejectVerdict {
    RejectOutcome outcome = RejectOutcome::bot;
    std::uint64_t queries_used = 0;
};

// Exact cell recovery when cells are promised to be intervals of the line
// [n]: one binary search per endpoint, at most 2*ceil(log2 n) + 2 queries.
// Under a violated promise the result is unspecified.
DiscoveryResult discover_interval_cell(OracleSession& s, std::uint64_t h,
                                       QueryTrace* trace = nullptr);

// Exact cell recovery when cells are promised to be axis-aligned boxes of
// [n]^d: binary search along each axis line through h, at most
// 2d*ceil(log2 n) + 2d queries.
DiscoveryResult discover_box_cell(OracleSession& s, std::uint64_t h,
                                  QueryTrace* trace = nullptr);

// Deterministic rejection for connected cells on the lp grid: queries the
// full ell_infinity shell of radius k = ceil(eps2 * (n-1) / 2) around h and
// accepts iff no shell point shares h's cell. Requires eps2 > 2 d^{1/p} eps1.
// Cells of diameter <= eps1 are accepted, cells of diameter >= eps2 rejected,
// with no failure probability. The shell is scanned face by face in row-major
// order with an early exit on the first hit.
RejectVerdict reject_connected_cell(OracleSession& s, std::uint64_t h, double eps1,
                                    double eps2, QueryTrace* trace = nullptr);

// Exact recovery of a convex cell on the [n]^2 grid: binary search along the
// row through h finds a boundary point, a breadth-first walk along the
// (8-connected) boundary collects it in full, and the container is the set of
// lattice points inside the integer convex hull of the boundary. O(n) queries.
DiscoveryResult discover_convex_grid_cell_2d(OracleSession& s, std::uint64_t h,
                                             QueryTrace* trace = nullptr);

// Rejection for convex cells on the [n]^2 grid against the box promise.
// Binary search on the row and column through h yields R = [a1,b1]x[a2,b2];
// the four corners of R must answer h and twenty-or-so points just outside R
// (corner neighbors and side-midpoint neighbors) must not, else bot; then
// accept iff diam(R) <= t1. Requires t1 < t2 - 8/(n-1). O(log n) queries.
RejectVerdict cc_vs_box_reject_2d(OracleSession& s, std::uint64_t h, double t1,
                                  double t2, QueryTrace* trace = nullptr);

// Result of the randomized bounding-box estimator for convex cells with an
// inner ball of radius delta (in axis units) around h. On success the boxes
// satisfy: inner is strictly inside the cell's tight bounding box, which is
// strictly inside outer, and side_i(outer) <= 2 side_i(inner). outer may
// stick out of the domain. Failure is always declared, never silent.
struct BoundingBoxResult {
    bool failed = true;
    Box inner{};
    Box outer{};
    std::uint64_t queries_used = 0;
    double worst_err_steps = 0.0;  // largest certified extent error, in steps
};

// Per-axis extents of the cell are measured by walking membership columns
// outward from h; an empty column certifies, through the inner-ball cone
// bound, how far the cell can still reach. Estimates are accurate to
// delta/8 on success. rho_fail sets the depth of the sporadic-tail search,
// reps the number of median-boosting repetitions (probe meshes are
// re-randomized per repetition).
BoundingBoxResult bounding_box(OracleSession& s, std::uint64_t h, double delta,
                               double rho_fail = 0.05, int reps = 9,
                               QueryTrace* trace = nullptr);

// Rejection for convex cells against the convex promise: accept iff the
// inner bounding box has diameter <= eps. Never outputs bot; a declared
// bounding-box failure is folded into reject. Guarantees hold for diameters
// outside (eps / d^{1/p}, 2 eps].
RejectVerdict qreject_conv_conv(OracleSession& s, std::uint64_t h, double eps,
                                double delta, double rho_fail = 0.05,
                                QueryTrace* trace = nullptr);

// Rejection for convex cells against the box promise: additionally labels
// two opposite corners of the inner box and outputs bot if either leaves the
// cell (never happens for a box cell). Guarantees hold outside (eps, 2 eps].
RejectVerdict qreject_conv_box(OracleSession& s, std::uint64_t h, double eps,
                               double delta, double rho_fail = 0.05,
                               QueryTrace* trace = nullptr);

// Discovery for convex cells against the box promise: the container is the
// outer bounding box clipped to the domain, which holds the whole cell and
// at most 2^d times as many lattice points as a box cell. A bounding-box
// failure becomes cluster_reject.
DiscoveryResult qcell_conv_box(OracleSession& s, std::uint64_t h, double delta,
                               double rho_fail = 0.05, QueryTrace* trace = nullptr);

// Rejection derived from an exact discovery: accept iff the container's
// diameter is at most t1. Uses no queries beyond the discovery's own.
RejectVerdict reject_from_discovery(const Space& s, const DiscoveryResult& d, double t1);

}  // namespace cct
