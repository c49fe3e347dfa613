#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "cct/clustering.hpp"
#include "cct/distribution.hpp"
#include "cct/domain.hpp"
#include "cct/rng.hpp"

namespace cct {

// ---------- Part II: the random clustering of the path / cycle ----------

// Kept-edge draw: edge i joins points i and i+1 (mod n for the cycle); each
// edge is deleted independently with probability rho. Cells are the maximal
// runs of kept edges; reps are chosen uniformly inside each cell.
struct RandomClusterDraw {
    bool cycle = false;
    std::int64_t n = 0;
    double rho = 1.0;
    std::vector<std::uint8_t> edges_kept;  // n-1 entries for the path, n for the cycle
    IntervalClustering clustering;
};

RandomClusterDraw draw_random_clustering(bool cycle, std::int64_t n, double rho,
                                         std::uint64_t seed);

// ---------- Part I: adversarial universe generators ----------

// Interval partition of [n]: each of the n-1 boundaries is cut independently
// with probability cut_prob. Reps are the leftmost cell points.
IntervalClustering random_interval_partition(std::int64_t n, double cut_prob, Rng& rng);

// Even tiling into boxes_per_axis^d congruent boxes (last box per axis takes
// the remainder).
BoxClustering grid_boxes(const Space& s, std::int64_t boxes_per_axis);

// Random KD-split: recursively split a random axis at a random cut while
// sides stay >= min_pts points, stopping early with probability stop_prob.
BoxClustering kd_split_boxes(const Space& s, Rng& rng, std::int64_t min_pts,
                             double stop_prob);

// Multi-source randomized BFS flood fill: `cells` connected blobs.
ExplicitClustering region_growing_blobs(const Space& s, std::uint32_t cells, Rng& rng);

// Voronoi partition (d=2) whose every cell passes the connectivity and
// lattice-convexity checkers; resamples sites until valid.
VoronoiClustering convex_voronoi_partition_2d(const Space& s, std::uint32_t cells, Rng& rng);

// Random sites with pairwise squared distance >= min_sep_steps^2.
std::vector<Point> separated_sites(const Space& s, std::uint32_t count,
                                   std::int64_t min_sep_steps, Rng& rng);

// ---------- Convex bodies with an inner ball (d = 2) ----------

// Convex lattice body: intersection of half-planes around a center, all at
// distance >= ball_steps from it, clipped to the domain. Contains every
// lattice point within ball_steps of the center by construction.
class ConvexBody2D {
public:
    ConvexBody2D(const Space& s, Point center, std::vector<double> nx, std::vector<double> ny,
                 std::vector<double> off_steps);

    bool member(const Point& p) const;
    bool member_idx(std::uint64_t idx) const { return member(space_->decode(idx)); }
    const Point& center() const { return center_; }
    Box bbox() const { return bbox_; }

    // Exact lattice extent from the center along +/- axis: largest t such
    // that some member has coordinate center[axis] +/- t. Binary search over
    // columns (convexity makes column occupancy monotone), full column scans.
    std::int64_t exact_extent(int axis, int dir) const;

    std::vector<std::uint64_t> all_members() const;

private:
    bool column_occupied(int axis, std::int64_t coord) const;

    const Space* space_;
    Point center_;
    std::vector<double> nx_, ny_, off_;
    Box bbox_;
};

// Random body whose half-plane offsets lie in [ball_steps, 3*ball_steps].
ConvexBody2D random_convex_body_2d(const Space& s, Point center, std::int64_t ball_steps,
                                   Rng& rng);

// Clustering adapter: cells are one ConvexBody2D each plus a shared
// background cell holding every uncovered point. Bodies must be disjoint.
class ConvexBodyClustering : public Clustering {
public:
    ConvexBodyClustering(const Space& s, std::vector<ConvexBody2D> bodies);

    std::uint32_t cell_of(std::uint64_t point_idx) const override;
    std::uint64_t rep_of(std::uint32_t cell) const override;
    std::uint32_t num_cells() const override;  // bodies + 1 background

    const ConvexBody2D& body(std::uint32_t i) const { return bodies_[i]; }
    std::uint32_t background_cell() const { return std::uint32_t(bodies_.size()); }

private:
    const Space* space_;
    std::vector<ConvexBody2D> bodies_;
    std::uint64_t background_rep_;
};

// ---------- Universe membership checkers ----------

bool is_connected_cell(const Space& s, const std::vector<std::uint64_t>& cell);
bool is_box_cell(const Space& s, const std::vector<std::uint64_t>& cell);
// Lattice convexity: the cell equals the lattice points of its convex hull.
bool is_convex_lattice_cell_2d(const Space& s, const std::vector<std::uint64_t>& cell);
// Every lattice point within ball_steps of rep belongs to the cell (checked
// via a membership predicate so it works for implicit cells).
bool has_inner_ball(const Space& s, const Point& rep, std::int64_t ball_steps,
                    const std::function<bool(std::uint64_t)>& member);

// ---------- Distribution families ----------

DiscreteDistribution family_uniform(std::uint64_t n);
// TV from uniform is exactly eps (even n): odd entries 1/n + 2eps/n, even
// entries 1/n - 2eps/n.
DiscreteDistribution family_zigzag(std::int64_t n, double eps);
DiscreteDistribution family_point_mass(std::uint64_t at);
// Moves eps mass from block [0,width) to [width,2*width).
DiscreteDistribution family_block_shift(std::int64_t n, double eps, std::int64_t width);
DiscreteDistribution family_dirichlet(std::uint64_t n, Rng& rng);
// (1-w) uniform over the grid + w at the origin corner; EMD from uniform is
// w times the mean distance to the corner.
DiscreteDistribution family_corner_mass(const Space& s, double w);

}  // namespace cct
