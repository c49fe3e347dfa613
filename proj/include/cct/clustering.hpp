#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "cct/distribution.hpp"
#include "cct/domain.hpp"

namespace cct {

// Partition of the domain into cells, each with a representative point.
// The confused collector reports rep_of(cell_of(x)) instead of x.
class Clustering {
public:
    virtual ~Clustering() = default;
    virtual std::uint32_t cell_of(std::uint64_t point_idx) const = 0;
    virtual std::uint64_t rep_of(std::uint32_t cell) const = 0;
    virtual std::uint32_t num_cells() const = 0;

    std::uint64_t collector_output(std::uint64_t x) const { return rep_of(cell_of(x)); }
    bool same_cell(std::uint64_t x, std::uint64_t y) const { return cell_of(x) == cell_of(y); }
};

// Cell map materialized as one entry per domain point. Only for domains
// small enough to enumerate.
class ExplicitClustering : public Clustering {
public:
    ExplicitClustering(std::vector<std::uint32_t> cell_map, std::vector<std::uint64_t> reps);
    // Materializes any clustering over the whole domain.
    static ExplicitClustering materialize(const Space& s, const Clustering& c);

    std::uint32_t cell_of(std::uint64_t point_idx) const override {
        return cells_[point_idx];
    }
    std::uint64_t rep_of(std::uint32_t cell) const override { return reps_[cell]; }
    std::uint32_t num_cells() const override { return std::uint32_t(reps_.size()); }

    const std::vector<std::uint64_t>& members(std::uint32_t cell) const {
        return members_[cell];
    }

private:
    std::vector<std::uint32_t> cells_;
    std::vector<std::uint64_t> reps_;
    std::vector<std::vector<std::uint64_t>> members_;
};

// Partition of [n] (or the cycle on n points) into contiguous runs. The
// default rep of a run is its first element. For the cycle, the run
// starting at starts.back() may wrap around through point 0.
class IntervalClustering : public Clustering {
public:
    // starts = sorted first elements of each run; starts[0] == 0 for a path.
    IntervalClustering(std::int64_t n, std::vector<std::int64_t> starts, bool cyclic);
    // Same, with explicit reps (one per run, each inside its run).
    IntervalClustering(std::int64_t n, std::vector<std::int64_t> starts, bool cyclic,
                       std::vector<std::uint64_t> reps);

    std::uint32_t cell_of(std::uint64_t point_idx) const override;
    std::uint64_t rep_of(std::uint32_t cell) const override { return reps_[cell]; }
    std::uint32_t num_cells() const override { return std::uint32_t(starts_.size()); }

    std::int64_t n() const { return n_; }
    bool cyclic() const { return cyclic_; }
    const std::vector<std::int64_t>& starts() const { return starts_; }
    // Number of points in the cell.
    std::int64_t cell_size(std::uint32_t cell) const;

private:
    std::int64_t n_ = 0;
    bool cyclic_ = false;
    std::vector<std::int64_t> starts_;
    std::vector<std::uint64_t> reps_;
};

// Cells are the Voronoi regions of lattice sites under the squared
// Euclidean distance, ties to the lowest site index. Sites are the reps.
class VoronoiClustering : public Clustering {
public:
    VoronoiClustering(const Space& s, std::vector<Point> sites);

    std::uint32_t cell_of(std::uint64_t point_idx) const override;
    std::uint64_t rep_of(std::uint32_t cell) const override;
    std::uint32_t num_cells() const override { return std::uint32_t(sites_.size()); }

    const std::vector<Point>& sites() const { return sites_; }
    std::uint32_t cell_of_point(const Point& x) const;

private:
    const Space* space_;
    std::vector<Point> sites_;
};

// Cells are disjoint axis-aligned boxes covering the domain.
class BoxClustering : public Clustering {
public:
    // reps default to the lo corner (lexicographically smallest point).
    BoxClustering(const Space& s, std::vector<Box> boxes);
    BoxClustering(const Space& s, std::vector<Box> boxes, std::vector<Point> reps);

    std::uint32_t cell_of(std::uint64_t point_idx) const override;
    std::uint64_t rep_of(std::uint32_t cell) const override;
    std::uint32_t num_cells() const override { return std::uint32_t(boxes_.size()); }

    const std::vector<Box>& boxes() const { return boxes_; }
    const Box& box(std::uint32_t cell) const { return boxes_[cell]; }

private:
    const Space* space_;
    std::vector<Box> boxes_;
    std::vector<Point> reps_;
};

// Distribution of the collector's output rep(cell(x)), x ~ mu.
DiscreteDistribution induced_on_reps(const DiscreteDistribution& mu, const Clustering& c);

// Exact cell diameters by farthest-pair search over the member lists.
std::vector<double> cell_diameters(const Space& s, const ExplicitClustering& c);

// E_{x~mu}[diam of x's cell], given per-cell diameters.
double expected_cell_diam(const DiscreteDistribution& mu, const Clustering& c,
                          const std::vector<double>& diams);

// Pr_{x~mu}[diam of x's cell > delta].
double mass_in_large_cells(const DiscreteDistribution& mu, const Clustering& c,
                           const std::vector<double>& diams, double delta);

}  // namespace cct
