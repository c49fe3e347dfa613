#include "cct/clustering.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

namespace cct {

ExplicitClustering::ExplicitClustering(std::vector<std::uint32_t> cell_map,
                                       std::vector<std::uint64_t> reps)
    : cells_(std::move(cell_map)), reps_(std::move(reps)) {
    members_.resize(reps_.size());
    for (std::uint64_t p = 0; p < cells_.size(); ++p) {
        if (cells_[p] >= reps_.size()) throw std::invalid_argument("cell id out of range");
        members_[cells_[p]].push_back(p);
    }
    for (std::uint32_t c = 0; c < reps_.size(); ++c) {
        if (members_[c].empty()) throw std::invalid_argument("empty cell");
        if (cells_[reps_[c]] != c) throw std::invalid_argument("rep outside its cell");
    }
}

ExplicitClustering ExplicitClustering::materialize(const Space& s, const Clustering& c) {
    const std::uint64_t n = s.size();
    std::vector<std::uint32_t> map(n);
    for (std::uint64_t p = 0; p < n; ++p) map[p] = c.cell_of(p);
    std::vector<std::uint64_t> reps(c.num_cells());
    for (std::uint32_t k = 0; k < c.num_cells(); ++k) reps[k] = c.rep_of(k);
    return ExplicitClustering(std::move(map), std::move(reps));
}

IntervalClustering::IntervalClustering(std::int64_t n, std::vector<std::int64_t> starts,
                                       bool cyclic)
    : n_(n), cyclic_(cyclic), starts_(std::move(starts)) {
    if (starts_.empty() || n <= 0) throw std::invalid_argument("empty clustering");
    if (std::adjacent_find(starts_.begin(), starts_.end(),
                           std::greater_equal<std::int64_t>()) != starts_.end())
        throw std::invalid_argument("starts must be strictly increasing");
    if (!cyclic_ && starts_[0] != 0)
        throw std::invalid_argument("path clustering must start at 0");
    if (starts_[0] < 0 || starts_.back() >= n)
        throw std::invalid_argument("start out of range");
    reps_.resize(starts_.size());
    for (std::uint32_t k = 0; k < starts_.size(); ++k) reps_[k] = std::uint64_t(starts_[k]);
}

IntervalClustering::IntervalClustering(std::int64_t n, std::vector<std::int64_t> starts,
                                       bool cyclic, std::vector<std::uint64_t> reps)
    : IntervalClustering(n, std::move(starts), cyclic) {
    if (reps.size() != starts_.size()) throw std::invalid_argument("rep count mismatch");
    for (std::uint32_t k = 0; k < reps.size(); ++k)
        if (cell_of(reps[k]) != k) throw std::invalid_argument("rep outside its run");
    reps_ = std::move(reps);
}

std::uint32_t IntervalClustering::cell_of(std::uint64_t point_idx) const {
    const auto p = std::int64_t(point_idx);
    if (p < starts_[0]) {
        // Only reachable for cyclic clusterings: the wrapped run.
        return std::uint32_t(starts_.size() - 1);
    }
    auto it = std::upper_bound(starts_.begin(), starts_.end(), p);
    return std::uint32_t(it - starts_.begin() - 1);
}

std::int64_t IntervalClustering::cell_size(std::uint32_t cell) const {
    if (cell + 1 < starts_.size()) return starts_[cell + 1] - starts_[cell];
    if (cyclic_) return n_ - starts_.back() + starts_[0];
    return n_ - starts_.back();
}

VoronoiClustering::VoronoiClustering(const Space& s, std::vector<Point> sites)
    : space_(&s), sites_(std::move(sites)) {
    if (sites_.empty()) throw std::invalid_argument("no sites");
    for (const Point& p : sites_)
        if (!s.in_bounds(p)) throw std::invalid_argument("site out of bounds");
}

std::uint32_t VoronoiClustering::cell_of_point(const Point& x) const {
    std::uint32_t best = 0;
    std::int64_t best_d = l2sq_steps(x, sites_[0], space_->dim());
    for (std::uint32_t k = 1; k < sites_.size(); ++k) {
        const std::int64_t d = l2sq_steps(x, sites_[k], space_->dim());
        if (d < best_d) {
            best = k;
            best_d = d;
        }
    }
    return best;
}

std::uint32_t VoronoiClustering::cell_of(std::uint64_t point_idx) const {
    return cell_of_point(space_->decode(point_idx));
}

std::uint64_t VoronoiClustering::rep_of(std::uint32_t cell) const {
    return space_->encode(sites_[cell]);
}

BoxClustering::BoxClustering(const Space& s, std::vector<Box> boxes)
    : space_(&s), boxes_(std::move(boxes)) {
    reps_.reserve(boxes_.size());
    for (const Box& b : boxes_) {
        Point lo;
        for (int i = 0; i < s.dim(); ++i) lo[i] = std::int32_t(b.lo[std::size_t(i)]);
        reps_.push_back(lo);
    }
}

BoxClustering::BoxClustering(const Space& s, std::vector<Box> boxes, std::vector<Point> reps)
    : space_(&s), boxes_(std::move(boxes)), reps_(std::move(reps)) {
    if (reps_.size() != boxes_.size()) throw std::invalid_argument("rep count mismatch");
    for (std::size_t k = 0; k < boxes_.size(); ++k)
        if (!boxes_[k].contains(reps_[k], space_->dim()))
            throw std::invalid_argument("rep outside its box");
}

std::uint32_t BoxClustering::cell_of(std::uint64_t point_idx) const {
    const Point x = space_->decode(point_idx);
    for (std::uint32_t k = 0; k < boxes_.size(); ++k)
        if (boxes_[k].contains(x, space_->dim())) return k;
    throw std::runtime_error("point not covered by any box");
}

std::uint64_t BoxClustering::rep_of(std::uint32_t cell) const {
    return space_->encode(reps_[cell]);
}

DiscreteDistribution induced_on_reps(const DiscreteDistribution& mu, const Clustering& c) {
    return mu.map_through([&](std::uint64_t x) { return c.collector_output(x); });
}

std::vector<double> cell_diameters(const Space& s, const ExplicitClustering& c) {
    std::vector<double> diams(c.num_cells(), 0.0);
    for (std::uint32_t k = 0; k < c.num_cells(); ++k) {
        const auto& mem = c.members(k);
        double best = 0.0;
        for (std::size_t i = 0; i < mem.size(); ++i)
            for (std::size_t j = i + 1; j < mem.size(); ++j)
                best = std::max(best, s.dist_idx(mem[i], mem[j]));
        diams[k] = best;
    }
    return diams;
}

double expected_cell_diam(const DiscreteDistribution& mu, const Clustering& c,
                          const std::vector<double>& diams) {
    double e = 0.0;
    const auto& idx = mu.support();
    const auto& w = mu.weights();
    for (std::size_t i = 0; i < idx.size(); ++i) e += w[i] * diams[c.cell_of(idx[i])];
    return e;
}

double mass_in_large_cells(const DiscreteDistribution& mu, const Clustering& c,
                           const std::vector<double>& diams, double delta) {
    double m = 0.0;
    const auto& idx = mu.support();
    const auto& w = mu.weights();
    for (std::size_t i = 0; i < idx.size(); ++i)
        if (diams[c.cell_of(idx[i])] > delta) m += w[i];
    return m;
}

}  // namespace cct
