#include "cct/generators.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace cct {

// ---------- Part II draw ----------

RandomClusterDraw draw_random_clustering(bool cycle, std::int64_t n, double rho,
                                         std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("draw_random_clustering: n < 2");
    if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("draw_random_clustering: rho");
    Rng rng(seed);
    const std::int64_t num_edges = cycle ? n : n - 1;
    std::vector<std::uint8_t> kept(static_cast<std::size_t>(num_edges));
    for (auto& e : kept) e = rng.bernoulli(rho) ? 0 : 1;

    // Cells start right after each deleted edge. The path always has a cell
    // at point 0; on the cycle the run containing 0 may wrap, and with no
    // deleted edge at all the whole cycle is a single cell.
    std::vector<std::int64_t> starts;
    if (cycle) {
        for (std::int64_t i = 0; i < n; ++i)
            if (!kept[std::size_t((i + n - 1) % n)]) starts.push_back(i);
        if (starts.empty()) starts.push_back(0);
    } else {
        starts.push_back(0);
        for (std::int64_t i = 1; i < n; ++i)
            if (!kept[std::size_t(i - 1)]) starts.push_back(i);
    }

    IntervalClustering base(n, starts, cycle);
    std::vector<std::uint64_t> reps(base.num_cells());
    for (std::uint32_t c = 0; c < base.num_cells(); ++c) {
        const std::int64_t sz = base.cell_size(c);
        const std::int64_t off = std::int64_t(rng.uniform_u64(std::uint64_t(sz)));
        reps[c] = std::uint64_t((starts[c] + off) % n);
    }
    return RandomClusterDraw{cycle, n, rho, std::move(kept),
                             IntervalClustering(n, std::move(starts), cycle, std::move(reps))};
}

// ---------- Part I generators ----------

IntervalClustering random_interval_partition(std::int64_t n, double cut_prob, Rng& rng) {
    if (n < 1) throw std::invalid_argument("random_interval_partition: n < 1");
    std::vector<std::int64_t> starts{0};
    for (std::int64_t i = 1; i < n; ++i)
        if (rng.bernoulli(cut_prob)) starts.push_back(i);
    return IntervalClustering(n, std::move(starts), /*cyclic=*/false);
}

BoxClustering grid_boxes(const Space& s, std::int64_t boxes_per_axis) {
    if (boxes_per_axis < 1) throw std::invalid_argument("grid_boxes: boxes_per_axis < 1");
    const int d = s.dim();
    const std::int64_t P = s.points_per_axis();
    if (boxes_per_axis > P) throw std::invalid_argument("grid_boxes: more boxes than points");
    const std::int64_t w = P / boxes_per_axis;
    std::int64_t total = 1;
    for (int a = 0; a < d; ++a) total *= boxes_per_axis;
    std::vector<Box> boxes;
    boxes.reserve(std::size_t(total));
    for (std::int64_t i = 0; i < total; ++i) {
        std::int64_t rem = i;
        Box b;
        for (int a = 0; a < d; ++a) {
            const std::int64_t k = rem % boxes_per_axis;
            rem /= boxes_per_axis;
            b.lo[std::size_t(a)] = k * w;
            b.hi[std::size_t(a)] = (k + 1 == boxes_per_axis) ? P - 1 : (k + 1) * w - 1;
        }
        boxes.push_back(b);
    }
    return BoxClustering(s, std::move(boxes));
}

namespace {

void kd_split(const Space& s, Rng& rng, std::int64_t min_pts, double stop_prob, Box b,
              std::vector<Box>& out) {
    const int d = s.dim();
    std::vector<int> splittable;
    for (int a = 0; a < d; ++a)
        if (b.side(a) + 1 >= 2 * min_pts) splittable.push_back(a);
    if (splittable.empty() || rng.bernoulli(stop_prob)) {
        out.push_back(b);
        return;
    }
    const int axis = splittable[std::size_t(rng.uniform_u64(splittable.size()))];
    const std::int64_t pts = b.side(axis) + 1;
    // The left part keeps `cut` points, both parts keep >= min_pts.
    const std::int64_t cut =
        min_pts + std::int64_t(rng.uniform_u64(std::uint64_t(pts - 2 * min_pts + 1)));
    Box left = b, right = b;
    left.hi[std::size_t(axis)] = b.lo[std::size_t(axis)] + cut - 1;
    right.lo[std::size_t(axis)] = b.lo[std::size_t(axis)] + cut;
    kd_split(s, rng, min_pts, stop_prob, left, out);
    kd_split(s, rng, min_pts, stop_prob, right, out);
}

}  // namespace

BoxClustering kd_split_boxes(const Space& s, Rng& rng, std::int64_t min_pts,
                             double stop_prob) {
    if (min_pts < 1) throw std::invalid_argument("kd_split_boxes: min_pts < 1");
    std::vector<Box> out;
    kd_split(s, rng, min_pts, stop_prob, Box::full(s), out);
    return BoxClustering(s, std::move(out));
}

ExplicitClustering region_growing_blobs(const Space& s, std::uint32_t cells, Rng& rng) {
    const std::uint64_t N = s.size();
    if (cells == 0 || cells > N) throw std::invalid_argument("region_growing_blobs: cells");
    std::vector<std::uint32_t> cell_map(N, UINT32_MAX);
    std::vector<std::uint64_t> reps(cells);

    // Distinct random seeds, then randomized frontier growth: pop a random
    // frontier entry and claim one unassigned neighbor. Cells grow from a
    // single seed through adjacent points, so each one is connected.
    std::unordered_set<std::uint64_t> used;
    for (std::uint32_t c = 0; c < cells; ++c) {
        std::uint64_t p;
        do {
            p = rng.uniform_u64(N);
        } while (!used.insert(p).second);
        reps[c] = p;
        cell_map[p] = c;
    }
    std::vector<std::pair<std::uint64_t, std::uint32_t>> frontier;
    for (std::uint32_t c = 0; c < cells; ++c) frontier.emplace_back(reps[c], c);
    const int d = s.dim();
    const std::int64_t P = s.points_per_axis();
    while (!frontier.empty()) {
        const std::size_t pick = std::size_t(rng.uniform_u64(frontier.size()));
        const auto [idx, c] = frontier[pick];
        const Point p = s.decode(idx);
        bool expanded = false;
        for (int a = 0; a < d && !expanded; ++a) {
            for (int dir : {-1, 1}) {
                const std::int64_t v = std::int64_t(p[a]) + dir;
                if (v < 0 || v >= P) continue;
                Point q = p;
                q[a] = std::int32_t(v);
                const std::uint64_t qi = s.encode(q);
                if (cell_map[qi] == UINT32_MAX) {
                    cell_map[qi] = c;
                    frontier.emplace_back(qi, c);
                    expanded = true;
                    break;
                }
            }
        }
        if (!expanded) {
            frontier[pick] = frontier.back();
            frontier.pop_back();
        }
    }
    return ExplicitClustering(std::move(cell_map), std::move(reps));
}

std::vector<Point> separated_sites(const Space& s, std::uint32_t count,
                                   std::int64_t min_sep_steps, Rng& rng) {
    const std::uint64_t N = s.size();
    std::vector<Point> sites;
    const std::int64_t sep2 = min_sep_steps * min_sep_steps;
    int tries = 0;
    while (sites.size() < count) {
        if (++tries > 200000)
            throw std::runtime_error(
                "separated_sites: could not place sites; lower count or separation");
        Point p = s.decode(rng.uniform_u64(N));
        bool ok = true;
        for (const Point& q : sites)
            if (l2sq_steps(p, q, s.dim()) < sep2) {
                ok = false;
                break;
            }
        if (ok) sites.push_back(p);
    }
    return sites;
}

VoronoiClustering convex_voronoi_partition_2d(const Space& s, std::uint32_t cells, Rng& rng) {
    if (s.dim() != 2) throw std::invalid_argument("convex_voronoi_partition_2d: d != 2");
    for (int attempt = 0; attempt < 500; ++attempt) {
        // Mild separation keeps cells fat enough to usually pass both checks.
        const std::int64_t sep = std::max<std::int64_t>(
            1, std::int64_t(double(s.points_per_axis()) / (2.0 * std::sqrt(double(cells)))));
        std::vector<Point> sites;
        try {
            sites = separated_sites(s, cells, sep, rng);
        } catch (const std::runtime_error&) {
            continue;
        }
        VoronoiClustering v(s, sites);
        std::vector<std::vector<std::uint64_t>> members(cells);
        for (std::uint64_t i = 0; i < s.size(); ++i)
            members[v.cell_of(i)].push_back(i);
        bool ok = true;
        for (std::uint32_t c = 0; c < cells && ok; ++c)
            ok = !members[c].empty() && is_connected_cell(s, members[c]) &&
                 is_convex_lattice_cell_2d(s, members[c]);
        if (ok) return v;
    }
    throw std::runtime_error("convex_voronoi_partition_2d: no valid partition found");
}

// ---------- ConvexBody2D ----------

ConvexBody2D::ConvexBody2D(const Space& s, Point center, std::vector<double> nx,
                           std::vector<double> ny, std::vector<double> off_steps)
    : space_(&s),
      center_(center),
      nx_(std::move(nx)),
      ny_(std::move(ny)),
      off_(std::move(off_steps)) {
    if (s.dim() != 2) throw std::invalid_argument("ConvexBody2D: d != 2");
    if (nx_.size() != ny_.size() || nx_.size() != off_.size() || off_.empty())
        throw std::invalid_argument("ConvexBody2D: half-plane arrays mismatch");
    // Axis-aligned half-planes are required so the bounding box is known
    // exactly; locate the +/- x and +/- y offsets.
    const std::int64_t P = s.points_per_axis();
    double xp = -1, xm = -1, yp = -1, ym = -1;
    for (std::size_t k = 0; k < nx_.size(); ++k) {
        if (std::abs(nx_[k] - 1.0) < 1e-12 && std::abs(ny_[k]) < 1e-12) xp = off_[k];
        if (std::abs(nx_[k] + 1.0) < 1e-12 && std::abs(ny_[k]) < 1e-12) xm = off_[k];
        if (std::abs(ny_[k] - 1.0) < 1e-12 && std::abs(nx_[k]) < 1e-12) yp = off_[k];
        if (std::abs(ny_[k] + 1.0) < 1e-12 && std::abs(nx_[k]) < 1e-12) ym = off_[k];
    }
    if (xp < 0 || xm < 0 || yp < 0 || ym < 0)
        throw std::invalid_argument("ConvexBody2D: need all four axis half-planes");
    bbox_.lo[0] = std::max<std::int64_t>(0, center_[0] - std::int64_t(std::floor(xm)));
    bbox_.lo[1] = std::max<std::int64_t>(0, center_[1] - std::int64_t(std::floor(ym)));
    bbox_.hi[0] = std::min<std::int64_t>(P - 1, center_[0] + std::int64_t(std::floor(xp)));
    bbox_.hi[1] = std::min<std::int64_t>(P - 1, center_[1] + std::int64_t(std::floor(yp)));
}

bool ConvexBody2D::member(const Point& p) const {
    if (!space_->in_bounds(p)) return false;
    const double dx = double(p[0]) - double(center_[0]);
    const double dy = double(p[1]) - double(center_[1]);
    for (std::size_t k = 0; k < nx_.size(); ++k)
        if (nx_[k] * dx + ny_[k] * dy > off_[k]) return false;
    return true;
}

bool ConvexBody2D::column_occupied(int axis, std::int64_t coord) const {
    Point p{};
    p[axis] = std::int32_t(coord);
    const int other = 1 - axis;
    for (std::int64_t v = bbox_.lo[std::size_t(other)]; v <= bbox_.hi[std::size_t(other)]; ++v) {
        p[other] = std::int32_t(v);
        if (member(p)) return true;
    }
    return false;
}

std::int64_t ConvexBody2D::exact_extent(int axis, int dir) const {
    // Occupancy of the column at center+t*dir is monotone in t (the body is
    // convex and contains its center), so binary search for the last
    // occupied column inside the bbox.
    const std::int64_t c0 = center_[axis];
    std::int64_t lo = 0;
    std::int64_t hi = dir > 0 ? bbox_.hi[std::size_t(axis)] - c0 : c0 - bbox_.lo[std::size_t(axis)];
    while (lo < hi) {
        const std::int64_t mid = lo + (hi - lo + 1) / 2;
        if (column_occupied(axis, c0 + dir * mid))
            lo = mid;
        else
            hi = mid - 1;
    }
    return lo;
}

std::vector<std::uint64_t> ConvexBody2D::all_members() const {
    std::vector<std::uint64_t> out;
    Point p{};
    for (std::int64_t x = bbox_.lo[0]; x <= bbox_.hi[0]; ++x)
        for (std::int64_t y = bbox_.lo[1]; y <= bbox_.hi[1]; ++y) {
            p[0] = std::int32_t(x);
            p[1] = std::int32_t(y);
            if (member(p)) out.push_back(space_->encode(p));
        }
    return out;
}

ConvexBody2D random_convex_body_2d(const Space& s, Point center, std::int64_t ball_steps,
                                   Rng& rng) {
    std::vector<double> nx, ny, off;
    // Four axis half-planes plus a few random directions; every offset is at
    // least ball_steps so the inner ball survives.
    auto push = [&](double x, double y) {
        nx.push_back(x);
        ny.push_back(y);
        off.push_back(double(ball_steps) * (1.0 + 2.0 * rng.uniform()));
    };
    push(1, 0);
    push(-1, 0);
    push(0, 1);
    push(0, -1);
    const int extra = 2 + int(rng.uniform_u64(5));
    for (int k = 0; k < extra; ++k) {
        const double th = 2.0 * 3.14159265358979323846 * rng.uniform();
        push(std::cos(th), std::sin(th));
    }
    return ConvexBody2D(s, center, std::move(nx), std::move(ny), std::move(off));
}

// ---------- ConvexBodyClustering ----------

ConvexBodyClustering::ConvexBodyClustering(const Space& s, std::vector<ConvexBody2D> bodies)
    : space_(&s), bodies_(std::move(bodies)) {
    if (bodies_.empty()) throw std::invalid_argument("ConvexBodyClustering: no bodies");
    bool found = false;
    for (std::uint64_t i = 0; i < s.size() && !found; ++i) {
        if (cell_of(i) == background_cell()) {
            background_rep_ = i;
            found = true;
        }
    }
    if (!found) throw std::invalid_argument("ConvexBodyClustering: bodies cover the domain");
}

std::uint32_t ConvexBodyClustering::cell_of(std::uint64_t point_idx) const {
    const Point p = space_->decode(point_idx);
    for (std::uint32_t i = 0; i < bodies_.size(); ++i)
        if (bodies_[i].member(p)) return i;
    return background_cell();
}

std::uint64_t ConvexBodyClustering::rep_of(std::uint32_t cell) const {
    if (cell < bodies_.size()) return space_->encode(bodies_[cell].center());
    return background_rep_;
}

std::uint32_t ConvexBodyClustering::num_cells() const {
    return std::uint32_t(bodies_.size()) + 1;
}

// ---------- checkers ----------

bool is_connected_cell(const Space& s, const std::vector<std::uint64_t>& cell) {
    if (cell.empty()) return false;
    std::unordered_set<std::uint64_t> in(cell.begin(), cell.end());
    std::deque<std::uint64_t> queue{cell.front()};
    std::unordered_set<std::uint64_t> seen{cell.front()};
    const int d = s.dim();
    const std::int64_t P = s.points_per_axis();
    while (!queue.empty()) {
        const Point p = s.decode(queue.front());
        queue.pop_front();
        for (int a = 0; a < d; ++a)
            for (int dir : {-1, 1}) {
                const std::int64_t v = std::int64_t(p[a]) + dir;
                if (v < 0 || v >= P) continue;
                Point q = p;
                q[a] = std::int32_t(v);
                const std::uint64_t qi = s.encode(q);
                if (in.count(qi) && seen.insert(qi).second) queue.push_back(qi);
            }
    }
    return seen.size() == in.size();
}

bool is_box_cell(const Space& s, const std::vector<std::uint64_t>& cell) {
    if (cell.empty()) return false;
    const int d = s.dim();
    Box b = Box::of_point(s.decode(cell.front()), d);
    std::unordered_set<std::uint64_t> in;
    for (std::uint64_t idx : cell) {
        b.expand_to(s.decode(idx), d);
        in.insert(idx);
    }
    return in.size() == cell.size() && b.num_points(d) == cell.size();
}

namespace {

// Andrew monotone chain on integer points; returns the hull CCW without
// repeating the first point. Collinear boundary points are dropped.
std::vector<std::array<std::int64_t, 2>> convex_hull(
    std::vector<std::array<std::int64_t, 2>> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const std::size_t n = pts.size();
    if (n <= 2) return pts;
    auto cross = [](const std::array<std::int64_t, 2>& o, const std::array<std::int64_t, 2>& a,
                    const std::array<std::int64_t, 2>& b) {
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    std::vector<std::array<std::int64_t, 2>> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = n - 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

bool inside_hull(const std::vector<std::array<std::int64_t, 2>>& hull,
                 const std::array<std::int64_t, 2>& p) {
    const std::size_t n = hull.size();
    auto cross = [](const std::array<std::int64_t, 2>& o, const std::array<std::int64_t, 2>& a,
                    const std::array<std::int64_t, 2>& b) {
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    if (n == 1) return p == hull[0];
    if (n == 2) {
        if (cross(hull[0], hull[1], p) != 0) return false;
        return std::min(hull[0][0], hull[1][0]) <= p[0] &&
               p[0] <= std::max(hull[0][0], hull[1][0]) &&
               std::min(hull[0][1], hull[1][1]) <= p[1] &&
               p[1] <= std::max(hull[0][1], hull[1][1]);
    }
    for (std::size_t i = 0; i < n; ++i)
        if (cross(hull[i], hull[(i + 1) % n], p) < 0) return false;
    return true;
}

}  // namespace

bool is_convex_lattice_cell_2d(const Space& s, const std::vector<std::uint64_t>& cell) {
    if (s.dim() != 2) throw std::invalid_argument("is_convex_lattice_cell_2d: d != 2");
    if (cell.empty()) return false;
    std::vector<std::array<std::int64_t, 2>> pts;
    std::unordered_set<std::uint64_t> in;
    const int d = s.dim();
    Box b = Box::of_point(s.decode(cell.front()), d);
    for (std::uint64_t idx : cell) {
        const Point p = s.decode(idx);
        pts.push_back({std::int64_t(p[0]), std::int64_t(p[1])});
        in.insert(idx);
        b.expand_to(p, d);
    }
    const auto hull = convex_hull(pts);
    // Every bbox lattice point inside the hull must be a member.
    Point p{};
    for (std::int64_t x = b.lo[0]; x <= b.hi[0]; ++x)
        for (std::int64_t y = b.lo[1]; y <= b.hi[1]; ++y) {
            if (!inside_hull(hull, {x, y})) continue;
            p[0] = std::int32_t(x);
            p[1] = std::int32_t(y);
            if (!in.count(s.encode(p))) return false;
        }
    return true;
}

bool has_inner_ball(const Space& s, const Point& rep, std::int64_t ball_steps,
                    const std::function<bool(std::uint64_t)>& member) {
    const int d = s.dim();
    const std::int64_t P = s.points_per_axis();
    const std::int64_t r2 = ball_steps * ball_steps;
    std::vector<std::int64_t> lo(static_cast<std::size_t>(d));
    std::vector<std::int64_t> hi(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) {
        lo[std::size_t(a)] = std::max<std::int64_t>(0, rep[a] - ball_steps);
        hi[std::size_t(a)] = std::min<std::int64_t>(P - 1, rep[a] + ball_steps);
    }
    Point p{};
    std::function<bool(int)> rec = [&](int axis) -> bool {
        if (axis == d) {
            if (l2sq_steps(p, rep, d) > r2) return true;
            return member(s.encode(p));
        }
        for (std::int64_t v = lo[std::size_t(axis)]; v <= hi[std::size_t(axis)]; ++v) {
            p[axis] = std::int32_t(v);
            if (!rec(axis + 1)) return false;
        }
        return true;
    };
    return rec(0);
}

// ---------- distribution families ----------

DiscreteDistribution family_uniform(std::uint64_t n) { return DiscreteDistribution::uniform(n); }

DiscreteDistribution family_zigzag(std::int64_t n, double eps) {
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("family_zigzag: need even n >= 2");
    if (eps < 0.0 || eps > 0.5) throw std::invalid_argument("family_zigzag: eps outside [0, 1/2]");
    const double base = 1.0 / double(n);
    const double amp = 2.0 * eps / double(n);
    std::vector<double> w(static_cast<std::size_t>(n));
    for (std::int64_t j = 0; j < n; ++j)
        w[std::size_t(j)] = base + ((j % 2 == 1) ? amp : -amp);
    return DiscreteDistribution::from_weights(w);
}

DiscreteDistribution family_point_mass(std::uint64_t at) {
    return DiscreteDistribution::point_mass(at);
}

DiscreteDistribution family_block_shift(std::int64_t n, double eps, std::int64_t width) {
    if (width < 1 || 2 * width > n) throw std::invalid_argument("family_block_shift: width");
    const double base = 1.0 / double(n);
    const double delta = eps / double(width);
    if (delta > base) throw std::invalid_argument("family_block_shift: eps too large for width");
    std::vector<double> w(std::size_t(n), base);
    for (std::int64_t j = 0; j < width; ++j) {
        w[std::size_t(j)] -= delta;
        w[std::size_t(width + j)] += delta;
    }
    return DiscreteDistribution::from_weights(w);
}

DiscreteDistribution family_dirichlet(std::uint64_t n, Rng& rng) {
    std::vector<double> w(n);
    for (auto& x : w) x = -std::log(1.0 - rng.uniform());
    return DiscreteDistribution::from_weights(w);
}

DiscreteDistribution family_corner_mass(const Space& s, double w) {
    if (w < 0.0 || w > 1.0) throw std::invalid_argument("family_corner_mass: weight");
    const std::uint64_t N = s.size();
    std::vector<std::pair<std::uint64_t, double>> pairs;
    pairs.reserve(N);
    const double base = (1.0 - w) / double(N);
    for (std::uint64_t i = 0; i < N; ++i) pairs.emplace_back(i, base);
    pairs[0].second += w;
    return DiscreteDistribution::from_pairs(std::move(pairs));
}

}  // namespace cct
