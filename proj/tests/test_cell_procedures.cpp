#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "cct/cell_procedures.hpp"
#include "cct/clustering.hpp"
#include "cct/domain.hpp"
#include "cct/oracle.hpp"
#include "cct/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

namespace {

using namespace cct;
using cct::testing::ConvexBody2D;
using cct::testing::PredicateClustering;

Point pt(std::int64_t x, std::int64_t y = 0) {
    Point p;
    p[0] = std::int32_t(x);
    p[1] = std::int32_t(y);
    return p;
}

Box box2(std::int64_t lx, std::int64_t ly, std::int64_t hx, std::int64_t hy) {
    Box b;
    b.lo[0] = lx;
    b.lo[1] = ly;
    b.hi[0] = hx;
    b.hi[1] = hy;
    return b;
}

std::vector<std::uint64_t> container_points(const Space& sp, const Container& c) {
    if (!c.is_box()) return c.points();
    std::vector<std::uint64_t> out;
    const Box& b = c.box();
    Point p;
    for (std::int64_t y = b.lo[1]; y <= b.hi[1]; ++y)
        for (std::int64_t x = b.lo[0]; x <= b.hi[0]; ++x) {
            p = pt(x, y);
            out.push_back(sp.encode(p));
        }
    std::sort(out.begin(), out.end());
    return out;
}

// Every domain point satisfying the predicate, sorted. Only for small spaces.
template <typename Pred>
std::vector<std::uint64_t> points_where(const Space& sp, Pred pred) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t i = 0; i < sp.size(); ++i)
        if (pred(i)) out.push_back(i);
    return out;
}

std::uint64_t first_outside(const Space& sp, const std::vector<std::uint64_t>& cell) {
    std::unordered_set<std::uint64_t> in(cell.begin(), cell.end());
    for (std::uint64_t i = 0; i < sp.size(); ++i)
        if (!in.count(i)) return i;
    throw std::logic_error("cell covers the whole domain");
}

// Exact farthest-pair distance of a point set, via its hull.
double exact_diam(const Space& sp, const std::vector<std::uint64_t>& pts) {
    std::vector<Point> ps;
    ps.reserve(pts.size());
    for (auto i : pts) ps.push_back(sp.decode(i));
    auto h = cct::testing::hull2d(std::move(ps));
    double best = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i)
        for (std::size_t j = i + 1; j < h.size(); ++j)
            best = std::max(best, sp.dist(h[i], h[j]));
    return best;
}

void kd_split(Rng& rng, const Box& b, int depth, std::vector<Box>& out) {
    std::vector<int> axes;
    for (int ax = 0; ax < 2; ++ax)
        if (b.side(ax) >= 1) axes.push_back(ax);
    if (depth == 0 || axes.empty() || rng.bernoulli(0.3)) {
        out.push_back(b);
        return;
    }
    const int ax = axes[std::size_t(rng.uniform_u64(axes.size()))];
    const std::int64_t cut = rng.uniform_int(b.lo[std::size_t(ax)], b.hi[std::size_t(ax)] - 1);
    Box l = b, r = b;
    l.hi[std::size_t(ax)] = cut;
    r.lo[std::size_t(ax)] = cut + 1;
    kd_split(rng, l, depth - 1, out);
    kd_split(rng, r, depth - 1, out);
}

}  // namespace

TEST_CASE("interval discovery recovers pinned cells") {
    auto sp = Space::lp_grid(1, 10, 2.0);
    {
        IntervalClustering g(10, {0, 5}, false, {2, 7});
        OracleSession s(sp, g, {}, 1);
        auto r = discover_interval_cell(s, 2);
        REQUIRE(r.outcome == DiscoveryOutcome::container);
        REQUIRE(r.container.is_box());
        CHECK(r.container.box().lo[0] == 0);
        CHECK(r.container.box().hi[0] == 4);
    }
    {
        IntervalClustering g(10, {0, 7, 8}, false);
        OracleSession s(sp, g, {}, 1);
        auto r = discover_interval_cell(s, 7);
        REQUIRE(r.outcome == DiscoveryOutcome::container);
        CHECK(r.container.box().lo[0] == 7);
        CHECK(r.container.box().hi[0] == 7);
    }
}

TEST_CASE("interval discovery is exact on random clusterings within the query cap") {
    auto sp = Space::lp_grid(1, 64, 2.0);
    Rng rng(7701);
    for (int t = 0; t < 200; ++t) {
        std::vector<std::int64_t> starts{0};
        for (std::int64_t i = 1; i < 64; ++i)
            if (rng.bernoulli(0.15)) starts.push_back(i);
        std::vector<std::uint64_t> reps;
        std::vector<std::int64_t> ends;
        for (std::size_t c = 0; c < starts.size(); ++c) {
            const std::int64_t lo = starts[c];
            const std::int64_t hi = (c + 1 < starts.size() ? starts[c + 1] : 64) - 1;
            reps.push_back(std::uint64_t(rng.uniform_int(lo, hi)));
            ends.push_back(hi);
        }
        IntervalClustering g(64, starts, false, reps);
        const auto c = std::uint32_t(rng.uniform_u64(starts.size()));
        OracleSession s(sp, g, {}, Rng::derive(3, std::uint64_t(t)));
        auto r = discover_interval_cell(s, reps[c]);
        REQUIRE(r.outcome == DiscoveryOutcome::container);
        REQUIRE(r.container.is_box());
        CHECK(r.container.box().lo[0] == starts[c]);
        CHECK(r.container.box().hi[0] == ends[c]);
        CHECK(r.queries_used <= 14);  // 2 ceil(log2 64) + 2
        CHECK(r.queries_used == s.label_count());
    }
}

TEST_CASE("box discovery recovers a grid of box cells") {
    auto sp = Space::lp_grid(2, 16, 2.0);
    std::vector<Box> boxes;
    for (std::int64_t bx = 0; bx < 4; ++bx)
        for (std::int64_t by = 0; by < 4; ++by)
            boxes.push_back(box2(4 * bx, 4 * by, 4 * bx + 3, 4 * by + 3));
    BoxClustering g(sp, boxes);  // reps at the lo corners
    for (std::uint32_t c : {0u, 5u, 15u}) {
        OracleSession s(sp, g, {}, 1);
        auto r = discover_box_cell(s, g.rep_of(c));
        REQUIRE(r.outcome == DiscoveryOutcome::container);
        REQUIRE(r.container.is_box());
        CHECK(r.container.box() == boxes[c]);
        CHECK(r.queries_used <= 2 * 2 * 4 + 2 * 2);
    }

    // one box covering everything
    BoxClustering whole(sp, {Box::full(sp)});
    OracleSession s(sp, whole, {}, 1);
    auto r = discover_box_cell(s, whole.rep_of(0));
    REQUIRE(r.outcome == DiscoveryOutcome::container);
    CHECK(r.container.box() == Box::full(sp));
}

TEST_CASE("box discovery is exact on random axis-aligned partitions") {
    auto sp = Space::lp_grid(2, 32, 2.0);
    Rng rng(5150);
    for (int t = 0; t < 100; ++t) {
        std::vector<Box> boxes;
        kd_split(rng, Box::full(sp), 6, boxes);
        std::vector<Point> reps;
        for (const Box& b : boxes) reps.push_back(b.sample(rng, 2));
        BoxClustering g(sp, boxes, reps);
        const auto c = std::uint32_t(rng.uniform_u64(boxes.size()));
        OracleSession s(sp, g, {}, Rng::derive(4, std::uint64_t(t)));
        auto r = discover_box_cell(s, g.rep_of(c));
        REQUIRE(r.outcome == DiscoveryOutcome::container);
        REQUIRE(r.container.is_box());
        CHECK(r.container.box() == boxes[c]);
        CHECK(r.queries_used <= 2 * 2 * 5 + 2 * 2);  // 2d ceil(log2 32) + 2d
    }
}

TEST_CASE("connected-cell shell test: singleton accepts, spanning row rejects") {
    {
        auto sp = Space::lp_grid(2, 32, 2.0);
        const auto hidx = sp.encode(pt(16, 16));
        PredicateClustering g([hidx](std::uint64_t i) { return i == hidx; }, hidx, 0);
        OracleSession s(sp, g, {}, 1);
        auto v = reject_connected_cell(s, hidx, 0.1, 0.5);
        CHECK(v.outcome == RejectOutcome::accept);
        // the whole ell-inf sphere of radius k = ceil(0.5 * 31 / 2) = 8 is
        // probed: (2k+1)^2 - (2k-1)^2 = 8k = 64 points, all in bounds here
        CHECK(v.queries_used == 64);
    }
    {
        auto sp = Space::lp_grid(2, 32, std::numeric_limits<double>::infinity());
        const auto hidx = sp.encode(pt(16, 16));
        PredicateClustering g([&sp](std::uint64_t i) { return sp.decode(i)[1] == 16; },
                              hidx, 0);
        OracleSession s(sp, g, {}, 1);
        // the full row has ell-inf diameter 1
        auto v = reject_connected_cell(s, hidx, 0.2, 0.5);
        CHECK(v.outcome == RejectOutcome::reject);
        CHECK(v.queries_used <= 64);
    }
    {
        // precondition: the shell only works when eps2 > 2 d^{1/p} eps1
        auto sp = Space::lp_grid(2, 32, 2.0);
        const auto hidx = sp.encode(pt(16, 16));
        PredicateClustering g([hidx](std::uint64_t i) { return i == hidx; }, hidx, 0);
        OracleSession s(sp, g, {}, 1);
        CHECK_THROWS_AS(reject_connected_cell(s, hidx, 0.2, 0.5), std::invalid_argument);
    }
}

TEST_CASE("connected-cell shell test separates small cells from stretched ones") {
    auto sp = Space::lp_grid(2, 32, 2.0);
    Rng rng(4402);
    const double eps1 = 0.1, eps2 = 0.5;
    for (int t = 0; t < 200; ++t) {
        const bool small = t % 2 == 0;
        std::vector<std::uint64_t> cell;
        if (small) {
            const Point c = pt(rng.uniform_int(2, 29), rng.uniform_int(2, 29));
            cell = cct::testing::random_blob(rng, sp, c, 1, 25);
            REQUIRE(exact_diam(sp, cell) <= eps1);
        } else {
            std::int64_t dx = 0, dy = 0;
            switch (rng.uniform_int(0, 2)) {
                case 0: dx = rng.uniform_int(22, 28); break;
                case 1: dy = rng.uniform_int(22, 28); break;
                default:
                    dx = rng.uniform_int(16, 20);
                    dy = rng.uniform_int(16, 20);
            }
            const Point a = pt(rng.uniform_int(0, 31 - dx), rng.uniform_int(0, 31 - dy));
            const Point b = pt(a[0] + dx, a[1] + dy);
            REQUIRE(sp.dist(a, b) >= eps2);
            cell = cct::testing::staircase_path(sp, a, b);
        }
        const std::uint64_t h = cell[rng.uniform_u64(cell.size())];
        std::unordered_set<std::uint64_t> in(cell.begin(), cell.end());
        PredicateClustering g([in](std::uint64_t i) { return in.count(i) > 0; }, h,
                              first_outside(sp, cell));
        OracleSession s(sp, g, {}, Rng::derive(5, std::uint64_t(t)));
        auto v = reject_connected_cell(s, h, eps1, eps2);
        CHECK(v.outcome == (small ? RejectOutcome::accept : RejectOutcome::reject));
    }
}

TEST_CASE("connected-cell shell test query count matches the sphere size") {
    auto sp = Space::lp_grid(2, 32, 2.0);
    const auto hidx = sp.encode(pt(16, 16));
    PredicateClustering g([hidx](std::uint64_t i) { return i == hidx; }, hidx, 0);
    OracleSession s(sp, g, {}, 1);
    // k = ceil(0.25 * 31 / 2) = 4, so the sphere has 8k = 32 points
    auto v = reject_connected_cell(s, hidx, 0.05, 0.25);
    CHECK(v.outcome == RejectOutcome::accept);
    CHECK(v.queries_used == 32);
}

TEST_CASE("convex grid cell discovery recovers pinned shapes exactly") {
    auto sp = Space::lp_grid(2, 48, 2.0);
    {
        // 2 x 3 axis-aligned rectangle
        const Box cell = box2(20, 20, 21, 22);
        const auto hidx = sp.encode(pt(20, 21));
        PredicateClustering g(
            [&sp, cell](std::uint64_t i) { return cell.contains(sp.decode(i), 2); }, hidx, 0);
        OracleSession s(sp, g, {}, 9);
        auto r = discover_convex_grid_cell_2d(s, hidx);
        REQUIRE(r.outcome == DiscoveryOutcome::container);
        auto want = points_where(sp, [&](std::uint64_t i) { return cell.contains(sp.decode(i), 2); });
        CHECK(container_points(sp, r.container) == want);
    }
    {
        // ell-1 ball of radius 3
        const Point c = pt(24, 24);
        const auto hidx = sp.encode(c);
        PredicateClustering g(
            [&sp, c](std::uint64_t i) { return l1_steps(sp.decode(i), c, 2) <= 3; }, hidx, 0);
        OracleSession s(sp, g, {}, 9);
        auto r = discover_convex_grid_cell_2d(s, hidx);
        REQUIRE(r.outcome == DiscoveryOutcome::container);
        auto want = points_where(sp, [&](std::uint64_t i) { return l1_steps(sp.decode(i), c, 2) <= 3; });
        REQUIRE(want.size() == 25);
        CHECK(container_points(sp, r.container) == want);
    }
    {
        // rectangle hugging the domain corner
        const Box cell = box2(0, 0, 3, 1);
        const auto hidx = sp.encode(pt(0, 0));
        PredicateClustering g(
            [&sp, cell](std::uint64_t i) { return cell.contains(sp.decode(i), 2); }, hidx,
            sp.encode(pt(47, 47)));
        OracleSession s(sp, g, {}, 9);
        auto r = discover_convex_grid_cell_2d(s, hidx);
        REQUIRE(r.outcome == DiscoveryOutcome::container);
        auto want = points_where(sp, [&](std::uint64_t i) { return cell.contains(sp.decode(i), 2); });
        CHECK(container_points(sp, r.container) == want);
    }
}

TEST_CASE("convex grid cell discovery is exact on random convex cells") {
    auto sp = Space::lp_grid(2, 48, 2.0);
    Rng rng(3311);
    double fitted = 0.0;
    for (int t = 0; t < 50; ++t) {
        const Point c = pt(rng.uniform_int(12, 35), rng.uniform_int(12, 35));
        auto body = cct::testing::random_convex_body(rng, sp, c, 5, 6, 18);
        const auto hidx = sp.encode(c);
        PredicateClustering g(
            [&sp, body](std::uint64_t i) { return body.contains(sp.decode(i)); }, hidx, 0);
        OracleSession s(sp, g, {}, Rng::derive(6, std::uint64_t(t)));
        auto r = discover_convex_grid_cell_2d(s, hidx);
        REQUIRE(r.outcome == DiscoveryOutcome::container);
        auto want = points_where(sp, [&](std::uint64_t i) { return body.contains(sp.decode(i)); });
        CHECK(container_points(sp, r.container) == want);
        fitted = std::max(fitted, double(r.queries_used) / double(sp.points_per_axis()));
    }
    // the walk is linear in the grid side; the fitted constant tracks it
    MESSAGE("convex discovery fitted query constant: ", fitted, " * n");
    CHECK(fitted <= 60.0);
}

TEST_CASE("box-vs-convex rejection on box cells: exact verdicts, never bot") {
    auto sp = Space::lp_grid(2, 64, 2.0);
    Rng rng(6603);
    const double t1 = 0.2, t2 = 0.5;
    for (int t = 0; t < 60; ++t) {
        const std::int64_t sx = rng.uniform_int(0, 45), sy = rng.uniform_int(0, 45);
        const std::int64_t lx = rng.uniform_int(0, 63 - sx), ly = rng.uniform_int(0, 63 - sy);
        const Box b = box2(lx, ly, lx + sx, ly + sy);
        const Point h = b.sample(rng, 2);
        const auto hidx = sp.encode(h);
        auto cell = points_where(sp, [&](std::uint64_t i) { return b.contains(sp.decode(i), 2); });
        PredicateClustering g(
            [&sp, b](std::uint64_t i) { return b.contains(sp.decode(i), 2); }, hidx,
            first_outside(sp, cell));
        OracleSession s(sp, g, {}, Rng::derive(7, std::uint64_t(t)));
        auto v = cc_vs_box_reject_2d(s, hidx, t1, t2);
        CHECK(v.outcome ==
              (b.diam(sp) <= t1 ? RejectOutcome::accept : RejectOutcome::reject));
        CHECK(v.queries_used <= 44);
    }
    {
        // a single-point cell accepts
        const auto hidx = sp.encode(pt(40, 9));
        PredicateClustering g([hidx](std::uint64_t i) { return i == hidx; }, hidx, 0);
        OracleSession s(sp, g, {}, 2);
        auto v = cc_vs_box_reject_2d(s, hidx, t1, t2);
        CHECK(v.outcome == RejectOutcome::accept);
    }
    {
        // thresholds closer than the two-step search slack are rejected up front
        const auto hidx = sp.encode(pt(40, 9));
        PredicateClustering g([hidx](std::uint64_t i) { return i == hidx; }, hidx, 0);
        OracleSession s(sp, g, {}, 2);
        CHECK_THROWS_AS(cc_vs_box_reject_2d(s, hidx, 0.2, 0.3), std::invalid_argument);
    }
}

TEST_CASE("box-vs-convex rejection separates convex cells by diameter") {
    auto sp = Space::lp_grid(2, 64, 2.0);
    Rng rng(9120);
    const double t1 = 0.2, t2 = 0.5;
    {
        // a wide diamond: the search rectangle's corners leave the cell
        const Point c = pt(32, 32);
        PredicateClustering g(
            [&sp, c](std::uint64_t i) { return l1_steps(sp.decode(i), c, 2) <= 24; },
            sp.encode(c), 0);
        OracleSession s(sp, g, {}, 3);
        auto v = cc_vs_box_reject_2d(s, sp.encode(c), t1, t2);
        CHECK(v.outcome == RejectOutcome::bot);
    }
    int small_n = 0, large_n = 0;
    for (int t = 0; t < 200; ++t) {
        std::vector<std::uint64_t> cell;
        std::uint64_t hidx = 0;
        switch (t % 3) {
            case 0: {
                // compact hull: all generators within chebyshev 4 of center
                const Point c = pt(rng.uniform_int(8, 55), rng.uniform_int(8, 55));
                auto body = cct::testing::random_convex_body(rng, sp, c, 3, 5, 4);
                cell = points_where(sp, [&](std::uint64_t i) { return body.contains(sp.decode(i)); });
                hidx = sp.encode(c);
                break;
            }
            case 1: {
                // hull stretched by two antipodal far points
                const Point c = pt(rng.uniform_int(20, 43), rng.uniform_int(20, 43));
                auto body = cct::testing::random_convex_body(rng, sp, c, 6, 5, 12);
                body.verts.push_back(pt(c[0] - 17, c[1] - 17));
                body.verts.push_back(pt(c[0] + 17, c[1] + 17));
                body.verts = cct::testing::hull2d(std::move(body.verts));
                cell = points_where(sp, [&](std::uint64_t i) { return body.contains(sp.decode(i)); });
                hidx = sp.encode(c);
                break;
            }
            default: {
                const std::int64_t r = t % 6 == 2 ? rng.uniform_int(3, 8) : rng.uniform_int(23, 28);
                const Point c = pt(rng.uniform_int(r, 63 - r), rng.uniform_int(r, 63 - r));
                cell = points_where(sp, [&](std::uint64_t i) { return l1_steps(sp.decode(i), c, 2) <= r; });
                hidx = sp.encode(c);
            }
        }
        const double diam = exact_diam(sp, cell);
        std::unordered_set<std::uint64_t> in(cell.begin(), cell.end());
        PredicateClustering g([in](std::uint64_t i) { return in.count(i) > 0; }, hidx,
                              first_outside(sp, cell));
        OracleSession s(sp, g, {}, Rng::derive(8, std::uint64_t(t)));
        auto v = cc_vs_box_reject_2d(s, hidx, t1, t2);
        CHECK(v.queries_used <= 44);
        if (diam <= t1) {
            ++small_n;
            CHECK(v.outcome != RejectOutcome::reject);
        } else if (diam > t2) {
            ++large_n;
            CHECK(v.outcome != RejectOutcome::accept);
        }
    }
    // the mix must actually exercise both guaranteed sides
    CHECK(small_n >= 40);
    CHECK(large_n >= 40);
}

namespace {

// Reconstructs the per-direction extent estimates that produced a result.
// inner.lo = h - lo_ext + margin and inner.hi = h + hi_ext - margin, with
// margin = 2 * (delta/8) in steps.
struct Extents {
    std::int64_t lo[2], hi[2];
};

Extents extents_of(const BoundingBoxResult& bb, const Point& h, std::int64_t margin) {
    Extents e{};
    for (int ax = 0; ax < 2; ++ax) {
        e.lo[ax] = std::int64_t(h[ax]) - bb.inner.lo[std::size_t(ax)] + margin;
        e.hi[ax] = bb.inner.hi[std::size_t(ax)] - std::int64_t(h[ax]) + margin;
    }
    return e;
}

void check_box_invariants(const BoundingBoxResult& bb, const Box& truth) {
    for (int ax = 0; ax < 2; ++ax) {
        const auto a = std::size_t(ax);
        CHECK(bb.inner.lo[a] > truth.lo[a]);
        CHECK(bb.inner.hi[a] < truth.hi[a]);
        CHECK(bb.outer.lo[a] < truth.lo[a]);
        CHECK(bb.outer.hi[a] > truth.hi[a]);
        CHECK(bb.outer.side(ax) <= 2 * bb.inner.side(ax));
    }
}

}  // namespace

TEST_CASE("bounding box on a box cell: strict nesting and per-direction accuracy") {
    auto sp = Space::lp_grid(2, 4097, 2.0);
    const Point h = pt(2048, 2048);
    const Box cell = box2(2048 - 300, 2048 - 450, 2048 + 200, 2048 + 350);
    PredicateClustering g(
        [&sp, cell](std::uint64_t i) { return cell.contains(sp.decode(i), 2); },
        sp.encode(h), 0);
    OracleSession s(sp, g, {}, 11);
    auto bb = bounding_box(s, sp.encode(h), 1.0 / 32.0);
    REQUIRE(!bb.failed);
    check_box_invariants(bb, cell);
    // estimates never overshoot the truth and land within delta/8 = 16 steps
    const Extents e = extents_of(bb, h, 32);
    const std::int64_t want_lo[2] = {300, 450}, want_hi[2] = {200, 350};
    for (int ax = 0; ax < 2; ++ax) {
        CHECK(e.lo[ax] <= want_lo[ax]);
        CHECK(e.lo[ax] >= want_lo[ax] - 16);
        CHECK(e.hi[ax] <= want_hi[ax]);
        CHECK(e.hi[ax] >= want_hi[ax] - 16);
    }
}

TEST_CASE("bounding box on a ball at the promised radius: extents accurate to delta/8") {
    auto sp = Space::lp_grid(2, 4097, 2.0);
    const Point c = pt(2048, 2048);
    PredicateClustering g(
        [&sp, c](std::uint64_t i) { return l2sq_steps(sp.decode(i), c, 2) <= 128 * 128; },
        sp.encode(c), 0);
    OracleSession s(sp, g, {}, 12);
    auto bb = bounding_box(s, sp.encode(c), 1.0 / 32.0);
    REQUIRE(!bb.failed);
    const Extents e = extents_of(bb, c, 32);
    for (int ax = 0; ax < 2; ++ax) {
        CHECK(e.lo[ax] <= 128);
        CHECK(e.lo[ax] >= 128 - 16);
        CHECK(e.hi[ax] <= 128);
        CHECK(e.hi[ax] >= 128 - 16);
    }
}

TEST_CASE("bounding box invariants hold on random convex bodies") {
    auto sp = Space::lp_grid(2, 4097, 2.0);
    Rng rng(8118);
    int ok = 0;
    for (int t = 0; t < 100; ++t) {
        const Point c = pt(rng.uniform_int(700, 3396), rng.uniform_int(700, 3396));
        const std::int64_t spread = rng.uniform_int(200, 600);
        auto body = cct::testing::random_convex_body(rng, sp, c, 140, 10, spread);
        PredicateClustering g(
            [&sp, body](std::uint64_t i) { return body.contains(sp.decode(i)); },
            sp.encode(c), 0);
        OracleSession s(sp, g, {}, Rng::derive(21, std::uint64_t(t)));
        auto bb = bounding_box(s, sp.encode(c), 1.0 / 32.0);
        if (bb.failed) continue;
        ++ok;
        check_box_invariants(bb, body.tight_bbox());
    }
    MESSAGE("bounding box successes: ", ok, "/100");
    CHECK(ok >= 99);
}

TEST_CASE("bounding box declares failure when the accuracy target is unreachable") {
    auto sp = Space::lp_grid(2, 4097, 2.0);
    const Point h = pt(2048, 2048);
    const Box cell = box2(1998, 1998, 2098, 2098);
    PredicateClustering g(
        [&sp, cell](std::uint64_t i) { return cell.contains(sp.decode(i), 2); },
        sp.encode(h), 0);
    // delta = 1/512 gives an 8-step ball and a 1-step accuracy target; the
    // cone certificate cannot close that gap away from the domain faces, so
    // every repetition declares itself uncertified.
    {
        OracleSession s(sp, g, {}, 13);
        auto bb = bounding_box(s, sp.encode(h), 1.0 / 512.0);
        CHECK(bb.failed);
    }
    // the convex-cell wrappers fold the declared failure into safe verdicts
    {
        OracleSession s(sp, g, {}, 14);
        auto v = qreject_conv_conv(s, sp.encode(h), 0.25, 1.0 / 512.0);
        CHECK(v.outcome == RejectOutcome::reject);
    }
    {
        OracleSession s(sp, g, {}, 15);
        auto v = qreject_conv_box(s, sp.encode(h), 0.25, 1.0 / 512.0);
        CHECK(v.outcome == RejectOutcome::reject);
    }
    {
        OracleSession s(sp, g, {}, 16);
        auto r = qcell_conv_box(s, sp.encode(h), 1.0 / 512.0);
        CHECK(r.outcome == DiscoveryOutcome::cluster_reject);
    }
    // parameters below the lattice resolution are rejected up front
    {
        OracleSession s(sp, g, {}, 17);
        CHECK_THROWS_AS(bounding_box(s, sp.encode(h), 1e-5), std::invalid_argument);
    }
}

TEST_CASE("bounding box is reproducible from the session seed") {
    auto sp = Space::lp_grid(2, 4097, 2.0);
    const Point c = pt(1500, 2600);
    Rng rng(314);
    auto body = cct::testing::random_convex_body(rng, sp, c, 140, 8, 400);
    PredicateClustering g(
        [&sp, body](std::uint64_t i) { return body.contains(sp.decode(i)); },
        sp.encode(c), 0);
    BoundingBoxResult a, b;
    {
        OracleSession s(sp, g, {}, 77);
        a = bounding_box(s, sp.encode(c), 1.0 / 32.0);
    }
    {
        OracleSession s(sp, g, {}, 77);
        b = bounding_box(s, sp.encode(c), 1.0 / 32.0);
    }
    REQUIRE(!a.failed);
    CHECK(a.inner == b.inner);
    CHECK(a.outer == b.outer);
    CHECK(a.queries_used == b.queries_used);
}

TEST_CASE("convex-promise rejection: small cells accept, stretched cells reject, never bot") {
    auto sp = Space::lp_grid(2, 4097, 2.0);
    const Point c = pt(2048, 2048);
    const double eps = 0.25, delta = 1.0 / 32.0;
    {
        // box of side 700: diameter 0.171, inside the accept zone
        const Box cell = box2(2048 - 350, 2048 - 350, 2048 + 350, 2048 + 350);
        PredicateClustering g(
            [&sp, cell](std::uint64_t i) { return cell.contains(sp.decode(i), 2); },
            sp.encode(c), 0);
        OracleSession s(sp, g, {}, 21);
        auto v = qreject_conv_conv(s, sp.encode(c), eps, delta);
        CHECK(v.outcome == RejectOutcome::accept);
    }
    {
        // box of side 2200: diameter 0.537 > 2 eps
        const Box cell = box2(2048 - 1100, 2048 - 1100, 2048 + 1100, 2048 + 1100);
        PredicateClustering g(
            [&sp, cell](std::uint64_t i) { return cell.contains(sp.decode(i), 2); },
            sp.encode(c), 0);
        OracleSession s(sp, g, {}, 22);
        auto v = qreject_conv_conv(s, sp.encode(c), eps, delta);
        CHECK(v.outcome == RejectOutcome::reject);
    }
    {
        // ball of radius 300: diameter 0.104, accept zone again
        PredicateClustering g(
            [&sp, c](std::uint64_t i) { return l2sq_steps(sp.decode(i), c, 2) <= 300 * 300; },
            sp.encode(c), 0);
        OracleSession s(sp, g, {}, 23);
        auto v = qreject_conv_conv(s, sp.encode(c), eps, delta);
        CHECK(v.outcome == RejectOutcome::accept);
    }
}

TEST_CASE("box-promise rejection: box cells never bot, a wide diamond certifies bot") {
    auto sp = Space::lp_grid(2, 4097, 2.0);
    const Point c = pt(2048, 2048);
    const double eps = 0.25, delta = 1.0 / 32.0;
    const std::int64_t sides[3] = {700, 1500, 2200};
    for (int k = 0; k < 3; ++k) {
        const std::int64_t hs = sides[k] / 2;
        const Box cell = box2(2048 - hs, 2048 - hs, 2048 + hs, 2048 + hs);
        PredicateClustering g(
            [&sp, cell](std::uint64_t i) { return cell.contains(sp.decode(i), 2); },
            sp.encode(c), 0);
        OracleSession s(sp, g, {}, std::uint64_t(31 + k));
        auto v = qreject_conv_box(s, sp.encode(c), eps, delta);
        CHECK(v.outcome != RejectOutcome::bot);
        if (cell.diam(sp) <= eps) CHECK(v.outcome == RejectOutcome::accept);
        if (cell.diam(sp) > 2 * eps) CHECK(v.outcome == RejectOutcome::reject);
    }
    {
        // ell-1 ball of radius 400: the inner box corners leave the cell
        PredicateClustering g(
            [&sp, c](std::uint64_t i) { return l1_steps(sp.decode(i), c, 2) <= 400; },
            sp.encode(c), 0);
        OracleSession s(sp, g, {}, 34);
        auto v = qreject_conv_box(s, sp.encode(c), eps, delta);
        CHECK(v.outcome == RejectOutcome::bot);
    }
}

TEST_CASE("box-promise discovery holds the cell with bounded lattice blowup") {
    auto sp = Space::lp_grid(2, 4097, 2.0);
    const Point c = pt(2048, 2048);
    const double delta = 1.0 / 32.0;
    {
        const Box cell = box2(2048 - 300, 2048 - 450, 2048 + 200, 2048 + 350);
        PredicateClustering g(
            [&sp, cell](std::uint64_t i) { return cell.contains(sp.decode(i), 2); },
            sp.encode(c), 0);
        OracleSession s(sp, g, {}, 41);
        auto r = qcell_conv_box(s, sp.encode(c), delta);
        REQUIRE(r.outcome == DiscoveryOutcome::container);
        REQUIRE(r.container.is_box());
        const Box& cb = r.container.box();
        for (int ax = 0; ax < 2; ++ax) {
            CHECK(cb.lo[std::size_t(ax)] <= cell.lo[std::size_t(ax)]);
            CHECK(cb.hi[std::size_t(ax)] >= cell.hi[std::size_t(ax)]);
        }
        CHECK(r.container.num_points(sp) <= 4 * cell.num_points(2));
    }
    {
        PredicateClustering g(
            [&sp, c](std::uint64_t i) { return l2sq_steps(sp.decode(i), c, 2) <= 128 * 128; },
            sp.encode(c), 0);
        OracleSession s(sp, g, {}, 42);
        auto r = qcell_conv_box(s, sp.encode(c), delta);
        REQUIRE(r.outcome == DiscoveryOutcome::container);
        const Box& cb = r.container.box();
        // the cell's tight bounding box is [c - 128, c + 128]^2
        for (int ax = 0; ax < 2; ++ax) {
            CHECK(cb.lo[std::size_t(ax)] <= 2048 - 128);
            CHECK(cb.hi[std::size_t(ax)] >= 2048 + 128);
        }
        std::uint64_t ball = 0;
        for (std::int64_t dx = -128; dx <= 128; ++dx) {
            const std::int64_t rem = 128 * 128 - dx * dx;
            std::int64_t y = 0;
            while ((y + 1) * (y + 1) <= rem) ++y;
            ball += std::uint64_t(2 * y + 1);
        }
        CHECK(r.container.num_points(sp) <= 4 * ball);
    }
}

TEST_CASE("rejection from discovery adds no queries and thresholds the diameter") {
    auto sp = Space::lp_grid(1, 64, 2.0);
    IntervalClustering g(64, {0, 10}, false, {4, 20});
    OracleSession s(sp, g, {}, 51);
    auto r = discover_interval_cell(s, 4);
    REQUIRE(r.outcome == DiscoveryOutcome::container);
    // cell [0, 9] has diameter 9/63
    auto tight = reject_from_discovery(sp, r, 0.1);
    CHECK(tight.outcome == RejectOutcome::reject);
    CHECK(tight.queries_used == r.queries_used);
    auto loose = reject_from_discovery(sp, r, 0.2);
    CHECK(loose.outcome == RejectOutcome::accept);
    CHECK(loose.queries_used == r.queries_used);

    DiscoveryResult cr;
    cr.outcome = DiscoveryOutcome::cluster_reject;
    cr.queries_used = 5;
    auto v = reject_from_discovery(sp, cr, 0.1);
    CHECK(v.outcome == RejectOutcome::bot);
    CHECK(v.queries_used == 5);
}

TEST_CASE("query traces record every oracle call in order") {
    {
        auto sp = Space::lp_grid(1, 64, 2.0);
        IntervalClustering g(64, {0, 17, 40}, false, {8, 30, 50});
        OracleSession s(sp, g, {}, 61);
        QueryTrace tr;
        auto r = discover_interval_cell(s, 30, &tr);
        CHECK(tr.records.size() == r.queries_used);
        for (const auto& rec : tr.records) CHECK(rec.label == g.collector_output(rec.idx));

        std::ostringstream os;
        tr.write_jsonl(os);
        std::istringstream is(os.str());
        std::string line;
        std::size_t lines = 0;
        while (std::getline(is, line)) {
            CHECK(line.starts_with("{\"idx\":"));
            CHECK(line.back() == '}');
            ++lines;
        }
        CHECK(lines == tr.records.size());
    }
    {
        // memoized procedures only trace queries that actually hit the oracle
        auto sp = Space::lp_grid(2, 48, 2.0);
        const Point c = pt(24, 24);
        PredicateClustering g(
            [&sp, c](std::uint64_t i) { return l1_steps(sp.decode(i), c, 2) <= 5; },
            sp.encode(c), 0);
        OracleSession s(sp, g, {}, 62);
        QueryTrace tr;
        auto r = discover_convex_grid_cell_2d(s, sp.encode(c), &tr);
        CHECK(r.outcome == DiscoveryOutcome::container);
        CHECK(tr.records.size() == r.queries_used);
    }
}

TEST_CASE("deterministic procedures reproduce outcomes and query counts") {
    auto run_twice = [](auto&& f) {
        auto a = f();
        auto b = f();
        CHECK(a == b);
    };
    {
        auto sp = Space::lp_grid(2, 32, 2.0);
        std::vector<Box> boxes{box2(0, 0, 15, 31), box2(16, 0, 31, 31)};
        BoxClustering g(sp, boxes);
        run_twice([&] {
            OracleSession s(sp, g, {}, 71);
            return discover_box_cell(s, g.rep_of(1)).queries_used;
        });
    }
    {
        auto sp = Space::lp_grid(2, 32, 2.0);
        const Point c = pt(10, 20);
        PredicateClustering g(
            [&sp, c](std::uint64_t i) { return l1_steps(sp.decode(i), c, 2) <= 4; },
            sp.encode(c), 0);
        run_twice([&] {
            OracleSession s(sp, g, {}, 72);
            return reject_connected_cell(s, sp.encode(c), 0.1, 0.5).queries_used;
        });
        run_twice([&] {
            OracleSession s(sp, g, {}, 73);
            return discover_convex_grid_cell_2d(s, sp.encode(c)).queries_used;
        });
    }
    {
        auto sp = Space::lp_grid(2, 64, 2.0);
        const Box cell = box2(12, 30, 30, 44);
        const auto hidx = sp.encode(pt(20, 35));
        PredicateClustering g(
            [&sp, cell](std::uint64_t i) { return cell.contains(sp.decode(i), 2); }, hidx, 0);
        run_twice([&] {
            OracleSession s(sp, g, {}, 74);
            return cc_vs_box_reject_2d(s, hidx, 0.2, 0.5).queries_used;
        });
    }
}
