#include "cct/cell_procedures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace cct {

void QueryTrace::write_jsonl(std::ostream& os) const {
    for (const auto& r : records)
        os << "{\"idx\":" << r.idx << ",\"label\":" << r.label << "}\n";
}

Container Container::from_box(const Box& b) {
    Container c;
    c.boxed_ = true;
    c.box_ = b;
    return c;
}

Container Container::from_points(std::vector<std::uint64_t> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    Container c;
    c.pts_ = std::move(pts);
    return c;
}

bool Container::contains(const Space& s, std::uint64_t idx) const {
    if (boxed_) return box_.contains(s.decode(idx), s.dim());
    return std::binary_search(pts_.begin(), pts_.end(), idx);
}

std::uint64_t Container::num_points(const Space& s) const {
    return boxed_ ? box_.num_points(s.dim()) : pts_.size();
}

std::uint64_t Container::sample(const Space& s, Rng& rng) const {
    if (boxed_) return s.encode(box_.sample(rng, s.dim()));
    if (pts_.empty()) throw std::logic_error("sampling an empty container");
    return pts_[std::size_t(rng.uniform_int(0, std::int64_t(pts_.size()) - 1))];
}

namespace {

std::int64_t cross(const Point& o, const Point& a, const Point& b) {
    return std::int64_t(a[0] - o[0]) * (b[1] - o[1]) -
           std::int64_t(a[1] - o[1]) * (b[0] - o[0]);
}

// Monotone chain; returns the hull counter-clockwise with collinear points
// dropped. Degenerate inputs (point, segment) come back with 1 or 2 vertices.
std::vector<Point> convex_hull_2d(std::vector<Point> v) {
    std::sort(v.begin(), v.end(), [](const Point& a, const Point& b) {
        return a[0] != b[0] ? a[0] < b[0] : a[1] < b[1];
    });
    v.erase(std::unique(v.begin(), v.end()), v.end());
    if (v.size() <= 2) return v;
    std::vector<Point> h(2 * v.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], v[i]) <= 0) --k;
        h[k++] = v[i];
    }
    for (std::size_t i = v.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(h[k - 2], h[k - 1], v[i]) <= 0) --k;
        h[k++] = v[i];
    }
    h.resize(k - 1);
    return h;
}

std::int64_t floor_div(std::int64_t num, std::int64_t den) {
    std::int64_t q = num / den, r = num % den;
    return (r != 0 && (r < 0) != (den < 0)) ? q - 1 : q;
}

std::int64_t ceil_div(std::int64_t num, std::int64_t den) {
    return -floor_div(-num, den);
}

// All lattice points inside the hull, as encoded indices. Per column the
// section of a convex polygon is one contiguous y-interval, bounded by the
// edge crossings.
std::vector<std::uint64_t> hull_fill_lattice(const Space& sp, const std::vector<Point>& hull) {
    std::vector<std::uint64_t> out;
    if (hull.empty()) return out;
    std::int64_t xmin = hull[0][0], xmax = hull[0][0];
    for (const auto& p : hull) {
        xmin = std::min<std::int64_t>(xmin, p[0]);
        xmax = std::max<std::int64_t>(xmax, p[0]);
    }
    const std::size_t m = hull.size();
    for (std::int64_t x = xmin; x <= xmax; ++x) {
        std::int64_t ylo = std::numeric_limits<std::int64_t>::max();
        std::int64_t yhi = std::numeric_limits<std::int64_t>::min();
        for (std::size_t i = 0; i < m; ++i) {
            const Point& p = hull[i];
            const Point& q = hull[(i + 1) % m];
            std::int64_t x1 = p[0], y1 = p[1], x2 = q[0], y2 = q[1];
            if (x1 == x2) {
                if (x1 != x) continue;
                ylo = std::min({ylo, y1, y2});
                yhi = std::max({yhi, y1, y2});
                continue;
            }
            if (x < std::min(x1, x2) || x > std::max(x1, x2)) continue;
            // y at this column along the edge, exact as a fraction
            std::int64_t den = x2 - x1;
            std::int64_t num = y1 * den + (y2 - y1) * (x - x1);
            ylo = std::min(ylo, ceil_div(num, den));
            yhi = std::max(yhi, floor_div(num, den));
        }
        for (std::int64_t y = ylo; y <= yhi; ++y) {
            Point pt;
            pt[0] = std::int32_t(x);
            pt[1] = std::int32_t(y);
            out.push_back(sp.encode(pt));
        }
    }
    return out;
}

}  // namespace

double Container::diam(const Space& s) const {
    if (boxed_) return box_.diam(s);
    if (pts_.empty()) return 0.0;
    std::vector<Point> ps;
    ps.reserve(pts_.size());
    for (auto idx : pts_) ps.push_back(s.decode(idx));
    if (s.dim() == 2 && ps.size() > 8) ps = convex_hull_2d(std::move(ps));
    double best = 0.0;
    for (std::size_t i = 0; i < ps.size(); ++i)
        for (std::size_t j = i + 1; j < ps.size(); ++j)
            best = std::max(best, s.dist(ps[i], ps[j]));
    return best;
}

namespace {

// Funnels every LABEL through one place so traces and memoization stay
// consistent with the session's query counter.
struct Prober {
    OracleSession& session;
    std::uint64_t h;
    QueryTrace* trace;
    bool memoize;
    std::unordered_map<std::uint64_t, bool> memo;

    bool member_idx(std::uint64_t idx) {
        if (memoize) {
            auto it = memo.find(idx);
            if (it != memo.end()) return it->second;
        }
        std::uint64_t lab = session.label(idx);
        if (trace) trace->records.push_back({idx, lab});
        bool in = lab == h;
        if (memoize) memo.emplace(idx, in);
        return in;
    }
    bool member(const Point& p) { return member_idx(session.space().encode(p)); }
};

// Largest x in [lo, hi] with pred(x); pred(lo) is assumed true.
template <class Pred>
std::int64_t last_true(std::int64_t lo, std::int64_t hi, Pred pred) {
    while (lo < hi) {
        std::int64_t mid = lo + (hi - lo + 1) / 2;
        if (pred(mid))
            lo = mid;
        else
            hi = mid - 1;
    }
    return lo;
}

// Smallest x in [lo, hi] with pred(x); pred(hi) is assumed true.
template <class Pred>
std::int64_t first_true(std::int64_t lo, std::int64_t hi, Pred pred) {
    while (lo < hi) {
        std::int64_t mid = lo + (hi - lo) / 2;
        if (pred(mid))
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo;
}

double axis_root(const Space& sp) {
    if (sp.p() == std::numeric_limits<double>::infinity()) return 1.0;
    return std::pow(double(sp.dim()), 1.0 / sp.p());
}

}  // namespace

DiscoveryResult discover_interval_cell(OracleSession& s, std::uint64_t h, QueryTrace* trace) {
    const Space& sp = s.space();
    if (sp.dim() != 1) throw std::invalid_argument("interval discovery needs a 1-d domain");
    const std::uint64_t q0 = s.label_count();
    Prober pr{s, h, trace, false, {}};
    const std::int64_t hx = std::int64_t(h);  // d = 1: index == coordinate
    auto in_cell = [&](std::int64_t x) { return pr.member_idx(std::uint64_t(x)); };
    std::int64_t lo = first_true(0, hx, in_cell);
    std::int64_t hi = last_true(hx, sp.scale(), in_cell);
    Box b;
    b.lo[0] = lo;
    b.hi[0] = hi;
    return {DiscoveryOutcome::container, Container::from_box(b), s.label_count() - q0};
}

DiscoveryResult discover_box_cell(OracleSession& s, std::uint64_t h, QueryTrace* trace) {
    const Space& sp = s.space();
    if (sp.kind() != MetricKind::lp_grid)
        throw std::invalid_argument("box discovery needs an lp grid");
    const std::uint64_t q0 = s.label_count();
    Prober pr{s, h, trace, false, {}};
    const Point hp = sp.decode(h);
    Box b;
    for (int ax = 0; ax < sp.dim(); ++ax) {
        auto on_line = [&](std::int64_t v) {
            Point q = hp;
            q[ax] = std::int32_t(v);
            return pr.member(q);
        };
        b.lo[std::size_t(ax)] = first_true(0, hp[ax], on_line);
        b.hi[std::size_t(ax)] = last_true(hp[ax], sp.scale(), on_line);
    }
    return {DiscoveryOutcome::container, Container::from_box(b), s.label_count() - q0};
}

RejectVerdict reject_connected_cell(OracleSession& s, std::uint64_t h, double eps1,
                                    double eps2, QueryTrace* trace) {
    const Space& sp = s.space();
    if (sp.kind() != MetricKind::lp_grid)
        throw std::invalid_argument("shell rejection needs an lp grid");
    if (!(eps1 > 0.0) || !(eps1 < eps2) || !(eps2 < 1.0) || !(eps2 > 2.0 * axis_root(sp) * eps1))
        throw std::invalid_argument("shell rejection needs 0 < eps1, eps2 < 1, eps2 > 2 d^{1/p} eps1");
    const int d = sp.dim();
    const std::int64_t k = std::int64_t(std::ceil(eps2 * double(sp.scale()) / 2.0));
    const Point hp = sp.decode(h);
    const std::uint64_t q0 = s.label_count();
    Prober pr{s, h, trace, false, {}};

    // The shell ||x - h||_inf == k, each point enumerated under the first
    // axis attaining the max: fixed coordinate on axis `ax`, free offsets to
    // k on later axes and to k-1 on earlier ones, row-major with an early
    // exit on the first hit.
    for (int ax = 0; ax < d; ++ax) {
        for (int sgn : {-1, +1}) {
            const std::int64_t fixed = std::int64_t(hp[ax]) + sgn * k;
            if (fixed < 0 || fixed > sp.scale()) continue;
            std::array<int, kMaxDim> free_ax{};
            std::array<std::int64_t, kMaxDim> lim{};
            std::array<std::int64_t, kMaxDim> off{};
            int nf = 0;
            for (int j = 0; j < d; ++j) {
                if (j == ax) continue;
                free_ax[std::size_t(nf)] = j;
                lim[std::size_t(nf)] = j < ax ? k - 1 : k;
                off[std::size_t(nf)] = -lim[std::size_t(nf)];
                ++nf;
            }
            while (true) {
                Point q = hp;
                q[ax] = std::int32_t(fixed);
                bool in_dom = true;
                for (int t = 0; t < nf && in_dom; ++t) {
                    std::int64_t v = std::int64_t(hp[free_ax[std::size_t(t)]]) + off[std::size_t(t)];
                    if (v < 0 || v > sp.scale())
                        in_dom = false;
                    else
                        q[free_ax[std::size_t(t)]] = std::int32_t(v);
                }
                if (in_dom && pr.member(q))
                    return {RejectOutcome::reject, s.label_count() - q0};
                int t = nf - 1;
                while (t >= 0) {
                    if (++off[std::size_t(t)] <= lim[std::size_t(t)]) break;
                    off[std::size_t(t)] = -lim[std::size_t(t)];
                    --t;
                }
                if (t < 0) break;
            }
        }
    }
    return {RejectOutcome::accept, s.label_count() - q0};
}

DiscoveryResult discover_convex_grid_cell_2d(OracleSession& s, std::uint64_t h,
                                             QueryTrace* trace) {
    const Space& sp = s.space();
    if (sp.dim() != 2 || sp.kind() != MetricKind::lp_grid)
        throw std::invalid_argument("convex grid discovery is 2-d only");
    const std::uint64_t q0 = s.label_count();
    Prober pr{s, h, trace, true, {}};
    const Point hp = sp.decode(h);
    const std::int64_t n1 = sp.scale();

    auto member_at = [&](std::int64_t x, std::int64_t y) {
        if (x < 0 || x > n1 || y < 0 || y > n1) return false;
        Point q;
        q[0] = std::int32_t(x);
        q[1] = std::int32_t(y);
        return pr.member(q);
    };
    // A cell point is on the boundary when a 4-neighbor is outside the cell
    // or outside the domain.
    auto on_boundary = [&](std::int64_t x, std::int64_t y) {
        return !member_at(x - 1, y) || !member_at(x + 1, y) || !member_at(x, y - 1) ||
               !member_at(x, y + 1);
    };

    std::int64_t b1 = last_true(hp[0], n1, [&](std::int64_t x) { return member_at(x, hp[1]); });

    std::vector<Point> boundary;
    std::unordered_set<std::uint64_t> seen;
    std::deque<std::array<std::int64_t, 2>> queue;
    auto push = [&](std::int64_t x, std::int64_t y) {
        Point p;
        p[0] = std::int32_t(x);
        p[1] = std::int32_t(y);
        std::uint64_t idx = sp.encode(p);
        if (seen.insert(idx).second) {
            boundary.push_back(p);
            queue.push_back({x, y});
        }
    };
    push(b1, hp[1]);
    while (!queue.empty()) {
        auto [x, y] = queue.front();
        queue.pop_front();
        for (std::int64_t dx = -1; dx <= 1; ++dx)
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                if (dx == 0 && dy == 0) continue;
                std::int64_t nx = x + dx, ny = y + dy;
                if (member_at(nx, ny) && on_boundary(nx, ny)) push(nx, ny);
            }
    }

    std::vector<Point> hull = convex_hull_2d(boundary);
    Container c = Container::from_points(hull_fill_lattice(sp, hull));
    return {DiscoveryOutcome::container, std::move(c), s.label_count() - q0};
}

RejectVerdict cc_vs_box_reject_2d(OracleSession& s, std::uint64_t h, double t1, double t2,
                                  QueryTrace* trace) {
    const Space& sp = s.space();
    if (sp.dim() != 2 || sp.kind() != MetricKind::lp_grid)
        throw std::invalid_argument("box rejection for convex cells is 2-d only");
    if (!(t1 > 0.0) || !(t1 < t2 - 8.0 / double(sp.scale())))
        throw std::invalid_argument("box rejection needs 0 < t1 < t2 - 8/(n-1)");
    const std::uint64_t q0 = s.label_count();
    Prober pr{s, h, trace, true, {}};
    const Point hp = sp.decode(h);
    const std::int64_t n1 = sp.scale();
    auto verdict = [&](RejectOutcome o) { return RejectVerdict{o, s.label_count() - q0}; };

    auto row = [&](std::int64_t x) {
        Point q = hp;
        q[0] = std::int32_t(x);
        return pr.member(q);
    };
    auto col = [&](std::int64_t y) {
        Point q = hp;
        q[1] = std::int32_t(y);
        return pr.member(q);
    };
    const std::int64_t a1 = first_true(0, hp[0], row);
    const std::int64_t b1 = last_true(hp[0], n1, row);
    const std::int64_t a2 = first_true(0, hp[1], col);
    const std::int64_t b2 = last_true(hp[1], n1, col);

    auto inside = [&](std::int64_t x, std::int64_t y) {
        Point q;
        q[0] = std::int32_t(x);
        q[1] = std::int32_t(y);
        return pr.member(q);
    };
    // In-cell points outside the domain cannot exist, so out-of-range checks
    // pass for free.
    auto clear = [&](std::int64_t x, std::int64_t y) {
        if (x < 0 || x > n1 || y < 0 || y > n1) return true;
        return !inside(x, y);
    };

    for (auto [x, y] : {std::pair{a1, a2}, {a1, b2}, {b1, a2}, {b1, b2}})
        if (!inside(x, y)) return verdict(RejectOutcome::bot);

    const std::array<std::pair<std::int64_t, std::int64_t>, 8> corner_nbrs{{
        {a1 - 1, a2}, {a1, a2 - 1}, {a1 - 1, b2}, {a1, b2 + 1},
        {b1 + 1, a2}, {b1, a2 - 1}, {b1 + 1, b2}, {b1, b2 + 1},
    }};
    for (auto [x, y] : corner_nbrs)
        if (!clear(x, y)) return verdict(RejectOutcome::bot);

    const std::int64_t m1_lo = (a1 + b1) / 2, m1_hi = (a1 + b1 + 1) / 2;
    const std::int64_t m2_lo = (a2 + b2) / 2, m2_hi = (a2 + b2 + 1) / 2;
    const std::array<std::pair<std::int64_t, std::int64_t>, 8> mid_nbrs{{
        {a1 - 1, m2_lo}, {a1 - 1, m2_hi}, {b1 + 1, m2_lo}, {b1 + 1, m2_hi},
        {m1_lo, a2 - 1}, {m1_hi, a2 - 1}, {m1_lo, b2 + 1}, {m1_hi, b2 + 1},
    }};
    for (auto [x, y] : mid_nbrs)
        if (!clear(x, y)) return verdict(RejectOutcome::bot);

    Box r;
    r.lo[0] = a1;
    r.hi[0] = b1;
    r.lo[1] = a2;
    r.hi[1] = b2;
    return verdict(r.diam(sp) <= t1 ? RejectOutcome::accept : RejectOutcome::reject);
}

namespace {

struct ScanOutcome {
    std::int64_t extent = 0;
    double err = 0.0;
    bool certified = false;
};

// Walks membership columns outward from h along one axis direction. A column
// is the cross-section slab at a fixed offset; light probes ride an anchor
// from the previous hit, and a full mesh scan of spacing s only misses
// cross-section balls of radius below s * cross_half. When a full scan comes
// up empty, the inner ball of radius r forces any remaining cell point to
// project a wide cone onto that column, which caps how far the cell can
// still reach; the cap is the certificate.
ScanOutcome scan_extent(Prober& pr, const Space& sp, const Point& hp, int ax, int sgn,
                        double r, double dprime, int grace, Rng& rng) {
    const std::int64_t n1 = sp.scale();
    const std::int64_t cap = sgn > 0 ? n1 - hp[ax] : hp[ax];
    const int d = sp.dim();
    const int nc = d - 1;
    std::array<int, 2> cross_ax{};
    {
        int w = 0;
        for (int i = 0; i < d; ++i)
            if (i != ax) cross_ax[std::size_t(w++)] = i;
    }
    const double cross_half = nc == 0 ? 0.0 : (nc == 1 ? 0.5 : std::numbers::sqrt2 / 2.0);

    std::array<std::int64_t, 2> anchor{};
    for (int c = 0; c < nc; ++c) anchor[std::size_t(c)] = hp[cross_ax[std::size_t(c)]];

    auto at = [&](std::int64_t v, std::int64_t c0, std::int64_t c1) {
        Point q = hp;
        q[ax] = std::int32_t(std::int64_t(hp[ax]) + sgn * v);
        if (nc >= 1) q[cross_ax[0]] = std::int32_t(c0);
        if (nc == 2) q[cross_ax[1]] = std::int32_t(c1);
        return pr.member(q);
    };
    // The probe through h's own cross-section is inside the promised inner
    // ball whenever v <= r, so the walk never stalls before the ball radius.
    auto light = [&](std::int64_t v) {
        std::array<std::int64_t, 3> c0s{anchor[0], hp[cross_ax[0]],
                                        (anchor[0] + hp[cross_ax[0]]) / 2};
        std::array<std::int64_t, 3> c1s{anchor[1], nc == 2 ? hp[cross_ax[1]] : 0,
                                        nc == 2 ? (anchor[1] + hp[cross_ax[1]]) / 2 : 0};
        if (nc == 0) return at(v, 0, 0);
        for (int i = 0; i < 3; ++i) {
            if (i > 0 && c0s[std::size_t(i)] == c0s[0] && c1s[std::size_t(i)] == c1s[0]) continue;
            if (at(v, c0s[std::size_t(i)], c1s[std::size_t(i)])) {
                anchor[0] = c0s[std::size_t(i)];
                if (nc == 2) anchor[1] = c1s[std::size_t(i)];
                return true;
            }
        }
        return false;
    };
    auto full_scan = [&](std::int64_t v, std::int64_t spacing) {
        std::array<std::vector<std::int64_t>, 2> mesh;
        for (int c = 0; c < nc; ++c) {
            std::int64_t phase =
                spacing == 1 ? 0 : rng.uniform_int(0, spacing - 1);
            auto& m = mesh[std::size_t(c)];
            for (std::int64_t x = phase; x <= n1; x += spacing) m.push_back(x);
            std::int64_t a = anchor[std::size_t(c)];
            std::sort(m.begin(), m.end(), [a](std::int64_t x, std::int64_t y) {
                return std::llabs(x - a) < std::llabs(y - a);
            });
        }
        if (nc == 0) return at(v, 0, 0);
        if (nc == 1) {
            for (std::int64_t x : mesh[0])
                if (at(v, x, 0)) {
                    anchor[0] = x;
                    return true;
                }
            return false;
        }
        const std::size_t r0 = mesh[0].size(), r1 = mesh[1].size();
        auto probe = [&](std::size_t i, std::size_t j) {
            if (i >= r0 || j >= r1) return false;
            if (at(v, mesh[0][i], mesh[1][j])) {
                anchor[0] = mesh[0][i];
                anchor[1] = mesh[1][j];
                return true;
            }
            return false;
        };
        for (std::size_t ring = 0; ring < std::max(r0, r1); ++ring) {
            for (std::size_t j = 0; j <= ring; ++j)
                if (probe(ring, j)) return true;
            for (std::size_t i = 0; i < ring; ++i)
                if (probe(i, ring)) return true;
        }
        return false;
    };

    std::int64_t best = 0, stride = 1;
    int empties = 0;
    double cone_min = std::numeric_limits<double>::infinity();
    while (best < cap) {
        if (stride > 1) {
            std::int64_t v = std::min(best + stride, cap);
            if (light(v)) {
                best = v;
                empties = 0;
                stride *= 2;
            } else {
                stride = std::max<std::int64_t>(1, stride / 2);
            }
            continue;
        }
        const std::int64_t u = best + 1 + empties;
        if (u > cap) break;
        bool hit = light(u);
        if (!hit) {
            double w_allowed =
                dprime > 1.0 ? r * (dprime - 1.0) / (double(u) + dprime - 1.0) : 0.0;
            std::int64_t spacing = 1;
            if (cross_half > 0.0 && w_allowed > cross_half)
                spacing = std::max<std::int64_t>(1, std::int64_t(w_allowed / cross_half));
            hit = full_scan(u, spacing);
            if (!hit) {
                const double w_actual = double(spacing) * cross_half;
                if (w_actual < r)
                    cone_min = std::min(cone_min, double(u) * r / (r - w_actual));
                const double err = std::min(cone_min, double(cap)) - double(best);
                if (err <= dprime) return {best, err, true};
                if (++empties > grace) return {best, err, false};
                continue;
            }
        }
        best = u;
        empties = 0;
        stride = 2;
    }
    const double err = std::max(0.0, std::min(cone_min, double(cap)) - double(best));
    return {best, err, err <= dprime};
}

}  // namespace

BoundingBoxResult bounding_box(OracleSession& s, std::uint64_t h, double delta,
                               double rho_fail, int reps, QueryTrace* trace) {
    const Space& sp = s.space();
    if (sp.kind() != MetricKind::lp_grid || sp.dim() > 3)
        throw std::invalid_argument("bounding box needs an lp grid of dimension at most 3");
    if (!(delta > 0.0 && delta < 1.0) || !(rho_fail > 0.0 && rho_fail < 1.0) || reps < 1)
        throw std::invalid_argument("bounding box parameters out of range");
    const int d = sp.dim();
    const double r = delta * double(sp.scale());
    const double dprime = r / 8.0;
    if (r < 1.0) throw std::invalid_argument("inner ball below the lattice resolution");
    const std::int64_t margin = std::max<std::int64_t>(1, std::llround(2.0 * dprime));
    const int grace = std::max(2, int(std::ceil(std::log2(1.0 / rho_fail))));

    BoundingBoxResult out;
    const std::uint64_t q0 = s.label_count();
    Prober pr{s, h, trace, true, {}};
    const Point hp = sp.decode(h);

    int ok_reps = 0;
    std::array<std::vector<std::int64_t>, 2 * kMaxDim> exts;
    double worst_err = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
        bool all_ok = true;
        std::array<std::int64_t, 2 * kMaxDim> cur{};
        for (int ax = 0; ax < d && all_ok; ++ax)
            for (int sg = 0; sg < 2 && all_ok; ++sg) {
                ScanOutcome sc =
                    scan_extent(pr, sp, hp, ax, sg ? 1 : -1, r, dprime, grace, s.rng());
                worst_err = std::max(worst_err, sc.err);
                if (!sc.certified)
                    all_ok = false;
                else
                    cur[std::size_t(2 * ax + sg)] = sc.extent;
            }
        if (all_ok) {
            ++ok_reps;
            for (int k = 0; k < 2 * d; ++k) exts[std::size_t(k)].push_back(cur[std::size_t(k)]);
        }
    }
    out.queries_used = s.label_count() - q0;
    out.worst_err_steps = worst_err;
    if (2 * ok_reps <= reps) return out;

    auto median = [&](int k) {
        auto& v = exts[std::size_t(k)];
        std::nth_element(v.begin(), v.begin() + std::ptrdiff_t(v.size() / 2), v.end());
        return v[v.size() / 2];
    };
    for (int ax = 0; ax < d; ++ax) {
        const std::int64_t lo_ext = median(2 * ax);
        const std::int64_t hi_ext = median(2 * ax + 1);
        out.inner.lo[std::size_t(ax)] = std::int64_t(hp[ax]) - lo_ext + margin;
        out.inner.hi[std::size_t(ax)] = std::int64_t(hp[ax]) + hi_ext - margin;
        out.outer.lo[std::size_t(ax)] = std::int64_t(hp[ax]) - lo_ext - margin;
        out.outer.hi[std::size_t(ax)] = std::int64_t(hp[ax]) + hi_ext + margin;
        // Extents below 6 margins would break the 2x side guarantee; the
        // promise makes them at least 8, so surface the violation as failure.
        if (out.inner.lo[std::size_t(ax)] > out.inner.hi[std::size_t(ax)]) return out;
    }
    out.failed = false;
    return out;
}

RejectVerdict qreject_conv_conv(OracleSession& s, std::uint64_t h, double eps, double delta,
                                double rho_fail, QueryTrace* trace) {
    const std::uint64_t q0 = s.label_count();
    BoundingBoxResult bb = bounding_box(s, h, delta, rho_fail, 9, trace);
    // Never bot: a declared estimator failure turns into the safe verdict.
    RejectOutcome o = RejectOutcome::reject;
    if (!bb.failed && bb.inner.diam(s.space()) <= eps) o = RejectOutcome::accept;
    return {o, s.label_count() - q0};
}

RejectVerdict qreject_conv_box(OracleSession& s, std::uint64_t h, double eps, double delta,
                               double rho_fail, QueryTrace* trace) {
    const Space& sp = s.space();
    const std::uint64_t q0 = s.label_count();
    BoundingBoxResult bb = bounding_box(s, h, delta, rho_fail, 9, trace);
    if (bb.failed) return {RejectOutcome::reject, s.label_count() - q0};
    Prober pr{s, h, trace, false, {}};
    Point lo, hi;
    for (int ax = 0; ax < sp.dim(); ++ax) {
        lo[ax] = std::int32_t(bb.inner.lo[std::size_t(ax)]);
        hi[ax] = std::int32_t(bb.inner.hi[std::size_t(ax)]);
    }
    // Opposite corners of the inner box sit inside every box cell; a bot
    // here certifies the cell is not a box.
    if (!pr.member(lo) || !pr.member(hi)) return {RejectOutcome::bot, s.label_count() - q0};
    RejectOutcome o = bb.inner.diam(sp) <= eps ? RejectOutcome::accept : RejectOutcome::reject;
    return {o, s.label_count() - q0};
}

DiscoveryResult qcell_conv_box(OracleSession& s, std::uint64_t h, double delta,
                               double rho_fail, QueryTrace* trace) {
    const Space& sp = s.space();
    const std::uint64_t q0 = s.label_count();
    BoundingBoxResult bb = bounding_box(s, h, delta, rho_fail, 9, trace);
    if (bb.failed) return {DiscoveryOutcome::cluster_reject, {}, s.label_count() - q0};
    Box c = bb.outer;
    for (int ax = 0; ax < sp.dim(); ++ax) {
        c.lo[std::size_t(ax)] = std::max<std::int64_t>(0, c.lo[std::size_t(ax)]);
        c.hi[std::size_t(ax)] = std::min(sp.scale(), c.hi[std::size_t(ax)]);
    }
    return {DiscoveryOutcome::container, Container::from_box(c), s.label_count() - q0};
}

RejectVerdict reject_from_discovery(const Space& s, const DiscoveryResult& d, double t1) {
    if (d.outcome == DiscoveryOutcome::cluster_reject)
        return {RejectOutcome::bot, d.queries_used};
    RejectOutcome o =
        d.container.diam(s) <= t1 ? RejectOutcome::accept : RejectOutcome::reject;
    return {o, d.queries_used};
}

}  // namespace cct
