#pragma once

#include <array>
#include <cassert>
#include <cstdint>
#include <cmath>
#include <span>
#include <string>

#include "cct/rng.hpp"

namespace cct {

inline constexpr int kMaxDim = 4;

// A lattice point. Coordinates beyond the space dimension are zero.
struct Point {
    std::array<std::int32_t, kMaxDim> c{};

    std::int32_t& operator[](int i) { return c[std::size_t(i)]; }
    std::int32_t operator[](int i) const { return c[std::size_t(i)]; }
    friend bool operator==(const Point&, const Point&) = default;
};

enum class MetricKind {
    lp_grid,    // normalized ell_p on the lattice [P]^d
    threshold,  // min(|x-y|, R)/R on the line [P]
};

// Finite metric space: the lattice {0,...,P-1}^d with a diameter-1 metric.
// The unit cube at resolution 2^-k is the same object with P = 2^k + 1;
// distances depend only on coordinate differences in lattice steps.
class Space {
public:
    // Normalized ell_p: dist(x,y) = ||x-y||_p / ||(P-1,...,P-1)||_p.
    // p must be 1, 2, or +infinity.
    static Space lp_grid(int d, std::int64_t points_per_axis, double p);

    // d = 1 only: dist(x,y) = min(|x-y|, R)/R with R in lattice steps.
    static Space threshold_line(std::int64_t points_per_axis, std::int64_t r_steps);

    int dim() const { return d_; }
    std::int64_t points_per_axis() const { return pts_; }
    std::int64_t scale() const { return pts_ - 1; }  // steps per axis
    MetricKind kind() const { return kind_; }
    double p() const { return p_; }
    std::int64_t r_steps() const { return r_steps_; }

    std::uint64_t size() const;  // P^d
    std::uint64_t encode(const Point& x) const;
    Point decode(std::uint64_t idx) const;
    bool in_bounds(const Point& x) const;

    double dist(const Point& a, const Point& b) const {
        return raw(diffs(a, b)) / norm_;
    }
    double dist_idx(std::uint64_t a, std::uint64_t b) const {
        return dist(decode(a), decode(b));
    }
    // Diameter of an axis-aligned box whose side lengths are given in steps
    // (side = max coordinate difference, so a single point has side 0).
    double box_diam(std::span<const std::int64_t> sides) const {
        return raw(sides) / norm_;
    }
    double diameter() const { return 1.0; }

    // Largest number of points per axis-block so that any box with at most
    // that many points per side has diameter <= target. At least 1.
    std::int64_t points_per_block(double target_diam) const;

    std::string describe() const;

private:
    Space() = default;

    std::array<std::int64_t, kMaxDim> diffs(const Point& a, const Point& b) const {
        std::array<std::int64_t, kMaxDim> d{};
        for (int i = 0; i < d_; ++i)
            d[std::size_t(i)] = std::int64_t(std::llabs(std::int64_t(a[i]) - b[i]));
        return d;
    }
    double raw(std::span<const std::int64_t> diffs) const;
    double raw(const std::array<std::int64_t, kMaxDim>& d) const {
        return raw(std::span<const std::int64_t>(d.data(), std::size_t(d_)));
    }

    int d_ = 1;
    std::int64_t pts_ = 2;
    MetricKind kind_ = MetricKind::lp_grid;
    double p_ = 1.0;
    std::int64_t r_steps_ = 1;
    double norm_ = 1.0;  // raw distance between opposite corners
};

// Exact integer helpers for comparisons and tie-breaking.
std::int64_t l2sq_steps(const Point& a, const Point& b, int d);
std::int64_t linf_steps(const Point& a, const Point& b, int d);
std::int64_t l1_steps(const Point& a, const Point& b, int d);

// Axis-aligned lattice box with inclusive bounds.
struct Box {
    std::array<std::int64_t, kMaxDim> lo{};
    std::array<std::int64_t, kMaxDim> hi{};

    static Box full(const Space& s) {
        Box b;
        for (int i = 0; i < s.dim(); ++i) b.hi[std::size_t(i)] = s.scale();
        return b;
    }
    static Box of_point(const Point& x, int d) {
        Box b;
        for (int i = 0; i < d; ++i) b.lo[std::size_t(i)] = b.hi[std::size_t(i)] = x[i];
        return b;
    }

    bool contains(const Point& x, int d) const {
        for (int i = 0; i < d; ++i)
            if (x[i] < lo[std::size_t(i)] || x[i] > hi[std::size_t(i)]) return false;
        return true;
    }
    void expand_to(const Point& x, int d) {
        for (int i = 0; i < d; ++i) {
            lo[std::size_t(i)] = std::min(lo[std::size_t(i)], std::int64_t(x[i]));
            hi[std::size_t(i)] = std::max(hi[std::size_t(i)], std::int64_t(x[i]));
        }
    }
    std::int64_t side(int i) const { return hi[std::size_t(i)] - lo[std::size_t(i)]; }
    std::uint64_t num_points(int d) const {
        std::uint64_t n = 1;
        for (int i = 0; i < d; ++i) n *= std::uint64_t(side(i) + 1);
        return n;
    }
    double diam(const Space& s) const {
        std::array<std::int64_t, kMaxDim> sides{};
        for (int i = 0; i < s.dim(); ++i) sides[std::size_t(i)] = side(i);
        return s.box_diam(std::span<const std::int64_t>(sides.data(), std::size_t(s.dim())));
    }
    Point sample(Rng& rng, int d) const {
        Point x;
        for (int i = 0; i < d; ++i)
            x[i] = std::int32_t(rng.uniform_int(lo[std::size_t(i)], hi[std::size_t(i)]));
        return x;
    }
    friend bool operator==(const Box&, const Box&) = default;
};

}  // namespace cct
