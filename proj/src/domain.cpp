#include "cct/domain.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace cct {

Space Space::lp_grid(int d, std::int64_t points_per_axis, double p) {
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("dimension out of range");
    if (points_per_axis < 2) throw std::invalid_argument("need at least 2 points per axis");
    const bool p_ok = p == 1.0 || p == 2.0 || std::isinf(p);
    if (!p_ok) throw std::invalid_argument("p must be 1, 2, or inf");

    Space s;
    s.d_ = d;
    s.pts_ = points_per_axis;
    s.kind_ = MetricKind::lp_grid;
    s.p_ = p;
    std::array<std::int64_t, kMaxDim> corner{};
    for (int i = 0; i < d; ++i) corner[std::size_t(i)] = points_per_axis - 1;
    s.norm_ = 1.0;
    s.norm_ = s.raw(corner);
    return s;
}

Space Space::threshold_line(std::int64_t points_per_axis, std::int64_t r_steps) {
    if (points_per_axis < 2) throw std::invalid_argument("need at least 2 points per axis");
    if (r_steps < 1 || r_steps > points_per_axis - 1)
        throw std::invalid_argument("threshold radius must lie in [1, P-1]");

    Space s;
    s.d_ = 1;
    s.pts_ = points_per_axis;
    s.kind_ = MetricKind::threshold;
    s.r_steps_ = r_steps;
    s.norm_ = double(r_steps);
    return s;
}

std::uint64_t Space::size() const {
    std::uint64_t n = 1;
    for (int i = 0; i < d_; ++i) n *= std::uint64_t(pts_);
    return n;
}

std::uint64_t Space::encode(const Point& x) const {
    std::uint64_t idx = 0;
    for (int i = d_ - 1; i >= 0; --i) idx = idx * std::uint64_t(pts_) + std::uint64_t(x[i]);
    return idx;
}

Point Space::decode(std::uint64_t idx) const {
    Point x;
    for (int i = 0; i < d_; ++i) {
        x[i] = std::int32_t(idx % std::uint64_t(pts_));
        idx /= std::uint64_t(pts_);
    }
    return x;
}

bool Space::in_bounds(const Point& x) const {
    for (int i = 0; i < d_; ++i)
        if (x[i] < 0 || x[i] >= pts_) return false;
    return true;
}

double Space::raw(std::span<const std::int64_t> diffs) const {
    if (kind_ == MetricKind::threshold) {
        return double(std::min(diffs[0], r_steps_));
    }
    if (p_ == 1.0) {
        std::int64_t s = 0;
        for (auto v : diffs) s += v;
        return double(s);
    }
    if (p_ == 2.0) {
        std::int64_t s = 0;
        for (auto v : diffs) s += v * v;
        return std::sqrt(double(s));
    }
    std::int64_t m = 0;
    for (auto v : diffs) m = std::max(m, v);
    return double(m);
}

std::int64_t Space::points_per_block(double target_diam) const {
    if (target_diam <= 0.0) return 1;
    // A block of b points per axis has side b-1 steps on every axis, hence
    // diameter (b-1)/scale for ell_p and min(b-1, R)/R on the threshold line.
    const double steps = kind_ == MetricKind::threshold ? double(r_steps_) : double(scale());
    const auto side = std::int64_t(std::floor(target_diam * steps * (1.0 + 1e-12)));
    return std::clamp<std::int64_t>(side + 1, 1, pts_);
}

std::string Space::describe() const {
    std::ostringstream os;
    if (kind_ == MetricKind::threshold) {
        os << "threshold line, " << pts_ << " points, R=" << r_steps_ << " steps";
    } else {
        os << "l";
        if (std::isinf(p_)) os << "inf";
        else os << std::int64_t(p_);
        os << " grid, " << pts_ << "^" << d_ << " points";
    }
    return os.str();
}

std::int64_t l2sq_steps(const Point& a, const Point& b, int d) {
    std::int64_t s = 0;
    for (int i = 0; i < d; ++i) {
        std::int64_t v = std::int64_t(a[i]) - b[i];
        s += v * v;
    }
    return s;
}

std::int64_t linf_steps(const Point& a, const Point& b, int d) {
    std::int64_t m = 0;
    for (int i = 0; i < d; ++i)
        m = std::max(m, std::int64_t(std::llabs(std::int64_t(a[i]) - b[i])));
    return m;
}

std::int64_t l1_steps(const Point& a, const Point& b, int d) {
    std::int64_t s = 0;
    for (int i = 0; i < d; ++i) s += std::llabs(std::int64_t(a[i]) - b[i]);
    return s;
}

}  // namespace cct
