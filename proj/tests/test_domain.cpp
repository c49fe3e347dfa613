#include "doctest.h"

#include <limits>

#include "cct/domain.hpp"

using namespace cct;

namespace {
constexpr double kInfP = std::numeric_limits<double>::infinity();

Point pt(std::int32_t a) {
    Point p;
    p[0] = a;
    return p;
}
Point pt(std::int32_t a, std::int32_t b) {
    Point p;
    p[0] = a;
    p[1] = b;
    return p;
}
Point pt(std::int32_t a, std::int32_t b, std::int32_t c) {
    Point p;
    p[0] = a;
    p[1] = b;
    p[2] = c;
    return p;
}
}  // namespace

TEST_CASE("every space has diameter exactly 1") {
    for (double p : {1.0, 2.0, kInfP}) {
        for (int d = 1; d <= 3; ++d) {
            auto s = Space::lp_grid(d, 16, p);
            Point a, b;
            for (int i = 0; i < d; ++i) b[i] = 15;
            CHECK(s.dist(a, b) == 1.0);
            CHECK(s.diameter() == 1.0);
        }
    }
    auto t = Space::threshold_line(100, 7);
    CHECK(t.dist(pt(0), pt(7)) == 1.0);
    CHECK(t.dist(pt(0), pt(99)) == 1.0);
}

TEST_CASE("unit step on the 4-point line is 1/3") {
    for (double p : {1.0, 2.0, kInfP}) {
        auto s = Space::lp_grid(1, 4, p);
        CHECK(s.dist(pt(0), pt(1)) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    }
}

TEST_CASE("lp distances on a 2d grid") {
    auto l1 = Space::lp_grid(2, 5, 1.0);
    auto l2 = Space::lp_grid(2, 5, 2.0);
    auto li = Space::lp_grid(2, 5, kInfP);
    // scale 4; normalizers: l1 -> 8, l2 -> sqrt(32), linf -> 4.
    CHECK(l1.dist(pt(0, 0), pt(3, 1)) == doctest::Approx(4.0 / 8.0));
    CHECK(l2.dist(pt(0, 0), pt(3, 4)) == doctest::Approx(5.0 / std::sqrt(32.0)));
    CHECK(li.dist(pt(0, 0), pt(3, 1)) == doctest::Approx(3.0 / 4.0));
}

TEST_CASE("threshold metric saturates at R") {
    auto s = Space::threshold_line(64, 8);
    CHECK(s.dist(pt(10), pt(13)) == doctest::Approx(3.0 / 8.0));
    CHECK(s.dist(pt(10), pt(18)) == 1.0);
    CHECK(s.dist(pt(10), pt(60)) == 1.0);
    CHECK(s.dist(pt(5), pt(5)) == 0.0);
}

TEST_CASE("encode and decode are inverse") {
    auto s = Space::lp_grid(3, 17, 2.0);
    for (std::uint64_t idx : {0ull, 1ull, 16ull, 17ull, 4912ull, 17ull * 17 * 17 - 1}) {
        CHECK(s.encode(s.decode(idx)) == idx);
    }
    CHECK(s.encode(pt(1, 0, 0)) == 1);
    CHECK(s.encode(pt(0, 1, 0)) == 17);
    CHECK(s.encode(pt(0, 0, 1)) == 17 * 17);
    CHECK(s.size() == 17ull * 17 * 17);
}

TEST_CASE("points_per_block matches the target diameter") {
    auto s = Space::lp_grid(2, 4097, 2.0);
    CHECK(s.points_per_block(0.5) == 2049);       // side 2048 steps, diam 1/2
    CHECK(s.points_per_block(1.0 / 4096) == 2);   // one step
    CHECK(s.points_per_block(1e-9) == 1);         // singletons
    CHECK(s.points_per_block(2.0) == 4097);       // whole axis

    auto t = Space::threshold_line(4096, 64);
    CHECK(t.points_per_block(0.5) == 33);  // side 32 = R/2

    // A block with that many points per side indeed has diameter <= target.
    std::int64_t b = s.points_per_block(0.3);
    std::array<std::int64_t, kMaxDim> sides{b - 1, b - 1, 0, 0};
    CHECK(s.box_diam({sides.data(), 2}) <= 0.3);
    sides = {b, b, 0, 0};
    CHECK(s.box_diam({sides.data(), 2}) > 0.3);
}

TEST_CASE("box helpers") {
    auto s = Space::lp_grid(2, 16, 1.0);
    Box b;
    b.lo = {2, 3, 0, 0};
    b.hi = {5, 9, 0, 0};
    CHECK(b.contains(pt(2, 3), 2));
    CHECK(b.contains(pt(5, 9), 2));
    CHECK(!b.contains(pt(6, 4), 2));
    CHECK(b.side(0) == 3);
    CHECK(b.num_points(2) == 4 * 7);
    CHECK(b.diam(s) == doctest::Approx((3.0 + 6.0) / 30.0));

    Box full = Box::full(s);
    CHECK(full.num_points(2) == 256);
    CHECK(full.diam(s) == 1.0);

    Rng rng(3);
    for (int i = 0; i < 200; ++i) CHECK(b.contains(b.sample(rng, 2), 2));

    Box grown = Box::of_point(pt(4, 4), 2);
    grown.expand_to(pt(2, 7), 2);
    CHECK(grown.lo == std::array<std::int64_t, kMaxDim>{2, 4, 0, 0});
    CHECK(grown.hi == std::array<std::int64_t, kMaxDim>{4, 7, 0, 0});
}

TEST_CASE("integer norms") {
    CHECK(l2sq_steps(pt(0, 0), pt(3, 4), 2) == 25);
    CHECK(linf_steps(pt(1, 7), pt(4, 2), 2) == 5);
    CHECK(l1_steps(pt(1, 7), pt(4, 2), 2) == 8);
}

TEST_CASE("invalid constructions are rejected") {
    CHECK_THROWS(Space::lp_grid(0, 4, 1.0));
    CHECK_THROWS(Space::lp_grid(1, 1, 1.0));
    CHECK_THROWS(Space::lp_grid(1, 4, 3.0));
    CHECK_THROWS(Space::threshold_line(8, 0));
    CHECK_THROWS(Space::threshold_line(8, 8));  // R must be <= P-1
}
