#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "cct/random_cluster.hpp"
#include "doctest.h"

using namespace cct;

TEST_CASE("circular interval elements, edges, endpoints") {
    CircularInterval fwd{10, 8, 5};
    CHECK(fwd.elements() == std::vector<std::int64_t>{8, 9, 0, 1, 2});
    CHECK(fwd.endpoints() == std::pair<std::int64_t, std::int64_t>{8, 2});
    CHECK(fwd.num_edges() == 4);
    CHECK(fwd.edge_interval().elements() == std::vector<std::int64_t>{8, 9, 0, 1});
    CHECK(fwd.crosses(9));
    CHECK(fwd.crosses(0));
    CHECK(!fwd.crosses(2));  // edge 2 joins vertices 2 and 3
    CHECK(!fwd.crosses(5));

    CircularInterval bwd{10, 2, -3};
    CHECK(bwd.elements() == std::vector<std::int64_t>{2, 1, 0});
    CHECK(bwd.endpoints() == std::pair<std::int64_t, std::int64_t>{0, 2});
    CHECK(bwd.edge_interval().elements() == std::vector<std::int64_t>{1, 0});
    CHECK(bwd.crosses(0));
    CHECK(!bwd.crosses(2));

    CircularInterval empty{10, 4, 0};
    CHECK(empty.elements().empty());
    CHECK(!empty.crosses(4));

    // d > n revisits elements; mass counts multiplicity.
    CircularInterval wrap{4, 1, 6};
    CHECK(wrap.elements() == std::vector<std::int64_t>{1, 2, 3, 0, 1, 2});
    std::vector<double> u{0.1, 0.2, 0.3, 0.4};
    CHECK(wrap.mass(u) == doctest::Approx(0.1 + 0.2 + 0.3 + 0.4 + 0.2 + 0.3));
}

TEST_CASE("join matrix frozen cases") {
    // Path on 3 points, edge 0-1 kept and 1-2 deleted.
    RandomClusterDraw d{false, 3, 0.5, {1, 0}, IntervalClustering(3, {0, 2}, false)};
    auto J = join_matrix(d);
    const std::vector<std::uint8_t> want{1, 1, 0, 1, 1, 0, 0, 0, 1};
    CHECK(J.phi == want);

    auto all = draw_random_clustering(true, 5, 0.0, 3);
    auto Jall = join_matrix(all);
    CHECK(std::count(Jall.phi.begin(), Jall.phi.end(), 1) == 25);

    auto none = draw_random_clustering(true, 5, 1.0, 3);
    auto Jnone = join_matrix(none);
    for (std::int64_t i = 0; i < 5; ++i)
        for (std::int64_t j = 0; j < 5; ++j) CHECK(Jnone.at(i, j) == (i == j));
}

TEST_CASE("join matrix is a symmetric transitive block structure") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto d = draw_random_clustering(true, 12, 0.4, 100 + seed);
        auto J = join_matrix(d);
        for (std::int64_t i = 0; i < 12; ++i) {
            CHECK(J.at(i, i));
            for (std::int64_t j = 0; j < 12; ++j) {
                CHECK(J.at(i, j) == J.at(j, i));
                for (std::int64_t k = 0; k < 12; ++k)
                    if (J.at(i, j) && J.at(j, k)) CHECK(J.at(i, k));
            }
        }
    }
}

TEST_CASE("expected join matrix closed forms") {
    auto p = expected_join_matrix(false, 3, 0.5);
    CHECK(p.phi(0, 0) == doctest::Approx(1.0));
    CHECK(p.phi(0, 1) == doctest::Approx(0.5));
    CHECK(p.phi(0, 2) == doctest::Approx(0.25));
    CHECK(p.phi(1, 2) == doctest::Approx(0.5));

    auto c1 = expected_join_matrix(true, 6, 1.0);
    CHECK(c1.phi.isApprox(Eigen::MatrixXd::Identity(6, 6), 1e-15));

    auto c = expected_join_matrix(true, 8, 0.3);
    for (std::int64_t i = 0; i < 8; ++i) {
        CHECK(c.phi(i, i) == doctest::Approx(1.0));
        for (std::int64_t j = 0; j < 8; ++j) CHECK(c.phi(i, j) == doctest::Approx(c.phi(j, i)));
    }
    // Entry (0,2) on the cycle: eta^2 + eta^6 - eta^8.
    const double eta = 0.7;
    CHECK(c.phi(0, 2) ==
          doctest::Approx(std::pow(eta, 2) + std::pow(eta, 6) - std::pow(eta, 8)));
}

TEST_CASE("expected join matrix matches monte carlo join frequencies") {
    const std::int64_t n = 8;
    const double rho = 0.3;
    const int trials = 20000;
    for (bool cycle : {false, true}) {
        auto phi = expected_join_matrix(cycle, n, rho);
        Eigen::MatrixXd freq = Eigen::MatrixXd::Zero(n, n);
        for (int t = 0; t < trials; ++t) {
            auto d = draw_random_clustering(cycle, n, rho, 5000 + std::uint64_t(t));
            for (std::int64_t i = 0; i < n; ++i)
                for (std::int64_t j = 0; j < n; ++j)
                    if (d.clustering.cell_of(std::uint64_t(i)) ==
                        d.clustering.cell_of(std::uint64_t(j)))
                        freq(i, j) += 1.0;
        }
        freq /= double(trials);
        for (std::int64_t i = 0; i < n; ++i)
            for (std::int64_t j = 0; j < n; ++j) {
                const double p = phi.phi(i, j);
                const double se = std::sqrt(std::max(p * (1 - p), 1e-12) / trials);
                CHECK(std::abs(freq(i, j) - p) < 4 * se + 1e-9);
            }
    }
}

TEST_CASE("path spectrum clears rho/2 and cycle clears rho/4") {
    for (std::int64_t n : {8, 32}) {
        for (double rho : {0.1, 0.5, 0.9}) {
            auto p = expected_join_matrix(false, n, rho);
            CHECK(min_eigenvalue(p) > rho / 2);
        }
        for (double rho : {0.2, 0.5, 0.9}) {
            auto c = expected_join_matrix(true, n, rho);
            CHECK(min_eigenvalue(c) > rho / 4);
        }
    }
    auto ident = expected_join_matrix(true, 8, 1.0);
    CHECK(min_eigenvalue(ident) == doctest::Approx(1.0));
}

TEST_CASE("circulant eigenvalues agree with the dense solver") {
    for (double rho : {0.25, 0.6}) {
        auto c = expected_join_matrix(true, 32, rho);
        CHECK(min_eigenvalue_circulant(c) ==
              doctest::Approx(min_eigenvalue_dense(c)).epsilon(1e-8));
    }
    auto p = expected_join_matrix(false, 8, 0.5);
    CHECK_THROWS(min_eigenvalue_circulant(p));
}

TEST_CASE("cross term maximum: cycle vanishes, path stays under the bound") {
    auto c = expected_join_matrix(true, 50, 0.3);
    CHECK(std::abs(cross_term_max(c, 0.01)) < 1e-15);

    auto p = expected_join_matrix(false, 100, 0.3);
    const double v = cross_term_max(p, 0.01);
    CHECK(v > 0);
    CHECK(v <= 2 * 0.01 / (100 * 0.3 * 0.3));
    CHECK(cross_term_max(p, 0.0) == 0.0);
}

TEST_CASE("cross term maximum matches exhaustive vertex enumeration") {
    const std::int64_t n = 6;
    auto p = expected_join_matrix(false, n, 0.4);
    std::vector<double> s(static_cast<std::size_t>(n));
    for (std::int64_t j = 0; j < n; ++j) s[std::size_t(j)] = p.phi.col(j).mean();
    // All balanced sign patterns: k entries +delta, k entries -delta.
    const double delta = 0.05;
    double best = 0;
    for (int mask_p = 0; mask_p < 64; ++mask_p)
        for (int mask_m = 0; mask_m < 64; ++mask_m) {
            if ((mask_p & mask_m) != 0) continue;
            if (__builtin_popcount(mask_p) != __builtin_popcount(mask_m)) continue;
            double v = 0;
            for (int j = 0; j < 6; ++j) {
                if (mask_p & (1 << j)) v += delta * s[std::size_t(j)];
                if (mask_m & (1 << j)) v -= delta * s[std::size_t(j)];
            }
            best = std::max(best, v);
        }
    CHECK(cross_term_max(p, delta) == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("relative concentration of point mass and uniform") {
    const std::int64_t n = 64;
    const double rho = 0.3;
    const double t = 1.0 / std::log(double(n));
    std::vector<double> point(std::size_t(n), 0.0);
    point[0] = 1.0;
    auto rc = relative_concentration(point, false, rho, t);
    CHECK(rc.value == doctest::Approx(1.0 / t));
    CHECK(rc.argmax.d == 1);
    CHECK(rc.argmax.start == 0);

    std::vector<double> unif(std::size_t(n), 1.0 / double(n));
    auto ru = relative_concentration(unif, true, rho, t);
    double want = 0;
    for (std::int64_t d = 1; d <= n; ++d)
        want = std::max(want, (double(d) / double(n)) / std::max(rho * double(d - 1), t));
    CHECK(ru.value == doctest::Approx(want).epsilon(1e-12));
    CHECK(ru.value >= 1.0 / (double(n) * t));
}

TEST_CASE("concentration witness satisfies the structural guarantee") {
    const std::int64_t n = 128;
    const double rho = 0.25;
    const double t = 1.0 / std::log(double(n));
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed * 77);
        std::vector<double> mu(static_cast<std::size_t>(n));
        double total = 0;
        for (auto& x : mu) {
            x = -std::log(1.0 - rng.uniform());
            // Occasional spikes to stress the interval scan.
            if (rng.bernoulli(0.05)) x *= 40;
            total += x;
        }
        for (auto& x : mu) x /= total;
        for (bool cycle : {false, true}) {
            auto rc = relative_concentration(mu, cycle, rho, t);
            auto w = concentration_witness(mu, cycle, rho, t);
            CHECK(rho * double(w.interval.num_edges()) <= t + 1e-12);
            CHECK(w.mass >= 0.5 * t * rc.value - 1e-12);
        }
    }
}

TEST_CASE("small and large intervals split each pair") {
    const std::int64_t n = 10;
    const double rho = 0.4;
    auto s = small_interval(true, n, rho, 2, 5);
    auto l = large_interval(true, n, rho, 2, 5);
    CHECK(s.start == 2);
    CHECK(s.d == 4);  // vertices 2..5, three edges
    CHECK(l.start == 5);
    CHECK(l.d == 8);  // vertices 5..2 the long way, seven edges
    CHECK(expected_join(true, rho, s) == doctest::Approx(std::pow(0.6, 3)));
    CHECK(expected_join(true, rho, l) == doctest::Approx(std::pow(0.6, 7)));

    // Path: the wrapping interval never joins.
    auto lp = large_interval(false, n, rho, 2, 5);
    CHECK(expected_join(false, rho, lp) == 0.0);

    // Antipodal tie resolves toward the smaller start for both.
    auto st = small_interval(true, 10, rho, 0, 5);
    auto lt = large_interval(true, 10, rho, 0, 5);
    CHECK(st.start == 0);
    CHECK(lt.start == 0);
}

TEST_CASE("zeta values and bound") {
    CHECK(zeta_value(false, 10, 0.3) == 0.0);
    CHECK(zeta_value(true, 10, 0.5) == doctest::Approx(0.03125));  // eta^5
    CHECK(zeta_value(true, 9, 0.5) == doctest::Approx(std::pow(0.5, 5)));  // ceil(9/2)
    CHECK(zeta_value(true, 12, 1.0) == 0.0);
    CHECK(zeta_bound_check(false, 10, 0.3));
    CHECK(zeta_bound_check(true, 10, 0.5));
    CHECK(zeta_bound_check(true, 16, 0.2));
}
