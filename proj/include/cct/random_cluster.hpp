#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cct/generators.hpp"

namespace cct {

// Circular interval <<i, d>> over Z_n: |d| elements walked clockwise from i
// when d >= 0, counter-clockwise when d < 0. Not identified with its element
// multiset; d > n revisits elements.
struct CircularInterval {
    std::int64_t n = 0;
    std::int64_t start = 0;
    std::int64_t d = 0;

    std::vector<std::int64_t> elements() const;
    // I*: integers naming the edges spanned by the elements (edge e joins
    // vertices e and e+1 mod n). Empty when d = 0; <<i, d-1>> when d >= 1;
    // <<i-1, 1-|d|>> when d <= -1.
    CircularInterval edge_interval() const;
    std::int64_t num_edges() const { return d == 0 ? 0 : std::abs(d) - 1; }
    std::pair<std::int64_t, std::int64_t> endpoints() const;
    bool crosses(std::int64_t edge) const;

    double mass(const std::vector<double>& u) const;  // u[I], multiplicity counted
};

// Exact join matrix of one draw: Phi[i][j] = 1 iff i and j share a cell.
struct JoinMatrix {
    std::int64_t n = 0;
    std::vector<std::uint8_t> phi;  // row-major

    bool at(std::int64_t i, std::int64_t j) const {
        return phi[std::size_t(i * n + j)] != 0;
    }
};

JoinMatrix join_matrix(const RandomClusterDraw& draw);

// Closed-form E[Phi]: path entries eta^|i-j|, cycle entries
// eta^|i-j| + eta^(n-|i-j|) - eta^n, with eta = 1 - rho.
struct ExpectedJoinMatrix {
    bool cycle = false;
    std::int64_t n = 0;
    double rho = 1.0;
    double eta = 0.0;
    Eigen::MatrixXd phi;
};

ExpectedJoinMatrix expected_join_matrix(bool cycle, std::int64_t n, double rho);

// Smallest eigenvalue. The dense route uses a symmetric eigensolver; the
// circulant route (cycle only) evaluates the DFT cosine sums exactly.
double min_eigenvalue_dense(const ExpectedJoinMatrix& phi);
double min_eigenvalue_circulant(const ExpectedJoinMatrix& phi);
// Dispatch: dense for the path, circulant for the cycle.
double min_eigenvalue(const ExpectedJoinMatrix& phi);

// Exact maximum of nu^T phi z over {sum z = 0, ||z||_inf <= delta_inf},
// nu uniform. Linear objective over a box-and-hyperplane polytope: pair the
// largest column means against the smallest, saturating at +/- delta.
double cross_term_max(const ExpectedJoinMatrix& phi, double delta_inf);

// Lambda_t(mu) = max over intervals I (|I| <= n; the path family skips
// intervals crossing edge n-1) of mu[I] / max{rho |I*|, t}. Exhaustive
// O(n^2) scan; ties broken toward smaller size, then smaller start.
struct RelativeConcentration {
    double value = 0.0;
    CircularInterval argmax;
    double rho = 0.0;
    double t = 0.0;
};

RelativeConcentration relative_concentration(const std::vector<double>& mu, bool cycle,
                                             double rho, double t);

// Best interval subject to rho |I*| <= t: maximizes mu[I] within the
// feasible sizes. Its mass is guaranteed to reach (t/2) * Lambda_t.
struct ConcentrationWitness {
    CircularInterval interval;
    double mass = 0.0;
};

ConcentrationWitness concentration_witness(const std::vector<double>& mu, bool cycle,
                                           double rho, double t);

// The two circular intervals joining a pair of vertices on the cycle; the
// small one has the larger join probability. Ties toward smaller start.
CircularInterval small_interval(bool cycle, std::int64_t n, double rho, std::int64_t i,
                                std::int64_t j);
CircularInterval large_interval(bool cycle, std::int64_t n, double rho, std::int64_t i,
                                std::int64_t j);

// E[J[I]]: probability every edge of I* is kept. Zero for path intervals
// that cross the missing edge n-1.
double expected_join(bool cycle, double rho, const CircularInterval& interval);

// zeta = max over pairs of E[J[large interval]]; 0 on the path and at most
// (1-rho)^(n/2) on the cycle.
double zeta_value(bool cycle, std::int64_t n, double rho);
bool zeta_bound_check(bool cycle, std::int64_t n, double rho);

}  // namespace cct
