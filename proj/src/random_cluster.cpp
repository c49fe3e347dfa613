#include "cct/random_cluster.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cct {

// ---------- CircularInterval ----------

std::vector<std::int64_t> CircularInterval::elements() const {
    std::vector<std::int64_t> out;
    out.reserve(std::size_t(std::abs(d)));
    for (std::int64_t k = 0; k < std::abs(d); ++k) {
        const std::int64_t step = d >= 0 ? k : -k;
        out.push_back(((start + step) % n + n) % n);
    }
    return out;
}

CircularInterval CircularInterval::edge_interval() const {
    if (d == 0) return CircularInterval{n, start, 0};
    if (d >= 1) return CircularInterval{n, start, d - 1};
    return CircularInterval{n, ((start - 1) % n + n) % n, 1 - std::abs(d)};
}

std::pair<std::int64_t, std::int64_t> CircularInterval::endpoints() const {
    if (d >= 0) return {start, ((start + d - 1) % n + n) % n};
    return {((start + d + 1) % n + n) % n, start};
}

bool CircularInterval::crosses(std::int64_t edge) const {
    const CircularInterval e = edge_interval();
    if (e.d == 0) return false;
    if (std::abs(e.d) >= n) return true;
    if (e.d > 0) return ((edge - e.start) % n + n) % n < e.d;
    return ((e.start - edge) % n + n) % n < -e.d;
}

double CircularInterval::mass(const std::vector<double>& u) const {
    double total = 0;
    for (std::int64_t v : elements()) total += u[std::size_t(v)];
    return total;
}

// ---------- join matrices ----------

JoinMatrix join_matrix(const RandomClusterDraw& draw) {
    const std::int64_t n = draw.n;
    JoinMatrix out;
    out.n = n;
    out.phi.assign(std::size_t(n * n), 0);
    std::vector<std::uint32_t> cell(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i)
        cell[std::size_t(i)] = draw.clustering.cell_of(std::uint64_t(i));
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < n; ++j)
            out.phi[std::size_t(i * n + j)] = cell[std::size_t(i)] == cell[std::size_t(j)];
    return out;
}

ExpectedJoinMatrix expected_join_matrix(bool cycle, std::int64_t n, double rho) {
    if (n < 2) throw std::invalid_argument("expected_join_matrix: n < 2");
    if (rho <= 0.0 || rho > 1.0) throw std::invalid_argument("expected_join_matrix: rho");
    ExpectedJoinMatrix out;
    out.cycle = cycle;
    out.n = n;
    out.rho = rho;
    out.eta = 1.0 - rho;
    out.phi.resize(n, n);
    // Powers of eta up to n, computed once.
    std::vector<double> pow_eta(std::size_t(n + 1));
    pow_eta[0] = 1.0;
    for (std::int64_t k = 1; k <= n; ++k)
        pow_eta[std::size_t(k)] = pow_eta[std::size_t(k - 1)] * out.eta;
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < n; ++j) {
            const std::int64_t k = std::abs(i - j);
            out.phi(i, j) = cycle ? pow_eta[std::size_t(k)] + pow_eta[std::size_t(n - k)] -
                                        pow_eta[std::size_t(n)]
                                  : pow_eta[std::size_t(k)];
        }
    return out;
}

// ---------- spectra ----------

double min_eigenvalue_dense(const ExpectedJoinMatrix& phi) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(phi.phi,
                                                          Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

double min_eigenvalue_circulant(const ExpectedJoinMatrix& phi) {
    if (!phi.cycle)
        throw std::invalid_argument("min_eigenvalue_circulant: path matrix is not circulant");
    const std::int64_t n = phi.n;
    // First row c_k = phi(0, k); eigenvalues are the DFT sums
    // lambda_l = sum_k c_k cos(2 pi l k / n) (real: c_k = c_{n-k}).
    double best = std::numeric_limits<double>::infinity();
    const double tau = 2.0 * 3.14159265358979323846;
    for (std::int64_t l = 0; l < n; ++l) {
        double lam = 0;
        for (std::int64_t k = 0; k < n; ++k)
            lam += phi.phi(0, k) * std::cos(tau * double(l) * double(k) / double(n));
        best = std::min(best, lam);
    }
    return best;
}

double min_eigenvalue(const ExpectedJoinMatrix& phi) {
    return phi.cycle ? min_eigenvalue_circulant(phi) : min_eigenvalue_dense(phi);
}

// ---------- cross term ----------

double cross_term_max(const ExpectedJoinMatrix& phi, double delta_inf) {
    if (delta_inf < 0) throw std::invalid_argument("cross_term_max: negative delta");
    const std::int64_t n = phi.n;
    // Objective nu^T phi z = sum_j S_j z_j with S_j the column mean of phi.
    std::vector<double> s(static_cast<std::size_t>(n));
    for (std::int64_t j = 0; j < n; ++j) s[std::size_t(j)] = phi.phi.col(j).mean();
    std::vector<double> desc = s;
    std::sort(desc.begin(), desc.end(), std::greater<double>());
    // Optimal vertex: +delta on the largest halves, -delta on the smallest,
    // middle entry zero when n is odd. Paired form keeps the sum exact.
    double value = 0;
    for (std::int64_t k = 0; k < n / 2; ++k)
        value += std::max(0.0, desc[std::size_t(k)] - desc[std::size_t(n - 1 - k)]);
    return delta_inf * value;
}

// ---------- relative concentration ----------

namespace {

// mass of <<start, d>> (1 <= d <= n) from prefix sums, wrapping once.
double interval_mass(const std::vector<double>& pre, std::int64_t n, std::int64_t start,
                     std::int64_t d) {
    const std::int64_t end = start + d;
    if (end <= n) return pre[std::size_t(end)] - pre[std::size_t(start)];
    return (pre[std::size_t(n)] - pre[std::size_t(start)]) + pre[std::size_t(end - n)];
}

}  // namespace

RelativeConcentration relative_concentration(const std::vector<double>& mu, bool cycle,
                                             double rho, double t) {
    const std::int64_t n = std::int64_t(mu.size());
    if (n < 1) throw std::invalid_argument("relative_concentration: empty mu");
    if (t <= 0) throw std::invalid_argument("relative_concentration: t <= 0");
    std::vector<double> pre(std::size_t(n + 1), 0.0);
    for (std::int64_t i = 0; i < n; ++i)
        pre[std::size_t(i + 1)] = pre[std::size_t(i)] + mu[std::size_t(i)];

    RelativeConcentration out;
    out.rho = rho;
    out.t = t;
    out.value = -1;
    for (std::int64_t d = 1; d <= n; ++d) {
        const double denom = std::max(rho * double(d - 1), t);
        // The path family keeps only intervals inside [0, n-1]: start+d <= n.
        const std::int64_t max_start = cycle ? n - 1 : n - d;
        for (std::int64_t start = 0; start <= max_start; ++start) {
            const double val = interval_mass(pre, n, start, d) / denom;
            if (val > out.value) {
                out.value = val;
                out.argmax = CircularInterval{n, start, d};
            }
        }
    }
    return out;
}

ConcentrationWitness concentration_witness(const std::vector<double>& mu, bool cycle,
                                           double rho, double t) {
    const std::int64_t n = std::int64_t(mu.size());
    if (n < 1) throw std::invalid_argument("concentration_witness: empty mu");
    std::vector<double> pre(std::size_t(n + 1), 0.0);
    for (std::int64_t i = 0; i < n; ++i)
        pre[std::size_t(i + 1)] = pre[std::size_t(i)] + mu[std::size_t(i)];

    // Feasible sizes: rho (d-1) <= t.
    const std::int64_t max_d =
        rho > 0 ? std::min<std::int64_t>(n, std::int64_t(std::floor(t / rho)) + 1) : n;
    ConcentrationWitness out;
    out.mass = -1;
    for (std::int64_t d = 1; d <= max_d; ++d) {
        const std::int64_t max_start = cycle ? n - 1 : n - d;
        for (std::int64_t start = 0; start <= max_start; ++start) {
            const double m = interval_mass(pre, n, start, d);
            if (m > out.mass) {
                out.mass = m;
                out.interval = CircularInterval{n, start, d};
            }
        }
    }
    return out;
}

// ---------- pairwise intervals and zeta ----------

namespace {

std::pair<CircularInterval, CircularInterval> pair_intervals(std::int64_t n, std::int64_t i,
                                                             std::int64_t j) {
    // I1 walks i -> j clockwise, I2 walks j -> i.
    return {CircularInterval{n, i, j - i + 1}, CircularInterval{n, j, n - (j - i) + 1}};
}

}  // namespace

double expected_join(bool cycle, double rho, const CircularInterval& interval) {
    if (!cycle && interval.crosses(interval.n - 1)) return 0.0;
    return std::pow(1.0 - rho, double(interval.num_edges()));
}

CircularInterval small_interval(bool cycle, std::int64_t n, double rho, std::int64_t i,
                                std::int64_t j) {
    if (i > j) std::swap(i, j);
    auto [i1, i2] = pair_intervals(n, i, j);
    const double e1 = expected_join(cycle, rho, i1);
    const double e2 = expected_join(cycle, rho, i2);
    if (e1 > e2) return i1;
    if (e2 > e1) return i2;
    return i1.start <= i2.start ? i1 : i2;  // tie toward smaller start
}

CircularInterval large_interval(bool cycle, std::int64_t n, double rho, std::int64_t i,
                                std::int64_t j) {
    if (i > j) std::swap(i, j);
    auto [i1, i2] = pair_intervals(n, i, j);
    const double e1 = expected_join(cycle, rho, i1);
    const double e2 = expected_join(cycle, rho, i2);
    if (e1 < e2) return i1;
    if (e2 < e1) return i2;
    return i1.start <= i2.start ? i1 : i2;
}

double zeta_value(bool cycle, std::int64_t n, double rho) {
    double best = 0;
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = i + 1; j < n; ++j)
            best = std::max(best, expected_join(cycle, rho, large_interval(cycle, n, rho, i, j)));
    return best;
}

bool zeta_bound_check(bool cycle, std::int64_t n, double rho) {
    const double z = zeta_value(cycle, n, rho);
    if (!cycle) return z == 0.0;
    return z <= std::pow(1.0 - rho, double(n) / 2.0) + 1e-12;
}

}  // namespace cct
