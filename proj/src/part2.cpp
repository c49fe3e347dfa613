#include "cct/part2.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace cct {

double expected_phi_mean(bool cycle, std::int64_t n, double rho) {
    if (n <= 0) throw std::invalid_argument("n must be positive");
    const double eta = 1.0 - rho;
    const double nn = double(n);
    if (!cycle) {
        // sum_{ij} eta^|i-j| = n + 2 sum_{k>=1} (n-k) eta^k
        double total = nn;
        double pw = 1.0;
        for (std::int64_t k = 1; k < n; ++k) {
            pw *= eta;
            total += 2.0 * double(n - k) * pw;
        }
        return total / (nn * nn);
    }
    // Circulant rows all sum to sum_j (eta^j + eta^{n-j} - eta^n), j = 0..n-1.
    double a = 0.0;  // sum_{j=0}^{n-1} eta^j
    double pw = 1.0;
    for (std::int64_t j = 0; j < n; ++j) {
        a += pw;
        pw *= eta;
    }
    const double eta_n = pw;
    const double row = a + (a - 1.0 + eta_n) - nn * eta_n;
    return row / nn;
}

// ---------- zero-query uniformity tester ----------

std::int64_t Alg1Config::sample_budget() const {
    const double ln_n = std::log(double(n));
    const double m = c * (std::sqrt(double(n)) / (eps * eps)) *
                     (ln_n * ln_n / std::pow(rho, 1.5));
    return std::int64_t(std::ceil(m));
}

double Alg1Config::concentration_cutoff() const { return alpha * std::log(double(n)); }

double Alg1Config::threshold() const {
    return expected_phi_mean(cycle, n, rho) + beta * eps * eps * rho / double(n);
}

void Alg1Config::validate() const {
    if (n < 2) throw std::invalid_argument("n must be at least 2");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must be in (0,1)");
    if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must be in (0,1]");
    if (!(beta <= 1.0 / 3.0)) throw std::invalid_argument("beta must be at most 1/3");
    const double ln_n = std::log(double(n));
    const double floor_rho = L * std::pow(ln_n, 0.8) /
                             (std::pow(double(n), 0.2) * std::pow(eps, 0.8));
    if (rho < floor_rho) throw std::invalid_argument("rho below the validity floor");
}

Alg1Result algorithm1(OracleSession& session, const Alg1Config& cfg) {
    cfg.validate();
    const std::uint64_t labels_before = session.label_count();

    Alg1Result r;
    r.m = cfg.sample_budget();
    r.threshold = cfg.threshold();

    const std::int64_t total = session.rng().poisson(double(r.m));
    std::unordered_map<std::uint64_t, std::int64_t> counts;
    for (std::int64_t i = 0; i < total; ++i) ++counts[session.samp()];
    r.samples_used = std::uint64_t(total);

    double pairs = 0.0;
    for (const auto& [rep, c] : counts) {
        r.max_count = std::max(r.max_count, c);
        pairs += double(c) * double(c - 1);
    }
    r.y = pairs / (double(r.m) * double(r.m));

    r.step1_reject = double(r.max_count) >= cfg.concentration_cutoff();
    r.accept = !r.step1_reject && r.y < r.threshold;

    if (session.label_count() != labels_before)
        throw std::logic_error("uniformity tester consulted the label oracle");
    return r;
}

// ---------- Poissonized counts ----------

ClusteredCounts clustered_poisson_counts(const DiscreteDistribution& mu,
                                         const RandomClusterDraw& draw, std::int64_t m,
                                         std::uint64_t seed) {
    Rng rng(seed);
    ClusteredCounts out;
    out.t.assign(std::size_t(draw.n), 0);
    out.x.assign(draw.clustering.num_cells(), 0);
    const auto& sup = mu.support();
    const auto& w = mu.weights();
    for (std::size_t i = 0; i < sup.size(); ++i) {
        const std::int64_t tj = rng.poisson(double(m) * w[i]);
        if (tj == 0) continue;
        out.t[std::size_t(sup[i])] = tj;
        out.x[draw.clustering.cell_of(sup[i])] += tj;
        out.total += tj;
    }
    return out;
}

double y_statistic(const std::vector<std::int64_t>& x, std::int64_t m) {
    double pairs = 0.0;
    for (std::int64_t c : x) pairs += double(c) * double(c - 1);
    return pairs / (double(m) * double(m));
}

std::int64_t y_quadratic_exact(const ClusteredCounts& counts, const JoinMatrix& join) {
    std::vector<std::size_t> nz;
    for (std::size_t j = 0; j < counts.t.size(); ++j)
        if (counts.t[j] != 0) nz.push_back(j);
    std::int64_t quad = 0;
    for (std::size_t a : nz)
        for (std::size_t b : nz)
            if (join.at(std::int64_t(a), std::int64_t(b))) quad += counts.t[a] * counts.t[b];
    return quad - counts.total;
}

// ---------- cell learning by binary search ----------

namespace {

std::int64_t ceil_log2(std::int64_t n) {
    std::int64_t b = 0;
    while ((std::int64_t(1) << b) < n) ++b;
    return b;
}

// First position in [1, n) whose label differs from `rep`, for the cycle
// case where equal labels may reappear near n-1 (the cell of 0 wrapping
// around). Equal-label probes cannot certify contiguity, so the probe set
// decides what is detectable: a linear sweep of the first 8 ceil(log2 n)
// offsets (the whole range when n is small), then doubling. Returns n when
// every probe matches; wrong only if a foreign cell hides beyond the sweep
// strictly between consecutive doubled probes, which under the edge-deletion
// draw has probability at most (1-rho)^{8 log2 n}. Sets `exhausted` and
// returns -1 once `probe_cap` labels have been spent.
std::int64_t first_mismatch_cyclic(OracleSession& s, std::int64_t n, std::uint64_t rep,
                                   std::uint64_t probe_cap, bool& exhausted) {
    std::uint64_t spent = 0;
    const auto probe_ok = [&](std::int64_t t) {
        ++spent;
        return s.label(std::uint64_t(t)) == rep;
    };
    const std::int64_t sweep = std::min(n - 1, 8 * ceil_log2(n));
    for (std::int64_t t = 1; t <= sweep; ++t) {
        if (spent >= probe_cap) {
            exhausted = true;
            return -1;
        }
        if (!probe_ok(t)) return t;
    }
    if (sweep == n - 1) return n;  // complete scan, certified single cell

    std::int64_t last_true = sweep;
    std::int64_t first_false = -1;
    for (std::int64_t t = 2 * sweep;; t *= 2) {
        if (spent >= probe_cap) {
            exhausted = true;
            return -1;
        }
        const std::int64_t probe = std::min(t, n - 1);
        if (probe_ok(probe)) {
            last_true = probe;
            if (probe == n - 1) return n;
        } else {
            first_false = probe;
            break;
        }
    }
    // Every mismatching position lies in the single foreign arc, so the
    // boundary this bisection lands on is the arc's left end exactly.
    while (first_false - last_true > 1) {
        if (spent >= probe_cap) {
            exhausted = true;
            return -1;
        }
        const std::int64_t mid = last_true + (first_false - last_true) / 2;
        if (probe_ok(mid))
            last_true = mid;
        else
            first_false = mid;
    }
    return first_false;
}

// Right endpoint of the run of `rep` starting at `from`, valid when no equal
// label can reappear to the right (non-wrapping cell): the predicate is then
// monotone over [from, n-1] and plain bisection applies.
std::int64_t bisect_run_end(OracleSession& s, std::int64_t from, std::int64_t n,
                            std::uint64_t rep) {
    if (from == n - 1 || s.label(std::uint64_t(n - 1)) == rep) return n - 1;
    std::int64_t lo = from, hi = n - 1;  // label(lo) == rep, label(hi) != rep
    while (hi - lo > 1) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (s.label(std::uint64_t(mid)) == rep)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

}  // namespace

LearnedCells learn_cells_by_binary_search(OracleSession& session, bool cycle,
                                          std::int64_t cap) {
    if (cap <= 0) throw std::invalid_argument("cap must be positive");
    const std::int64_t n = std::int64_t(session.space().size());
    const std::uint64_t labels_before = session.label_count();
    const std::uint64_t per_cell = std::uint64_t(ceil_log2(n)) + 2;
    const std::uint64_t budget = std::uint64_t(cap) * per_cell;
    const auto used = [&] { return session.label_count() - labels_before; };
    LearnedCells out;

    const std::uint64_t r0 = session.label(0);
    std::int64_t q = 0;         // next unassigned position
    bool expect_wrap = false;   // the cell of r0 comes back as the final run

    if (n == 1) {
        out.starts = {0};
        out.reps = {r0};
        out.labels_used = used();
        return out;
    }

    if (cycle && session.label(std::uint64_t(n - 1)) == r0) {
        // The cell of 0 crosses the n-1 / 0 edge (or is the whole cycle).
        bool exhausted = false;
        const std::int64_t gap = first_mismatch_cyclic(
            session, n, r0, budget > used() ? budget - used() : 0, exhausted);
        if (exhausted) {
            out.rejected = true;
            out.labels_used = used();
            return out;
        }
        if (gap == n) {
            out.starts = {0};
            out.reps = {r0};
            out.labels_used = used();
            return out;
        }
        q = gap;  // prefix [0, gap-1] merges into the final wrapping run
        expect_wrap = true;
    }

    while (q < n) {
        if (std::int64_t(out.starts.size()) >= cap || used() + per_cell > budget) {
            out.rejected = true;
            break;
        }
        const std::uint64_t r = session.label(std::uint64_t(q));
        if (expect_wrap && r == r0) {
            // Wrap suffix: runs through n-1 and around to the learned prefix.
            out.starts.push_back(q);
            out.reps.push_back(r0);
            break;
        }
        const std::int64_t end = bisect_run_end(session, q, n, r);
        out.starts.push_back(q);
        out.reps.push_back(r);
        q = end + 1;
    }

    out.labels_used = used();
    return out;
}

// ---------- identity testing ----------

IdentityResult instance_optimal_identity(const std::function<std::uint64_t()>& draw,
                                         const std::vector<double>& target, double delta,
                                         Rng& rng, double c_mult,
                                         std::int64_t max_samples) {
    if (target.empty()) throw std::invalid_argument("empty target");
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
    const std::size_t k = target.size();

    IdentityResult r;
    if (k == 1) {
        r.accept = true;
        return r;
    }

    const std::size_t imax =
        std::size_t(std::max_element(target.begin(), target.end()) - target.begin());
    double b23 = 0.0;  // sum_{i != imax} p_i^{2/3}  ( = ||p^-max||_{2/3}^{2/3} )
    for (std::size_t i = 0; i < k; ++i)
        if (i != imax) b23 += std::pow(target[i], 2.0 / 3.0);
    const double norm23 = std::pow(b23, 1.5);

    std::int64_t m =
        std::int64_t(std::ceil(c_mult * std::max(1.0 / delta, norm23 / (delta * delta))));
    if (max_samples > 0 && m > max_samples) {
        m = max_samples;
        r.budget_shortfall = true;
    }
    r.budget = m;

    const std::int64_t nsamp = rng.poisson(double(m));
    std::vector<std::int64_t> cnt(k, 0);
    std::int64_t outside = 0;
    for (std::int64_t i = 0; i < nsamp; ++i) {
        const std::uint64_t u = draw();
        if (u < k)
            ++cnt[u];
        else
            ++outside;
    }
    r.samples_used = std::uint64_t(nsamp);

    if (outside > 0) return r;  // mass where the target has none
    double z = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        if (i == imax) continue;
        if (target[i] <= 0.0) {
            if (cnt[i] > 0) return r;
            continue;
        }
        const double lam = double(m) * target[i];
        const double d = double(cnt[i]) - lam;
        z += (d * d - double(cnt[i])) / std::pow(target[i], 2.0 / 3.0);
    }
    // Null mean 0, sd m*sqrt(2*b23); far targets push the mean to at least
    // 4 m^2 delta^2 / b23. Splitting at half keeps both error sides small
    // once m >= ~3 * norm23 / delta^2.
    const double tau = 2.0 * double(m) * double(m) * delta * delta / b23;
    r.accept = z < tau;
    return r;
}

// ---------- query-based uniformity tester ----------

std::int64_t SingletonTesterConfig::cell_cap() const {
    return std::int64_t(std::ceil(c1 * rho * double(n)));
}

double SingletonTesterConfig::singleton_cap() const { return 3.0 * rho * rho * double(n); }

double SingletonTesterConfig::proximity() const { return c2 * rho * rho * eps; }

void SingletonTesterConfig::validate() const {
    if (n < 2) throw std::invalid_argument("n must be at least 2");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must be in (0,1)");
    if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must be in (0,1]");
    const double floor_rho = L * std::pow(double(n) * eps, -0.25);
    if (rho < floor_rho) throw std::invalid_argument("rho below the validity floor");
}

SingletonResult singleton_tester(OracleSession& session, const SingletonTesterConfig& cfg) {
    cfg.validate();
    const std::uint64_t labels_before = session.label_count();
    const std::uint64_t samps_before = session.total_samp_count();
    SingletonResult out;
    auto finish = [&](bool accept, SingletonOutcome oc) {
        out.accept = accept;
        out.outcome = oc;
        out.labels_used = session.label_count() - labels_before;
        out.samples_used = session.total_samp_count() - samps_before;
        return out;
    };

    const LearnedCells cells = learn_cells_by_binary_search(session, cfg.cycle, cfg.cell_cap());
    if (cells.rejected) return finish(false, SingletonOutcome::cell_cap_reject);

    const std::int64_t n = cfg.n;
    const std::size_t k = cells.starts.size();
    out.num_cells = k;

    // Cell sizes; on the cycle the last run may wrap back to starts[0].
    std::vector<std::int64_t> sizes(k);
    for (std::size_t i = 0; i + 1 < k; ++i) sizes[i] = cells.starts[i + 1] - cells.starts[i];
    sizes[k - 1] = n - cells.starts[k - 1] + (cfg.cycle ? cells.starts[0] : 0);

    // Refines the clustering into singletons plus one merged remainder cell.
    std::unordered_map<std::uint64_t, std::uint64_t> singleton_id;
    std::vector<double> target;
    std::int64_t rest_points = 0;
    for (std::size_t i = 0; i < k; ++i) {
        if (sizes[i] == 1) {
            singleton_id.emplace(cells.reps[i], target.size());
            target.push_back(1.0 / double(n));
        } else {
            rest_points += sizes[i];
        }
    }
    out.num_singletons = singleton_id.size();
    if (double(out.num_singletons) > cfg.singleton_cap())
        return finish(false, SingletonOutcome::singleton_cap_reject);

    const std::uint64_t rest_id = target.size();
    if (rest_points > 0) target.push_back(double(rest_points) / double(n));

    auto mapped_draw = [&]() -> std::uint64_t {
        const std::uint64_t rep = session.samp();
        const auto it = singleton_id.find(rep);
        return it != singleton_id.end() ? it->second : rest_id;
    };
    const IdentityResult id = instance_optimal_identity(mapped_draw, target, cfg.proximity(),
                                                        session.rng(), cfg.c_id);
    return finish(id.accept, id.accept ? SingletonOutcome::accepted
                                       : SingletonOutcome::identity_reject);
}

}  // namespace cct
