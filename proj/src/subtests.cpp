#include "cct/subtests.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <utility>

#include "cct/generators.hpp"

namespace cct {

namespace {

void check_tv_params(double eps_tv, double fail_prob) {
    if (!(eps_tv > 0.0) || !(eps_tv < 1.0))
        throw std::invalid_argument("eps_tv must lie in (0,1)");
    if (!(fail_prob > 0.0) || !(fail_prob < 1.0))
        throw std::invalid_argument("fail_prob must lie in (0,1)");
}

struct NuMoments {
    double s23 = 0.0;  // sum nu_i^{2/3}
    double s43 = 0.0;  // sum nu_i^{4/3}
};

NuMoments nu_moments(const DiscreteDistribution& nu) {
    NuMoments m;
    for (double w : nu.weights()) {
        const double w23 = std::cbrt(w * w);
        m.s23 += w23;
        m.s43 += w23 * w23;
    }
    return m;
}

// Identity statistic on exactly the samples given. Any draw outside supp(nu)
// rejects outright (impossible under mu = nu). Otherwise
//   Z = sum_i [(N_i - m nu_i)^2 - N_i] / nu_i^{2/3} + m sum_i nu_i^{4/3},
// whose mean is exactly 0 under mu = nu (the additive term cancels the
// multinomial bias) and at least ~4 m^2 eps^2 / S23 when TV >= eps with all
// far mass in-support; the threshold sits halfway.
bool identity_core(std::span<const std::uint64_t> samples, const DiscreteDistribution& nu,
                   double eps_tv) {
    const auto& sup = nu.support();
    const auto& w = nu.weights();
    const std::size_t k = sup.size();
    const double m = double(samples.size());

    std::vector<std::uint64_t> counts(k, 0);
    for (std::uint64_t x : samples) {
        const auto it = std::lower_bound(sup.begin(), sup.end(), x);
        if (it == sup.end() || *it != x) return false;
        ++counts[std::size_t(it - sup.begin())];
    }

    const NuMoments mom = nu_moments(nu);
    double z = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double lam = m * w[i];
        const double n_i = double(counts[i]);
        z += ((n_i - lam) * (n_i - lam) - n_i) / std::cbrt(w[i] * w[i]);
    }
    z += m * mom.s43;

    const double tau = 2.0 * m * m * eps_tv * eps_tv / mom.s23;
    return z <= tau;
}

// Equivalence statistic on equal-size draws:
//   Z = sum over hit cells of [(N_i - M_i)^2 - N_i - M_i] / (N_i + M_i),
// mean ~0 when both streams share a law (given the cell total, the split is
// symmetric) and at least ~2 m eps^2 when TV >= eps; threshold halfway.
bool equivalence_core(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                      double eps_tv) {
    std::unordered_map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>> counts;
    counts.reserve(a.size() * 2);
    for (std::uint64_t x : a) ++counts[x].first;
    for (std::uint64_t x : b) ++counts[x].second;

    double z = 0.0;
    for (const auto& [idx, nm] : counts) {
        const double n = double(nm.first);
        const double mm = double(nm.second);
        const double tot = n + mm;
        z += ((n - mm) * (n - mm) - tot) / tot;
    }
    const double tau = double(a.size()) * eps_tv * eps_tv;
    return z <= tau;
}

std::int64_t ceil_log2(std::int64_t x) {
    std::int64_t a = 0;
    while ((std::int64_t(1) << a) < x) ++a;
    return a;
}

}  // namespace

std::uint64_t tv_identity_budget(const DiscreteDistribution& nu, double eps_tv,
                                 double fail_prob, const SubtestCalibration& cal) {
    check_tv_params(eps_tv, fail_prob);
    if (nu.support_size() == 0) throw std::invalid_argument("nu must be nonempty");
    const NuMoments mom = nu_moments(nu);
    const double lfail = 1.0 + std::log(1.0 / fail_prob);
    const double base = cal.c_identity * std::pow(mom.s23, 1.5) * lfail / (eps_tv * eps_tv);
    // Far mass outside supp(nu) is detected by seeing it at all; this term
    // guarantees that when it is at least eps_tv.
    const double outside = 4.0 * std::log(3.0 / fail_prob) / eps_tv;
    return std::uint64_t(std::ceil(base)) + std::uint64_t(std::ceil(outside));
}

std::uint64_t tv_equivalence_budget(std::uint64_t domain_size, double eps_tv,
                                    double fail_prob, const SubtestCalibration& cal) {
    check_tv_params(eps_tv, fail_prob);
    if (domain_size == 0) throw std::invalid_argument("domain_size must be positive");
    const double k = double(domain_size);
    const double rate = std::max(std::sqrt(k) / (eps_tv * eps_tv),
                                 std::pow(k, 2.0 / 3.0) / std::pow(eps_tv, 4.0 / 3.0));
    const double lfail = 1.0 + std::log(1.0 / fail_prob);
    return std::uint64_t(std::ceil(cal.c_equivalence * rate * lfail));
}

bool tv_identity_subtest(std::span<const std::uint64_t> samples, const DiscreteDistribution& nu,
                         double eps_tv, double fail_prob, const SubtestCalibration& cal) {
    const std::uint64_t need = tv_identity_budget(nu, eps_tv, fail_prob, cal);
    if (samples.size() < need)
        throw std::invalid_argument("tv_identity_subtest: " + std::to_string(samples.size()) +
                                    " samples supplied, " + std::to_string(need) + " required");
    return identity_core(samples.first(std::size_t(need)), nu, eps_tv);
}

bool tv_equivalence_subtest(std::span<const std::uint64_t> samples_a,
                            std::span<const std::uint64_t> samples_b,
                            std::uint64_t domain_size, double eps_tv, double fail_prob,
                            const SubtestCalibration& cal) {
    const std::uint64_t need = tv_equivalence_budget(domain_size, eps_tv, fail_prob, cal);
    if (samples_a.size() < need || samples_b.size() < need)
        throw std::invalid_argument("tv_equivalence_subtest: " +
                                    std::to_string(std::min(samples_a.size(), samples_b.size())) +
                                    " samples supplied per stream, " + std::to_string(need) +
                                    " required");
    return equivalence_core(samples_a.first(std::size_t(need)),
                            samples_b.first(std::size_t(need)), eps_tv);
}

int emd_levels(double eps) {
    if (!(eps > 0.0) || !(eps < 1.0)) throw std::invalid_argument("eps must lie in (0,1)");
    const int t = int(std::ceil(std::log2(2.0 / eps) - 1e-12));
    return std::max(1, t);
}

std::int64_t dyadic_blocks_per_axis(const Space& s, int level) {
    if (level < 1) throw std::invalid_argument("level must be >= 1");
    const std::int64_t n = s.points_per_axis();
    const std::int64_t q = s.points_per_block(std::ldexp(1.0, -level));
    const std::int64_t blocks_needed = (n + q - 1) / q;
    return std::int64_t(1) << ceil_log2(blocks_needed);
}

std::uint64_t dyadic_block_of(const Space& s, std::uint64_t point_idx, int level) {
    const std::int64_t n = s.points_per_axis();
    const std::int64_t b = dyadic_blocks_per_axis(s, level);
    const Point p = s.decode(point_idx);
    std::uint64_t id = 0;
    std::uint64_t mult = 1;
    for (int ax = 0; ax < s.dim(); ++ax) {
        const std::int64_t j = ((std::int64_t(p[ax]) + 1) * b - 1) / n;
        id += std::uint64_t(j) * mult;
        mult *= std::uint64_t(b);
    }
    return id;
}

Box dyadic_block_box(const Space& s, std::uint64_t block_id, int level) {
    const std::int64_t n = s.points_per_axis();
    const std::int64_t b = dyadic_blocks_per_axis(s, level);
    Box box{};
    std::uint64_t rest = block_id;
    for (int ax = 0; ax < s.dim(); ++ax) {
        const std::int64_t j = std::int64_t(rest % std::uint64_t(b));
        rest /= std::uint64_t(b);
        box.lo[std::size_t(ax)] = (j * n) / b;
        box.hi[std::size_t(ax)] = ((j + 1) * n) / b - 1;
        if (box.lo[std::size_t(ax)] > box.hi[std::size_t(ax)])
            throw std::invalid_argument("empty block id");
    }
    if (rest != 0) throw std::invalid_argument("block id out of range");
    return box;
}

DiscreteDistribution coarsen_dyadic(const Space& s, const DiscreteDistribution& p, int level) {
    return p.map_through(
        [&](std::uint64_t idx) { return dyadic_block_of(s, idx, level); });
}

double hierarchical_emd_bound(const Space& s, const DiscreteDistribution& mu,
                              const DiscreteDistribution& nu, int levels) {
    if (levels < 1) throw std::invalid_argument("levels must be >= 1");
    double bound = 0.0;
    for (int i = 1; i <= levels; ++i) {
        const double prev_diam = std::ldexp(1.0, -(i - 1));  // level 0 is the whole domain
        bound += prev_diam * tv_distance(coarsen_dyadic(s, mu, i), coarsen_dyadic(s, nu, i));
    }
    std::unordered_map<std::uint64_t, double> diam_memo;
    const auto& sup = mu.support();
    const auto& w = mu.weights();
    for (std::size_t i = 0; i < sup.size(); ++i) {
        const std::uint64_t blk = dyadic_block_of(s, sup[i], levels);
        auto it = diam_memo.find(blk);
        if (it == diam_memo.end())
            it = diam_memo.emplace(blk, dyadic_block_box(s, blk, levels).diam(s)).first;
        bound += w[i] * it->second;
    }
    return bound;
}

HierarchicalClustering HierarchicalClustering::build(const Space& s, double eps) {
    HierarchicalClustering h;
    h.space = &s;
    h.levels = emd_levels(eps);
    h.blocks_per_axis.reserve(std::size_t(h.levels));
    for (int i = 1; i <= h.levels; ++i)
        h.blocks_per_axis.push_back(dyadic_blocks_per_axis(s, i));
    return h;
}

double HierarchicalClustering::level_diam_bound(int level) const {
    if (level < 1 || level > levels) throw std::invalid_argument("level out of range");
    return std::ldexp(1.0, -level);
}

std::uint64_t HierarchicalClustering::block_of(int level, std::uint64_t point_idx) const {
    if (level < 1 || level > levels) throw std::invalid_argument("level out of range");
    return dyadic_block_of(*space, point_idx, level);
}

std::uint64_t HierarchicalClustering::num_blocks(int level) const {
    if (level < 1 || level > levels) throw std::invalid_argument("level out of range");
    const auto b = std::uint64_t(blocks_per_axis[std::size_t(level - 1)]);
    std::uint64_t k = 1;
    for (int ax = 0; ax < space->dim(); ++ax) k *= b;
    return k;
}

namespace {

// Number of possibly-nonempty blocks at a level, capped by the domain size.
std::uint64_t level_domain_size(const Space& s, int level) {
    const std::uint64_t b = std::uint64_t(dyadic_blocks_per_axis(s, level));
    std::uint64_t k = 1;
    for (int ax = 0; ax < s.dim(); ++ax) {
        if (k > s.size() / b) return s.size();
        k *= b;
    }
    return std::min(k, s.size());
}

}  // namespace

EmdTestResult emd_identity_tester_hypergrid(const std::function<std::uint64_t()>& draw_mu,
                                            const DiscreteDistribution& nu, double eps,
                                            const Space& s, const SubtestCalibration& cal) {
    const int t = emd_levels(eps);
    EmdTestResult r;
    r.levels = t;
    for (int i = 1; i <= t; ++i) {
        const double eps_i = eps * std::ldexp(1.0, i - 1) / (2.0 * t);
        const double fail_i = 1.0 / (3.0 * t);
        const DiscreteDistribution nu_i = coarsen_dyadic(s, nu, i);
        const std::uint64_t m_i = tv_identity_budget(nu_i, eps_i, fail_i, cal);
        std::vector<std::uint64_t> blocks(m_i);
        for (auto& v : blocks) v = dyadic_block_of(s, draw_mu(), i);
        r.samples_used += m_i;
        if (!tv_identity_subtest(blocks, nu_i, eps_i, fail_i, cal)) {
            r.accept = false;
            r.rejected_level = i;
            return r;
        }
    }
    return r;
}

EmdTestResult emd_equivalence_tester_hypergrid(const std::function<std::uint64_t()>& draw_a,
                                               const std::function<std::uint64_t()>& draw_b,
                                               double eps, const Space& s,
                                               const SubtestCalibration& cal) {
    const int t = emd_levels(eps);
    EmdTestResult r;
    r.levels = t;
    for (int i = 1; i <= t; ++i) {
        const double eps_i = eps * std::ldexp(1.0, i - 1) / (2.0 * t);
        const double fail_i = 1.0 / (3.0 * t);
        const std::uint64_t m_i = tv_equivalence_budget(level_domain_size(s, i), eps_i, fail_i, cal);
        std::vector<std::uint64_t> blocks_a(m_i), blocks_b(m_i);
        for (auto& v : blocks_a) v = dyadic_block_of(s, draw_a(), i);
        for (auto& v : blocks_b) v = dyadic_block_of(s, draw_b(), i);
        r.samples_used += m_i;
        if (!tv_equivalence_subtest(blocks_a, blocks_b, level_domain_size(s, i), eps_i, fail_i,
                                    cal)) {
            r.accept = false;
            r.rejected_level = i;
            return r;
        }
    }
    return r;
}

std::uint64_t emd_identity_sample_budget(const Space& s, const DiscreteDistribution& nu,
                                         double eps, const SubtestCalibration& cal) {
    const int t = emd_levels(eps);
    std::uint64_t total = 0;
    for (int i = 1; i <= t; ++i) {
        const double eps_i = eps * std::ldexp(1.0, i - 1) / (2.0 * t);
        total += tv_identity_budget(coarsen_dyadic(s, nu, i), eps_i, 1.0 / (3.0 * t), cal);
    }
    return total;
}

std::uint64_t emd_equivalence_sample_budget(const Space& s, double eps,
                                            const SubtestCalibration& cal) {
    const int t = emd_levels(eps);
    std::uint64_t total = 0;
    for (int i = 1; i <= t; ++i) {
        const double eps_i = eps * std::ldexp(1.0, i - 1) / (2.0 * t);
        total += tv_equivalence_budget(level_domain_size(s, i), eps_i, 1.0 / (3.0 * t), cal);
    }
    return total;
}

// ---------- calibration ----------

namespace {

// TV(result, nu) is exactly eps: scales nu down by a hair over eps and puts
// the removed mass on the lightest support point.
DiscreteDistribution concentrate_far(const DiscreteDistribution& nu, double eps) {
    const auto& sup = nu.support();
    const auto& w = nu.weights();
    const std::size_t lightest =
        std::size_t(std::min_element(w.begin(), w.end()) - w.begin());
    const double scale_eps = eps / (1.0 - w[lightest]);
    std::vector<std::pair<std::uint64_t, double>> pairs;
    for (std::size_t i = 0; i < sup.size(); ++i)
        pairs.emplace_back(sup[i], w[i] * (1.0 - scale_eps));
    pairs.emplace_back(sup[lightest], scale_eps);
    return DiscreteDistribution::from_pairs(std::move(pairs));
}

struct ErrorCounts {
    std::uint64_t false_rejects = 0;
    std::uint64_t false_accepts = 0;
};

template <typename RunOnce>
bool meets_target(std::uint64_t trials, double fail_prob, const RunOnce& run) {
    // run(h0) -> accept verdict for one trial
    ErrorCounts e;
    for (std::uint64_t tr = 0; tr < trials; ++tr) {
        if (!run(true)) ++e.false_rejects;
        if (run(false)) ++e.false_accepts;
    }
    const double cap = fail_prob * double(trials);
    return double(e.false_rejects) <= cap && double(e.false_accepts) <= cap;
}

template <typename PassAt>
std::uint64_t minimal_budget(const PassAt& pass) {
    std::uint64_t hi = 8;
    while (!pass(hi)) {
        hi *= 2;
        if (hi > (std::uint64_t(1) << 22))
            throw std::runtime_error("calibration budget search diverged");
    }
    std::uint64_t lo = hi / 2;
    while (lo + 1 < hi) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        (pass(mid) ? hi : lo) = mid;
    }
    return hi;
}

DiscreteDistribution geometric_nu(std::uint64_t k, double ratio) {
    std::vector<double> w(k);
    double v = 1.0;
    for (auto& x : w) {
        x = v;
        v *= ratio;
    }
    return DiscreteDistribution::from_weights(w);
}

}  // namespace

CalibrationReport calibrate_subtests(std::uint64_t seed, std::uint64_t trials) {
    if (trials == 0) throw std::invalid_argument("trials must be positive");
    CalibrationReport rep;
    rep.trials = trials;

    struct IdProbe {
        const char* name;
        DiscreteDistribution nu;
        DiscreteDistribution far;
        double eps;
        double fail;
    };
    Rng rng(seed);
    std::vector<IdProbe> id_probes;
    id_probes.push_back({"uniform64-zigzag", DiscreteDistribution::uniform(64),
                         family_zigzag(64, 0.2), 0.2, 0.1});
    id_probes.push_back({"uniform16-zigzag", DiscreteDistribution::uniform(16),
                         family_zigzag(16, 0.1), 0.1, 1.0 / 12.0});
    {
        DiscreteDistribution nu = geometric_nu(32, 0.85);
        DiscreteDistribution far = concentrate_far(nu, 0.2);
        id_probes.push_back({"geometric32-concentrate", std::move(nu), std::move(far), 0.2, 0.1});
    }

    double c_id = 0.0;
    for (const auto& p : id_probes) {
        const auto pass = [&](std::uint64_t m) {
            std::vector<std::uint64_t> buf(m);
            return meets_target(trials, p.fail, [&](bool h0) {
                const DiscreteDistribution& src = h0 ? p.nu : p.far;
                for (auto& x : buf) x = src.sample(rng);
                return identity_core(buf, p.nu, p.eps);
            });
        };
        const std::uint64_t m_star = minimal_budget(pass);
        const double lfail = 1.0 + std::log(1.0 / p.fail);
        const double rate = std::pow(nu_moments(p.nu).s23, 1.5) * lfail / (p.eps * p.eps);
        rep.probes.push_back({p.name, p.nu.support_size(), p.eps, p.fail, m_star, m_star / rate});
        c_id = std::max(c_id, m_star / rate);
    }

    struct EqProbe {
        const char* name;
        DiscreteDistribution nu;
        DiscreteDistribution far;
        double eps;
        double fail;
    };
    std::vector<EqProbe> eq_probes;
    eq_probes.push_back({"uniform64-zigzag", DiscreteDistribution::uniform(64),
                         family_zigzag(64, 0.2), 0.2, 0.1});
    eq_probes.push_back({"uniform256-zigzag", DiscreteDistribution::uniform(256),
                         family_zigzag(256, 0.3), 0.3, 1.0 / 9.0});
    {
        DiscreteDistribution nu = geometric_nu(32, 0.85);
        DiscreteDistribution far = concentrate_far(nu, 0.2);
        eq_probes.push_back({"geometric32-concentrate", std::move(nu), std::move(far), 0.2, 0.1});
    }

    double c_eq = 0.0;
    for (const auto& p : eq_probes) {
        const auto pass = [&](std::uint64_t m) {
            std::vector<std::uint64_t> a(m), b(m);
            return meets_target(trials, p.fail, [&](bool h0) {
                const DiscreteDistribution& src = h0 ? p.nu : p.far;
                for (auto& x : a) x = src.sample(rng);
                for (auto& x : b) x = p.nu.sample(rng);
                return equivalence_core(a, b, p.eps);
            });
        };
        const std::uint64_t m_star = minimal_budget(pass);
        const double k = double(p.nu.support_size());
        const double rate = std::max(std::sqrt(k) / (p.eps * p.eps),
                                     std::pow(k, 2.0 / 3.0) / std::pow(p.eps, 4.0 / 3.0)) *
                            (1.0 + std::log(1.0 / p.fail));
        rep.probes.push_back({p.name, p.nu.support_size(), p.eps, p.fail, m_star, m_star / rate});
        c_eq = std::max(c_eq, m_star / rate);
    }

    rep.constants.c_identity = 1.5 * c_id;
    rep.constants.c_equivalence = 1.5 * c_eq;
    return rep;
}

}  // namespace cct
