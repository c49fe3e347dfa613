#include "cct/adversarial.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace cct {

namespace {

constexpr double kLn24 = 3.1780538303479458;

std::int64_t ceil_log2(std::int64_t n) {
    std::int64_t b = 0;
    while ((std::int64_t{1} << b) < n) ++b;
    return b;
}

// Repetitions for a plurality vote taking a base-failure algorithm down to
// the target. Each guarantee concerns one bad outcome, which needs at
// least a third of the votes to win.
std::uint32_t vote_runs(double target, double base) {
    if (target >= base) return 1;
    return std::uint32_t(std::ceil(18.0 * std::log(1.0 / target)));
}

}  // namespace

double GuardParams::c_beta() const { return beta / (96.0 * kLn24); }

double GuardParams::c() { return 1.0 / (384.0 * kLn24); }

double GuardParams::k() const { return (2.0 / beta) * kLn24; }

std::uint64_t GuardParams::s() const {
    return std::uint64_t(std::ceil(k() / eps - 1e-12));
}

void GuardParams::validate() const {
    if (!(0.0 < Delta) || !(2.0 * Delta < eps) || !(eps < 0.5))
        throw std::invalid_argument("need 0 < 2*Delta < eps < 1/2");
    if (!(beta > 0.0) || !(beta < 1.0)) throw std::invalid_argument("beta must lie in (0,1)");
    if (!(Delta <= beta * eps / 2.0 + 1e-15))
        throw std::invalid_argument("need Delta <= beta*eps/2");
    if (!(delta > 0.0) || !(delta < 0.5))
        throw std::invalid_argument("delta must lie in (0,1/2)");
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::accept: return "accept";
        case Verdict::reject: return "reject";
        case Verdict::cluster_reject: return "cluster_reject";
    }
    return "?";
}

namespace {

// One screening pass: s representatives, reject on any non-accept answer.
bool guard_run(OracleSession& session, const GuardParams& gp, const RejectProc& reject_proc,
               const std::function<std::uint64_t()>& draw_rep) {
    const std::uint64_t s = gp.s();
    bool ok = true;
    for (std::uint64_t i = 0; i < s; ++i) {
        const std::uint64_t rep = draw_rep();
        if (reject_proc(session, rep).outcome != RejectOutcome::accept) {
            ok = false;
            break;
        }
    }
    return ok;
}

}  // namespace

ClusteringGuardResult test_clustering_stream(OracleSession& session, const GuardParams& gp,
                                             const RejectProc& reject_proc,
                                             const std::function<std::uint64_t()>& draw_rep) {
    gp.validate();
    const std::uint64_t samp0 = session.total_samp_count();
    const std::uint64_t lab0 = session.label_count();
    const std::uint32_t runs = vote_runs(gp.delta, 1.0 / 12.0);
    std::uint32_t passes = 0;
    for (std::uint32_t r = 0; r < runs; ++r)
        if (guard_run(session, gp, reject_proc, draw_rep)) ++passes;
    ClusteringGuardResult out;
    out.accept = 2 * passes > runs;  // tie goes to reject
    out.samples_used = session.total_samp_count() - samp0;
    out.labels_used = session.label_count() - lab0;
    out.runs = runs;
    return out;
}

ClusteringGuardResult test_clustering(OracleSession& session, const GuardParams& gp,
                                      const RejectProc& reject_proc, std::size_t which) {
    return test_clustering_stream(session, gp, reject_proc,
                                  [&session, which]() { return session.samp(which); });
}

ContainerSampleResult container_sample(OracleSession& session, std::uint64_t m, double alpha,
                                       const DiscreteDistribution& nu_target,
                                       const DiscoverProc& discover_proc, std::size_t which) {
    if (m == 0) throw std::invalid_argument("m must be positive");
    if (!(alpha > 0.0) || alpha > 1.0) throw std::invalid_argument("alpha must lie in (0,1]");
    const Space& sp = session.space();
    ContainerSampleResult out;
    out.counter_cap = std::uint64_t(std::ceil(24.0 * double(m) / alpha));
    out.samples.reserve(std::size_t(m));
    const std::uint64_t lab0 = session.label_count();
    std::uint64_t failed = 0;
    for (std::uint64_t i = 0; i < m; ++i) {
        const std::uint64_t rep = session.samp(which);
        const DiscoveryResult d = discover_proc(session, rep);
        if (d.outcome == DiscoveryOutcome::cluster_reject) {
            out.status = ContainerStatus::cluster_reject;
            out.labels_used = session.label_count() - lab0;
            return out;
        }
        const auto [cond, mass] = nu_target.restrict_to(
            [&](std::uint64_t idx) { return d.container.contains(sp, idx); });
        if (mass <= 0.0) {
            out.status = ContainerStatus::reject;
            out.labels_used = session.label_count() - lab0;
            return out;
        }
        for (;;) {
            const std::uint64_t x = cond.sample(session.rng());
            ++out.resample_attempts;
            if (session.same_cell_as(x, rep)) {
                out.samples.push_back(x);
                break;
            }
            if (++failed > out.counter_cap) {
                out.status = ContainerStatus::cluster_reject;
                out.labels_used = session.label_count() - lab0;
                return out;
            }
        }
    }
    out.status = ContainerStatus::ok;
    out.labels_used = session.label_count() - lab0;
    return out;
}

std::vector<std::string> universe_binding_names() {
    return {"c-c", "cc-cc", "b-b", "cc-b-2d", "cv-b-cube", "cv-cv-cube", "intervals-threshold"};
}

UniverseBinding make_universe_binding(const std::string& preset, const Space& s,
                                      const GuardParams& gp, const BindingOptions& opts) {
    gp.validate();
    const std::int64_t n = s.points_per_axis();
    const std::int64_t cl2 = ceil_log2(n);
    const double t1 = gp.Delta;
    const double t2 = gp.beta * gp.eps / 2.0;
    UniverseBinding b;
    b.name = preset;

    if (preset == "b-b") {
        if (s.kind() != MetricKind::lp_grid)
            throw std::invalid_argument("b-b needs an lp grid");
        b.qcell_cap = std::uint64_t(2 * s.dim() * cl2 + 2 * s.dim());
        b.qreject_cap = b.qcell_cap;
        b.discover = [](OracleSession& ss, std::uint64_t h, double) {
            return discover_box_cell(ss, h);
        };
        b.reject = [t1](OracleSession& ss, std::uint64_t h, double) {
            return reject_from_discovery(ss.space(), discover_box_cell(ss, h), t1);
        };
        return b;
    }
    if (preset == "intervals-threshold") {
        if (s.kind() != MetricKind::threshold)
            throw std::invalid_argument("intervals-threshold needs a threshold line");
        b.qcell_cap = std::uint64_t(2 * cl2 + 2);
        b.qreject_cap = b.qcell_cap;
        b.discover = [](OracleSession& ss, std::uint64_t h, double) {
            return discover_interval_cell(ss, h);
        };
        b.reject = [t1](OracleSession& ss, std::uint64_t h, double) {
            return reject_from_discovery(ss.space(), discover_interval_cell(ss, h), t1);
        };
        return b;
    }
    if (preset == "cc-cc") {
        if (s.kind() != MetricKind::lp_grid || s.dim() != 2)
            throw std::invalid_argument("cc-cc needs a 2-d lp grid");
        // Row search plus a full boundary walk at <= 8 labels per boundary
        // point; convex cells have at most ~4n boundary points.
        b.qcell_cap = std::uint64_t(32 * n + 2 * cl2 + 16);
        b.qreject_cap = b.qcell_cap;
        b.discover = [](OracleSession& ss, std::uint64_t h, double) {
            return discover_convex_grid_cell_2d(ss, h);
        };
        b.reject = [t1](OracleSession& ss, std::uint64_t h, double) {
            return reject_from_discovery(ss.space(), discover_convex_grid_cell_2d(ss, h), t1);
        };
        return b;
    }
    if (preset == "c-c") {
        if (s.kind() != MetricKind::lp_grid)
            throw std::invalid_argument("c-c needs an lp grid");
        const double spread = 2.0 * std::pow(double(s.dim()), 1.0 / s.p());
        if (!(t2 > spread * t1))
            throw std::invalid_argument("c-c needs beta*eps/2 > 2 d^{1/p} Delta");
        const std::int64_t k = std::int64_t(std::ceil(t2 * double(n - 1) / 2.0));
        std::uint64_t shell = 1;  // (2k+1)^d - (2k-1)^d
        std::uint64_t inner = 1;
        for (int ax = 0; ax < s.dim(); ++ax) {
            shell *= std::uint64_t(2 * k + 1);
            inner *= std::uint64_t(2 * k - 1);
        }
        b.qreject_cap = shell - inner;
        b.reject = [t1, t2](OracleSession& ss, std::uint64_t h, double) {
            return reject_connected_cell(ss, h, t1, t2);
        };
        return b;
    }
    if (preset == "cc-b-2d") {
        if (s.kind() != MetricKind::lp_grid || s.dim() != 2)
            throw std::invalid_argument("cc-b-2d needs a 2-d lp grid");
        if (!(t1 < t2 - 8.0 / double(n - 1)))
            throw std::invalid_argument("cc-b-2d needs Delta < beta*eps/2 - 8/(n-1)");
        b.qreject_cap = std::uint64_t(4 * cl2 + 44);
        b.reject = [t1, t2](OracleSession& ss, std::uint64_t h, double) {
            return cc_vs_box_reject_2d(ss, h, t1, t2);
        };
        return b;
    }
    if (preset == "cv-b-cube" || preset == "cv-cv-cube") {
        if (s.kind() != MetricKind::lp_grid)
            throw std::invalid_argument(preset + " needs an lp grid");
        if (!(opts.body_inner_ball >= 1.0))
            throw std::invalid_argument("convex-body presets need an inner ball >= 1 step");
        // The box estimator certifies diameters only up to a factor two, so
        // its threshold q must fit the whole (Delta, beta*eps/2) window.
        const double q = t2 / 2.0;
        const double ball = opts.body_inner_ball;
        if (preset == "cv-b-cube") {
            if (!(t1 <= q))
                throw std::invalid_argument("cv-b-cube needs Delta <= beta*eps/4");
            b.alpha = std::ldexp(1.0, -s.dim());
            b.reject = [q, ball](OracleSession& ss, std::uint64_t h, double rho) {
                return qreject_conv_box(ss, h, q, ball, rho);
            };
            b.discover = [ball](OracleSession& ss, std::uint64_t h, double rho) {
                return qcell_conv_box(ss, h, ball, rho);
            };
            return b;
        }
        const double spread = std::pow(double(s.dim()), 1.0 / s.p());
        if (!(t1 <= q / spread))
            throw std::invalid_argument("cv-cv-cube needs Delta <= beta*eps/(4 d^{1/p})");
        b.reject = [q, ball](OracleSession& ss, std::uint64_t h, double rho) {
            return qreject_conv_conv(ss, h, q, ball, rho);
        };
        return b;
    }
    throw std::invalid_argument("unknown universe binding: " + preset);
}

namespace {

Verdict plurality(const std::array<std::uint32_t, 3>& tally) {
    // Order favors the clustering complaint on ties, then reject.
    Verdict best = Verdict::cluster_reject;
    std::uint32_t count = tally[std::size_t(Verdict::cluster_reject)];
    if (tally[std::size_t(Verdict::reject)] > count) {
        best = Verdict::reject;
        count = tally[std::size_t(Verdict::reject)];
    }
    if (tally[std::size_t(Verdict::accept)] > count) best = Verdict::accept;
    return best;
}

struct GuardedContext {
    GuardParams gp12;       // base-failure guard parameters
    double rho_r = 0.0;
    RejectProc rej;
};

GuardedContext guard_context(const GuardParams& gp, const UniverseBinding& binding,
                             const GuardedConfig& cfg) {
    GuardedContext ctx;
    ctx.gp12 = gp;
    ctx.gp12.delta = 1.0 / 12.0;
    // The screening lemma needs the procedure to fail at most once per 24
    // runs of s calls; the override b*eps can only tighten that.
    ctx.rho_r = std::min(cfg.b * gp.eps, 1.0 / (24.0 * double(ctx.gp12.s())));
    const auto reject = binding.reject;
    const double rho = ctx.rho_r;
    ctx.rej = [reject, rho](OracleSession& ss, std::uint64_t h) { return reject(ss, h, rho); };
    return ctx;
}

}  // namespace

TesterVerdict diameter_guarded_identity(OracleSession& session, const DiscreteDistribution& nu,
                                        const GuardParams& gp, const UniverseBinding& binding,
                                        const GuardedConfig& cfg) {
    gp.validate();
    if (!(cfg.b > 0.0)) throw std::invalid_argument("b must be positive");
    if (!binding.reject) throw std::invalid_argument("binding has no rejection procedure");
    const Space& sp = session.space();
    const GuardedContext ctx = guard_context(gp, binding, cfg);
    const std::uint64_t s_draws = ctx.gp12.s();
    const std::uint32_t runs = vote_runs(gp.delta, 1.0 / 6.0);

    TesterVerdict out;
    out.runs = runs;
    std::array<std::uint32_t, 3> tally{};
    const std::uint64_t samp0 = session.samp_count(0);
    const std::uint64_t lab0 = session.label_count();

    if (binding.has_discovery()) {
        const std::uint64_t m = emd_identity_sample_budget(sp, nu, gp.eps / 2.0, cfg.cal);
        const double rho_d = std::min(cfg.b, 1.0 / 24.0) / double(m);
        const auto discover = binding.discover;
        const DiscoverProc dis = [discover, rho_d](OracleSession& ss, std::uint64_t h) {
            return discover(ss, h, rho_d);
        };
        const std::uint64_t cap = std::uint64_t(std::ceil(24.0 * double(m) / binding.alpha));
        out.sample_budget = runs * (s_draws + m);
        if (binding.qreject_cap > 0 && binding.qcell_cap > 0)
            out.label_budget =
                runs * (s_draws * binding.qreject_cap + m * binding.qcell_cap + cap + 1 + m);

        for (std::uint32_t r = 0; r < runs; ++r) {
            Verdict v;
            if (!test_clustering(session, ctx.gp12, ctx.rej, 0).accept) {
                v = Verdict::cluster_reject;
            } else {
                const ContainerSampleResult cs =
                    container_sample(session, m, binding.alpha, nu, dis, 0);
                if (cs.status == ContainerStatus::reject) {
                    v = Verdict::reject;
                } else if (cs.status == ContainerStatus::cluster_reject) {
                    v = Verdict::cluster_reject;
                } else {
                    std::size_t next = 0;
                    const auto draw = [&cs, &next]() {
                        if (next >= cs.samples.size())
                            throw std::logic_error("tester overran its sample budget");
                        return cs.samples[next++];
                    };
                    const EmdTestResult er =
                        emd_identity_tester_hypergrid(draw, nu, gp.eps / 2.0, sp, cfg.cal);
                    v = er.accept ? Verdict::accept : Verdict::reject;
                }
            }
            ++tally[std::size_t(v)];
        }
    } else {
        // No discovery for this universe: guard both the real input and a
        // reference stream simulated with one label query per draw, then
        // compare the two representative streams.
        const std::uint64_t m_eq = emd_equivalence_sample_budget(sp, gp.eps / 2.0, cfg.cal);
        out.sample_budget = runs * (s_draws + m_eq);
        if (binding.qreject_cap > 0)
            out.label_budget = runs * (2 * s_draws * binding.qreject_cap + s_draws + m_eq);

        const auto sim_draw = [&session, &nu]() {
            return session.label(nu.sample(session.rng()));
        };
        for (std::uint32_t r = 0; r < runs; ++r) {
            Verdict v;
            if (!test_clustering(session, ctx.gp12, ctx.rej, 0).accept ||
                !test_clustering_stream(session, ctx.gp12, ctx.rej, sim_draw).accept) {
                v = Verdict::cluster_reject;
            } else {
                const auto mu_draw = [&session]() { return session.samp(0); };
                const EmdTestResult er = emd_equivalence_tester_hypergrid(
                    mu_draw, sim_draw, gp.eps / 2.0, sp, cfg.cal);
                v = er.accept ? Verdict::accept : Verdict::reject;
            }
            ++tally[std::size_t(v)];
        }
    }

    out.verdict = plurality(tally);
    out.samples_used = {session.samp_count(0) - samp0};
    out.labels_used = session.label_count() - lab0;
    return out;
}

TesterVerdict diameter_guarded_equivalence(OracleSession& session, const GuardParams& gp,
                                           const UniverseBinding& binding,
                                           const GuardedConfig& cfg) {
    gp.validate();
    if (!(cfg.b > 0.0)) throw std::invalid_argument("b must be positive");
    if (!binding.reject) throw std::invalid_argument("binding has no rejection procedure");
    if (session.num_inputs() < 2)
        throw std::invalid_argument("equivalence testing needs two session inputs");
    const Space& sp = session.space();
    const GuardedContext ctx = guard_context(gp, binding, cfg);
    const std::uint64_t s_draws = ctx.gp12.s();
    const std::uint32_t runs = vote_runs(gp.delta, 1.0 / 6.0);
    const std::uint64_t m_eq = emd_equivalence_sample_budget(sp, gp.eps / 2.0, cfg.cal);

    TesterVerdict out;
    out.runs = runs;
    out.sample_budget = runs * 2 * (s_draws + m_eq);
    if (binding.qreject_cap > 0) out.label_budget = runs * 2 * s_draws * binding.qreject_cap;

    std::array<std::uint32_t, 3> tally{};
    const std::uint64_t samp0 = session.samp_count(0);
    const std::uint64_t samp1 = session.samp_count(1);
    const std::uint64_t lab0 = session.label_count();

    for (std::uint32_t r = 0; r < runs; ++r) {
        Verdict v;
        if (!test_clustering(session, ctx.gp12, ctx.rej, 0).accept ||
            !test_clustering(session, ctx.gp12, ctx.rej, 1).accept) {
            v = Verdict::cluster_reject;
        } else {
            const auto draw_a = [&session]() { return session.samp(0); };
            const auto draw_b = [&session]() { return session.samp(1); };
            const EmdTestResult er =
                emd_equivalence_tester_hypergrid(draw_a, draw_b, gp.eps / 2.0, sp, cfg.cal);
            v = er.accept ? Verdict::accept : Verdict::reject;
        }
        ++tally[std::size_t(v)];
    }

    out.verdict = plurality(tally);
    out.samples_used = {session.samp_count(0) - samp0, session.samp_count(1) - samp1};
    out.labels_used = session.label_count() - lab0;
    return out;
}

}  // namespace cct
