#include "cct/emd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cct {

double Coupling::cost(const Space& s) const {
    double c = 0.0;
    for (const auto& [a, b, f] : flows) c += f * s.dist_idx(a, b);
    return c;
}

double Coupling::marginal_error(const DiscreteDistribution& mu,
                                const DiscreteDistribution& nu) const {
    std::vector<std::pair<std::uint64_t, double>> out_mass, in_mass;
    for (const auto& [a, b, f] : flows) {
        out_mass.emplace_back(a, f);
        in_mass.emplace_back(b, f);
    }
    auto total = [](std::vector<std::pair<std::uint64_t, double>>& v, std::uint64_t key) {
        double s = 0.0;
        for (auto& [k, f] : v)
            if (k == key) s += f;
        return s;
    };
    double err = 0.0;
    for (std::size_t i = 0; i < mu.support().size(); ++i)
        err = std::max(err, std::fabs(total(out_mass, mu.support()[i]) - mu.weights()[i]));
    for (std::size_t j = 0; j < nu.support().size(); ++j)
        err = std::max(err, std::fabs(total(in_mass, nu.support()[j]) - nu.weights()[j]));
    return err;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Successive shortest paths on the residual transportation graph. Nodes:
// sources 0..na-1 (remaining surplus) and sinks na..na+nb-1 (remaining
// deficit). Potentials keep reduced costs nonnegative so plain Dijkstra
// applies; flow already placed adds reverse residual arcs.
struct Transport {
    int na, nb;
    std::vector<double> cost;     // na*nb, cost[i*nb+j]
    std::vector<double> flow;     // na*nb
    std::vector<double> surplus;  // na
    std::vector<double> deficit;  // nb
    std::vector<double> pot;      // na+nb node potentials
    // Dijkstra scratch.
    std::vector<double> dist;
    std::vector<int> prev;  // predecessor node, -1 for unreached/source
    std::vector<char> done;

    double at(int i, int j) const { return cost[std::size_t(i) * std::size_t(nb) + std::size_t(j)]; }
    double& f(int i, int j) { return flow[std::size_t(i) * std::size_t(nb) + std::size_t(j)]; }

    void solve() {
        const int n = na + nb;
        pot.assign(std::size_t(n), 0.0);
        // Mass to route and a tolerance scaled to it; exact dual feasibility
        // is maintained, so the loop ends when all surplus is (numerically) gone.
        double remaining = 0.0;
        for (double s : surplus) remaining += s;
        const double eps = remaining * 1e-15 + 1e-300;
        std::size_t guard = 0;
        const std::size_t max_iter = 1000 + 40 * std::size_t(n) * std::size_t(n);

        while (remaining > eps) {
            if (++guard > max_iter) throw std::runtime_error("transport did not converge");
            const int sink = dijkstra();
            if (sink < 0) {
                // All deficits are exactly zero; any leftover surplus is
                // accumulated roundoff from the subtractions above.
                if (remaining < 1e-9) break;
                throw std::runtime_error("transport infeasible");
            }
            // Bottleneck along the augmenting path.
            double push = deficit[std::size_t(sink - na)];
            for (int v = sink; prev[std::size_t(v)] != -1;) {
                const int u = prev[std::size_t(v)];
                if (u < na && v >= na) {
                    // forward arc; unbounded capacity
                } else {
                    push = std::min(push, f(v, u - na));  // reverse of sink->source arc
                }
                v = u;
            }
            {
                int head = sink;
                while (prev[std::size_t(head)] != -1) head = prev[std::size_t(head)];
                push = std::min(push, surplus[std::size_t(head)]);
            }
            // Apply.
            for (int v = sink; prev[std::size_t(v)] != -1;) {
                const int u = prev[std::size_t(v)];
                if (u < na && v >= na)
                    f(u, v - na) += push;
                else
                    f(v, u - na) -= push;
                v = u;
            }
            {
                int head = sink;
                while (prev[std::size_t(head)] != -1) head = prev[std::size_t(head)];
                surplus[std::size_t(head)] -= push;
            }
            deficit[std::size_t(sink - na)] -= push;
            remaining -= push;
            for (int v = 0; v < n; ++v)
                if (dist[std::size_t(v)] < kInf) pot[std::size_t(v)] += dist[std::size_t(v)];
        }
    }

    // Multi-source Dijkstra from all surplus nodes; returns the closest
    // sink with remaining deficit, or -1.
    int dijkstra() {
        const int n = na + nb;
        dist.assign(std::size_t(n), kInf);
        prev.assign(std::size_t(n), -1);
        done.assign(std::size_t(n), 0);
        for (int i = 0; i < na; ++i)
            if (surplus[std::size_t(i)] > 0.0) dist[std::size_t(i)] = 0.0;

        for (;;) {
            int u = -1;
            double best = kInf;
            for (int v = 0; v < n; ++v)
                if (!done[std::size_t(v)] && dist[std::size_t(v)] < best) {
                    best = dist[std::size_t(v)];
                    u = v;
                }
            if (u < 0) break;
            done[std::size_t(u)] = 1;
            if (u < na) {
                for (int j = 0; j < nb; ++j) {
                    const int v = na + j;
                    if (done[std::size_t(v)]) continue;
                    const double rc = at(u, j) + pot[std::size_t(u)] - pot[std::size_t(v)];
                    const double nd = dist[std::size_t(u)] + std::max(rc, 0.0);
                    if (nd < dist[std::size_t(v)]) {
                        dist[std::size_t(v)] = nd;
                        prev[std::size_t(v)] = u;
                    }
                }
            } else {
                const int j = u - na;
                for (int i = 0; i < na; ++i) {
                    if (done[std::size_t(i)] || f(i, j) <= 0.0) continue;
                    const double rc = -at(i, j) + pot[std::size_t(u)] - pot[std::size_t(i)];
                    const double nd = dist[std::size_t(u)] + std::max(rc, 0.0);
                    if (nd < dist[std::size_t(i)]) {
                        dist[std::size_t(i)] = nd;
                        prev[std::size_t(i)] = u;
                    }
                }
            }
        }
        int best_sink = -1;
        double best = kInf;
        for (int j = 0; j < nb; ++j)
            if (deficit[std::size_t(j)] > 0.0 && dist[std::size_t(na + j)] < best) {
                best = dist[std::size_t(na + j)];
                best_sink = na + j;
            }
        return best_sink;
    }
};

}  // namespace

double emd(const Space& s, const DiscreteDistribution& mu, const DiscreteDistribution& nu,
           Coupling* plan) {
    // Shared support transports to itself for free; route only the excess.
    std::vector<std::pair<std::uint64_t, double>> srcs, snks;
    std::vector<std::tuple<std::uint64_t, std::uint64_t, double>> fixed;
    {
        const auto& ai = mu.support();
        const auto& aw = mu.weights();
        const auto& bi = nu.support();
        const auto& bw = nu.weights();
        std::size_t i = 0, j = 0;
        while (i < ai.size() || j < bi.size()) {
            if (j >= bi.size() || (i < ai.size() && ai[i] < bi[j])) {
                srcs.emplace_back(ai[i], aw[i]);
                ++i;
            } else if (i >= ai.size() || bi[j] < ai[i]) {
                snks.emplace_back(bi[j], bw[j]);
                ++j;
            } else {
                const double common = std::min(aw[i], bw[j]);
                if (common > 0.0) fixed.emplace_back(ai[i], bi[j], common);
                if (aw[i] > bw[j]) srcs.emplace_back(ai[i], aw[i] - bw[j]);
                if (bw[j] > aw[i]) snks.emplace_back(bi[j], bw[j] - aw[i]);
                ++i;
                ++j;
            }
        }
    }

    double value = 0.0;
    if (!srcs.empty() && !snks.empty()) {
        Transport t;
        t.na = int(srcs.size());
        t.nb = int(snks.size());
        t.cost.resize(std::size_t(t.na) * std::size_t(t.nb));
        t.flow.assign(t.cost.size(), 0.0);
        for (int i = 0; i < t.na; ++i)
            for (int j = 0; j < t.nb; ++j)
                t.cost[std::size_t(i) * std::size_t(t.nb) + std::size_t(j)] =
                    s.dist_idx(srcs[std::size_t(i)].first, snks[std::size_t(j)].first);
        for (auto& [p, w] : srcs) t.surplus.push_back(w);
        for (auto& [p, w] : snks) t.deficit.push_back(w);
        t.solve();
        for (int i = 0; i < t.na; ++i)
            for (int j = 0; j < t.nb; ++j) {
                const double fl = t.f(i, j);
                if (fl > 0.0) {
                    value += fl * t.at(i, j);
                    if (plan)
                        fixed.emplace_back(srcs[std::size_t(i)].first, snks[std::size_t(j)].first,
                                           fl);
                }
            }
    }
    if (plan) plan->flows = std::move(fixed);
    return value;
}

}  // namespace cct
