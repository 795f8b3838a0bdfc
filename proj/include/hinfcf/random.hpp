#pragma once

// Seeded generators for random test and sample models. The uniform draw is built directly on
// the 64-bit engine output so sequences are identical across standard libraries.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "hinfcf/netgen.hpp"

namespace hinfcf {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n).
    int below(int n) { return static_cast<int>(uniform() * n); }
    /// Standard normal by Box-Muller.
    double normal() {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    std::vector<int> permutation(int n) {
        std::vector<int> p(static_cast<std::size_t>(n));
        std::iota(p.begin(), p.end(), 0);
        for (int i = n - 1; i > 0; --i) std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(below(i + 1))]);
        return p;
    }

private:
    std::mt19937_64 engine_;
};

/// Random spanning tree plus `extra` additional distinct edges (fewer if the graph fills up).
inline std::vector<Edge> random_connected_edges(int nodes, int extra, Rng& rng) {
    std::vector<Edge> edges;
    std::set<Edge> seen;
    const auto order = rng.permutation(nodes);
    for (int k = 1; k < nodes; ++k) {
        const int i = order[static_cast<std::size_t>(rng.below(k))];
        const int j = order[static_cast<std::size_t>(k)];
        edges.emplace_back(i, j);
        seen.insert({std::min(i, j), std::max(i, j)});
    }
    const long max_edges = static_cast<long>(nodes) * (nodes - 1) / 2;
    for (int added = 0; added < extra && static_cast<long>(seen.size()) < max_edges;) {
        const int i = rng.below(nodes);
        const int j = rng.below(nodes);
        if (i == j || !seen.insert({std::min(i, j), std::max(i, j)}).second) continue;
        edges.emplace_back(i, j);
        ++added;
    }
    return edges;
}

/// Connected buffer network with rates uniform in [rate_lo, rate_hi] and about nodes/2 extra edges.
inline NetworkModel random_buffer_network(int nodes, Rng& rng, double rate_lo = 0.5, double rate_hi = 5.0) {
    NetworkModel net;
    net.nodes = nodes;
    BufferParams p;
    for (int i = 0; i < nodes; ++i) p.rates.push_back(rng.uniform(rate_lo, rate_hi));
    net.edges = random_connected_edges(nodes, nodes / 2, rng);
    net.params = std::move(p);
    return net;
}

/// Adds one edge absent from the network, if the graph is not complete.
inline bool add_random_edge(NetworkModel& net, Rng& rng) {
    std::set<Edge> seen;
    for (const auto& [i, j] : net.edges) seen.insert({std::min(i, j), std::max(i, j)});
    if (static_cast<long>(seen.size()) >= static_cast<long>(net.nodes) * (net.nodes - 1) / 2) return false;
    for (;;) {
        const int i = rng.below(net.nodes);
        const int j = rng.below(net.nodes);
        if (i != j && !seen.count({std::min(i, j), std::max(i, j)})) {
            net.edges.emplace_back(i, j);
            return true;
        }
    }
}

/// Cascade of `pools` pools sharing one parameter triple drawn uniformly from [lo, hi]^3.
inline NetworkModel random_irrigation_cascade(int pools, Rng& rng, double lo = 0.1, double hi = 10.0) {
    const double a = rng.uniform(lo, hi);
    const double b = rng.uniform(lo, hi);
    const double t = rng.uniform(lo, hi);
    NetworkModel net;
    net.nodes = pools;
    net.params = IrrigationParams{std::vector<double>(static_cast<std::size_t>(pools), a),
                                  std::vector<double>(static_cast<std::size_t>(pools), b),
                                  std::vector<double>(static_cast<std::size_t>(pools), t), false};
    return net;
}

/// Cascade with an independent parameter triple per pool.
inline NetworkModel random_irrigation_cascade_per_pool(int pools, Rng& rng, double lo = 0.1, double hi = 10.0) {
    IrrigationParams p;
    for (int i = 0; i < pools; ++i) {
        p.alpha.push_back(rng.uniform(lo, hi));
        p.beta.push_back(rng.uniform(lo, hi));
        p.tau.push_back(rng.uniform(lo, hi));
    }
    NetworkModel net;
    net.nodes = pools;
    net.params = std::move(p);
    return net;
}

}  // namespace hinfcf
