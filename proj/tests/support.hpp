#pragma once

// Shared fixtures and independent oracles for the test binaries.

#include "railcarb/netio.hpp"
#include "railcarb/routing.hpp"
#include "railcarb/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace testkit {

using namespace railcarb;

struct E {
    std::string from, to;
    double miles;
};

// Every node is a candidate in `state` unless listed in `blocked`.
inline RailNetwork make_net(const std::vector<E>& edges, const std::string& state = "TX",
                            const std::set<std::string>& blocked = {})
{
    std::set<std::string> ids;
    for (const auto& e : edges) {
        ids.insert(e.from);
        ids.insert(e.to);
    }
    std::vector<NodeRecord> nodes;
    int k = 0;
    for (const auto& id : ids) {
        NodeRecord n;
        n.id = id;
        n.name = id;
        n.state = state;
        n.lat = 30.0 + 0.1 * k;
        n.lon = -100.0 + 0.1 * k;
        n.candidate = !blocked.count(id);
        nodes.push_back(n);
        ++k;
    }
    std::vector<EdgeRecord> recs;
    for (const auto& e : edges) recs.push_back({e.from, e.to, e.miles, "RR", false});
    return RailNetwork::build(nodes, recs);
}

inline NodeIndex at(const RailNetwork& net, const std::string& id) { return net.require(id); }

inline ODFlow od(const RailNetwork& net, const std::string& o, const std::string& d, Commodity c, double tons)
{
    return {at(net, o), at(net, d), c, tons};
}

inline double rel_diff(double a, double b)
{
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

// Random connected toy: a random spanning tree plus extra chords, mileage
// drawn uniformly from [lo, hi], node names n0..n{k-1}.
inline RailNetwork random_network(std::mt19937_64& rng, int n_nodes, int extra_edges, double lo, double hi,
                                  double blocked_share = 0.0)
{
    std::uniform_real_distribution<double> miles(lo, hi);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    auto name = [](int i) { return "n" + std::to_string(i); };
    std::vector<E> edges;
    std::set<std::pair<int, int>> used;
    for (int i = 1; i < n_nodes; ++i) {
        int j = std::uniform_int_distribution<int>(0, i - 1)(rng);
        edges.push_back({name(j), name(i), std::round(miles(rng))});
        used.insert({j, i});
    }
    for (int t = 0; t < extra_edges; ++t) {
        int a = std::uniform_int_distribution<int>(0, n_nodes - 1)(rng);
        int b = std::uniform_int_distribution<int>(0, n_nodes - 1)(rng);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        if (!used.insert({a, b}).second) continue;
        edges.push_back({name(a), name(b), std::round(miles(rng))});
    }
    std::set<std::string> blocked;
    for (int i = 0; i < n_nodes; ++i)
        if (u01(rng) < blocked_share) blocked.insert(name(i));
    return make_net(edges, "TX", blocked);
}

inline std::vector<ODFlow> random_flows(std::mt19937_64& rng, const RailNetwork& net, int n_flows)
{
    std::vector<ODFlow> flows;
    std::vector<NodeIndex> cands;
    for (NodeIndex i = 0; i < net.node_count(); ++i)
        if (net.node(i).candidate) cands.push_back(i);
    if (cands.size() < 2) return flows;
    std::uniform_int_distribution<std::size_t> pick(0, cands.size() - 1);
    std::uniform_real_distribution<double> tons(1e5, 5e6);
    for (int k = 0; k < n_flows; ++k) {
        NodeIndex o = cands[pick(rng)], d = cands[pick(rng)];
        if (o == d) continue;
        Commodity c = kAllCommodities[std::uniform_int_distribution<int>(0, 8)(rng)];
        flows.push_back({o, d, c, std::round(tons(rng))});
    }
    return aggregate_flows(flows);
}

// Coverage check written from the definition: sort open-facility offsets
// along the path and test the half-range ends and the full-range gaps.
inline bool covers(const Path& p, const std::set<NodeIndex>& open, double range, bool strict = false)
{
    const double tol = 1e-9;
    auto le = [&](double a, double b) { return a <= b + tol * std::max(1.0, std::abs(b)); };
    if (strict && (!open.count(p.origin()) || !open.count(p.destination()))) return false;
    std::vector<double> pos;
    for (std::size_t i = 0; i < p.nodes.size(); ++i)
        if (open.count(p.nodes[i])) pos.push_back(p.cumulative[i]);
    if (pos.empty()) return false;
    std::sort(pos.begin(), pos.end());
    if (!le(pos.front(), range / 2)) return false;
    if (!le(p.miles() - pos.back(), range / 2)) return false;
    for (std::size_t i = 1; i < pos.size(); ++i)
        if (!le(pos[i] - pos[i - 1], range)) return false;
    return true;
}

struct BruteCover {
    bool feasible = false;
    std::size_t size = 0;
    std::vector<NodeIndex> first; // lexicographically smallest minimum set
};

// Exhaustive subset enumeration over the candidate nodes (<= 20 of them).
inline BruteCover brute_cover(const RailNetwork& net, const std::vector<Path>& paths, double range, bool strict = false)
{
    std::vector<NodeIndex> cands;
    for (NodeIndex i = 0; i < net.node_count(); ++i)
        if (net.node(i).candidate) cands.push_back(i);
    BruteCover best;
    const std::size_t n = cands.size();
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        std::set<NodeIndex> open;
        std::vector<NodeIndex> list;
        for (std::size_t b = 0; b < n; ++b)
            if (mask & (1u << b)) {
                open.insert(cands[b]);
                list.push_back(cands[b]);
            }
        bool ok = true;
        for (const auto& p : paths) ok = ok && covers(p, open, range, strict);
        if (!ok) continue;
        if (!best.feasible || list.size() < best.size || (list.size() == best.size && list < best.first)) {
            best.feasible = true;
            best.size = list.size();
            best.first = list;
        }
    }
    return best;
}

// Edmonds-Karp on a dense capacity matrix.
inline double max_flow(std::vector<std::vector<double>> cap, int s, int t)
{
    const int n = static_cast<int>(cap.size());
    double total = 0.0;
    for (;;) {
        std::vector<int> prev(n, -1);
        prev[s] = s;
        std::queue<int> q;
        q.push(s);
        while (!q.empty() && prev[t] < 0) {
            int u = q.front();
            q.pop();
            for (int v = 0; v < n; ++v)
                if (prev[v] < 0 && cap[u][v] > 1e-12) {
                    prev[v] = u;
                    q.push(v);
                }
        }
        if (prev[t] < 0) return total;
        double b = std::numeric_limits<double>::infinity();
        for (int v = t; v != s; v = prev[v]) b = std::min(b, cap[prev[v]][v]);
        for (int v = t; v != s; v = prev[v]) {
            cap[prev[v]][v] -= b;
            cap[v][prev[v]] += b;
        }
        total += b;
    }
}

// Minimum cost of serving link demands when the unit cost depends only on
// the facility: open facilities in cost order and charge each the marginal
// max-flow it adds. Returns -1 when demand cannot be met.
inline double transport_oracle(const std::vector<double>& cost, const std::vector<double>& capacity,
                               const std::vector<double>& demand, const std::vector<std::vector<bool>>& reach)
{
    const int F = static_cast<int>(cost.size()), L = static_cast<int>(demand.size());
    std::vector<int> order(F);
    for (int i = 0; i < F; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return cost[a] < cost[b]; });
    double total_demand = 0.0;
    for (double d : demand) total_demand += d;
    double prev = 0.0, result = 0.0;
    for (int k = 1; k <= F; ++k) {
        const int n = 2 + F + L;
        std::vector<std::vector<double>> cap(n, std::vector<double>(n, 0.0));
        for (int i = 0; i < k; ++i) {
            int f = order[i];
            cap[0][2 + f] = capacity[f];
            for (int l = 0; l < L; ++l)
                if (reach[f][l]) cap[2 + f][2 + F + l] = 1e300;
        }
        for (int l = 0; l < L; ++l) cap[2 + F + l][1] = demand[l];
        double m = max_flow(cap, 0, 1);
        result += cost[order[k - 1]] * (m - prev);
        prev = m;
    }
    if (std::abs(prev - total_demand) > 1e-9 * std::max(1.0, total_demand)) return -1.0;
    return result;
}

inline GridTable grid_of(std::initializer_list<std::tuple<std::string, double, double>> rows, int year = 2025)
{
    GridTable g;
    for (const auto& [state, grams, price] : rows) g.set(state, year, GridEntry{grams, price});
    return g;
}

} // namespace testkit
