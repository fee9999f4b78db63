#include "railcarb/routing.hpp"

#include "railcarb/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <set>

namespace railcarb {

namespace {

bool usable(const EdgeMask* mask, EdgeIndex e)
{
    return mask == nullptr || mask->empty() || (*mask)[e];
}

template <typename ArcsOf>
std::vector<double> dijkstra(std::size_t n, NodeIndex start, const EdgeMask* mask, double limit, ArcsOf&& arcs_of)
{
    std::vector<double> dist(n, kInfiniteMiles);
    using Item = std::pair<double, NodeIndex>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    dist[start] = 0.0;
    queue.emplace(0.0, start);
    while (!queue.empty()) {
        auto [d, u] = queue.top();
        queue.pop();
        if (d > dist[u]) continue;
        auto relax = [&](std::span<const Arc> arcs) {
            for (const Arc& a : arcs) {
                if (!usable(mask, a.edge)) continue;
                double nd = d + a.miles;
                if (nd < dist[a.to] && miles_le(nd, limit)) {
                    dist[a.to] = nd;
                    queue.emplace(nd, a.to);
                }
            }
        };
        arcs_of(u, relax);
    }
    return dist;
}

} // namespace

bool miles_le(double a, double b)
{
    if (std::isinf(a) || std::isinf(b)) return a <= b;
    return a <= b + 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

std::vector<double> distances_to(const RailNetwork& net, NodeIndex target, const EdgeMask* mask, double limit)
{
    return dijkstra(net.node_count(), target, mask, limit, [&](NodeIndex u, auto& relax) { relax(net.in_arcs(u)); });
}

std::vector<double> distances_from(const RailNetwork& net, NodeIndex source, const EdgeMask* mask, double limit,
                                   bool undirected)
{
    return dijkstra(net.node_count(), source, mask, limit, [&](NodeIndex u, auto& relax) {
        relax(net.out_arcs(u));
        if (undirected) relax(net.in_arcs(u));
    });
}

std::optional<Path> trace_shortest(const RailNetwork& net, NodeIndex origin, NodeIndex target,
                                   const std::vector<double>& dist_to, const EdgeMask* mask)
{
    if (!std::isfinite(dist_to[origin])) return std::nullopt;
    Path p;
    p.nodes.push_back(origin);
    p.cumulative.push_back(0.0);
    NodeIndex u = origin;
    while (u != target) {
        const Arc* best = nullptr;
        for (const Arc& a : net.out_arcs(u)) {
            if (!usable(mask, a.edge) || !std::isfinite(dist_to[a.to])) continue;
            // Stay on a shortest path and keep strictly approaching the target.
            if (!(dist_to[a.to] < dist_to[u])) continue;
            double via = a.miles + dist_to[a.to];
            if (!miles_le(via, dist_to[u])) continue;
            if (best == nullptr || a.to < best->to || (a.to == best->to && a.miles < best->miles)) best = &a;
        }
        if (best == nullptr) return std::nullopt;
        p.nodes.push_back(best->to);
        p.edges.push_back(best->edge);
        p.cumulative.push_back(p.cumulative.back() + best->miles);
        u = best->to;
    }
    return p;
}

Path shortest_path(const RailNetwork& net, NodeIndex origin, NodeIndex destination, const EdgeMask* mask)
{
    auto dist = distances_to(net, destination, mask);
    auto p = trace_shortest(net, origin, destination, dist, mask);
    if (!p)
        throw RoutingError("no path from '" + net.node(origin).id + "' to '" + net.node(destination).id + "'");
    return *p;
}

// BaselineRoutes

BaselineRoutes BaselineRoutes::compute(const RailNetwork& net, const std::vector<ODFlow>& flows)
{
    std::map<NodeIndex, std::set<NodeIndex>> by_destination;
    for (const auto& f : flows) by_destination[f.destination].insert(f.origin);
    BaselineRoutes routes;
    for (const auto& [d, origins] : by_destination) {
        auto dist = distances_to(net, d);
        for (NodeIndex o : origins) {
            auto p = trace_shortest(net, o, d, dist);
            if (!p) throw RoutingError("no path from '" + net.node(o).id + "' to '" + net.node(d).id + "'");
            routes.paths_.emplace(PairKey{o, d}, std::move(*p));
        }
    }
    return routes;
}

const Path& BaselineRoutes::at(NodeIndex origin, NodeIndex destination) const
{
    return paths_.at({origin, destination});
}

// Selection

OdSelection rank_and_select_ods(const std::vector<ODFlow>& flows, const RailNetwork& net, double coverage_ratio,
                                const BaselineRoutes* baseline)
{
    if (!(coverage_ratio >= 0.0 && coverage_ratio <= 1.0))
        throw DataError("coverage ratio must lie in [0,1]");
    BaselineRoutes local;
    if (baseline == nullptr) {
        local = BaselineRoutes::compute(net, flows);
        baseline = &local;
    }
    std::map<PairKey, double> tons;
    for (const auto& f : flows) tons[{f.origin, f.destination}] += f.tons_per_year;

    OdSelection sel;
    for (const auto& [key, t] : tons) {
        double miles = baseline->at(key.first, key.second).miles();
        double tm = t * miles;
        if (!(tm > 0.0)) continue;
        sel.ranked.push_back({key.first, key.second, t, miles, tm});
    }
    std::stable_sort(sel.ranked.begin(), sel.ranked.end(), [](const ODPair& a, const ODPair& b) {
        if (a.ton_miles != b.ton_miles) return a.ton_miles > b.ton_miles;
        return std::tie(a.origin, a.destination) < std::tie(b.origin, b.destination);
    });
    for (const auto& p : sel.ranked) sel.total_ton_miles += p.ton_miles;

    if (coverage_ratio >= 1.0) {
        sel.selected = sel.ranked.size();
        return sel;
    }
    const double goal = coverage_ratio * sel.total_ton_miles;
    double cumulative = 0.0;
    while (sel.selected < sel.ranked.size() && cumulative < goal * (1.0 - 1e-12)) {
        cumulative += sel.ranked[sel.selected].ton_miles;
        ++sel.selected;
    }
    return sel;
}

// Alternative-technology subnetwork

EdgeMask build_alt_subnetwork(const RailNetwork& net, const std::vector<NodeIndex>& facilities, double range_miles)
{
    if (!(range_miles > 0.0)) throw DataError("range must be positive");
    EdgeMask enabled(net.edge_count(), false);
    if (facilities.empty()) return enabled;

    std::vector<NodeIndex> sorted = facilities;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    const double half = range_miles / 2.0;
    for (NodeIndex f : sorted) {
        // Rule 2: every arc whose far end is within half the range of f.
        auto from_f = distances_from(net, f, nullptr, half);
        for (NodeIndex u = 0; u < net.node_count(); ++u) {
            if (!std::isfinite(from_f[u])) continue;
            for (const Arc& a : net.out_arcs(u))
                if (miles_le(from_f[u] + a.miles, half)) enabled[a.edge] = true;
        }
        // Rule 1: shortest paths into f from other facilities within range.
        auto to_f = distances_to(net, f, nullptr, range_miles);
        for (NodeIndex g : sorted) {
            if (g == f || !std::isfinite(to_f[g]) || !miles_le(to_f[g], range_miles)) continue;
            if (auto p = trace_shortest(net, g, f, to_f))
                for (EdgeIndex e : p->edges) enabled[e] = true;
        }
    }
    return enabled;
}

// Flow assignment

std::string policy_name(const RoutingPolicy& policy)
{
    struct V {
        std::string operator()(const NoReroute&) const { return "no_reroute"; }
        std::string operator()(const RerouteMaxIncrease&) const { return "reroute_max_increase"; }
        std::string operator()(const EndpointsEnabled&) const { return "endpoints_enabled"; }
    };
    return std::visit(V{}, policy);
}

std::string_view to_string(Network n)
{
    return n == Network::Diesel ? "diesel" : "alt";
}

FlowAssignment assign_flows(const std::vector<ODFlow>& flows, const RailNetwork& net, const EdgeMask& enabled,
                            const RoutingPolicy& policy, const std::vector<NodeIndex>& facilities,
                            const BaselineRoutes* baseline)
{
    if (!enabled.empty() && enabled.size() != net.edge_count())
        throw DataError("enabled arc mask does not match the network");
    BaselineRoutes local;
    if (baseline == nullptr) {
        local = BaselineRoutes::compute(net, flows);
        baseline = &local;
    }
    auto is_enabled = [&](EdgeIndex e) { return !enabled.empty() && enabled[e]; };
    auto fully_enabled = [&](const Path& p) {
        return std::all_of(p.edges.begin(), p.edges.end(), is_enabled);
    };
    std::vector<bool> is_facility(net.node_count(), false);
    for (NodeIndex f : facilities) is_facility.at(f) = true;

    // Decide per O-D pair so every commodity of a pair shares one network.
    std::map<PairKey, std::optional<Path>> served;
    std::map<NodeIndex, std::vector<NodeIndex>> reroute_needed; // destination -> origins
    for (const auto& f : flows) {
        PairKey key{f.origin, f.destination};
        if (served.count(key)) continue;
        const Path& base = baseline->at(f.origin, f.destination);
        std::optional<Path> decision;
        if (std::holds_alternative<NoReroute>(policy)) {
            if (fully_enabled(base)) decision = base;
        } else if (std::holds_alternative<EndpointsEnabled>(policy)) {
            if (is_facility[f.origin] && is_facility[f.destination] && fully_enabled(base)) decision = base;
        } else {
            if (fully_enabled(base)) decision = base;
            else reroute_needed[f.destination].push_back(f.origin);
        }
        served.emplace(key, std::move(decision));
    }
    if (const auto* reroute = std::get_if<RerouteMaxIncrease>(&policy); reroute && !enabled.empty()) {
        if (!(reroute->max_increase >= 0.0)) throw DataError("maximum reroute increase must be nonnegative");
        for (const auto& [d, origins] : reroute_needed) {
            auto dist = distances_to(net, d, &enabled);
            for (NodeIndex o : origins) {
                const double limit = (1.0 + reroute->max_increase) * baseline->at(o, d).miles();
                if (!std::isfinite(dist[o]) || !miles_le(dist[o], limit)) continue;
                served[{o, d}] = trace_shortest(net, o, d, dist, &enabled);
            }
        }
    }

    FlowAssignment out;
    const std::size_t stride = kCommodityCount * 2;
    std::vector<double> loads(net.edge_count() * stride, 0.0);
    out.flows.reserve(flows.size());
    for (const auto& f : flows) {
        const auto& decision = served.at({f.origin, f.destination});
        RoutedFlow rf{f, decision ? Network::Alternative : Network::Diesel,
                      decision ? *decision : baseline->at(f.origin, f.destination)};
        double tm = f.tons_per_year * rf.path.miles();
        (rf.network == Network::Alternative ? out.alt_ton_miles : out.diesel_ton_miles) += tm;
        for (EdgeIndex e : rf.path.edges)
            loads[e * stride + index_of(f.commodity) * 2 + (rf.network == Network::Alternative ? 1 : 0)] +=
                f.tons_per_year;
        out.flows.push_back(std::move(rf));
    }
    for (EdgeIndex e = 0; e < net.edge_count(); ++e)
        for (std::size_t n = 0; n < 2; ++n)
            for (std::size_t c = 0; c < kCommodityCount; ++c) {
                double t = loads[e * stride + c * 2 + n];
                if (t > 0.0)
                    out.links.push_back({e, n == 0 ? Network::Diesel : Network::Alternative, static_cast<Commodity>(c), t});
            }
    double total = out.total_ton_miles();
    out.penetration = total > 0.0 ? out.alt_ton_miles / total : 0.0;
    return out;
}

} // namespace railcarb
