#include "railcarb/sizing.hpp"

#include "railcarb/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>

namespace railcarb {

std::string_view to_string(StorageTech t)
{
    return t == StorageTech::Battery ? "battery" : "hydrogen";
}

std::string_view energy_unit(StorageTech t)
{
    return t == StorageTech::Battery ? "kWh" : "kgH2";
}

double energy_per_ton_mile(const ParameterPack& params, const RailroadParams& railroad, StorageTech tech,
                           Commodity commodity)
{
    const double btu = railroad.intensity(commodity);
    if (tech == StorageTech::Battery) return btu / params.battery.efficiency_ratio / params.engine.btu_per_kwh;
    return btu / params.hydrogen.efficiency_ratio / params.engine.h2_lhv_btu_per_kg;
}

std::vector<LinkEnergyDemand> link_energy_demands(const FlowAssignment& assignment, const RailNetwork& net,
                                                  const ParameterPack& params, const RailroadParams& railroad,
                                                  StorageTech tech, double peak_factor)
{
    if (!(peak_factor >= 1.0)) throw DataError("peak factor must be at least 1");
    std::vector<LinkEnergyDemand> out;
    for (const auto& load : assignment.links) {
        if (load.network != Network::Alternative || !(load.tons > 0.0)) continue;
        const double ton_miles_per_day = load.tons * net.edge(load.edge).miles / 365.0;
        const double avg = ton_miles_per_day * energy_per_ton_mile(params, railroad, tech, load.commodity);
        out.push_back({load.edge, load.commodity, avg, avg * peak_factor});
    }
    return out;
}

FacilityReach facility_reach(const RailNetwork& net, const EdgeMask& enabled, const std::vector<NodeIndex>& facilities,
                             double range_miles)
{
    FacilityReach reach;
    const double half = range_miles / 2.0;
    for (NodeIndex f : facilities) {
        auto dist = distances_from(net, f, &enabled, half, true);
        std::vector<EdgeIndex> edges;
        for (EdgeIndex e = 0; e < net.edge_count(); ++e) {
            if (enabled.empty() || !enabled[e]) continue;
            const Edge& edge = net.edge(e);
            if (miles_le(std::min(dist[edge.from], dist[edge.to]), half)) edges.push_back(e);
        }
        reach.push_back(std::move(edges));
    }
    return reach;
}

double SizingSolution::total_average_per_day() const
{
    double t = 0.0;
    for (double v : average_per_day) t += v;
    return t;
}

namespace {

struct LinkTotal {
    EdgeIndex link;
    double average = 0.0;
    double peak = 0.0;
    std::array<double, kCommodityCount> by_commodity{};
};

// Successive shortest paths (Bellman-Ford on the residual graph) for a
// bipartite transportation network source -> facility -> link -> sink.
class TransportationSolver {
public:
    explicit TransportationSolver(std::size_t nodes) : adj_(nodes) {}

    std::size_t add_arc(std::size_t from, std::size_t to, double cap, double cost)
    {
        std::size_t id = arcs_.size();
        arcs_.push_back({to, cap, cost});
        adj_[from].push_back(id);
        arcs_.push_back({from, 0.0, -cost});
        adj_[to].push_back(id + 1);
        return id;
    }

    double flow_on(std::size_t arc) const { return arcs_[arc ^ 1].cap; }

    // Pushes up to `want` units; returns the amount pushed.
    double run(std::size_t source, std::size_t sink, double want, double eps)
    {
        const std::size_t n = adj_.size();
        double pushed = 0.0;
        while (want - pushed > eps) {
            std::vector<double> dist(n, std::numeric_limits<double>::infinity());
            std::vector<std::size_t> via(n, SIZE_MAX);
            std::vector<bool> queued(n, false);
            std::deque<std::size_t> queue{source};
            dist[source] = 0.0;
            queued[source] = true;
            while (!queue.empty()) {
                std::size_t u = queue.front();
                queue.pop_front();
                queued[u] = false;
                for (std::size_t id : adj_[u]) {
                    const auto& a = arcs_[id];
                    if (a.cap <= eps) continue;
                    double nd = dist[u] + a.cost;
                    if (nd < dist[a.to] - 1e-15) {
                        dist[a.to] = nd;
                        via[a.to] = id;
                        if (!queued[a.to]) {
                            queued[a.to] = true;
                            queue.push_back(a.to);
                        }
                    }
                }
            }
            if (!std::isfinite(dist[sink])) break;
            double bottleneck = want - pushed;
            for (std::size_t v = sink; v != source; v = arcs_[via[v] ^ 1].to)
                bottleneck = std::min(bottleneck, arcs_[via[v]].cap);
            for (std::size_t v = sink; v != source; v = arcs_[via[v] ^ 1].to) {
                arcs_[via[v]].cap -= bottleneck;
                arcs_[via[v] ^ 1].cap += bottleneck;
            }
            pushed += bottleneck;
        }
        return pushed;
    }

private:
    struct ArcData {
        std::size_t to;
        double cap;
        double cost;
    };
    std::vector<ArcData> arcs_;
    std::vector<std::vector<std::size_t>> adj_;
};

} // namespace

SizingSolution solve_allocation(const std::vector<LinkEnergyDemand>& demands, const std::vector<NodeIndex>& facilities,
                                const FacilityReach& reach, const std::vector<double>& unit_costs,
                                const std::optional<std::vector<double>>& capacities)
{
    if (reach.size() != facilities.size() || unit_costs.size() != facilities.size())
        throw DataError("allocation: facility, reach and cost lists differ in length");
    if (capacities && capacities->size() != facilities.size())
        throw DataError("allocation: capacity list differs in length from facilities");

    std::map<EdgeIndex, LinkTotal> totals;
    for (const auto& d : demands) {
        if (!(d.average_per_day >= 0.0) || d.peak_per_day < d.average_per_day)
            throw DataError("allocation: link demand must satisfy peak >= average >= 0");
        auto& t = totals[d.link];
        t.link = d.link;
        t.average += d.average_per_day;
        t.peak += d.peak_per_day;
        t.by_commodity[index_of(d.commodity)] += d.average_per_day;
    }
    std::vector<LinkTotal> links;
    for (auto& [e, t] : totals)
        if (t.average > 0.0) links.push_back(t);

    // reachable[l] = facility indices able to serve link l
    std::vector<std::vector<std::size_t>> reachable(links.size());
    for (std::size_t f = 0; f < facilities.size(); ++f)
        for (std::size_t l = 0; l < links.size(); ++l)
            if (std::binary_search(reach[f].begin(), reach[f].end(), links[l].link)) reachable[l].push_back(f);
    for (std::size_t l = 0; l < links.size(); ++l)
        if (reachable[l].empty())
            throw UnreachableLinkError("allocation: link #" + std::to_string(links[l].link) +
                                       " is not reachable from any facility");

    SizingSolution sol;
    sol.facilities = facilities;
    sol.unit_costs = unit_costs;
    sol.average_per_day.assign(facilities.size(), 0.0);
    sol.peak_per_day.assign(facilities.size(), 0.0);
    sol.average_by_commodity.assign(facilities.size(), {});

    std::vector<std::vector<double>> amount(facilities.size(), std::vector<double>(links.size(), 0.0));
    const bool capacitated =
        capacities && std::any_of(capacities->begin(), capacities->end(), [](double c) { return std::isfinite(c); });
    if (!capacitated) {
        for (std::size_t l = 0; l < links.size(); ++l) {
            std::size_t best = reachable[l].front();
            for (std::size_t f : reachable[l])
                if (unit_costs[f] < unit_costs[best] ||
                    (unit_costs[f] == unit_costs[best] && facilities[f] < facilities[best]))
                    best = f;
            amount[best][l] = links[l].average;
        }
    } else {
        double total = 0.0;
        for (const auto& l : links) total += l.average;
        const std::size_t source = 0, sink = 1, f0 = 2, l0 = 2 + facilities.size();
        TransportationSolver solver(l0 + links.size());
        const double big = total * 2.0 + 1.0;
        for (std::size_t f = 0; f < facilities.size(); ++f) {
            double cap = (*capacities)[f];
            if (!(cap >= 0.0)) throw DataError("allocation: capacities must be nonnegative");
            solver.add_arc(source, f0 + f, std::isfinite(cap) ? cap : big, 0.0);
        }
        std::vector<std::vector<std::size_t>> arc_of(facilities.size(), std::vector<std::size_t>(links.size(), SIZE_MAX));
        for (std::size_t l = 0; l < links.size(); ++l)
            for (std::size_t f : reachable[l]) arc_of[f][l] = solver.add_arc(f0 + f, l0 + l, big, unit_costs[f]);
        for (std::size_t l = 0; l < links.size(); ++l) solver.add_arc(l0 + l, sink, links[l].average, 0.0);
        const double eps = 1e-12 * std::max(1.0, total);
        double pushed = solver.run(source, sink, total, eps);
        if (total - pushed > 1e-9 * std::max(1.0, total))
            throw CapacityError("allocation: facility capacities cannot cover link demand");
        for (std::size_t f = 0; f < facilities.size(); ++f)
            for (std::size_t l = 0; l < links.size(); ++l)
                if (arc_of[f][l] != SIZE_MAX) amount[f][l] = std::max(0.0, solver.flow_on(arc_of[f][l]));
        // Rescale columns so each link is served exactly despite rounding.
        for (std::size_t l = 0; l < links.size(); ++l) {
            double col = 0.0;
            for (std::size_t f = 0; f < facilities.size(); ++f) col += amount[f][l];
            if (col > 0.0)
                for (std::size_t f = 0; f < facilities.size(); ++f) amount[f][l] *= links[l].average / col;
        }
    }

    for (std::size_t f = 0; f < facilities.size(); ++f)
        for (std::size_t l = 0; l < links.size(); ++l) {
            double a = amount[f][l];
            if (!(a > 0.0)) continue;
            double share = a / links[l].average;
            double peak = share * links[l].peak;
            sol.allocation.push_back({f, links[l].link, a, peak});
            sol.average_per_day[f] += a;
            sol.peak_per_day[f] += peak;
            for (std::size_t c = 0; c < kCommodityCount; ++c) sol.average_by_commodity[f][c] += share * links[l].by_commodity[c];
        }
    for (std::size_t l = 0; l < links.size(); ++l)
        for (std::size_t f = 0; f < facilities.size(); ++f) sol.daily_cost += amount[f][l] * unit_costs[f];
    return sol;
}

DispenseEvent dispense_event(const ParameterPack& params, StorageTech tech)
{
    if (tech == StorageTech::Battery)
        return {params.battery.usable_kwh_per_tender(), params.battery.hours_per_charge()};
    const double kg = params.hydrogen.tender_capacity_kg * params.engine.hydrogen_fill_depth;
    return {kg, kg / params.engine.pump_rate_kg_per_hour};
}

int charger_count(double events_per_day, double hours_per_event, double max_utilization)
{
    if (!(max_utilization > 0.0)) throw DataError("maximum utilization must be positive");
    const double busy_hours = events_per_day * hours_per_event;
    if (!(busy_hours > 0.0)) return 0;
    const double needed = busy_hours / (24.0 * max_utilization);
    int n = static_cast<int>(std::ceil(needed * (1.0 - 1e-12)));
    return std::max(n, 1);
}

std::vector<FacilityLoad> facility_metrics(const SizingSolution& sol, const ParameterPack& params, StorageTech tech,
                                           double max_utilization)
{
    if (!(max_utilization > 0.0)) throw DataError("maximum utilization must be positive");
    const DispenseEvent ev = dispense_event(params, tech);
    std::vector<FacilityLoad> out;
    for (std::size_t f = 0; f < sol.facilities.size(); ++f) {
        FacilityLoad load;
        load.node = sol.facilities[f];
        load.average_per_day = sol.average_per_day[f];
        load.peak_per_day = sol.peak_per_day[f];
        load.locos_per_day_average = load.average_per_day / ev.energy;
        load.locos_per_day_peak = load.peak_per_day / ev.energy;
        load.chargers = charger_count(load.locos_per_day_peak, ev.hours, max_utilization);
        load.utilization =
            load.chargers > 0 ? load.locos_per_day_peak * ev.hours / (load.chargers * 24.0) : 0.0;
        out.push_back(load);
    }
    return out;
}

int tender_count(double range_miles, double tonnage_per_locomotive, double btu_per_ton_mile, double efficiency_ratio,
                 double btu_per_energy_unit, double usable_energy_per_tender)
{
    if (!(range_miles > 0.0)) return 1;
    const double energy = range_miles * tonnage_per_locomotive * btu_per_ton_mile / efficiency_ratio / btu_per_energy_unit;
    const int n = static_cast<int>(std::ceil(energy / usable_energy_per_tender * (1.0 - 1e-12)));
    return std::max(n, 1);
}

int tender_count(const ParameterPack& params, const RailroadParams& railroad, StorageTech tech, double range_miles,
                 double btu_per_ton_mile)
{
    if (tech == StorageTech::Battery)
        return tender_count(range_miles, railroad.tonnage_per_locomotive, btu_per_ton_mile,
                            params.battery.efficiency_ratio, params.engine.btu_per_kwh,
                            params.battery.usable_kwh_per_tender());
    return tender_count(range_miles, railroad.tonnage_per_locomotive, btu_per_ton_mile, params.hydrogen.efficiency_ratio,
                        params.engine.h2_lhv_btu_per_kg,
                        params.hydrogen.tender_capacity_kg * params.engine.hydrogen_fill_depth);
}

} // namespace railcarb
