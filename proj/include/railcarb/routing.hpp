#pragma once

#include "railcarb/netio.hpp"

#include <limits>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace railcarb {

inline constexpr double kInfiniteMiles = std::numeric_limits<double>::infinity();

// Indexed by EdgeIndex. An empty mask means "every edge".
using EdgeMask = std::vector<bool>;

struct Path {
    std::vector<NodeIndex> nodes;
    std::vector<EdgeIndex> edges;      // edges[i] joins nodes[i] and nodes[i+1]
    std::vector<double> cumulative;    // miles from the origin, one per node

    double miles() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
    NodeIndex origin() const { return nodes.front(); }
    NodeIndex destination() const { return nodes.back(); }

    bool operator==(const Path&) const = default;
};

// Two distances are treated as equal when they agree to 1e-9 relative; the
// same tolerance is used by every range comparison in the engine.
bool miles_le(double a, double b);

// Single-target Dijkstra over arcs entering `target` (distance *to* target).
// Entries beyond `limit` are left at infinity.
std::vector<double> distances_to(const RailNetwork& net, NodeIndex target, const EdgeMask* mask = nullptr,
                                 double limit = kInfiniteMiles);

// Single-source Dijkstra. With `undirected`, one-way edges may be used in reverse.
std::vector<double> distances_from(const RailNetwork& net, NodeIndex source, const EdgeMask* mask = nullptr,
                                   double limit = kInfiniteMiles, bool undirected = false);

// Walks from origin to the target of `dist_to`, taking at each step the
// smallest-id neighbour that stays on a shortest path. This yields the
// shortest path whose node-id sequence is lexicographically smallest.
std::optional<Path> trace_shortest(const RailNetwork& net, NodeIndex origin, NodeIndex target,
                                   const std::vector<double>& dist_to, const EdgeMask* mask = nullptr);

// Throws RoutingError when the destination is unreachable.
Path shortest_path(const RailNetwork& net, NodeIndex origin, NodeIndex destination, const EdgeMask* mask = nullptr);

using PairKey = std::pair<NodeIndex, NodeIndex>;

// Baseline (unrestricted) shortest paths for every O-D pair in a demand set.
class BaselineRoutes {
public:
    static BaselineRoutes compute(const RailNetwork& net, const std::vector<ODFlow>& flows);

    const Path& at(NodeIndex origin, NodeIndex destination) const;
    const std::map<PairKey, Path>& paths() const { return paths_; }

private:
    std::map<PairKey, Path> paths_;
};

struct ODPair {
    NodeIndex origin;
    NodeIndex destination;
    double tons;       // all commodities
    double miles;      // baseline shortest path
    double ton_miles;
};

struct OdSelection {
    std::vector<ODPair> ranked; // descending ton-miles, ties by (origin, destination)
    std::size_t selected = 0;   // length of the chosen prefix
    double total_ton_miles = 0.0;

    std::span<const ODPair> chosen() const { return {ranked.data(), selected}; }
};

OdSelection rank_and_select_ods(const std::vector<ODFlow>& flows, const RailNetwork& net, double coverage_ratio,
                                const BaselineRoutes* baseline = nullptr);

// Arcs usable by the alternative technology: edges on shortest
// facility-to-facility paths no longer than the range, plus edges whose far
// end lies within half the range of some facility.
EdgeMask build_alt_subnetwork(const RailNetwork& net, const std::vector<NodeIndex>& facilities, double range_miles);

struct NoReroute {
    bool operator==(const NoReroute&) const = default;
};
struct RerouteMaxIncrease {
    double max_increase = 0.0; // fraction of baseline miles
    bool operator==(const RerouteMaxIncrease&) const = default;
};
struct EndpointsEnabled {
    bool operator==(const EndpointsEnabled&) const = default;
};
using RoutingPolicy = std::variant<NoReroute, RerouteMaxIncrease, EndpointsEnabled>;

std::string policy_name(const RoutingPolicy& policy);

enum class Network : std::uint8_t { Diesel, Alternative };

std::string_view to_string(Network n);

struct RoutedFlow {
    ODFlow flow;
    Network network;
    Path path;
};

struct LinkLoad {
    EdgeIndex edge;
    Network network;
    Commodity commodity;
    double tons; // per year
};

struct FlowAssignment {
    std::vector<RoutedFlow> flows;
    std::vector<LinkLoad> links;  // sorted by (edge, network, commodity), zero entries omitted
    double alt_ton_miles = 0.0;
    double diesel_ton_miles = 0.0;
    double penetration = 0.0;

    double total_ton_miles() const { return alt_ton_miles + diesel_ton_miles; }
};

// Each O-D pair is served entirely by one network. Flows the alternative
// network cannot carry stay on their baseline path under diesel.
FlowAssignment assign_flows(const std::vector<ODFlow>& flows, const RailNetwork& net, const EdgeMask& enabled,
                            const RoutingPolicy& policy, const std::vector<NodeIndex>& facilities,
                            const BaselineRoutes* baseline = nullptr);

} // namespace railcarb
