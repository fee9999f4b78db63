#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace railcarb {

using NodeIndex = std::uint32_t;
using EdgeIndex = std::uint32_t;

// The nine AAR commodity groups. The order is the canonical report order.
enum class Commodity : std::uint8_t {
    AgriculturalFood,
    ChemicalPetroleum,
    Coal,
    ForestProducts,
    Intermodal,
    MetalsOres,
    MotorVehicles,
    NonmetallicProducts,
    Others,
};

inline constexpr std::size_t kCommodityCount = 9;

inline constexpr std::array<Commodity, kCommodityCount> kAllCommodities = {
    Commodity::AgriculturalFood, Commodity::ChemicalPetroleum, Commodity::Coal,
    Commodity::ForestProducts,   Commodity::Intermodal,        Commodity::MetalsOres,
    Commodity::MotorVehicles,    Commodity::NonmetallicProducts, Commodity::Others,
};

std::string_view to_string(Commodity c);
// Case-insensitive match against the enumeration labels.
std::optional<Commodity> parse_commodity(std::string_view label);
std::string commodity_labels(); // "AgriculturalFood, ChemicalPetroleum, ..."

inline std::size_t index_of(Commodity c) { return static_cast<std::size_t>(c); }

struct Diagnostics {
    std::vector<std::string> warnings;
    void warn(std::string msg) { warnings.push_back(std::move(msg)); }
};

struct NodeRecord {
    std::string id;
    std::string name;
    std::string state;
    double lat = 0.0;
    double lon = 0.0;
    bool candidate = true;
};

struct EdgeRecord {
    std::string from;
    std::string to;
    double miles = 0.0;
    std::string owner;
    bool one_way = false;
};

struct Arc {
    NodeIndex to;
    EdgeIndex edge;
    double miles;
};

struct Edge {
    NodeIndex from;
    NodeIndex to;
    double miles;
    std::string owner;
    bool one_way;
};

// Validated rail network. Nodes are stored sorted by id, so comparing node
// indices is the same as comparing ids; every tie-break in the engine relies
// on that. Immutable after construction.
class RailNetwork {
public:
    RailNetwork() = default;

    // Validates and normalizes: duplicate parallel edges collapse to the
    // shortest one, bidirectional edges are stored with from < to.
    static RailNetwork build(std::vector<NodeRecord> nodes, std::vector<EdgeRecord> edges, Diagnostics& diag);
    static RailNetwork build(std::vector<NodeRecord> nodes, std::vector<EdgeRecord> edges);

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    const std::vector<NodeRecord>& nodes() const { return nodes_; }
    const NodeRecord& node(NodeIndex i) const { return nodes_[i]; }
    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(EdgeIndex e) const { return edges_[e]; }

    std::optional<NodeIndex> find(std::string_view id) const;
    NodeIndex require(std::string_view id) const; // throws DataError

    // Arcs leaving / entering a node. Bidirectional edges appear in both.
    std::span<const Arc> out_arcs(NodeIndex n) const;
    std::span<const Arc> in_arcs(NodeIndex n) const;

    // Weakly connected components, each sorted; components ordered by first id.
    std::vector<std::vector<NodeIndex>> components() const;

    std::vector<EdgeRecord> edge_records() const;

private:
    void index();

    std::vector<NodeRecord> nodes_;
    std::vector<Edge> edges_;
    std::vector<std::size_t> out_offsets_, in_offsets_;
    std::vector<Arc> out_arcs_, in_arcs_;
};

struct ODFlow {
    NodeIndex origin;
    NodeIndex destination;
    Commodity commodity;
    double tons_per_year;

    bool operator==(const ODFlow&) const = default;
};

// Great-circle distance in statute miles (haversine).
double great_circle_miles(double lat1, double lon1, double lat2, double lon2);

RailNetwork load_network(const std::string& node_file, const std::string& edge_file, Diagnostics& diag);
RailNetwork load_network(const std::string& node_file, const std::string& edge_file);

void write_nodes_csv(const RailNetwork& net, std::ostream& out);
void write_edges_csv(const RailNetwork& net, std::ostream& out);

struct Clustering {
    RailNetwork network;
    // Original node id -> super-node id.
    std::map<std::string, std::string> super_of;
};

// Greedy radius clustering with seeds taken in ascending id order.
// A super-node keeps its seed's id, name and state and sits at the member centroid.
Clustering cluster_supernodes(const RailNetwork& net, double radius_miles);

// Moves flows onto super-nodes; flows collapsing onto a single super-node are
// dropped with a warning and duplicates are summed.
std::vector<ODFlow> remap_demand(const std::vector<ODFlow>& flows, const RailNetwork& from,
                                 const Clustering& clustering, Diagnostics& diag);

std::vector<ODFlow> load_demand(const std::string& file, const RailNetwork& net, Diagnostics& diag);
std::vector<ODFlow> load_demand(const std::string& file, const RailNetwork& net);
std::vector<ODFlow> parse_demand(std::istream& in, const std::string& source, const RailNetwork& net, Diagnostics& diag);

void write_demand_csv(const RailNetwork& net, const std::vector<ODFlow>& flows, std::ostream& out);

// Sorted by (origin, destination, commodity) with duplicates summed.
std::vector<ODFlow> aggregate_flows(std::vector<ODFlow> flows);

struct SynthOptions {
    std::uint64_t seed = 1;
    std::size_t n_pairs = 100;
    std::array<double, kCommodityCount> commodity_mix = {1, 1, 1, 1, 1, 1, 1, 1, 1};
    double min_tons = 1.0e4;
    double max_tons = 1.0e7;
};

// Seeded gravity-style demand: distinct ordered candidate pairs drawn without
// replacement with weight 1/shortest-path-miles, log-uniform tonnage, and
// commodity drawn from the mix.
std::vector<ODFlow> synth_demand(const RailNetwork& net, const SynthOptions& opts);

} // namespace railcarb
