#include "railcarb/netio.hpp"

#include "railcarb/csv.hpp"
#include "railcarb/error.hpp"
#include "railcarb/routing.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

namespace railcarb {

namespace {

constexpr std::array<std::string_view, kCommodityCount> kCommodityNames = {
    "AgriculturalFood", "ChemicalPetroleum", "Coal",
    "ForestProducts",   "Intermodal",        "MetalsOres",
    "MotorVehicles",    "NonmetallicProducts", "Others",
};

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string fmt_miles(double v)
{
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// Uniform in [0,1) from the raw 64-bit stream; std distributions are not
// reproducible across standard libraries.
double unit_uniform(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace

std::string_view to_string(Commodity c)
{
    return kCommodityNames[index_of(c)];
}

std::optional<Commodity> parse_commodity(std::string_view label)
{
    std::string l = lower(label);
    for (std::size_t i = 0; i < kCommodityCount; ++i)
        if (lower(kCommodityNames[i]) == l) return static_cast<Commodity>(i);
    return std::nullopt;
}

std::string commodity_labels()
{
    std::string out;
    for (auto name : kCommodityNames) {
        if (!out.empty()) out += ", ";
        out += name;
    }
    return out;
}

double great_circle_miles(double lat1, double lon1, double lat2, double lon2)
{
    constexpr double kEarthRadiusMiles = 3958.7613;
    constexpr double kDeg = 3.14159265358979323846 / 180.0;
    double dlat = (lat2 - lat1) * kDeg;
    double dlon = (lon2 - lon1) * kDeg;
    double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
               std::cos(lat1 * kDeg) * std::cos(lat2 * kDeg) * std::sin(dlon / 2) * std::sin(dlon / 2);
    return 2.0 * kEarthRadiusMiles * std::asin(std::min(1.0, std::sqrt(a)));
}

// RailNetwork

RailNetwork RailNetwork::build(std::vector<NodeRecord> nodes, std::vector<EdgeRecord> edges)
{
    Diagnostics diag;
    return build(std::move(nodes), std::move(edges), diag);
}

RailNetwork RailNetwork::build(std::vector<NodeRecord> nodes, std::vector<EdgeRecord> edges, Diagnostics& diag)
{
    RailNetwork net;
    std::sort(nodes.begin(), nodes.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& n = nodes[i];
        if (n.id.empty()) throw DataError("node with empty id");
        if (i > 0 && nodes[i - 1].id == n.id) throw DataError("duplicate node id '" + n.id + "'");
        if (n.candidate && n.state.empty()) throw DataError("candidate node '" + n.id + "' has no state code");
        if (!(n.lat >= -90.0 && n.lat <= 90.0) || !(n.lon >= -180.0 && n.lon <= 180.0))
            throw DataError("node '" + n.id + "' has coordinates out of range");
    }
    net.nodes_ = std::move(nodes);

    // key: (one_way, a, b) where a < b for bidirectional edges
    std::map<std::tuple<bool, NodeIndex, NodeIndex>, Edge> merged;
    for (const auto& e : edges) {
        auto from = net.find(e.from);
        auto to = net.find(e.to);
        if (!from) throw DataError("edge " + e.from + "-" + e.to + " references unknown node '" + e.from + "'");
        if (!to) throw DataError("edge " + e.from + "-" + e.to + " references unknown node '" + e.to + "'");
        if (!(e.miles > 0.0) || !std::isfinite(e.miles))
            throw DataError("edge " + e.from + "-" + e.to + " has nonpositive mileage");
        if (*from == *to) throw DataError("edge " + e.from + "-" + e.to + " is a self-loop");
        NodeIndex a = *from, b = *to;
        if (!e.one_way && a > b) std::swap(a, b);
        auto key = std::make_tuple(e.one_way, a, b);
        auto it = merged.find(key);
        if (it == merged.end()) {
            merged.emplace(key, Edge{a, b, e.miles, e.owner, e.one_way});
        } else {
            diag.warn("merged parallel edge " + e.from + "-" + e.to + " (" + fmt_miles(e.miles) + " mi) into " +
                      fmt_miles(std::min(it->second.miles, e.miles)) + " mi");
            if (e.miles < it->second.miles) {
                it->second.miles = e.miles;
                it->second.owner = e.owner;
            }
        }
    }
    net.edges_.reserve(merged.size());
    for (auto& [key, e] : merged) net.edges_.push_back(std::move(e));
    net.index();

    auto comps = net.components();
    if (comps.size() > 1) {
        std::string msg = "network has " + std::to_string(comps.size()) + " disconnected components:";
        for (const auto& c : comps) {
            msg += " {";
            for (std::size_t i = 0; i < c.size() && i < 5; ++i) msg += (i ? "," : "") + net.nodes_[c[i]].id;
            if (c.size() > 5) msg += ",...(" + std::to_string(c.size()) + ")";
            msg += "}";
        }
        diag.warn(msg);
    }
    return net;
}

void RailNetwork::index()
{
    const std::size_t n = nodes_.size();
    std::vector<std::vector<Arc>> out(n), in(n);
    for (EdgeIndex i = 0; i < edges_.size(); ++i) {
        const Edge& e = edges_[i];
        out[e.from].push_back({e.to, i, e.miles});
        in[e.to].push_back({e.from, i, e.miles});
        if (!e.one_way) {
            out[e.to].push_back({e.from, i, e.miles});
            in[e.from].push_back({e.to, i, e.miles});
        }
    }
    auto flatten = [n](std::vector<std::vector<Arc>>& lists, std::vector<std::size_t>& offsets, std::vector<Arc>& arcs) {
        offsets.assign(n + 1, 0);
        arcs.clear();
        for (std::size_t i = 0; i < n; ++i) {
            std::sort(lists[i].begin(), lists[i].end(),
                      [](const Arc& a, const Arc& b) { return std::tie(a.to, a.edge) < std::tie(b.to, b.edge); });
            offsets[i] = arcs.size();
            arcs.insert(arcs.end(), lists[i].begin(), lists[i].end());
        }
        offsets[n] = arcs.size();
    };
    flatten(out, out_offsets_, out_arcs_);
    flatten(in, in_offsets_, in_arcs_);
}

std::optional<NodeIndex> RailNetwork::find(std::string_view id) const
{
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                               [](const NodeRecord& n, std::string_view key) { return n.id < key; });
    if (it == nodes_.end() || it->id != id) return std::nullopt;
    return static_cast<NodeIndex>(it - nodes_.begin());
}

NodeIndex RailNetwork::require(std::string_view id) const
{
    if (auto i = find(id)) return *i;
    throw DataError("unknown node id '" + std::string(id) + "'");
}

std::span<const Arc> RailNetwork::out_arcs(NodeIndex n) const
{
    return {out_arcs_.data() + out_offsets_[n], out_offsets_[n + 1] - out_offsets_[n]};
}

std::span<const Arc> RailNetwork::in_arcs(NodeIndex n) const
{
    return {in_arcs_.data() + in_offsets_[n], in_offsets_[n + 1] - in_offsets_[n]};
}

std::vector<std::vector<NodeIndex>> RailNetwork::components() const
{
    std::vector<int> comp(nodes_.size(), -1);
    std::vector<std::vector<NodeIndex>> out;
    for (NodeIndex s = 0; s < nodes_.size(); ++s) {
        if (comp[s] >= 0) continue;
        int id = static_cast<int>(out.size());
        out.emplace_back();
        std::vector<NodeIndex> stack{s};
        comp[s] = id;
        while (!stack.empty()) {
            NodeIndex u = stack.back();
            stack.pop_back();
            out.back().push_back(u);
            for (auto arcs : {out_arcs(u), in_arcs(u)})
                for (const Arc& a : arcs)
                    if (comp[a.to] < 0) {
                        comp[a.to] = id;
                        stack.push_back(a.to);
                    }
        }
        std::sort(out.back().begin(), out.back().end());
    }
    return out;
}

std::vector<EdgeRecord> RailNetwork::edge_records() const
{
    std::vector<EdgeRecord> out;
    out.reserve(edges_.size());
    for (const auto& e : edges_) out.push_back({nodes_[e.from].id, nodes_[e.to].id, e.miles, e.owner, e.one_way});
    return out;
}

// File I/O

RailNetwork load_network(const std::string& node_file, const std::string& edge_file)
{
    Diagnostics diag;
    return load_network(node_file, edge_file, diag);
}

RailNetwork load_network(const std::string& node_file, const std::string& edge_file, Diagnostics& diag)
{
    auto nt = csv::Table::read_file(node_file);
    const auto& ns = nt.source();
    std::size_t c_id = nt.require_column("id"), c_name = nt.require_column("name"),
                c_state = nt.require_column("state"), c_lat = nt.require_column("lat"),
                c_lon = nt.require_column("lon"), c_cand = nt.require_column("candidate");
    std::vector<NodeRecord> nodes;
    std::set<std::string> seen;
    for (const auto& row : nt.rows()) {
        NodeRecord n;
        n.id = csv::field(row, c_id, "id", ns);
        n.name = csv::field(row, c_name, "name", ns);
        n.state = csv::field(row, c_state, "state", ns);
        n.lat = csv::parse_double(row, c_lat, "lat", ns);
        n.lon = csv::parse_double(row, c_lon, "lon", ns);
        n.candidate = csv::parse_bool(row, c_cand, "candidate", ns);
        std::string at = ns + " line " + std::to_string(row.line);
        if (n.id.empty()) throw DataError(at + ": empty node id");
        if (!seen.insert(n.id).second) throw DataError(at + ": duplicate node id '" + n.id + "'");
        if (n.candidate && n.state.empty()) throw DataError(at + ": candidate node '" + n.id + "' has no state code");
        if (!(n.lat >= -90.0 && n.lat <= 90.0) || !(n.lon >= -180.0 && n.lon <= 180.0))
            throw DataError(at + ": node '" + n.id + "' has coordinates out of range");
        nodes.push_back(std::move(n));
    }

    auto et = csv::Table::read_file(edge_file);
    const auto& es = et.source();
    std::size_t c_from = et.require_column("from"), c_to = et.require_column("to"),
                c_miles = et.require_column("miles"), c_owner = et.require_column("owner");
    auto c_oneway = et.column("one_way");
    std::vector<EdgeRecord> edges;
    for (const auto& row : et.rows()) {
        EdgeRecord e;
        e.from = csv::field(row, c_from, "from", es);
        e.to = csv::field(row, c_to, "to", es);
        e.miles = csv::parse_double(row, c_miles, "miles", es);
        e.owner = csv::field(row, c_owner, "owner", es);
        if (c_oneway && *c_oneway < row.fields.size()) e.one_way = csv::parse_bool(row, *c_oneway, "one_way", es);
        std::string at = es + " line " + std::to_string(row.line);
        for (const auto* id : {&e.from, &e.to})
            if (!seen.count(*id)) throw DataError(at + ": edge references unknown node '" + *id + "'");
        if (!(e.miles > 0.0) || !std::isfinite(e.miles))
            throw DataError(at + ": nonpositive mileage " + csv::field(row, c_miles, "miles", es));
        if (e.from == e.to) throw DataError(at + ": self-loop at '" + e.from + "'");
        edges.push_back(std::move(e));
    }
    return RailNetwork::build(std::move(nodes), std::move(edges), diag);
}

void write_nodes_csv(const RailNetwork& net, std::ostream& out)
{
    out << "id,name,state,lat,lon,candidate\n";
    out.precision(17);
    for (const auto& n : net.nodes())
        out << csv::escape(n.id) << ',' << csv::escape(n.name) << ',' << csv::escape(n.state) << ',' << n.lat << ','
            << n.lon << ',' << (n.candidate ? 1 : 0) << '\n';
}

void write_edges_csv(const RailNetwork& net, std::ostream& out)
{
    out << "from,to,miles,owner,one_way\n";
    out.precision(17);
    for (const auto& e : net.edge_records())
        out << csv::escape(e.from) << ',' << csv::escape(e.to) << ',' << e.miles << ',' << csv::escape(e.owner) << ','
            << (e.one_way ? 1 : 0) << '\n';
}

// Clustering

Clustering cluster_supernodes(const RailNetwork& net, double radius_miles)
{
    Clustering result;
    const auto& nodes = net.nodes();
    if (!(radius_miles > 0.0)) {
        result.network = net;
        for (const auto& n : nodes) result.super_of[n.id] = n.id;
        return result;
    }

    std::vector<int> cluster(nodes.size(), -1);
    std::vector<std::vector<NodeIndex>> members;
    for (NodeIndex seed = 0; seed < nodes.size(); ++seed) {
        if (cluster[seed] >= 0) continue;
        int id = static_cast<int>(members.size());
        members.push_back({seed});
        cluster[seed] = id;
        for (NodeIndex other = seed + 1; other < nodes.size(); ++other) {
            if (cluster[other] >= 0) continue;
            double d = great_circle_miles(nodes[seed].lat, nodes[seed].lon, nodes[other].lat, nodes[other].lon);
            if (d <= radius_miles) {
                cluster[other] = id;
                members.back().push_back(other);
            }
        }
    }

    std::vector<NodeRecord> super_nodes;
    for (const auto& m : members) {
        NodeRecord s = nodes[m.front()];
        double lat = 0.0, lon = 0.0;
        bool candidate = false;
        for (NodeIndex i : m) {
            lat += nodes[i].lat;
            lon += nodes[i].lon;
            candidate = candidate || nodes[i].candidate;
            result.super_of[nodes[i].id] = s.id;
        }
        s.lat = lat / static_cast<double>(m.size());
        s.lon = lon / static_cast<double>(m.size());
        s.candidate = candidate;
        if (s.candidate && s.state.empty())
            for (NodeIndex i : m)
                if (!nodes[i].state.empty()) {
                    s.state = nodes[i].state;
                    break;
                }
        super_nodes.push_back(std::move(s));
    }

    std::vector<EdgeRecord> edges;
    for (const auto& e : net.edges()) {
        int a = cluster[e.from], b = cluster[e.to];
        if (a == b) continue;
        edges.push_back({super_nodes[a].id, super_nodes[b].id, e.miles, e.owner, e.one_way});
    }
    Diagnostics ignored;
    result.network = RailNetwork::build(std::move(super_nodes), std::move(edges), ignored);
    return result;
}

std::vector<ODFlow> remap_demand(const std::vector<ODFlow>& flows, const RailNetwork& from,
                                 const Clustering& clustering, Diagnostics& diag)
{
    std::vector<ODFlow> out;
    for (const auto& f : flows) {
        const auto& o = clustering.super_of.at(from.node(f.origin).id);
        const auto& d = clustering.super_of.at(from.node(f.destination).id);
        if (o == d) {
            diag.warn("dropped flow " + from.node(f.origin).id + "->" + from.node(f.destination).id + " (" +
                      std::string(to_string(f.commodity)) + "): both endpoints merged into super-node " + o);
            continue;
        }
        out.push_back({clustering.network.require(o), clustering.network.require(d), f.commodity, f.tons_per_year});
    }
    return aggregate_flows(std::move(out));
}

// Demand

std::vector<ODFlow> aggregate_flows(std::vector<ODFlow> flows)
{
    std::map<std::tuple<NodeIndex, NodeIndex, Commodity>, double> sums;
    for (const auto& f : flows) sums[{f.origin, f.destination, f.commodity}] += f.tons_per_year;
    std::vector<ODFlow> out;
    out.reserve(sums.size());
    for (const auto& [k, tons] : sums) out.push_back({std::get<0>(k), std::get<1>(k), std::get<2>(k), tons});
    return out;
}

std::vector<ODFlow> load_demand(const std::string& file, const RailNetwork& net)
{
    Diagnostics diag;
    return load_demand(file, net, diag);
}

std::vector<ODFlow> load_demand(const std::string& file, const RailNetwork& net, Diagnostics& diag)
{
    std::ifstream in(file);
    if (!in) throw DataError("cannot open '" + file + "'");
    return parse_demand(in, file, net, diag);
}

std::vector<ODFlow> parse_demand(std::istream& in, const std::string& source, const RailNetwork& net,
                                 Diagnostics& diag)
{
    auto t = csv::Table::read(in, source);
    std::size_t c_o = t.require_column("origin"), c_d = t.require_column("destination"),
                c_c = t.require_column("commodity"), c_t = t.require_column("tons_per_year");
    std::vector<ODFlow> flows;
    for (const auto& row : t.rows()) {
        std::string at = source + " line " + std::to_string(row.line);
        const auto& o = csv::field(row, c_o, "origin", source);
        const auto& d = csv::field(row, c_d, "destination", source);
        const auto& c = csv::field(row, c_c, "commodity", source);
        double tons = csv::parse_double(row, c_t, "tons_per_year", source);
        auto oi = net.find(o);
        auto di = net.find(d);
        if (!oi) throw DataError(at + ": unknown node id '" + o + "'");
        if (!di) throw DataError(at + ": unknown node id '" + d + "'");
        if (!net.node(*oi).candidate) throw DataError(at + ": origin '" + o + "' is not a candidate node");
        if (!net.node(*di).candidate) throw DataError(at + ": destination '" + d + "' is not a candidate node");
        if (*oi == *di) throw DataError(at + ": origin equals destination '" + o + "'");
        auto com = parse_commodity(c);
        if (!com) throw DataError(at + ": unknown commodity '" + c + "'; valid labels: " + commodity_labels());
        if (!(tons >= 0.0) || !std::isfinite(tons)) throw DataError(at + ": negative tonnage");
        if (tons == 0.0) {
            diag.warn(at + ": dropped zero-ton row " + o + "->" + d + " (" + c + ")");
            continue;
        }
        flows.push_back({*oi, *di, *com, tons});
    }
    return aggregate_flows(std::move(flows));
}

void write_demand_csv(const RailNetwork& net, const std::vector<ODFlow>& flows, std::ostream& out)
{
    out << "origin,destination,commodity,tons_per_year\n";
    out.precision(17);
    for (const auto& f : flows)
        out << csv::escape(net.node(f.origin).id) << ',' << csv::escape(net.node(f.destination).id) << ','
            << to_string(f.commodity) << ',' << f.tons_per_year << '\n';
}

std::vector<ODFlow> synth_demand(const RailNetwork& net, const SynthOptions& opts)
{
    if (net.node_count() == 0) throw DataError("cannot synthesize demand on an empty network");
    if (opts.n_pairs == 0) throw DataError("n_pairs must be positive");
    if (!(opts.min_tons > 0.0) || opts.max_tons < opts.min_tons) throw DataError("invalid tonnage band");
    double mix_total = 0.0;
    for (double w : opts.commodity_mix) {
        if (!(w >= 0.0)) throw DataError("commodity mix weights must be nonnegative");
        mix_total += w;
    }
    if (!(mix_total > 0.0)) throw DataError("commodity mix has no positive weight");

    std::vector<NodeIndex> candidates;
    for (NodeIndex i = 0; i < net.node_count(); ++i)
        if (net.node(i).candidate) candidates.push_back(i);

    struct Candidate {
        NodeIndex o, d;
        double weight;
    };
    std::vector<Candidate> pairs;
    for (NodeIndex d : candidates) {
        auto dist = distances_to(net, d);
        for (NodeIndex o : candidates)
            if (o != d && std::isfinite(dist[o])) pairs.push_back({o, d, 1.0 / dist[o]});
    }
    std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return std::tie(a.o, a.d) < std::tie(b.o, b.d); });
    if (opts.n_pairs > pairs.size())
        throw DataError("n_pairs " + std::to_string(opts.n_pairs) + " exceeds the " + std::to_string(pairs.size()) +
                        " reachable candidate pairs");

    std::mt19937_64 rng(opts.seed);
    // Weighted sampling without replacement: keep the n largest u^(1/w) keys,
    // compared in log space.
    std::vector<std::pair<double, std::size_t>> keys;
    keys.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        double u = unit_uniform(rng);
        if (u <= 0.0) u = 0x1.0p-53;
        keys.emplace_back(std::log(u) / pairs[i].weight, i);
    }
    std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(opts.n_pairs), keys.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
    std::vector<std::size_t> chosen;
    for (std::size_t i = 0; i < opts.n_pairs; ++i) chosen.push_back(keys[i].second);
    std::sort(chosen.begin(), chosen.end());

    std::vector<double> cumulative;
    double acc = 0.0;
    for (double w : opts.commodity_mix) cumulative.push_back(acc += w);

    std::vector<ODFlow> flows;
    const double log_lo = std::log(opts.min_tons), log_hi = std::log(opts.max_tons);
    for (std::size_t i : chosen) {
        double tons = std::exp(log_lo + (log_hi - log_lo) * unit_uniform(rng));
        double pick = unit_uniform(rng) * mix_total;
        std::size_t c = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
        c = std::min(c, kCommodityCount - 1);
        while (opts.commodity_mix[c] == 0.0 && c > 0) --c;
        flows.push_back({pairs[i].o, pairs[i].d, static_cast<Commodity>(c), tons});
    }
    return flows;
}

} // namespace railcarb
