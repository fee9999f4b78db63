#include "railcarb/report.hpp"

#include "railcarb/csv.hpp"

#include <cmath>
#include <cstdio>

namespace railcarb {

using nlohmann::json;

double round_to(double value, int decimals)
{
    const double scale = std::pow(10.0, decimals);
    const double r = std::round(value * scale) / scale;
    return r == 0.0 ? 0.0 : r; // no negative zero
}

namespace {

double cents(double v) { return round_to(v, 2); }

json edge_ref(const RailNetwork& net, EdgeIndex e)
{
    const Edge& edge = net.edge(e);
    return {{"edge", e}, {"from", net.node(edge.from).id}, {"to", net.node(edge.to).id}, {"miles", edge.miles}};
}

json node_ids(const RailNetwork& net, const std::vector<NodeIndex>& nodes)
{
    json out = json::array();
    for (NodeIndex n : nodes) out.push_back(net.node(n).id);
    return out;
}

} // namespace

json network_json(const RailNetwork& net)
{
    json nodes = json::array(), edges = json::array();
    for (const auto& n : net.nodes())
        nodes.push_back({{"id", n.id}, {"name", n.name}, {"state", n.state}, {"lat", n.lat}, {"lon", n.lon},
                         {"candidate", n.candidate}});
    for (EdgeIndex e = 0; e < net.edge_count(); ++e) {
        json j = edge_ref(net, e);
        j["owner"] = net.edge(e).owner;
        j["one_way"] = net.edge(e).one_way;
        edges.push_back(j);
    }
    return {{"nodes", nodes}, {"edges", edges}};
}

json assignment_json(const FlowAssignment& a, const RailNetwork& net)
{
    json flows = json::array(), links = json::array();
    for (const auto& f : a.flows)
        flows.push_back({{"origin", net.node(f.flow.origin).id},
                         {"destination", net.node(f.flow.destination).id},
                         {"commodity", std::string(to_string(f.flow.commodity))},
                         {"tons_per_year", f.flow.tons_per_year},
                         {"network", std::string(to_string(f.network))},
                         {"miles", f.path.miles()},
                         {"path", node_ids(net, f.path.nodes)}});
    for (const auto& l : a.links) {
        json j = edge_ref(net, l.edge);
        j["network"] = std::string(to_string(l.network));
        j["commodity"] = std::string(to_string(l.commodity));
        j["tons_per_year"] = l.tons;
        links.push_back(j);
    }
    return {{"flows", flows},
            {"links", links},
            {"alt_ton_miles", a.alt_ton_miles},
            {"diesel_ton_miles", a.diesel_ton_miles},
            {"penetration", a.penetration}};
}

json facility_set_json(const FacilitySet& s, const RailNetwork& net)
{
    return {{"facilities", node_ids(net, s.facilities)}, {"path_feasible", s.path_feasible}};
}

json sizing_json(const SizingSolution& s, const RailNetwork& net)
{
    json facilities = json::array(), allocation = json::array();
    for (std::size_t f = 0; f < s.facilities.size(); ++f) {
        json by_c = json::object();
        for (Commodity c : kAllCommodities)
            if (s.average_by_commodity[f][index_of(c)] > 0.0)
                by_c[std::string(to_string(c))] = s.average_by_commodity[f][index_of(c)];
        facilities.push_back({{"id", net.node(s.facilities[f]).id},
                              {"unit_cost", s.unit_costs[f]},
                              {"average_per_day", s.average_per_day[f]},
                              {"peak_per_day", s.peak_per_day[f]},
                              {"average_by_commodity", by_c}});
    }
    for (const auto& a : s.allocation) {
        json j = edge_ref(net, a.link);
        j["facility"] = net.node(s.facilities[a.facility]).id;
        j["average_per_day"] = a.average_per_day;
        j["peak_per_day"] = a.peak_per_day;
        allocation.push_back(j);
    }
    return {{"facilities", facilities}, {"allocation", allocation}, {"daily_cost", s.daily_cost}};
}

json facilities_json(const EvaluationReport& rep, const RailNetwork& net, const ParameterPack& params)
{
    json out = json::array();
    const bool storage = is_storage(rep.config.technology);
    const std::string unit = storage ? std::string(energy_unit(storage_tech(rep.config.technology))) : "";
    const char* device = rep.config.technology == Technology::Hydrogen ? "pumps" : "chargers";
    for (const auto& fd : rep.facilities) {
        const NodeRecord& n = net.node(fd.load.node);
        out.push_back({
            {"id", n.id},
            {"name", n.name},
            {"state", n.state},
            {"lat", n.lat},
            {"lon", n.lon},
            {"energy_unit", unit},
            {"average_per_day", fd.load.average_per_day},
            {"peak_per_day", fd.load.peak_per_day},
            {"locos_per_day_average", fd.load.locos_per_day_average},
            {"locos_per_day_peak", fd.load.locos_per_day_peak},
            {device, fd.load.chargers},
            {"utilization", fd.load.utilization},
            {"max_utilization", params.engine.max_utilization},
            {"station_cost_per_unit", fd.price.station_per_unit},
            {"energy_price_per_unit", fd.price.energy_per_unit},
            {"kg_co2_per_day", fd.g_per_day / 1000.0},
        });
    }
    return out;
}

json report_json(const EvaluationReport& rep, const RailNetwork& net, const ParameterPack& params)
{
    const auto& a = rep.assignment;
    json skipped = json::array();
    for (std::size_t s : rep.skipped_pairs) skipped.push_back(s);
    json arcs = json::array();
    for (EdgeIndex e : rep.enabled_arcs) arcs.push_back(edge_ref(net, e));
    json links = json::array();
    for (const auto& l : a.links) {
        json j = edge_ref(net, l.edge);
        j["network"] = std::string(to_string(l.network));
        j["commodity"] = std::string(to_string(l.commodity));
        j["tons_per_year"] = l.tons;
        links.push_back(j);
    }
    const auto& lco = rep.lco;
    json j = {
        {"schema_version", kReportSchemaVersion},
        {"config", rep.config.to_json()},
        {"config_hash", rep.config_hash},
        {"technology", std::string(to_string(rep.config.technology))},
        {"railroad", rep.config.railroad},
        {"deployment",
         {{"range_miles", rep.range_miles},
          {"target", rep.config.target_deployment ? json(*rep.config.target_deployment) : json(nullptr)},
          {"tolerance", rep.config.coverage_tolerance},
          {"coverage_ratio", rep.coverage_ratio},
          {"selected_pairs", rep.selected_pairs},
          {"total_pairs", rep.total_pairs},
          {"skipped_pairs", skipped},
          {"undershoot", rep.undershoot}}},
        {"penetration",
         {{"rate", rep.penetration},
          {"alt_ton_miles", a.alt_ton_miles},
          {"diesel_ton_miles", a.diesel_ton_miles},
          {"total_ton_miles", a.total_ton_miles()}}},
        {"emissions",
         {{"diesel_kt", rep.emissions.diesel_kt},
          {"alt_kt", rep.emissions.alt_kt},
          {"total_kt", rep.emissions.total_kt()},
          {"baseline_kt", rep.emissions.baseline_kt},
          {"reduction", rep.emissions.reduction()},
          {"g_per_ton_mile", rep.emissions.g_per_ton_mile},
          {"baseline_g_per_ton_mile", rep.emissions.baseline_g_per_ton_mile}}},
        {"lco_cents_per_ton_mile",
         {{"alternative",
           {{"energy", cents(lco.energy)},
            {"storage", cents(lco.storage)},
            {"station", cents(lco.station)},
            {"total", cents(lco.alt_total())}}},
          {"diesel", cents(lco.diesel)},
          {"scenario", cents(lco.scenario())},
          {"baseline", cents(rep.baseline_cents)},
          {"scenario_components",
           {{"energy", cents(lco.alt_share * lco.energy)},
            {"storage", cents(lco.alt_share * lco.storage)},
            {"station", cents(lco.alt_share * lco.station)},
            {"diesel", cents((1.0 - lco.alt_share) * lco.diesel)}}}}},
        {"cae_dollars_per_kg", rep.cae ? json(round_to(*rep.cae, 2)) : json("n/a")},
        {"facilities", facilities_json(rep, net, params)},
        {"enabled_arcs", arcs},
        {"link_flows", links},
        {"notes", rep.notes},
    };
    if (rep.elapsed_ms) j["timings"] = {{"elapsed_ms", *rep.elapsed_ms}};
    return j;
}

std::string report_text(const EvaluationReport& rep, const RailNetwork& net, const ParameterPack& params)
{
    return report_json(rep, net, params).dump(2) + "\n";
}

std::string csv_summary_header()
{
    return "config_hash,technology,railroad,range_miles,target_deployment,penetration,undershoot,facilities,"
           "diesel_kt,alt_kt,baseline_kt,reduction,g_per_ton_mile,lco_alt_cents,lco_diesel_cents,"
           "lco_scenario_cents,cae_dollars_per_kg\n";
}

std::string csv_summary_row(const EvaluationReport& rep)
{
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.10g", v);
        return std::string(buf);
    };
    std::string row;
    auto add = [&](const std::string& s) {
        if (!row.empty()) row += ",";
        row += csv::escape(s);
    };
    add(rep.config_hash);
    add(std::string(to_string(rep.config.technology)));
    add(rep.config.railroad);
    add(num(rep.range_miles));
    add(rep.config.target_deployment ? num(*rep.config.target_deployment) : "");
    add(num(rep.penetration));
    add(rep.undershoot ? "true" : "false");
    add(std::to_string(rep.facilities.size()));
    add(num(rep.emissions.diesel_kt));
    add(num(rep.emissions.alt_kt));
    add(num(rep.emissions.baseline_kt));
    add(num(rep.emissions.reduction()));
    add(num(rep.emissions.g_per_ton_mile));
    add(num(cents(rep.lco.alt_total())));
    add(num(cents(rep.lco.diesel)));
    add(num(cents(rep.lco.scenario())));
    add(rep.cae ? num(round_to(*rep.cae, 2)) : "n/a");
    return row + "\n";
}

} // namespace railcarb
