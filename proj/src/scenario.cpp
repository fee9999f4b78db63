#include "railcarb/scenario.hpp"

#include "railcarb/error.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cctype>
#include <cstdio>
#include <functional>
#include <set>

namespace railcarb {

using nlohmann::json;

std::string_view to_string(Technology t)
{
    switch (t) {
    case Technology::Diesel: return "diesel";
    case Technology::Biodiesel: return "biodiesel";
    case Technology::EFuel: return "efuel";
    case Technology::Battery: return "battery";
    case Technology::Hydrogen: return "hydrogen";
    }
    return "?";
}

std::optional<Technology> parse_technology(std::string_view s)
{
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "e-fuel") lower = "efuel";
    for (auto t : {Technology::Diesel, Technology::Biodiesel, Technology::EFuel, Technology::Battery,
                   Technology::Hydrogen})
        if (lower == to_string(t)) return t;
    return std::nullopt;
}

bool is_storage(Technology t)
{
    return t == Technology::Battery || t == Technology::Hydrogen;
}

bool is_blend(Technology t)
{
    return t == Technology::Diesel || t == Technology::Biodiesel || t == Technology::EFuel;
}

StorageTech storage_tech(Technology t)
{
    if (!is_storage(t)) throw DataError(std::string(to_string(t)) + " is not a storage technology");
    return t == Technology::Battery ? StorageTech::Battery : StorageTech::Hydrogen;
}

// Config

namespace {

const std::set<std::string> kConfigKeys = {
    "railroad",        "technology",         "blend_fraction", "range_miles",   "target_deployment",
    "coverage_ratio",  "routing_policy",     "max_increase",   "coverage_tolerance", "siting_solver",
    "grid_year",       "seed",               "synthetic_pairs", "params_path",  "include_timings",
};

class FieldReader {
public:
    explicit FieldReader(const json& j) : j_(j) {}

    template <class T>
    void read(const char* key, T& out)
    {
        if (!j_.contains(key)) return;
        const json& v = j_.at(key);
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number()) throw std::invalid_argument("expected a number");
                out = v.get<double>();
            } else if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) throw std::invalid_argument("expected true or false");
                out = v.get<bool>();
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw std::invalid_argument("expected a string");
                out = v.get<std::string>();
            } else {
                if (!v.is_number_integer() && !v.is_number_unsigned())
                    throw std::invalid_argument("expected an integer");
                if (v.is_number_integer() && v.get<long long>() < 0 && std::is_unsigned_v<T>)
                    throw std::invalid_argument("must be nonnegative");
                out = v.get<T>();
            }
        } catch (const std::exception& e) {
            fail(key, e.what());
        }
    }

    template <class T>
    void read(const char* key, std::optional<T>& out)
    {
        if (!j_.contains(key) || j_.at(key).is_null()) return;
        T value{};
        std::size_t before = errors.size();
        read(key, value);
        if (errors.size() == before) out = value;
    }

    void fail(const std::string& field, const std::string& msg) { errors.emplace_back(field, msg); }

    std::vector<std::pair<std::string, std::string>> errors;

private:
    const json& j_;
};

} // namespace

ScenarioConfig ScenarioConfig::from_json(const json& j)
{
    if (!j.is_object()) throw ConfigError("", "scenario config must be a JSON object");
    FieldReader r(j);
    for (const auto& [key, _] : j.items())
        if (!kConfigKeys.count(key)) r.fail(key, "unknown field");

    ScenarioConfig cfg;
    r.read("railroad", cfg.railroad);
    std::string tech;
    r.read("technology", tech);
    if (j.contains("technology") && j.at("technology").is_string()) {
        if (auto t = parse_technology(tech)) cfg.technology = *t;
        else r.fail("technology", "expected one of diesel, biodiesel, efuel, battery, hydrogen");
    }
    r.read("blend_fraction", cfg.blend_fraction);
    r.read("range_miles", cfg.range_miles);
    r.read("target_deployment", cfg.target_deployment);
    r.read("coverage_ratio", cfg.coverage_ratio);
    std::string policy = "no_reroute";
    double max_increase = 0.0;
    r.read("routing_policy", policy);
    r.read("max_increase", max_increase);
    if (policy == "no_reroute") cfg.routing_policy = NoReroute{};
    else if (policy == "reroute_max_increase") cfg.routing_policy = RerouteMaxIncrease{max_increase};
    else if (policy == "endpoints_enabled") cfg.routing_policy = EndpointsEnabled{};
    else r.fail("routing_policy", "expected no_reroute, reroute_max_increase or endpoints_enabled");
    if (j.contains("max_increase") && policy != "reroute_max_increase")
        r.fail("max_increase", "only applies to routing_policy reroute_max_increase");
    r.read("coverage_tolerance", cfg.coverage_tolerance);
    r.read("siting_solver", cfg.siting_solver);
    r.read("grid_year", cfg.grid_year);
    r.read("seed", cfg.seed);
    r.read("synthetic_pairs", cfg.synthetic_pairs);
    r.read("params_path", cfg.params_path);
    r.read("include_timings", cfg.include_timings);
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        for (const auto& [field, msg] : e.fields()) {
            bool seen = false;
            for (const auto& prior : r.errors) seen = seen || prior.first == field;
            if (!seen) r.errors.emplace_back(field, msg);
        }
    }
    if (!r.errors.empty()) throw ConfigError(std::move(r.errors));
    return cfg;
}

json ScenarioConfig::to_json() const
{
    auto opt = [](const auto& o) -> json { return o ? json(*o) : json(nullptr); };
    json j = {
        {"railroad", railroad},
        {"technology", std::string(to_string(technology))},
        {"blend_fraction", blend_fraction},
        {"range_miles", opt(range_miles)},
        {"target_deployment", opt(target_deployment)},
        {"coverage_ratio", coverage_ratio},
        {"routing_policy", policy_name(routing_policy)},
        {"coverage_tolerance", coverage_tolerance},
        {"siting_solver", siting_solver},
        {"grid_year", opt(grid_year)},
        {"seed", seed},
        {"synthetic_pairs", synthetic_pairs},
        {"params_path", params_path},
        {"include_timings", include_timings},
    };
    if (auto* r = std::get_if<RerouteMaxIncrease>(&routing_policy)) j["max_increase"] = r->max_increase;
    return j;
}

void ScenarioConfig::validate() const
{
    std::vector<std::pair<std::string, std::string>> bad;
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (railroad.empty()) bad.emplace_back("railroad", "must not be empty");
    if (!unit(blend_fraction)) bad.emplace_back("blend_fraction", "must lie in [0,1]");
    if (blend_fraction > 0.0 && !(technology == Technology::Biodiesel || technology == Technology::EFuel))
        bad.emplace_back("blend_fraction", "only applies to biodiesel or efuel");
    if (range_miles && !(*range_miles > 0.0 && std::isfinite(*range_miles)))
        bad.emplace_back("range_miles", "must be positive");
    if (technology == Technology::Battery && !range_miles) bad.emplace_back("range_miles", "required for battery");
    if (target_deployment && !unit(*target_deployment)) bad.emplace_back("target_deployment", "must lie in [0,1]");
    if (!unit(coverage_ratio)) bad.emplace_back("coverage_ratio", "must lie in [0,1]");
    if (!(coverage_tolerance >= 0.0 && coverage_tolerance < 1.0))
        bad.emplace_back("coverage_tolerance", "must lie in [0,1)");
    if (auto* r = std::get_if<RerouteMaxIncrease>(&routing_policy))
        if (!(r->max_increase >= 0.0 && std::isfinite(r->max_increase)))
            bad.emplace_back("max_increase", "must be nonnegative");
    if (siting_solver != "exact" && siting_solver != "greedy")
        bad.emplace_back("siting_solver", "expected exact or greedy");
    if (!bad.empty()) throw ConfigError(std::move(bad));
}

std::uint64_t fnv1a64(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string fnv1a64_hex(std::string_view bytes)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

std::string ScenarioConfig::hash() const
{
    json j = to_json();
    j.erase("include_timings");
    return fnv1a64_hex(j.dump());
}

// Siting cache

std::shared_ptr<const SitingCache::Entry> SitingCache::find(std::uint64_t key) const
{
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : it->second;
}

void SitingCache::store(std::uint64_t key, std::shared_ptr<const Entry> entry)
{
    std::lock_guard lock(mutex_);
    entries_.emplace(key, std::move(entry));
}

std::size_t SitingCache::size() const
{
    std::lock_guard lock(mutex_);
    return entries_.size();
}

// Shared helpers

namespace {

std::vector<ODFlow> synthetic_flows(const ScenarioConfig& cfg, const ScenarioData& data)
{
    SynthOptions opts;
    opts.seed = cfg.seed;
    opts.n_pairs = cfg.synthetic_pairs;
    return synth_demand(data.network, opts);
}

double link_sum(const FlowAssignment& a, const RailNetwork& net, std::optional<Network> only,
                const std::function<double(Commodity)>& per_ton_mile)
{
    double total = 0.0;
    for (const auto& l : a.links)
        if (!only || l.network == *only) total += l.tons * net.edge(l.edge).miles * per_ton_mile(l.commodity);
    return total;
}

std::map<std::string, std::string> common_notes(const ScenarioConfig& cfg)
{
    return {
        {"routing_policy", policy_name(cfg.routing_policy)},
        {"diesel_attribution", "assigned_path_miles"},
    };
}

} // namespace

// Drop-in fuels

EvaluationReport run_dropin(const ScenarioConfig& cfg, const ScenarioData& data)
{
    if (!is_blend(cfg.technology)) throw DataError("run_dropin needs a blend technology");
    const ParameterPack& p = data.params;
    const RailroadParams& rr = p.railroad(cfg.railroad);
    std::vector<ODFlow> synthetic;
    if (cfg.synthetic_pairs > 0) synthetic = synthetic_flows(cfg, data);
    const auto& flows = cfg.synthetic_pairs > 0 ? synthetic : data.demand;

    const double f = cfg.technology == Technology::Diesel ? 0.0 : cfg.blend_fraction;
    const double alt_kg = cfg.technology == Technology::EFuel ? p.dropin.efuel_kg_co2_per_gallon
                                                              : p.dropin.biodiesel_kg_co2_per_gallon;
    const double alt_price = cfg.technology == Technology::EFuel ? p.dropin.efuel_cost_per_gallon
                                                                 : p.dropin.biodiesel_cost_per_gallon;
    const double diesel_kg = p.dropin.diesel_kg_co2_per_gallon;
    const double diesel_price = p.dropin.diesel_cost_per_gallon;

    EvaluationReport rep;
    rep.config = cfg;
    rep.config_hash = cfg.hash();
    rep.notes = common_notes(cfg);
    rep.notes["deployment"] = "uniform_blend";
    const BaselineRoutes baseline = BaselineRoutes::compute(data.network, flows);
    rep.assignment = assign_flows(flows, data.network, EdgeMask{}, NoReroute{}, {}, &baseline);
    const auto ranking = rank_and_select_ods(flows, data.network, 1.0, &baseline);
    rep.total_pairs = rep.selected_pairs = ranking.ranked.size();
    rep.coverage_ratio = ranking.ranked.empty() ? 0.0 : 1.0;
    rep.penetration = f;

    const EmissionsSplit base = scenario_emissions(rep.assignment, data.network, p, rr, 0.0);
    const double blend_kg = blend_wtw(f, alt_kg, diesel_kg);
    rep.emissions.baseline_kt = base.baseline_kt;
    rep.emissions.baseline_g_per_ton_mile = base.baseline_g_per_ton_mile;
    rep.emissions.diesel_kt = base.baseline_kt * (1.0 - f);
    rep.emissions.alt_kt = base.baseline_kt * f * alt_kg / diesel_kg;
    rep.emissions.g_per_ton_mile = base.baseline_g_per_ton_mile * blend_kg / diesel_kg;

    const double tm = rep.assignment.total_ton_miles();
    if (tm > 0.0) {
        rep.baseline_cents =
            link_sum(rep.assignment, data.network, std::nullopt,
                     [&](Commodity c) { return diesel_cents_per_ton_mile(p, rr.intensity(c)); }) / tm;
        rep.lco.energy = link_sum(rep.assignment, data.network, std::nullopt,
                                  [&](Commodity c) { return dropin_lco(1.0, alt_price, p, rr.intensity(c)); }) / tm;
    }
    rep.lco.diesel = rep.baseline_cents;
    rep.lco.alt_share = f;

    try {
        rep.cae = cae(blend_price_per_gallon(f, alt_price, diesel_price), diesel_price, blend_kg, diesel_kg);
    } catch (const NonPositiveAvoidance&) {
        rep.cae.reset();
    }
    return rep;
}

// Storage technologies

StoragePipeline::StoragePipeline(const ScenarioConfig& cfg, const ScenarioData& data, SitingCache* cache)
    : cfg_(cfg), data_(data), cache_(cache), flows_(&data.demand)
{
    const RailroadParams& rr = data.params.railroad(cfg.railroad);
    if (cfg.technology == Technology::Battery) {
        if (!cfg.range_miles) throw ConfigError("range_miles", "required for battery");
        range_ = *cfg.range_miles;
    } else if (cfg.technology == Technology::Hydrogen) {
        range_ = cfg.range_miles.value_or(rr.hydrogen_range_miles);
    } else {
        throw DataError("storage pipeline needs battery or hydrogen");
    }
    if (cfg.synthetic_pairs > 0) {
        synthetic_ = synthetic_flows(cfg, data);
        flows_ = &synthetic_;
    }
    strict_ = std::holds_alternative<EndpointsEnabled>(cfg.routing_policy);
    baseline_ = BaselineRoutes::compute(data.network, *flows_);
    ranking_ = rank_and_select_ods(*flows_, data.network, 0.0, &baseline_);
}

PenetrationProbe StoragePipeline::probe(const std::vector<std::size_t>& selected) const
{
    const RailNetwork& net = data_.network;
    std::vector<Path> paths;
    std::string key = cfg_.siting_solver + (strict_ ? "|strict|" : "|loose|");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g|", range_);
    key += buf;
    for (std::size_t i : selected) {
        const ODPair& od = ranking_.ranked.at(i);
        paths.push_back(baseline_.at(od.origin, od.destination));
        key += std::to_string(od.origin) + ">" + std::to_string(od.destination) + ",";
    }
    const std::uint64_t hash = fnv1a64(key);

    std::shared_ptr<const SitingCache::Entry> entry = cache_ ? cache_->find(hash) : nullptr;
    if (!entry) {
        auto fresh = std::make_shared<SitingCache::Entry>();
        auto inst = SitingInstance::from_network(net, std::move(paths), range_, strict_);
        try {
            fresh->solution = cfg_.siting_solver == "greedy" ? solve_greedy(inst) : solve_exact(inst);
        } catch (const InfeasibleError& e) {
            fresh->infeasible = e.paths();
        }
        entry = fresh;
        if (cache_) cache_->store(hash, entry);
    }

    PenetrationProbe out;
    if (!entry->solution) {
        out.infeasible = entry->infeasible;
        return out;
    }
    out.feasible = true;
    out.facilities = entry->solution->facilities;
    out.enabled = out.facilities.empty() ? EdgeMask(net.edge_count(), false)
                                         : build_alt_subnetwork(net, out.facilities, range_);
    out.assignment = assign_flows(*flows_, net, out.enabled, cfg_.routing_policy, out.facilities, &baseline_);
    return out;
}

EvaluationReport StoragePipeline::evaluate(const std::vector<std::size_t>& selected, const PenetrationProbe& probe) const
{
    if (!probe.feasible) throw DataError("cannot evaluate an infeasible selection");
    const RailNetwork& net = data_.network;
    const ParameterPack& p = data_.params;
    const RailroadParams& rr = p.railroad(cfg_.railroad);
    const StorageTech tech = storage_tech(cfg_.technology);

    EvaluationReport rep;
    rep.config = cfg_;
    rep.config_hash = cfg_.hash();
    rep.notes = common_notes(cfg_);
    rep.notes["pricing_order"] = "allocation_before_pricing";
    rep.notes["cae_basis"] = "scenario_totals";
    rep.range_miles = range_;
    rep.total_pairs = ranking_.ranked.size();
    rep.selected_pairs = selected.size();
    double chosen_tm = 0.0;
    for (std::size_t i : selected) chosen_tm += ranking_.ranked[i].ton_miles;
    rep.coverage_ratio = ranking_.total_ton_miles > 0.0 ? chosen_tm / ranking_.total_ton_miles : 0.0;
    rep.assignment = probe.assignment;
    rep.penetration = probe.assignment.penetration;
    rep.facility_nodes = probe.facilities;
    for (EdgeIndex e = 0; e < probe.enabled.size(); ++e)
        if (probe.enabled[e]) rep.enabled_arcs.push_back(e);

    // Sizing
    auto demands = link_energy_demands(rep.assignment, net, p, rr, tech, p.engine.peak_factor);
    auto reach = facility_reach(net, probe.enabled, probe.facilities, range_);
    std::vector<double> unit_costs;
    for (NodeIndex f : probe.facilities) {
        if (tech == StorageTech::Battery)
            unit_costs.push_back(data_.grid.at(net.node(f).state, cfg_.grid_year)
                                     .price_per_kwh.value_or(p.battery.charging_cost_per_kwh));
        else
            unit_costs.push_back(p.hydrogen.fuel_cost_per_kg);
    }
    const SizingSolution sizing = solve_allocation(demands, probe.facilities, reach, unit_costs);
    const auto loads = facility_metrics(sizing, p, tech, p.engine.max_utilization);

    // Emissions
    const auto fac_emissions = tech == StorageTech::Battery ? battery_wtw(sizing, net, data_.grid, cfg_.grid_year)
                                                            : hydrogen_facility_wtw(sizing, p);
    double alt_g_per_day = 0.0;
    for (const auto& fe : fac_emissions) alt_g_per_day += fe.g_per_day;
    rep.emissions = scenario_emissions(rep.assignment, net, p, rr, alt_g_per_day);

    // Costs
    const double tm = rep.assignment.total_ton_miles();
    auto diesel_cents = [&](Commodity c) { return diesel_cents_per_ton_mile(p, rr.intensity(c)); };
    if (tm > 0.0) rep.baseline_cents = link_sum(rep.assignment, net, std::nullopt, diesel_cents) / tm;
    if (sizing.total_average_per_day() > 0.0) {
        StorageCostInputs in;
        in.sizing = &sizing;
        in.loads = &loads;
        in.net = &net;
        in.grid = &data_.grid;
        in.curve = data_.cost_curve ? &*data_.cost_curve : nullptr;
        in.grid_year = cfg_.grid_year;
        in.range_miles = range_;
        rep.lco = tech == StorageTech::Battery ? battery_lco(in, p, rr) : hydrogen_lco(in, p, rr);
    } else {
        for (std::size_t f = 0; f < sizing.facilities.size(); ++f)
            rep.lco.facilities.push_back({sizing.facilities[f], 0.0, unit_costs[f]});
    }
    if (rep.assignment.diesel_ton_miles > 0.0)
        rep.lco.diesel = link_sum(rep.assignment, net, Network::Diesel, diesel_cents) / rep.assignment.diesel_ton_miles;
    rep.lco.alt_share = rep.penetration;

    for (std::size_t f = 0; f < sizing.facilities.size(); ++f)
        rep.facilities.push_back({loads[f], rep.lco.facilities[f], fac_emissions[f].g_per_day,
                                  fac_emissions[f].g_per_unit});

    if (tm > 0.0) {
        try {
            rep.cae = cae(rep.lco.scenario() / 100.0, rep.baseline_cents / 100.0, rep.emissions.g_per_ton_mile / 1000.0,
                          rep.emissions.baseline_g_per_ton_mile / 1000.0);
        } catch (const NonPositiveAvoidance&) {
            rep.cae.reset();
        }
    }
    return rep;
}

namespace {

std::string describe_pairs(const RailNetwork& net, const OdSelection& ranking, const std::vector<std::size_t>& selected,
                           const std::vector<std::size_t>& positions)
{
    std::string s;
    for (std::size_t pos : positions) {
        const ODPair& od = ranking.ranked[selected[pos]];
        if (!s.empty()) s += ", ";
        s += net.node(od.origin).id + "->" + net.node(od.destination).id;
    }
    return s;
}

} // namespace

EvaluationReport target_deployment(const ScenarioConfig& cfg, const ScenarioData& data, SitingCache* cache)
{
    if (!cfg.target_deployment) throw ConfigError("target_deployment", "required for a deployment search");
    const double goal = *cfg.target_deployment - cfg.coverage_tolerance;
    StoragePipeline pipe(cfg, data, cache);
    std::vector<std::size_t> selected, skipped;
    PenetrationProbe current = pipe.probe(selected);
    for (std::size_t i = 0; i < pipe.ranking().ranked.size() && current.assignment.penetration < goal; ++i) {
        auto trial = selected;
        trial.push_back(i);
        PenetrationProbe next = pipe.probe(trial);
        if (!next.feasible) {
            skipped.push_back(i);
            continue;
        }
        selected = std::move(trial);
        current = std::move(next);
    }
    EvaluationReport rep = pipe.evaluate(selected, current);
    rep.skipped_pairs = skipped;
    rep.undershoot = rep.penetration < goal;
    return rep;
}

EvaluationReport run_storage(const ScenarioConfig& cfg, const ScenarioData& data, SitingCache* cache)
{
    if (cfg.target_deployment) return target_deployment(cfg, data, cache);
    StoragePipeline pipe(cfg, data, cache);
    const auto sel = rank_and_select_ods(pipe.flows(), data.network, cfg.coverage_ratio, &pipe.baseline());
    std::vector<std::size_t> selected(sel.selected);
    for (std::size_t i = 0; i < selected.size(); ++i) selected[i] = i;
    PenetrationProbe probe = pipe.probe(selected);
    if (!probe.feasible) {
        std::vector<std::size_t> ranked_positions;
        for (std::size_t pos : probe.infeasible) ranked_positions.push_back(selected[pos]);
        throw InfeasibleError("siting infeasible at range " + std::to_string(pipe.range_miles()) +
                                  " mi for O-D pairs: " + describe_pairs(data.network, pipe.ranking(), selected,
                                                                         probe.infeasible),
                              ranked_positions);
    }
    return pipe.evaluate(selected, probe);
}

EvaluationReport run_scenario(const ScenarioConfig& cfg, const ScenarioData& data, SitingCache* cache)
{
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    EvaluationReport rep = is_storage(cfg.technology) ? run_storage(cfg, data, cache) : run_dropin(cfg, data);
    if (cfg.include_timings)
        rep.elapsed_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

} // namespace railcarb
