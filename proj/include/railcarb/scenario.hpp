#pragma once

#include "railcarb/lca.hpp"
#include "railcarb/netio.hpp"
#include "railcarb/params.hpp"
#include "railcarb/routing.hpp"
#include "railcarb/siting.hpp"
#include "railcarb/sizing.hpp"
#include "railcarb/tea.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace railcarb {

enum class Technology : std::uint8_t { Diesel, Biodiesel, EFuel, Battery, Hydrogen };

std::string_view to_string(Technology t);
std::optional<Technology> parse_technology(std::string_view s);
bool is_storage(Technology t);
bool is_blend(Technology t);
StorageTech storage_tech(Technology t);

struct ScenarioConfig {
    std::string railroad = "Western";
    Technology technology = Technology::Diesel;
    double blend_fraction = 0.0;
    std::optional<double> range_miles;       // hydrogen falls back to the railroad's range
    std::optional<double> target_deployment; // fraction of ton-miles; prefix search when set
    double coverage_ratio = 1.0;             // O-D selection when no target is set
    RoutingPolicy routing_policy = NoReroute{};
    double coverage_tolerance = 0.02;
    std::string siting_solver = "exact";     // exact | greedy
    std::optional<int> grid_year;
    std::uint64_t seed = 0;
    std::size_t synthetic_pairs = 0;         // > 0: demand drawn from `seed` instead of the loaded demand
    std::string params_path;
    bool include_timings = false;

    // Throws ConfigError with one entry per offending field.
    static ScenarioConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    void validate() const;
    // FNV-1a 64 of the canonical JSON, as 16 hex digits.
    std::string hash() const;
};

std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

struct ScenarioData {
    RailNetwork network;
    std::vector<ODFlow> demand;
    ParameterPack params = ParameterPack::defaults();
    GridTable grid;
    std::optional<FacilityCostCurve> cost_curve;
};

struct FacilityDetail {
    FacilityLoad load;
    FacilityPrice price;
    double g_per_day = 0.0;
    double g_per_unit = 0.0;
};

struct EvaluationReport {
    ScenarioConfig config;
    std::string config_hash;
    double range_miles = 0.0;
    double coverage_ratio = 0.0;          // ton-mile share of the selected O-D pairs
    std::size_t selected_pairs = 0;
    std::size_t total_pairs = 0;
    std::vector<std::size_t> skipped_pairs; // ranked positions passed over as unbridgeable
    bool undershoot = false;
    double penetration = 0.0;
    FlowAssignment assignment;
    std::vector<NodeIndex> facility_nodes;
    std::vector<FacilityDetail> facilities;
    std::vector<EdgeIndex> enabled_arcs;
    EmissionsSplit emissions;
    LevelizedCost lco;
    double baseline_cents = 0.0;          // every ton-mile on diesel
    std::optional<double> cae;            // $/kg CO2; empty when nothing is avoided
    std::map<std::string, std::string> notes;
    std::optional<double> elapsed_ms;
};

// Memoizes siting solutions by (selected pairs, range, variant, solver).
class SitingCache {
public:
    struct Entry {
        std::optional<FacilitySet> solution;
        std::vector<std::size_t> infeasible; // path positions when no solution exists
    };

    std::shared_ptr<const Entry> find(std::uint64_t key) const;
    void store(std::uint64_t key, std::shared_ptr<const Entry> entry);
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::map<std::uint64_t, std::shared_ptr<const Entry>> entries_;
};

EvaluationReport run_dropin(const ScenarioConfig& cfg, const ScenarioData& data);

// Five-step pipeline. With a target the O-D prefix is grown one pair at a
// time; otherwise the coverage ratio fixes the selection and siting
// infeasibility propagates as InfeasibleError.
EvaluationReport run_storage(const ScenarioConfig& cfg, const ScenarioData& data, SitingCache* cache = nullptr);

EvaluationReport target_deployment(const ScenarioConfig& cfg, const ScenarioData& data, SitingCache* cache = nullptr);

// Dispatches on the technology; validates the config first.
EvaluationReport run_scenario(const ScenarioConfig& cfg, const ScenarioData& data, SitingCache* cache = nullptr);

// Storage penetration for an explicit selection (positions into the ranked
// O-D list), without sizing or costing. Used by the deployment search and
// the property harness.
struct PenetrationProbe {
    bool feasible = false;
    std::vector<std::size_t> infeasible; // positions within `selected` that cannot be bridged
    std::vector<NodeIndex> facilities;
    EdgeMask enabled;
    FlowAssignment assignment;
};

class StoragePipeline {
public:
    StoragePipeline(const ScenarioConfig& cfg, const ScenarioData& data, SitingCache* cache);

    const OdSelection& ranking() const { return ranking_; }
    const BaselineRoutes& baseline() const { return baseline_; }
    const std::vector<ODFlow>& flows() const { return *flows_; }
    double range_miles() const { return range_; }

    PenetrationProbe probe(const std::vector<std::size_t>& selected) const;
    EvaluationReport evaluate(const std::vector<std::size_t>& selected, const PenetrationProbe& probe) const;

private:
    const ScenarioConfig& cfg_;
    const ScenarioData& data_;
    SitingCache* cache_;
    std::vector<ODFlow> synthetic_;
    const std::vector<ODFlow>* flows_;
    BaselineRoutes baseline_;
    OdSelection ranking_;
    double range_;
    bool strict_;
};

} // namespace railcarb
