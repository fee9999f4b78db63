#pragma once

#include "railcarb/netio.hpp"
#include "railcarb/params.hpp"
#include "railcarb/routing.hpp"

#include <array>
#include <optional>
#include <string_view>
#include <vector>

namespace railcarb {

enum class StorageTech : std::uint8_t { Battery, Hydrogen };

std::string_view to_string(StorageTech t);
// "kWh" or "kgH2"
std::string_view energy_unit(StorageTech t);

// Energy drawn per ton-mile by the storage technology: diesel-equivalent BTU
// divided by the efficiency ratio, in kWh (battery) or kgH2 (hydrogen).
double energy_per_ton_mile(const ParameterPack& params, const RailroadParams& railroad, StorageTech tech,
                           Commodity commodity);

struct LinkEnergyDemand {
    EdgeIndex link;
    Commodity commodity;
    double average_per_day;
    double peak_per_day;
};

// One entry per (alternative-network link, commodity) with positive tons.
std::vector<LinkEnergyDemand> link_energy_demands(const FlowAssignment& assignment, const RailNetwork& net,
                                                  const ParameterPack& params, const RailroadParams& railroad,
                                                  StorageTech tech, double peak_factor);

// reach[i] lists (ascending) the edges facility i can serve: enabled edges
// whose nearer end lies within half the range along enabled track.
using FacilityReach = std::vector<std::vector<EdgeIndex>>;

FacilityReach facility_reach(const RailNetwork& net, const EdgeMask& enabled, const std::vector<NodeIndex>& facilities,
                             double range_miles);

struct Allocation {
    std::size_t facility; // index into SizingSolution::facilities
    EdgeIndex link;
    double average_per_day;
    double peak_per_day;
};

struct SizingSolution {
    std::vector<NodeIndex> facilities;
    std::vector<double> unit_costs;
    std::vector<double> average_per_day; // per facility
    std::vector<double> peak_per_day;    // per facility
    std::vector<std::array<double, kCommodityCount>> average_by_commodity; // per facility
    std::vector<Allocation> allocation;  // sparse facility x link, sorted by (facility, link)
    double daily_cost = 0.0;

    double total_average_per_day() const;
};

// Minimum-cost assignment of link energy to facilities. Without capacities
// every link goes to its cheapest reachable facility (ties: smallest id);
// with capacities the transportation problem is solved by successive
// shortest paths. Throws UnreachableLinkError or CapacityError.
SizingSolution solve_allocation(const std::vector<LinkEnergyDemand>& demands, const std::vector<NodeIndex>& facilities,
                                const FacilityReach& reach, const std::vector<double>& unit_costs,
                                const std::optional<std::vector<double>>& capacities = std::nullopt);

struct FacilityLoad {
    NodeIndex node;
    double peak_per_day = 0.0;
    double average_per_day = 0.0;
    double locos_per_day_average = 0.0;
    double locos_per_day_peak = 0.0;
    int chargers = 0; // chargers (battery) or pumps (hydrogen)
    double utilization = 0.0;
};

struct DispenseEvent {
    double energy;  // kWh or kgH2 per tender fill
    double hours;
};

DispenseEvent dispense_event(const ParameterPack& params, StorageTech tech);

// Smallest integer count keeping events * hours / (count * 24) within max_utilization.
int charger_count(double events_per_day, double hours_per_event, double max_utilization);

std::vector<FacilityLoad> facility_metrics(const SizingSolution& sol, const ParameterPack& params, StorageTech tech,
                                           double max_utilization);

// Tenders needed per locomotive to cover `range_miles` at the given intensity.
int tender_count(double range_miles, double tonnage_per_locomotive, double btu_per_ton_mile, double efficiency_ratio,
                 double btu_per_energy_unit, double usable_energy_per_tender);

int tender_count(const ParameterPack& params, const RailroadParams& railroad, StorageTech tech, double range_miles,
                 double btu_per_ton_mile);

} // namespace railcarb
