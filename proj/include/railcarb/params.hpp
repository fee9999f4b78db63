#pragma once

#include "railcarb/netio.hpp"

#include <json.hpp>

#include <array>
#include <map>
#include <string>

namespace railcarb {

// Operational values for one railroad group (Western, Eastern, or custom).
struct RailroadParams {
    double locomotives_per_train = 0.0;
    double cars_per_train = 0.0;
    double tonnage_per_locomotive = 0.0;
    double battery_cents_per_ton_mile = 0.0;          // marginal battery tender cost, one tender
    double hydrogen_tender_cents_per_ton_mile = 0.0;  // marginal hydrogen tender cost, one tender
    double hydrogen_range_miles = 0.0;
    std::array<double, kCommodityCount> diesel_btu_per_ton_mile{};

    double intensity(Commodity c) const { return diesel_btu_per_ton_mile[index_of(c)]; }
};

struct BatteryParams {
    double tender_weight_tons = 150.0;
    double capacity_mwh = 14.0;
    double charging_speed_mw = 3.0;
    double charging_depth = 0.8;
    double energy_efficiency = 0.95;
    double capital_cost = 1'271'816.0;
    double future_capital_cost = 452'908.0;
    double maintenance_per_day = 100.0;
    double lifetime_years = 13.0;
    double efficiency_ratio = 2.44; // relative to diesel
    double discount_rate = 0.03;
    double horizon_years = 26.0;
    double charging_cost_per_kwh = 0.15;

    double usable_kwh_per_tender() const { return capacity_mwh * 1000.0 * charging_depth; }
    double hours_per_charge() const { return capacity_mwh * charging_depth / charging_speed_mw; }
};

struct HydrogenParams {
    double tender_capacity_kg = 4000.0;
    double tender_capital_per_kg = 80.0;
    double tender_lifetime_years = 20.0;
    double efficiency_ratio = 1.5;
    double emissions_kg_per_kg = 14.77;
    double fuel_cost_per_kg = 2.00;
};

struct DropInParams {
    double diesel_lhv_btu_per_gallon = 129'488.0;
    double efficiency_ratio = 1.0;
    double diesel_kg_co2_per_gallon = 12.36;
    double biodiesel_kg_co2_per_gallon = 3.50;
    double efuel_kg_co2_per_gallon = 0.07;
    double diesel_cost_per_gallon = 2.47;
    double biodiesel_cost_per_gallon = 3.60;
    double efuel_cost_per_gallon = 5.19;
};

// Engine constants the published parameter table does not pin down. Every
// value here is a documented placeholder, overridable from the pack.
struct EngineParams {
    double peak_factor = 1.2;
    double btu_per_kwh = 3412.0;
    double h2_lhv_btu_per_kg = 113'964.0;
    double max_utilization = 0.8;
    double charger_capital_cost = 1.5e6;
    double pump_capital_cost = 2.0e6;
    double pump_rate_kg_per_hour = 1000.0;
    double hydrogen_fill_depth = 1.0;
    double battery_reference_tenders = 1.0;
    double hydrogen_reference_tenders = 1.0;
    bool use_future_battery_cost = false;
};

struct ParameterPack {
    std::map<std::string, RailroadParams> railroads;
    BatteryParams battery;
    HydrogenParams hydrogen;
    DropInParams dropin;
    EngineParams engine;

    const RailroadParams& railroad(const std::string& name) const; // throws DataError

    // g CO2 per BTU of diesel: kg/gal * 1000 / LHV.
    double diesel_g_per_btu() const
    {
        return dropin.diesel_kg_co2_per_gallon * 1000.0 / dropin.diesel_lhv_btu_per_gallon;
    }

    static ParameterPack defaults();
    // Defaults overlaid with the file's contents (JSON merge patch).
    static ParameterPack load(const std::string& path);
    static ParameterPack from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    // Range and sign checks; throws DataError listing every violation.
    void validate() const;
};

} // namespace railcarb
