#include "railcarb/params.hpp"

#include "railcarb/error.hpp"

#include <cmath>
#include <fstream>

namespace railcarb {

using nlohmann::json;

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(BatteryParams, tender_weight_tons, capacity_mwh, charging_speed_mw,
                                                charging_depth, energy_efficiency, capital_cost, future_capital_cost,
                                                maintenance_per_day, lifetime_years, efficiency_ratio, discount_rate,
                                                horizon_years, charging_cost_per_kwh)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(HydrogenParams, tender_capacity_kg, tender_capital_per_kg,
                                                tender_lifetime_years, efficiency_ratio, emissions_kg_per_kg,
                                                fuel_cost_per_kg)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(DropInParams, diesel_lhv_btu_per_gallon, efficiency_ratio,
                                                diesel_kg_co2_per_gallon, biodiesel_kg_co2_per_gallon,
                                                efuel_kg_co2_per_gallon, diesel_cost_per_gallon,
                                                biodiesel_cost_per_gallon, efuel_cost_per_gallon)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(EngineParams, peak_factor, btu_per_kwh, h2_lhv_btu_per_kg,
                                                max_utilization, charger_capital_cost, pump_capital_cost,
                                                pump_rate_kg_per_hour, hydrogen_fill_depth,
                                                battery_reference_tenders, hydrogen_reference_tenders,
                                                use_future_battery_cost)

ConfigError::ConfigError(std::vector<std::pair<std::string, std::string>> fields)
    : Error([&] {
          std::string msg = "invalid configuration:";
          for (const auto& [f, m] : fields) msg += " " + f + ": " + m + ";";
          return msg;
      }()),
      fields_(std::move(fields))
{
}

namespace {

json railroad_to_json(const RailroadParams& r)
{
    json intensities = json::object();
    for (Commodity c : kAllCommodities) intensities[std::string(to_string(c))] = r.intensity(c);
    return {
        {"locomotives_per_train", r.locomotives_per_train},
        {"cars_per_train", r.cars_per_train},
        {"tonnage_per_locomotive", r.tonnage_per_locomotive},
        {"battery_cents_per_ton_mile", r.battery_cents_per_ton_mile},
        {"hydrogen_tender_cents_per_ton_mile", r.hydrogen_tender_cents_per_ton_mile},
        {"hydrogen_range_miles", r.hydrogen_range_miles},
        {"diesel_btu_per_ton_mile", intensities},
    };
}

RailroadParams railroad_from_json(const std::string& name, const json& j)
{
    RailroadParams r;
    auto num = [&](const char* key) {
        if (!j.contains(key)) throw DataError("railroad '" + name + "': missing '" + key + "'");
        return j.at(key).get<double>();
    };
    r.locomotives_per_train = num("locomotives_per_train");
    r.cars_per_train = num("cars_per_train");
    r.tonnage_per_locomotive = num("tonnage_per_locomotive");
    r.battery_cents_per_ton_mile = num("battery_cents_per_ton_mile");
    r.hydrogen_tender_cents_per_ton_mile = num("hydrogen_tender_cents_per_ton_mile");
    r.hydrogen_range_miles = num("hydrogen_range_miles");
    const json& in = j.at("diesel_btu_per_ton_mile");
    for (Commodity c : kAllCommodities) {
        std::string key(to_string(c));
        if (!in.contains(key)) throw DataError("railroad '" + name + "': missing intensity for " + key);
        r.diesel_btu_per_ton_mile[index_of(c)] = in.at(key).get<double>();
    }
    for (const auto& [key, value] : in.items())
        if (!parse_commodity(key)) throw DataError("railroad '" + name + "': unknown commodity '" + key + "'");
    return r;
}

// Reports keys in `given` that the default layout does not know about.
void check_keys(const json& given, const json& layout, const std::string& prefix, std::vector<std::string>& unknown)
{
    if (!given.is_object() || !layout.is_object()) return;
    for (const auto& [key, value] : given.items()) {
        std::string path = prefix.empty() ? key : prefix + "." + key;
        if (prefix == "train_operations.railroads") {
            check_keys(value, layout.at("Western"), path, unknown);
        } else if (!layout.contains(key)) {
            unknown.push_back(path);
        } else {
            check_keys(value, layout.at(key), path, unknown);
        }
    }
}

} // namespace

const RailroadParams& ParameterPack::railroad(const std::string& name) const
{
    auto it = railroads.find(name);
    if (it == railroads.end()) throw DataError("unknown railroad group '" + name + "'");
    return it->second;
}

ParameterPack ParameterPack::defaults()
{
    ParameterPack p;
    RailroadParams west;
    west.locomotives_per_train = 3.15;
    west.cars_per_train = 74.6;
    west.tonnage_per_locomotive = 1319.0;
    west.battery_cents_per_ton_mile = 0.12;
    west.hydrogen_tender_cents_per_ton_mile = 0.05;
    west.hydrogen_range_miles = 1039.0;
    west.diesel_btu_per_ton_mile = {152, 150, 107, 219, 875, 152, 710, 128, 553};

    RailroadParams east;
    east.locomotives_per_train = 2.18;
    east.cars_per_train = 68.5;
    east.tonnage_per_locomotive = 1403.0;
    east.battery_cents_per_ton_mile = 0.19;
    east.hydrogen_tender_cents_per_ton_mile = 0.08;
    east.hydrogen_range_miles = 977.0;
    east.diesel_btu_per_ton_mile = {155, 153, 109, 224, 893, 155, 725, 131, 565};

    p.railroads.emplace("Western", west);
    p.railroads.emplace("Eastern", east);
    return p;
}

json ParameterPack::to_json() const
{
    json rr = json::object();
    for (const auto& [name, r] : railroads) rr[name] = railroad_to_json(r);
    return {
        {"train_operations", {{"railroads", rr}}},
        {"battery", battery},
        {"hydrogen", hydrogen},
        {"dropin", dropin},
        {"engine", engine},
    };
}

ParameterPack ParameterPack::from_json(const json& given)
{
    json layout = defaults().to_json();
    std::vector<std::string> unknown;
    check_keys(given, layout, "", unknown);
    if (!unknown.empty()) {
        std::string msg = "parameter pack has unknown keys:";
        for (const auto& k : unknown) msg += " " + k;
        throw DataError(msg);
    }
    json merged = layout;
    merged.merge_patch(given);
    ParameterPack p;
    try {
        for (const auto& [name, r] : merged.at("train_operations").at("railroads").items())
            if (!r.is_null()) p.railroads.emplace(name, railroad_from_json(name, r));
        p.battery = merged.at("battery").get<BatteryParams>();
        p.hydrogen = merged.at("hydrogen").get<HydrogenParams>();
        p.dropin = merged.at("dropin").get<DropInParams>();
        p.engine = merged.at("engine").get<EngineParams>();
    } catch (const json::exception& e) {
        throw DataError(std::string("parameter pack: ") + e.what());
    }
    p.validate();
    return p;
}

ParameterPack ParameterPack::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot open parameter pack '" + path + "'");
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw DataError(path + ": " + e.what());
    }
    return from_json(j);
}

void ParameterPack::validate() const
{
    std::vector<std::string> bad;
    auto positive = [&](const std::string& name, double v) {
        if (!(v > 0.0) || !std::isfinite(v)) bad.push_back(name + " must be positive");
    };
    auto nonnegative = [&](const std::string& name, double v) {
        if (!(v >= 0.0) || !std::isfinite(v)) bad.push_back(name + " must be nonnegative");
    };
    auto fraction = [&](const std::string& name, double v, bool open_low) {
        if (!(open_low ? v > 0.0 : v >= 0.0) || !(v <= 1.0)) bad.push_back(name + " must lie in (0,1]");
    };
    if (railroads.empty()) bad.push_back("at least one railroad group is required");
    for (const auto& [name, r] : railroads) {
        positive(name + ".tonnage_per_locomotive", r.tonnage_per_locomotive);
        nonnegative(name + ".battery_cents_per_ton_mile", r.battery_cents_per_ton_mile);
        nonnegative(name + ".hydrogen_tender_cents_per_ton_mile", r.hydrogen_tender_cents_per_ton_mile);
        for (Commodity c : kAllCommodities)
            positive(name + ".diesel_btu_per_ton_mile." + std::string(to_string(c)), r.intensity(c));
    }
    positive("battery.capacity_mwh", battery.capacity_mwh);
    positive("battery.charging_speed_mw", battery.charging_speed_mw);
    fraction("battery.charging_depth", battery.charging_depth, true);
    positive("battery.efficiency_ratio", battery.efficiency_ratio);
    nonnegative("battery.capital_cost", battery.capital_cost);
    nonnegative("battery.future_capital_cost", battery.future_capital_cost);
    positive("battery.lifetime_years", battery.lifetime_years);
    if (!(battery.discount_rate >= 0.0 && battery.discount_rate < 1.0)) bad.push_back("battery.discount_rate must lie in [0,1)");
    positive("battery.horizon_years", battery.horizon_years);
    nonnegative("battery.charging_cost_per_kwh", battery.charging_cost_per_kwh);
    positive("hydrogen.tender_capacity_kg", hydrogen.tender_capacity_kg);
    nonnegative("hydrogen.tender_capital_per_kg", hydrogen.tender_capital_per_kg);
    positive("hydrogen.tender_lifetime_years", hydrogen.tender_lifetime_years);
    positive("hydrogen.efficiency_ratio", hydrogen.efficiency_ratio);
    nonnegative("hydrogen.emissions_kg_per_kg", hydrogen.emissions_kg_per_kg);
    nonnegative("hydrogen.fuel_cost_per_kg", hydrogen.fuel_cost_per_kg);
    positive("dropin.diesel_lhv_btu_per_gallon", dropin.diesel_lhv_btu_per_gallon);
    positive("dropin.efficiency_ratio", dropin.efficiency_ratio);
    nonnegative("dropin.diesel_kg_co2_per_gallon", dropin.diesel_kg_co2_per_gallon);
    nonnegative("dropin.biodiesel_kg_co2_per_gallon", dropin.biodiesel_kg_co2_per_gallon);
    nonnegative("dropin.efuel_kg_co2_per_gallon", dropin.efuel_kg_co2_per_gallon);
    nonnegative("dropin.diesel_cost_per_gallon", dropin.diesel_cost_per_gallon);
    nonnegative("dropin.biodiesel_cost_per_gallon", dropin.biodiesel_cost_per_gallon);
    nonnegative("dropin.efuel_cost_per_gallon", dropin.efuel_cost_per_gallon);
    if (!(engine.peak_factor >= 1.0)) bad.push_back("engine.peak_factor must be at least 1");
    positive("engine.btu_per_kwh", engine.btu_per_kwh);
    positive("engine.h2_lhv_btu_per_kg", engine.h2_lhv_btu_per_kg);
    fraction("engine.max_utilization", engine.max_utilization, true);
    nonnegative("engine.charger_capital_cost", engine.charger_capital_cost);
    nonnegative("engine.pump_capital_cost", engine.pump_capital_cost);
    positive("engine.pump_rate_kg_per_hour", engine.pump_rate_kg_per_hour);
    fraction("engine.hydrogen_fill_depth", engine.hydrogen_fill_depth, true);
    positive("engine.battery_reference_tenders", engine.battery_reference_tenders);
    positive("engine.hydrogen_reference_tenders", engine.hydrogen_reference_tenders);
    if (!bad.empty()) {
        std::string msg = "parameter pack invalid:";
        for (const auto& b : bad) msg += " " + b + ";";
        throw DataError(msg);
    }
}

} // namespace railcarb
