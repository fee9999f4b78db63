#pragma once

#include "railcarb/netio.hpp"
#include "railcarb/params.hpp"
#include "railcarb/routing.hpp"
#include "railcarb/sizing.hpp"

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace railcarb {

struct GridEntry {
    double g_per_kwh = 0.0;
    std::optional<double> price_per_kwh; // blank in the file -> pack default
};

// State electricity carbon intensity and price, by year.
class GridTable {
public:
    static GridTable read(std::istream& in, const std::string& source);
    static GridTable load(const std::string& path);

    void set(const std::string& state, int year, GridEntry entry);
    bool contains(const std::string& state) const;
    // Entry for `year`, or the latest year on file when `year` is empty.
    // Throws DataError for unknown states or years.
    const GridEntry& at(const std::string& state, std::optional<int> year = std::nullopt) const;
    std::vector<std::string> states() const;

private:
    std::map<std::string, std::map<int, GridEntry>> entries_;
};

// Fuel-and-mileage route: (gallons / ton-miles) x g/BTU x LHV, in g per ton-mile.
double diesel_wtw_per_tonmile(double total_gallons, double total_ton_miles, double g_per_btu,
                              double lhv_btu_per_gallon);

// Intensity route for one commodity: BTU/ton-mile x g/BTU.
double diesel_g_per_ton_mile(const ParameterPack& params, const RailroadParams& railroad, Commodity c);

// Linear admixture of two per-gallon factors. Throws DataError unless 0 <= fraction <= 1.
double blend_wtw(double blend_fraction, double alt_per_gallon, double diesel_per_gallon);

struct FacilityEmissions {
    NodeIndex node;
    double g_per_day;
    double g_per_unit; // g per kWh or per kgH2 at this facility
};

// Dispensed kWh x charging-state grid intensity, per facility.
std::vector<FacilityEmissions> battery_wtw(const SizingSolution& sizing, const RailNetwork& net, const GridTable& grid,
                                           std::optional<int> year = std::nullopt);

// kgH2/day x kgCO2/kgH2.
double hydrogen_wtw(double kg_per_day, double kg_co2_per_kg);

std::vector<FacilityEmissions> hydrogen_facility_wtw(const SizingSolution& sizing, const ParameterPack& params);

struct EmissionsSplit {
    double diesel_kt = 0.0;   // per year, diesel-network ton-miles
    double alt_kt = 0.0;      // per year, alternative technology
    double baseline_kt = 0.0; // every ton-mile on diesel
    double g_per_ton_mile = 0.0;
    double baseline_g_per_ton_mile = 0.0;

    double total_kt() const { return diesel_kt + alt_kt; }
    double reduction() const { return baseline_kt > 0.0 ? 1.0 - total_kt() / baseline_kt : 0.0; }
};

// Diesel side from link loads on assigned paths; alternative side supplied in g/day.
EmissionsSplit scenario_emissions(const FlowAssignment& assignment, const RailNetwork& net,
                                  const ParameterPack& params, const RailroadParams& railroad, double alt_g_per_day);

} // namespace railcarb
