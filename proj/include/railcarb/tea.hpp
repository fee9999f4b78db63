#pragma once

#include "railcarb/lca.hpp"
#include "railcarb/params.hpp"
#include "railcarb/sizing.hpp"

#include <array>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace railcarb {

// Capital recovery factor r(1+r)^n / ((1+r)^n - 1); 1/n at r = 0.
double crf(double rate, double years);

// Levelized station contribution ($/kWh or $/kgH2) by charger (pump) count
// and locomotives served per day.
class FacilityCostCurve {
public:
    static FacilityCostCurve read(std::istream& in, const std::string& source);
    static FacilityCostCurve load(const std::string& path);

    void add(StorageTech tech, int chargers, double locos_per_day, double contribution);
    // Throws DataError on nonpositive values, duplicates, or a contribution
    // that rises with locomotives/day at a fixed charger count.
    void validate() const;

    bool has(StorageTech tech) const;
    // Piecewise linear in locomotives/day within a charger count, linear
    // between the bracketing counts, clamped at the table edges.
    double contribution(StorageTech tech, double chargers, double locos_per_day) const;

private:
    using Row = std::vector<std::pair<double, double>>; // (locos/day, $/unit), ascending
    std::array<std::map<int, Row>, 2> curves_;
    double along(const Row& row, double locos) const;
};

struct FacilityPrice {
    NodeIndex node;
    double station_per_unit = 0.0; // $/kWh or $/kgH2
    double energy_per_unit = 0.0;  // electricity or hydrogen price
};

// Cents per ton-mile. The alternative components are averaged over the
// alternative ton-miles; `diesel` over the diesel ton-miles.
struct LevelizedCost {
    double energy = 0.0;
    double storage = 0.0;
    double station = 0.0;
    double diesel = 0.0;
    double alt_share = 0.0;
    std::vector<FacilityPrice> facilities;

    double alt_total() const { return energy + storage + station; }
    double scenario() const { return alt_share * alt_total() + (1.0 - alt_share) * diesel; }
};

struct StorageCostInputs {
    const SizingSolution* sizing = nullptr;
    const std::vector<FacilityLoad>* loads = nullptr;
    const RailNetwork* net = nullptr;
    const GridTable* grid = nullptr;            // battery only
    const FacilityCostCurve* curve = nullptr;   // optional
    std::optional<int> grid_year;
    double range_miles = 0.0;
};

// Alternative-side components only (diesel and alt_share left at zero).
// Throws DataError when nothing is dispensed or a state price is missing.
LevelizedCost battery_lco(const StorageCostInputs& in, const ParameterPack& params, const RailroadParams& railroad);
LevelizedCost hydrogen_lco(const StorageCostInputs& in, const ParameterPack& params, const RailroadParams& railroad);

// Annualized tender capital: $/kg x kg x crf(discount, tender lifetime).
double hydrogen_tender_annual_cost(const ParameterPack& params);

double blend_price_per_gallon(double blend_fraction, double alt_price, double diesel_price);

// Blended $/gal x gallons per ton-mile, in cents per ton-mile.
double dropin_lco(double blend_fraction, double alt_price, const ParameterPack& params, double btu_per_ton_mile);

double diesel_cents_per_ton_mile(const ParameterPack& params, double btu_per_ton_mile);

// (lco_alt - lco_diesel) / (wtw_diesel - wtw_alt) on a common basis.
// Throws NonPositiveAvoidance when wtw_alt >= wtw_diesel.
double cae(double lco_alt, double lco_diesel, double wtw_alt, double wtw_diesel);

} // namespace railcarb
