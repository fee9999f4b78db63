#include "railcarb/tea.hpp"

#include "railcarb/csv.hpp"
#include "railcarb/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace railcarb {

double crf(double rate, double years)
{
    if (!(rate >= 0.0) || !(years >= 1.0)) throw DataError("capital recovery factor needs rate >= 0 and years >= 1");
    if (rate == 0.0) return 1.0 / years;
    const double g = std::pow(1.0 + rate, years);
    return rate * g / (g - 1.0);
}

// Cost curve

FacilityCostCurve FacilityCostCurve::read(std::istream& in, const std::string& source)
{
    auto table = csv::Table::read(in, source);
    const std::size_t c_tech = table.require_column("tech");
    const std::size_t c_n = table.require_column("chargers");
    const std::size_t c_locos = table.require_column("locos_per_day");
    const std::size_t c_value = table.require_column("levelized_contribution");
    FacilityCostCurve curve;
    for (const auto& row : table.rows()) {
        const std::string at = source + ":" + std::to_string(row.line);
        const std::string& tech = csv::field(row, c_tech, "tech", source);
        StorageTech t;
        if (tech == "battery") t = StorageTech::Battery;
        else if (tech == "hydrogen") t = StorageTech::Hydrogen;
        else throw DataError(at + ": tech must be 'battery' or 'hydrogen', got '" + tech + "'");
        double n = csv::parse_double(row, c_n, "chargers", source);
        if (n != std::floor(n) || n < 1) throw DataError(at + ": chargers must be a positive integer");
        curve.add(t, static_cast<int>(n), csv::parse_double(row, c_locos, "locos_per_day", source),
                  csv::parse_double(row, c_value, "levelized_contribution", source));
    }
    curve.validate();
    return curve;
}

FacilityCostCurve FacilityCostCurve::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot open cost curve '" + path + "'");
    return read(in, path);
}

void FacilityCostCurve::add(StorageTech tech, int chargers, double locos_per_day, double contribution)
{
    auto& row = curves_[static_cast<std::size_t>(tech)][chargers];
    auto it = std::lower_bound(row.begin(), row.end(), std::pair<double, double>(locos_per_day, -INFINITY));
    row.insert(it, {locos_per_day, contribution});
}

void FacilityCostCurve::validate() const
{
    for (std::size_t t = 0; t < curves_.size(); ++t) {
        const std::string tech(to_string(static_cast<StorageTech>(t)));
        for (const auto& [n, row] : curves_[t]) {
            const std::string at = "cost curve " + tech + " with " + std::to_string(n) + " chargers";
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (!(row[i].first > 0.0)) throw DataError(at + ": locos_per_day must be positive");
                if (!(row[i].second > 0.0)) throw DataError(at + ": contribution must be positive");
                if (i > 0 && row[i].first == row[i - 1].first)
                    throw DataError(at + ": duplicate locos_per_day " + std::to_string(row[i].first));
                if (i > 0 && row[i].second > row[i - 1].second)
                    throw DataError(at + ": contribution rises with locomotives per day");
            }
        }
    }
}

bool FacilityCostCurve::has(StorageTech tech) const
{
    return !curves_[static_cast<std::size_t>(tech)].empty();
}

double FacilityCostCurve::along(const Row& row, double locos) const
{
    if (locos <= row.front().first) return row.front().second;
    if (locos >= row.back().first) return row.back().second;
    auto hi = std::upper_bound(row.begin(), row.end(), locos,
                               [](double x, const std::pair<double, double>& p) { return x < p.first; });
    auto lo = hi - 1;
    const double w = (locos - lo->first) / (hi->first - lo->first);
    return lo->second + w * (hi->second - lo->second);
}

double FacilityCostCurve::contribution(StorageTech tech, double chargers, double locos_per_day) const
{
    const auto& curves = curves_[static_cast<std::size_t>(tech)];
    if (curves.empty()) throw DataError("cost curve has no rows for " + std::string(to_string(tech)));
    auto hi = curves.lower_bound(static_cast<int>(std::ceil(chargers)));
    if (hi == curves.end()) return along(curves.rbegin()->second, locos_per_day);
    if (hi == curves.begin() || hi->first == chargers) return along(hi->second, locos_per_day);
    auto lo = std::prev(hi);
    const double w = (chargers - lo->first) / (hi->first - lo->first);
    return (1.0 - w) * along(lo->second, locos_per_day) + w * along(hi->second, locos_per_day);
}

// Levelized costs

namespace {

struct AltTonMiles {
    std::array<double, kCommodityCount> per_day{};
    double total = 0.0;
};

AltTonMiles alt_ton_miles(const SizingSolution& sizing, const ParameterPack& params, const RailroadParams& railroad,
                          StorageTech tech)
{
    AltTonMiles out;
    for (const auto& by_c : sizing.average_by_commodity)
        for (Commodity c : kAllCommodities) {
            const double e = by_c[index_of(c)];
            if (e > 0.0) out.per_day[index_of(c)] += e / energy_per_ton_mile(params, railroad, tech, c);
        }
    for (double v : out.per_day) out.total += v;
    return out;
}

double station_per_unit(const StorageCostInputs& in, const ParameterPack& params, StorageTech tech, std::size_t f)
{
    const FacilityLoad& load = (*in.loads)[f];
    if (in.curve && in.curve->has(tech)) {
        if (load.chargers == 0) return 0.0;
        return in.curve->contribution(tech, load.chargers, load.locos_per_day_average);
    }
    const double per_unit_capital =
        tech == StorageTech::Battery ? params.engine.charger_capital_cost : params.engine.pump_capital_cost;
    const double annual = load.chargers * per_unit_capital * crf(params.battery.discount_rate, params.battery.horizon_years);
    const double dispensed = in.sizing->average_per_day[f] * 365.0;
    return dispensed > 0.0 ? annual / dispensed : 0.0;
}

LevelizedCost storage_lco(const StorageCostInputs& in, const ParameterPack& params, const RailroadParams& railroad,
                          StorageTech tech)
{
    if (!in.sizing || !in.loads || !in.net) throw DataError("levelized cost needs sizing, loads and network");
    const SizingSolution& sizing = *in.sizing;
    if (in.loads->size() != sizing.facilities.size()) throw DataError("facility loads do not match sizing");
    const AltTonMiles tm = alt_ton_miles(sizing, params, railroad, tech);
    if (!(sizing.total_average_per_day() > 0.0) || !(tm.total > 0.0))
        throw DataError("levelized cost undefined: no energy dispensed");

    LevelizedCost lco;
    double energy_dollars = 0.0, station_dollars = 0.0;
    for (std::size_t f = 0; f < sizing.facilities.size(); ++f) {
        FacilityPrice fp;
        fp.node = sizing.facilities[f];
        fp.station_per_unit = station_per_unit(in, params, tech, f);
        if (tech == StorageTech::Battery) {
            if (!in.grid) throw DataError("battery levelized cost needs a grid table");
            const auto& entry = in.grid->at(in.net->node(fp.node).state, in.grid_year);
            fp.energy_per_unit = entry.price_per_kwh.value_or(params.battery.charging_cost_per_kwh);
        } else {
            fp.energy_per_unit = params.hydrogen.fuel_cost_per_kg;
        }
        energy_dollars += sizing.average_per_day[f] * fp.energy_per_unit;
        station_dollars += sizing.average_per_day[f] * fp.station_per_unit;
        lco.facilities.push_back(fp);
    }
    lco.energy = energy_dollars * 100.0 / tm.total;
    lco.station = station_dollars * 100.0 / tm.total;

    double base_cents, reference;
    if (tech == StorageTech::Battery) {
        base_cents = railroad.battery_cents_per_ton_mile;
        if (params.engine.use_future_battery_cost)
            base_cents *= params.battery.future_capital_cost / params.battery.capital_cost;
        reference = params.engine.battery_reference_tenders;
    } else {
        base_cents = railroad.hydrogen_tender_cents_per_ton_mile;
        reference = params.engine.hydrogen_reference_tenders;
    }
    double storage = 0.0;
    for (Commodity c : kAllCommodities) {
        const double share = tm.per_day[index_of(c)];
        if (share <= 0.0) continue;
        const int tenders = tender_count(params, railroad, tech, in.range_miles, railroad.intensity(c));
        storage += share * base_cents * tenders / reference;
    }
    lco.storage = storage / tm.total;
    return lco;
}

} // namespace

LevelizedCost battery_lco(const StorageCostInputs& in, const ParameterPack& params, const RailroadParams& railroad)
{
    return storage_lco(in, params, railroad, StorageTech::Battery);
}

LevelizedCost hydrogen_lco(const StorageCostInputs& in, const ParameterPack& params, const RailroadParams& railroad)
{
    return storage_lco(in, params, railroad, StorageTech::Hydrogen);
}

double hydrogen_tender_annual_cost(const ParameterPack& params)
{
    const auto& h = params.hydrogen;
    return h.tender_capital_per_kg * h.tender_capacity_kg * crf(params.battery.discount_rate, h.tender_lifetime_years);
}

double blend_price_per_gallon(double blend_fraction, double alt_price, double diesel_price)
{
    if (!(blend_fraction >= 0.0 && blend_fraction <= 1.0)) throw DataError("blend fraction must lie in [0,1]");
    return blend_fraction * alt_price + (1.0 - blend_fraction) * diesel_price;
}

double dropin_lco(double blend_fraction, double alt_price, const ParameterPack& params, double btu_per_ton_mile)
{
    const double price = blend_price_per_gallon(blend_fraction, alt_price, params.dropin.diesel_cost_per_gallon);
    const double gallons = btu_per_ton_mile / params.dropin.efficiency_ratio / params.dropin.diesel_lhv_btu_per_gallon;
    return price * gallons * 100.0;
}

double diesel_cents_per_ton_mile(const ParameterPack& params, double btu_per_ton_mile)
{
    return btu_per_ton_mile / params.dropin.diesel_lhv_btu_per_gallon * params.dropin.diesel_cost_per_gallon * 100.0;
}

double cae(double lco_alt, double lco_diesel, double wtw_alt, double wtw_diesel)
{
    const double avoided = wtw_diesel - wtw_alt;
    if (!(avoided > 0.0)) throw NonPositiveAvoidance("no emissions avoided: cost of avoided emissions is undefined");
    return (lco_alt - lco_diesel) / avoided;
}

} // namespace railcarb
