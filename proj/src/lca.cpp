#include "railcarb/lca.hpp"

#include "railcarb/csv.hpp"
#include "railcarb/error.hpp"

#include <cmath>
#include <fstream>

namespace railcarb {

GridTable GridTable::read(std::istream& in, const std::string& source)
{
    auto table = csv::Table::read(in, source);
    const std::size_t c_state = table.require_column("state");
    const std::size_t c_year = table.require_column("year");
    const std::size_t c_g = table.require_column("g_per_kwh");
    const auto c_price = table.column("price_per_kwh");

    GridTable grid;
    for (const auto& row : table.rows()) {
        const std::string& state = csv::field(row, c_state, "state", source);
        if (state.empty()) throw DataError(source + ":" + std::to_string(row.line) + ": state is empty");
        double year = csv::parse_double(row, c_year, "year", source);
        if (year != std::floor(year))
            throw DataError(source + ":" + std::to_string(row.line) + ": year must be an integer");
        GridEntry e;
        e.g_per_kwh = csv::parse_double(row, c_g, "g_per_kwh", source);
        if (!(e.g_per_kwh >= 0.0))
            throw DataError(source + ":" + std::to_string(row.line) + ": g_per_kwh must be nonnegative");
        if (c_price && !csv::field(row, *c_price, "price_per_kwh", source).empty()) {
            double p = csv::parse_double(row, *c_price, "price_per_kwh", source);
            if (!(p >= 0.0))
                throw DataError(source + ":" + std::to_string(row.line) + ": price_per_kwh must be nonnegative");
            e.price_per_kwh = p;
        }
        int y = static_cast<int>(year);
        if (grid.entries_.count(state) && grid.entries_.at(state).count(y))
            throw DataError(source + ":" + std::to_string(row.line) + ": duplicate entry for " + state + " " +
                            std::to_string(y));
        grid.set(state, y, e);
    }
    return grid;
}

GridTable GridTable::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot open grid table '" + path + "'");
    return read(in, path);
}

void GridTable::set(const std::string& state, int year, GridEntry entry)
{
    entries_[state][year] = entry;
}

bool GridTable::contains(const std::string& state) const
{
    return entries_.count(state) > 0;
}

const GridEntry& GridTable::at(const std::string& state, std::optional<int> year) const
{
    auto it = entries_.find(state);
    if (it == entries_.end() || it->second.empty()) throw DataError("grid table has no entry for state '" + state + "'");
    if (!year) return it->second.rbegin()->second;
    auto y = it->second.find(*year);
    if (y == it->second.end())
        throw DataError("grid table has no " + std::to_string(*year) + " entry for state '" + state + "'");
    return y->second;
}

std::vector<std::string> GridTable::states() const
{
    std::vector<std::string> out;
    for (const auto& [s, _] : entries_) out.push_back(s);
    return out;
}

double diesel_wtw_per_tonmile(double total_gallons, double total_ton_miles, double g_per_btu,
                              double lhv_btu_per_gallon)
{
    if (!(total_ton_miles > 0.0)) throw DataError("diesel intensity needs positive ton-miles");
    return total_gallons / total_ton_miles * g_per_btu * lhv_btu_per_gallon;
}

double diesel_g_per_ton_mile(const ParameterPack& params, const RailroadParams& railroad, Commodity c)
{
    return railroad.intensity(c) * params.diesel_g_per_btu();
}

double blend_wtw(double blend_fraction, double alt_per_gallon, double diesel_per_gallon)
{
    if (!(blend_fraction >= 0.0 && blend_fraction <= 1.0)) throw DataError("blend fraction must lie in [0,1]");
    return blend_fraction * alt_per_gallon + (1.0 - blend_fraction) * diesel_per_gallon;
}

std::vector<FacilityEmissions> battery_wtw(const SizingSolution& sizing, const RailNetwork& net, const GridTable& grid,
                                           std::optional<int> year)
{
    std::vector<FacilityEmissions> out;
    for (std::size_t f = 0; f < sizing.facilities.size(); ++f) {
        const NodeIndex n = sizing.facilities[f];
        const double g = grid.at(net.node(n).state, year).g_per_kwh;
        out.push_back({n, sizing.average_per_day[f] * g, g});
    }
    return out;
}

double hydrogen_wtw(double kg_per_day, double kg_co2_per_kg)
{
    return kg_per_day * kg_co2_per_kg;
}

std::vector<FacilityEmissions> hydrogen_facility_wtw(const SizingSolution& sizing, const ParameterPack& params)
{
    std::vector<FacilityEmissions> out;
    const double g = params.hydrogen.emissions_kg_per_kg * 1000.0;
    for (std::size_t f = 0; f < sizing.facilities.size(); ++f)
        out.push_back({sizing.facilities[f], hydrogen_wtw(sizing.average_per_day[f], g), g});
    return out;
}

EmissionsSplit scenario_emissions(const FlowAssignment& assignment, const RailNetwork& net,
                                  const ParameterPack& params, const RailroadParams& railroad, double alt_g_per_day)
{
    EmissionsSplit s;
    double diesel_g = 0.0, baseline_g = 0.0;
    for (const auto& load : assignment.links) {
        const double g = load.tons * net.edge(load.edge).miles * diesel_g_per_ton_mile(params, railroad, load.commodity);
        baseline_g += g;
        if (load.network == Network::Diesel) diesel_g += g;
    }
    s.diesel_kt = diesel_g / 1e9;
    s.alt_kt = alt_g_per_day * 365.0 / 1e9;
    s.baseline_kt = baseline_g / 1e9;
    const double tm = assignment.total_ton_miles();
    if (tm > 0.0) {
        s.g_per_ton_mile = s.total_kt() * 1e9 / tm;
        s.baseline_g_per_ton_mile = baseline_g / tm;
    }
    return s;
}

} // namespace railcarb
