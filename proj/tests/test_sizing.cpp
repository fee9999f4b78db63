#include "support.hpp"

#include "railcarb/error.hpp"
#include "railcarb/sizing.hpp"

#include <doctest.h>

using namespace railcarb;
using namespace testkit;

namespace {

const ParameterPack kPack = ParameterPack::defaults();
const RailroadParams& west() { return kPack.railroad("Western"); }

LinkEnergyDemand link(EdgeIndex e, double avg, Commodity c = Commodity::Coal) { return {e, c, avg, avg * 1.2}; }

// Undirected Bellman-Ford over enabled edges.
std::vector<double> enabled_distances(const RailNetwork& net, const EdgeMask& mask, NodeIndex src)
{
    std::vector<double> d(net.node_count(), kInfiniteMiles);
    d[src] = 0.0;
    for (std::size_t it = 0; it < net.node_count(); ++it)
        for (EdgeIndex e = 0; e < net.edge_count(); ++e) {
            if (!mask[e]) continue;
            const Edge& edge = net.edge(e);
            d[edge.to] = std::min(d[edge.to], d[edge.from] + edge.miles);
            d[edge.from] = std::min(d[edge.from], d[edge.to] + edge.miles);
        }
    return d;
}

} // namespace

TEST_CASE("energy per ton-mile from the Western intensities")
{
    // intermodal 875 BTU/ton-mi / 2.44 / 3412 BTU/kWh
    const double intermodal = 875.0 / 2.44 / 3412.0;
    CHECK(energy_per_ton_mile(kPack, west(), StorageTech::Battery, Commodity::Intermodal) ==
          doctest::Approx(intermodal).epsilon(1e-12));
    CHECK(intermodal == doctest::Approx(0.1051).epsilon(1e-3));
    // coal, 1e6 ton-mi/day
    CHECK(1e6 * energy_per_ton_mile(kPack, west(), StorageTech::Battery, Commodity::Coal) ==
          doctest::Approx(12852).epsilon(1e-4));
    CHECK(energy_per_ton_mile(kPack, west(), StorageTech::Hydrogen, Commodity::Coal) ==
          doctest::Approx(107.0 / 1.5 / 113964.0).epsilon(1e-12));
}

TEST_CASE("link energy demands from link loads")
{
    auto net = make_net({{"A", "B", 120}, {"B", "C", 80}});
    FlowAssignment a;
    a.links = {{0, Network::Alternative, Commodity::Coal, 3.65e6},
               {0, Network::Alternative, Commodity::Intermodal, 1e5},
               {1, Network::Diesel, Commodity::Coal, 5e6},
               {1, Network::Alternative, Commodity::Others, 0.0}};
    auto d = link_energy_demands(a, net, kPack, west(), StorageTech::Battery, 1.2);
    REQUIRE(d.size() == 2);
    for (const auto& x : d) {
        double tm = (x.commodity == Commodity::Coal ? 3.65e6 : 1e5) * net.edge(0).miles / 365.0;
        double oracle = tm * west().intensity(x.commodity) / 2.44 / 3412.0;
        CHECK(x.link == 0);
        CHECK(x.average_per_day == doctest::Approx(oracle).epsilon(1e-12));
        CHECK(x.peak_per_day == doctest::Approx(1.2 * oracle).epsilon(1e-12));
        CHECK(x.peak_per_day >= x.average_per_day);
    }
}

TEST_CASE("facility reach is half the range along enabled track")
{
    std::mt19937_64 rng(61);
    for (int t = 0; t < 80; ++t) {
        auto net = random_network(rng, 9, 5, 30, 250);
        EdgeMask mask(net.edge_count());
        for (std::size_t e = 0; e < mask.size(); ++e) mask[e] = rng() % 4 != 0;
        std::vector<NodeIndex> fac = {static_cast<NodeIndex>(rng() % net.node_count()),
                                      static_cast<NodeIndex>(rng() % net.node_count())};
        std::sort(fac.begin(), fac.end());
        fac.erase(std::unique(fac.begin(), fac.end()), fac.end());
        const double range = 150.0 + static_cast<double>(rng() % 500);
        auto reach = facility_reach(net, mask, fac, range);
        REQUIRE(reach.size() == fac.size());
        for (std::size_t i = 0; i < fac.size(); ++i) {
            auto d = enabled_distances(net, mask, fac[i]);
            std::vector<EdgeIndex> oracle;
            for (EdgeIndex e = 0; e < net.edge_count(); ++e)
                if (mask[e] && std::min(d[net.edge(e).from], d[net.edge(e).to]) <= range / 2 + 1e-9)
                    oracle.push_back(e);
            CHECK(reach[i] == oracle);
        }
    }
}

TEST_CASE("allocation examples")
{
    SUBCASE("one facility takes everything")
    {
        auto s = solve_allocation({link(0, 300), link(1, 700)}, {5}, {{0, 1}}, {0.12});
        CHECK(s.average_per_day == std::vector<double>{1000.0});
        CHECK(s.daily_cost == doctest::Approx(120.0));
    }
    SUBCASE("cheaper facility wins")
    {
        auto s = solve_allocation({link(0, 1000)}, {1, 2}, {{0}, {0}}, {0.10, 0.15});
        CHECK(s.average_per_day == std::vector<double>{1000.0, 0.0});
        CHECK(s.daily_cost == doctest::Approx(100.0));
    }
    SUBCASE("equal prices go to the smaller node id")
    {
        auto s = solve_allocation({link(0, 1000)}, {7, 3}, {{0}, {0}}, {0.10, 0.10});
        CHECK(s.average_per_day == std::vector<double>{0.0, 1000.0});
    }
    SUBCASE("capacity 600 splits 600 + 400")
    {
        const double inf = std::numeric_limits<double>::infinity();
        auto s = solve_allocation({link(0, 1000)}, {1, 2}, {{0}, {0}}, {0.10, 0.15}, std::vector<double>{600.0, inf});
        CHECK(s.average_per_day[0] == doctest::Approx(600.0));
        CHECK(s.average_per_day[1] == doctest::Approx(400.0));
        CHECK(s.daily_cost == doctest::Approx(120.0));
        CHECK(s.daily_cost == doctest::Approx(transport_oracle({0.10, 0.15}, {600.0, 1e300}, {1000.0}, {{true}, {true}})));
    }
    SUBCASE("errors")
    {
        CHECK_THROWS_AS(solve_allocation({link(3, 10)}, {1}, {{0}}, {0.1}), UnreachableLinkError);
        CHECK_THROWS_AS(solve_allocation({link(0, 1000)}, {1, 2}, {{0}, {0}}, {0.1, 0.2}, std::vector<double>{300, 300}),
                        CapacityError);
    }
}

TEST_CASE("uncapacitated allocation equals the per-link argmin")
{
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> price(0.05, 0.30), energy(1.0, 5000.0);
    for (int t = 0; t < 300; ++t) {
        const int F = 1 + static_cast<int>(rng() % 5), L = 1 + static_cast<int>(rng() % 8);
        std::vector<NodeIndex> fac;
        std::vector<double> cost;
        for (int f = 0; f < F; ++f) {
            fac.push_back(static_cast<NodeIndex>(10 * f + rng() % 10));
            // coarse prices so ties occur
            cost.push_back(std::round(price(rng) * 20) / 20);
        }
        FacilityReach reach(F);
        std::vector<LinkEnergyDemand> dem;
        for (int l = 0; l < L; ++l) {
            dem.push_back(link(static_cast<EdgeIndex>(l), std::round(energy(rng)), kAllCommodities[rng() % 9]));
            reach[rng() % F].push_back(static_cast<EdgeIndex>(l)); // at least one facility
            for (int f = 0; f < F; ++f)
                if (rng() % 2) reach[f].push_back(static_cast<EdgeIndex>(l));
        }
        for (auto& r : reach) {
            std::sort(r.begin(), r.end());
            r.erase(std::unique(r.begin(), r.end()), r.end());
        }
        auto s = solve_allocation(dem, fac, reach, cost);

        double oracle = 0.0;
        std::vector<double> per_fac(F, 0.0);
        for (const auto& d : dem) {
            int best = -1;
            for (int f = 0; f < F; ++f) {
                if (!std::binary_search(reach[f].begin(), reach[f].end(), d.link)) continue;
                if (best < 0 || cost[f] < cost[best] || (cost[f] == cost[best] && fac[f] < fac[best])) best = f;
            }
            oracle += d.average_per_day * cost[best];
            per_fac[best] += d.average_per_day;
        }
        CHECK(s.daily_cost == oracle);
        CHECK(s.average_per_day == per_fac);
        for (const auto& a : s.allocation)
            CHECK(std::binary_search(reach[a.facility].begin(), reach[a.facility].end(), a.link));
    }
}

TEST_CASE("capacitated allocation matches the transportation oracle on 4x6")
{
    std::mt19937_64 rng(83);
    std::uniform_real_distribution<double> price(0.05, 0.30), energy(10.0, 1000.0), cap(100.0, 2500.0);
    int solved = 0;
    for (int t = 0; t < 400; ++t) {
        const int F = 4, L = 6;
        std::vector<NodeIndex> fac = {2, 4, 6, 8};
        std::vector<double> cost, capacity;
        for (int f = 0; f < F; ++f) {
            cost.push_back(price(rng));
            capacity.push_back(cap(rng));
        }
        std::vector<double> demand;
        std::vector<std::vector<bool>> rm(F, std::vector<bool>(L, false));
        FacilityReach reach(F);
        std::vector<LinkEnergyDemand> dem;
        for (int l = 0; l < L; ++l) {
            demand.push_back(energy(rng));
            dem.push_back(link(static_cast<EdgeIndex>(l), demand.back(), kAllCommodities[l]));
            int forced = static_cast<int>(rng() % F);
            for (int f = 0; f < F; ++f)
                if (f == forced || rng() % 2) {
                    rm[f][l] = true;
                    reach[f].push_back(static_cast<EdgeIndex>(l));
                }
        }
        double oracle = transport_oracle(cost, capacity, demand, rm);
        if (oracle < 0) {
            CHECK_THROWS_AS(solve_allocation(dem, fac, reach, cost, capacity), CapacityError);
            continue;
        }
        ++solved;
        auto s = solve_allocation(dem, fac, reach, cost, capacity);
        CHECK(rel_diff(s.daily_cost, oracle) <= 1e-9);
        double served = 0.0;
        for (int f = 0; f < F; ++f) {
            CHECK(s.average_per_day[f] <= capacity[f] * (1 + 1e-9));
            served += s.average_per_day[f];
        }
        double total = 0.0;
        for (double d : demand) total += d;
        CHECK(rel_diff(served, total) <= 1e-12);
        // each link's column sums to its demand
        std::vector<double> col(L, 0.0);
        for (const auto& a : s.allocation) {
            col[a.link] += a.average_per_day;
            CHECK(rm[a.facility][a.link]);
        }
        for (int l = 0; l < L; ++l) CHECK(rel_diff(col[l], demand[l]) <= 1e-12);
    }
    CHECK(solved > 150);
}

TEST_CASE("allocation conserves energy by commodity")
{
    std::vector<LinkEnergyDemand> dem = {link(0, 100, Commodity::Coal), link(0, 50, Commodity::Intermodal),
                                         link(1, 70, Commodity::Coal), link(2, 30, Commodity::Others)};
    auto s = solve_allocation(dem, {1, 2}, {{0, 1}, {1, 2}}, {0.2, 0.1});
    std::array<double, kCommodityCount> got{};
    for (const auto& row : s.average_by_commodity)
        for (std::size_t c = 0; c < kCommodityCount; ++c) got[c] += row[c];
    CHECK(got[index_of(Commodity::Coal)] == doctest::Approx(170));
    CHECK(got[index_of(Commodity::Intermodal)] == doctest::Approx(50));
    CHECK(got[index_of(Commodity::Others)] == doctest::Approx(30));
    CHECK(s.total_average_per_day() == doctest::Approx(250));
    CHECK(s.peak_per_day[0] + s.peak_per_day[1] == doctest::Approx(1.2 * 250));
}

TEST_CASE("dispense events from the battery and hydrogen tender parameters")
{
    auto ev = dispense_event(kPack, StorageTech::Battery);
    CHECK(ev.energy == 14.0 * 1000.0 * 0.8);
    CHECK(ev.energy == 11200.0);
    CHECK(ev.hours == 14.0 * 0.8 / 3.0);
    CHECK(ev.hours == doctest::Approx(3.733).epsilon(1e-4));
    auto h = dispense_event(kPack, StorageTech::Hydrogen);
    CHECK(h.energy == 4000.0);
    CHECK(h.hours == 4.0);
}

TEST_CASE("charger counts")
{
    const double hours = 14.0 * 0.8 / 3.0;
    SUBCASE("22,400 kWh/day peak needs one charger")
    {
        SizingSolution s;
        s.facilities = {0};
        s.average_per_day = {22400 / 1.2};
        s.peak_per_day = {22400};
        auto m = facility_metrics(s, kPack, StorageTech::Battery, 0.8);
        CHECK(m[0].locos_per_day_peak == doctest::Approx(2.0));
        CHECK(m[0].chargers == 1);
        CHECK(m[0].utilization == doctest::Approx(2 * hours / 24.0));
        CHECK(m[0].utilization == doctest::Approx(0.31).epsilon(0.01));
    }
    SUBCASE("224,000 kWh/day peak needs four")
    {
        CHECK(charger_count(20.0, hours, 0.8) == 4);
    }
    SUBCASE("nothing dispensed, nothing built")
    {
        SizingSolution s;
        s.facilities = {0};
        s.average_per_day = {0.0};
        s.peak_per_day = {0.0};
        auto m = facility_metrics(s, kPack, StorageTech::Battery, 0.8);
        CHECK(m[0].chargers == 0);
        CHECK(m[0].locos_per_day_average == 0.0);
    }
    SUBCASE("nonpositive utilization bound")
    {
        CHECK_THROWS_AS(charger_count(1.0, hours, 0.0), DataError);
    }
    SUBCASE("count is minimal under the bound")
    {
        std::mt19937_64 rng(97);
        std::uniform_real_distribution<double> events(0.01, 80.0), util(0.2, 1.0);
        for (int t = 0; t < 5000; ++t) {
            double e = events(rng), u = util(rng);
            int n = charger_count(e, hours, u);
            REQUIRE(n >= 1);
            CHECK(e * hours / (n * 24.0) <= u + 1e-12);
            if (n > 1) CHECK(e * hours / ((n - 1) * 24.0) > u);
        }
    }
}

TEST_CASE("tender counts")
{
    SUBCASE("Western intermodal at 400 mi needs five")
    {
        double kwh = 400.0 * 1319.0 * 875.0 / 2.44 / 3412.0;
        CHECK(kwh == doctest::Approx(55450).epsilon(1e-3));
        CHECK(tender_count(kPack, west(), StorageTech::Battery, 400.0, 875.0) ==
              static_cast<int>(std::ceil(kwh / 11200.0)));
        CHECK(tender_count(kPack, west(), StorageTech::Battery, 400.0, 875.0) == 5);
    }
    SUBCASE("range 0 keeps one tender")
    {
        CHECK(tender_count(kPack, west(), StorageTech::Battery, 0.0, 875.0) == 1);
        CHECK(tender_count(kPack, west(), StorageTech::Battery, 1.0, 107.0) == 1);
    }
    SUBCASE("hydrogen range back-solves a plausible system intensity")
    {
        const auto& w = west();
        double implied = 4000.0 * 113964.0 * 1.5 / (w.tonnage_per_locomotive * w.hydrogen_range_miles);
        CHECK(implied == doctest::Approx(499).epsilon(0.01));
        auto [lo, hi] = std::minmax_element(w.diesel_btu_per_ton_mile.begin(), w.diesel_btu_per_ton_mile.end());
        CHECK(implied > *lo);
        CHECK(implied < *hi);
        CHECK(tender_count(kPack, w, StorageTech::Hydrogen, w.hydrogen_range_miles, implied) == 1);
    }
}
