#include "support.hpp"

#include "railcarb/error.hpp"
#include "railcarb/report.hpp"
#include "railcarb/scenario.hpp"

#include <doctest.h>

using namespace railcarb;
using namespace testkit;
using nlohmann::json;

namespace {

ScenarioData corridor()
{
    ScenarioData d;
    d.network = make_net({{"A", "B", 150}, {"B", "C", 150}, {"C", "D", 300}});
    d.demand = {od(d.network, "A", "C", Commodity::Coal, 7.3e6), od(d.network, "B", "D", Commodity::Intermodal, 0.73e6)};
    d.grid = grid_of({{"TX", 400.0, 0.10}});
    return d;
}

ScenarioConfig battery(double range)
{
    ScenarioConfig c;
    c.technology = Technology::Battery;
    c.range_miles = range;
    return c;
}

} // namespace

TEST_CASE("battery corridor worked by hand")
{
    const ScenarioData data = corridor();
    ScenarioConfig cfg = battery(400);
    cfg.coverage_ratio = 0.5;
    auto rep = run_scenario(cfg, data);

    // A->C carries 2.19e9 ton-miles, B->D 3.285e8; half the total selects A->C alone
    const double tm_ac = 7.3e6 * 300, tm_bd = 0.73e6 * 450, total = tm_ac + tm_bd;
    CHECK(rep.selected_pairs == 1);
    CHECK(rep.coverage_ratio == doctest::Approx(tm_ac / total));
    CHECK(rep.facility_nodes == std::vector<NodeIndex>{at(data.network, "B")});
    CHECK(rep.enabled_arcs.size() == 2);
    CHECK(rep.penetration == doctest::Approx(20.0 / 23.0).epsilon(1e-12));

    // Facility B charges every coal ton-mile of A->C
    const double kwh_tm = 107.0 / 2.44 / 3412.0;
    const double avg = tm_ac / 365.0 * kwh_tm;
    REQUIRE(rep.facilities.size() == 1);
    const auto& fb = rep.facilities[0];
    CHECK(fb.load.average_per_day == doctest::Approx(avg).epsilon(1e-12));
    CHECK(avg == doctest::Approx(77114.6).epsilon(1e-5));
    CHECK(fb.load.peak_per_day == doctest::Approx(1.2 * avg));
    const double hours = 14.0 * 0.8 / 3.0;
    const double events_peak = 1.2 * avg / 11200.0;
    const int chargers = static_cast<int>(std::ceil(events_peak * hours / (24 * 0.8)));
    CHECK(chargers == 2);
    CHECK(fb.load.chargers == chargers);

    // Costs in cents per ton-mile
    const double energy = 0.10 * kwh_tm * 100;
    const double storage = 0.12; // one tender covers 400 mi of coal
    const double station_per_kwh = chargers * 1.5e6 * crf(0.03, 26) / (avg * 365);
    const double station = station_per_kwh * kwh_tm * 100;
    CHECK(rep.lco.energy == doctest::Approx(energy));
    CHECK(energy == doctest::Approx(0.12853).epsilon(1e-4));
    CHECK(rep.lco.storage == doctest::Approx(storage));
    CHECK(rep.lco.station == doctest::Approx(station));
    CHECK(station == doctest::Approx(0.00766).epsilon(2e-3));
    const double coal_diesel = 107.0 / 129488.0 * 2.47 * 100, im_diesel = 875.0 / 129488.0 * 2.47 * 100;
    CHECK(rep.lco.diesel == doctest::Approx(im_diesel));
    const double share = tm_ac / total;
    const double scen = share * (energy + storage + station) + (1 - share) * im_diesel;
    const double base = (tm_ac * coal_diesel + tm_bd * im_diesel) / total;
    CHECK(rep.lco.scenario() == doctest::Approx(scen));
    CHECK(rep.baseline_cents == doctest::Approx(base));

    // Emissions in kt per year
    const double g_coal = 107.0 * 12360.0 / 129488.0, g_im = 875.0 * 12360.0 / 129488.0;
    const double alt_kt = avg * 400.0 * 365 / 1e9;
    const double diesel_kt = tm_bd * g_im / 1e9;
    const double base_kt = tm_ac * g_coal / 1e9 + diesel_kt;
    CHECK(rep.emissions.alt_kt == doctest::Approx(alt_kt));
    CHECK(rep.emissions.diesel_kt == doctest::Approx(diesel_kt));
    CHECK(rep.emissions.baseline_kt == doctest::Approx(base_kt));
    CHECK(alt_kt == doctest::Approx(11.2587).epsilon(1e-4));
    CHECK(base_kt == doctest::Approx(49.80).epsilon(1e-3));

    const double g_scen = (alt_kt + diesel_kt) * 1e9 / total, g_base = base_kt * 1e9 / total;
    REQUIRE(rep.cae.has_value());
    CHECK(*rep.cae == doctest::Approx((scen - base) / 100 / ((g_base - g_scen) / 1000)));
    CHECK(*rep.cae == doctest::Approx(0.103).epsilon(0.01));
    CHECK(rep.notes.at("diesel_attribution") == "assigned_path_miles");
}

TEST_CASE("longer range needs fewer stations and lowers the cost of abatement")
{
    ScenarioData data;
    data.network = make_net({{"A", "B", 150}, {"B", "C", 150}, {"C", "D", 150}});
    data.demand = {od(data.network, "A", "D", Commodity::Coal, 2.5e6)};
    data.grid = grid_of({{"TX", 400.0, 0.10}});
    auto short_run = run_scenario(battery(300), data);
    auto long_run = run_scenario(battery(600), data);
    CHECK(short_run.facility_nodes == std::vector<NodeIndex>{at(data.network, "A"), at(data.network, "C")});
    CHECK(long_run.facility_nodes == std::vector<NodeIndex>{at(data.network, "B")});
    CHECK(short_run.penetration == 1.0);
    CHECK(long_run.penetration == 1.0);
    REQUIRE(short_run.cae.has_value());
    REQUIRE(long_run.cae.has_value());
    CHECK(*long_run.cae < *short_run.cae);
}

TEST_CASE("deployment search")
{
    ScenarioData data;
    data.network = make_net({{"A", "B", 100}, {"B", "C", 100}, {"B", "X", 500}});
    data.demand = {od(data.network, "A", "C", Commodity::Coal, 3500), od(data.network, "A", "X", Commodity::Coal, 500)};
    data.grid = grid_of({{"TX", 400.0, 0.10}});

    SUBCASE("an unbridgeable pair is skipped and the target undershoots")
    {
        auto cfg = battery(400);
        cfg.target_deployment = 1.0;
        auto rep = run_scenario(cfg, data);
        CHECK(rep.penetration == doctest::Approx(0.7));
        CHECK(rep.undershoot);
        CHECK(rep.skipped_pairs == std::vector<std::size_t>{1});
        auto j = report_json(rep, data.network, data.params);
        CHECK(j["deployment"]["undershoot"] == true);
    }
    SUBCASE("target 0 opens nothing")
    {
        auto cfg = battery(400);
        cfg.target_deployment = 0.0;
        auto rep = run_scenario(cfg, data);
        CHECK(rep.penetration == 0.0);
        CHECK(rep.facility_nodes.empty());
        CHECK_FALSE(rep.undershoot);
        CHECK_FALSE(rep.cae.has_value());
        CHECK(report_json(rep, data.network, data.params)["cae_dollars_per_kg"] == "n/a");
    }
    SUBCASE("a reachable target stops once within tolerance")
    {
        auto cfg = battery(400);
        cfg.target_deployment = 0.5;
        auto rep = run_scenario(cfg, data);
        CHECK(rep.selected_pairs == 1);
        CHECK(rep.penetration >= 0.5 - cfg.coverage_tolerance);
        CHECK_FALSE(rep.undershoot);
    }
    SUBCASE("ratio mode with an unbridgeable pair")
    {
        auto cfg = battery(400);
        cfg.coverage_ratio = 1.0;
        try {
            run_scenario(cfg, data);
            FAIL("expected InfeasibleError");
        } catch (const InfeasibleError& e) {
            CHECK(e.paths() == std::vector<std::size_t>{1});
            CHECK(std::string(e.what()).find("A->X") != std::string::npos);
        }
    }
}

TEST_CASE("reports are byte-identical across runs and caches")
{
    std::mt19937_64 rng(41);
    for (int t = 0; t < 20; ++t) {
        ScenarioData data;
        data.network = random_network(rng, 12, 6, 40, 200);
        data.demand = random_flows(rng, data.network, 10);
        data.grid = grid_of({{"TX", 350.0, 0.09}});
        ScenarioConfig cfg = battery(500);
        cfg.target_deployment = 0.6;
        cfg.technology = t % 2 ? Technology::Battery : Technology::Hydrogen;
        SitingCache cache;
        std::string first;
        for (int k = 0; k < 3; ++k) {
            auto rep = run_scenario(cfg, data, k == 2 ? &cache : nullptr);
            auto text = report_text(rep, data.network, data.params);
            if (k == 0) first = text;
            CHECK(text == first);
        }
        auto again = run_scenario(cfg, data, &cache);
        CHECK(report_text(again, data.network, data.params) == first);
    }
}

TEST_CASE("reported penetration matches the link table")
{
    std::mt19937_64 rng(43);
    for (int t = 0; t < 30; ++t) {
        ScenarioData data;
        data.network = random_network(rng, 10, 5, 40, 220);
        data.demand = random_flows(rng, data.network, 8);
        data.grid = grid_of({{"TX", 350.0, 0.09}});
        ScenarioConfig cfg = battery(450);
        cfg.target_deployment = 0.5;
        auto rep = run_scenario(cfg, data);
        auto j = report_json(rep, data.network, data.params);
        double alt = 0.0, all = 0.0;
        for (const auto& l : j["link_flows"]) {
            double tm = l["tons_per_year"].get<double>() * l["miles"].get<double>();
            all += tm;
            if (l["network"] == "alt") alt += tm;
        }
        if (all == 0.0) continue;
        CHECK(j["penetration"]["rate"].get<double>() == doctest::Approx(alt / all).epsilon(1e-9));
        CHECK(j["penetration"]["total_ton_miles"].get<double>() == doctest::Approx(all).epsilon(1e-9));
    }
}

TEST_CASE("drop-in cost of abatement does not depend on demand")
{
    std::mt19937_64 rng(47);
    for (int t = 0; t < 25; ++t) {
        ScenarioData data;
        data.network = random_network(rng, 8, 4, 20, 300);
        data.demand = random_flows(rng, data.network, 6);
        ScenarioConfig cfg;
        cfg.technology = t % 2 ? Technology::Biodiesel : Technology::EFuel;
        cfg.blend_fraction = 0.1 + 0.9 * std::uniform_real_distribution<double>(0, 1)(rng);
        auto rep = run_scenario(cfg, data);
        REQUIRE(rep.cae.has_value());
        CHECK(*rep.cae == doctest::Approx(t % 2 ? 0.565 / 4.43 : 1.36 / 6.145).epsilon(1e-9));
        CHECK(rep.emissions.reduction() ==
              doctest::Approx(cfg.blend_fraction * (1 - (t % 2 ? 3.50 : 0.07) / 12.36)).epsilon(1e-9));
    }
    ScenarioData data;
    data.network = make_net({{"A", "B", 100}});
    data.demand = {od(data.network, "A", "B", Commodity::Coal, 1e6)};
    ScenarioConfig none;
    none.technology = Technology::Biodiesel;
    auto rep = run_scenario(none, data);
    CHECK_FALSE(rep.cae.has_value());
    CHECK(report_json(rep, data.network, data.params)["cae_dollars_per_kg"] == "n/a");
}

TEST_CASE("config parsing and validation")
{
    SUBCASE("round trip keeps the hash")
    {
        auto c = ScenarioConfig::from_json(
            {{"technology", "battery"}, {"range_miles", 400}, {"routing_policy", "reroute_max_increase"},
             {"max_increase", 0.2}, {"seed", 7}});
        CHECK(c.hash().size() == 16);
        CHECK(ScenarioConfig::from_json(c.to_json()).hash() == c.hash());
        auto timed = c;
        timed.include_timings = true;
        CHECK(timed.hash() == c.hash());
        auto reseeded = c;
        reseeded.seed = 8;
        CHECK(reseeded.hash() != c.hash());
        CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
        CHECK(fnv1a64_hex("a") == "af63dc4c8601ec8c");
    }
    SUBCASE("every offending field is reported")
    {
        try {
            ScenarioConfig::from_json({{"colour", "red"}, {"blend_fraction", "half"}, {"technology", "steam"}});
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            std::string msg = e.what();
            CHECK(msg.find("colour") != std::string::npos);
            CHECK(msg.find("blend_fraction") != std::string::npos);
            CHECK(msg.find("technology") != std::string::npos);
        }
    }
    SUBCASE("range checks")
    {
        CHECK_THROWS_AS(ScenarioConfig::from_json({{"technology", "biodiesel"}, {"blend_fraction", 1.2}}), ConfigError);
        CHECK_THROWS_AS(ScenarioConfig::from_json({{"technology", "battery"}}), ConfigError);
        CHECK_THROWS_AS(ScenarioConfig::from_json({{"technology", "battery"}, {"range_miles", -5}}), ConfigError);
        CHECK_THROWS_AS(ScenarioConfig::from_json({{"technology", "diesel"}, {"blend_fraction", 0.5}}), ConfigError);
        CHECK_THROWS_AS(ScenarioConfig::from_json({{"max_increase", 0.1}}), ConfigError);
        CHECK_THROWS_AS(ScenarioConfig::from_json({{"siting_solver", "magic"}}), ConfigError);
        CHECK_THROWS_AS(ScenarioConfig::from_json(json::array()), ConfigError);
        CHECK_NOTHROW(ScenarioConfig::from_json({{"technology", "hydrogen"}}));
        CHECK(ScenarioConfig::from_json({{"technology", "E-Fuel"}, {"blend_fraction", 0.5}}).technology ==
              Technology::EFuel);
    }
    SUBCASE("hydrogen falls back to the railroad range")
    {
        ScenarioData data = corridor();
        ScenarioConfig cfg;
        cfg.technology = Technology::Hydrogen;
        StoragePipeline pipe(cfg, data, nullptr);
        CHECK(pipe.range_miles() == data.params.railroad("Western").hydrogen_range_miles);
    }
}

TEST_CASE("synthetic demand follows the seed")
{
    ScenarioData data;
    std::mt19937_64 rng(53);
    data.network = random_network(rng, 12, 6, 40, 200);
    data.grid = grid_of({{"TX", 350.0, 0.09}});
    ScenarioConfig cfg = battery(500);
    cfg.target_deployment = 0.5;
    cfg.synthetic_pairs = 40;
    cfg.seed = 1;
    auto a = report_text(run_scenario(cfg, data), data.network, data.params);
    auto b = report_text(run_scenario(cfg, data), data.network, data.params);
    CHECK(a == b);
    cfg.seed = 2;
    auto c = run_scenario(cfg, data);
    CHECK(report_text(c, data.network, data.params) != a);
}
