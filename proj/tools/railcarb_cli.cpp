// railcarb: command-line front end for the scenario engine.
//
//   railcarb run          evaluate one scenario, write the report JSON and a CSV summary
//   railcarb sweep        repeat a scenario over ranges or deployment targets
//   railcarb serve        HTTP API
//   railcarb synth-demand seeded synthetic O-D demand
//   railcarb validate     load and check input files
//
// Exit status: 0 success, 1 invalid input or configuration, 2 siting infeasible.

#include "railcarb/error.hpp"
#include "railcarb/report.hpp"
#include "railcarb/scenario.hpp"
#include "railcarb/service.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

using namespace railcarb;
using nlohmann::json;

namespace {

struct DataPaths {
    std::string nodes, edges, demand, params, grid, cost_curve;
    double cluster_radius = 0.0;
};

struct ConfigFlags {
    std::string config_file;
    std::string railroad, technology, routing_policy, siting_solver;
    double blend_fraction = 0, range_miles = 0, target_deployment = 0, coverage_ratio = 0, max_increase = 0,
           coverage_tolerance = 0;
    int grid_year = 0;
    std::uint64_t seed = 0;
    std::size_t synthetic_pairs = 0;
    bool include_timings = false;
    std::vector<CLI::Option*> options;
};

void add_data_options(CLI::App* app, DataPaths& p, bool demand)
{
    app->add_option("--nodes", p.nodes, "Node CSV (id,name,state,lat,lon,candidate)");
    app->add_option("--edges", p.edges, "Edge CSV (from,to,miles,owner[,one_way])");
    if (demand) app->add_option("--demand", p.demand, "Demand CSV (origin,destination,commodity,tons_per_year)");
    app->add_option("--params", p.params, "Parameter pack JSON");
    app->add_option("--grid", p.grid, "Grid table CSV (state,year,g_per_kwh,price_per_kwh)");
    app->add_option("--cost-curve", p.cost_curve, "Station cost curve CSV");
    app->add_option("--cluster-radius", p.cluster_radius, "Merge nodes within this many miles into super-nodes (0: off)")
        ->check(CLI::NonNegativeNumber);
}

void add_config_options(CLI::App* app, ConfigFlags& f)
{
    app->add_option("--config", f.config_file, "Scenario config JSON; flags override its fields");
    f.options = {
        app->add_option("--railroad", f.railroad, "Railroad group (Western, Eastern, ...)"),
        app->add_option("--technology,--tech", f.technology, "diesel | biodiesel | efuel | battery | hydrogen"),
        app->add_option("--blend-fraction,--blend", f.blend_fraction, "Drop-in admixture fraction"),
        app->add_option("--range-miles,--range", f.range_miles, "Locomotive range"),
        app->add_option("--target-deployment", f.target_deployment, "Target share of ton-miles"),
        app->add_option("--coverage-ratio", f.coverage_ratio, "O-D coverage ratio when no target is given"),
        app->add_option("--routing-policy", f.routing_policy, "no_reroute | reroute_max_increase | endpoints_enabled"),
        app->add_option("--max-increase", f.max_increase, "Allowed detour for reroute_max_increase"),
        app->add_option("--coverage-tolerance", f.coverage_tolerance, "Deployment target tolerance"),
        app->add_option("--siting-solver", f.siting_solver, "exact | greedy"),
        app->add_option("--grid-year", f.grid_year, "Grid table year (default: latest)"),
        app->add_option("--seed", f.seed, "Seed for synthetic demand"),
        app->add_option("--synthetic-pairs", f.synthetic_pairs, "Use this many synthetic O-D pairs"),
        app->add_flag("--include-timings", f.include_timings, "Add wall-clock timings to the report"),
    };
}

json config_json(const ConfigFlags& f)
{
    json j = json::object();
    if (!f.config_file.empty()) {
        std::ifstream in(f.config_file);
        if (!in) throw DataError("cannot open config '" + f.config_file + "'");
        try {
            j = json::parse(in, nullptr, true, true);
        } catch (const json::parse_error& e) {
            throw DataError(f.config_file + ": " + e.what());
        }
    }
    auto set = [&](std::size_t i, const char* key, json value) {
        if (f.options[i]->count() > 0) j[key] = std::move(value);
    };
    set(0, "railroad", f.railroad);
    set(1, "technology", f.technology);
    set(2, "blend_fraction", f.blend_fraction);
    set(3, "range_miles", f.range_miles);
    set(4, "target_deployment", f.target_deployment);
    set(5, "coverage_ratio", f.coverage_ratio);
    set(6, "routing_policy", f.routing_policy);
    set(7, "max_increase", f.max_increase);
    set(8, "coverage_tolerance", f.coverage_tolerance);
    set(9, "siting_solver", f.siting_solver);
    set(10, "grid_year", f.grid_year);
    set(11, "seed", f.seed);
    set(12, "synthetic_pairs", f.synthetic_pairs);
    set(13, "include_timings", f.include_timings);
    return j;
}

void print_warnings(const Diagnostics& diag)
{
    for (const auto& w : diag.warnings) std::cerr << "warning: " << w << "\n";
}

std::shared_ptr<ScenarioData> load_data(const DataPaths& p, const ScenarioConfig* cfg)
{
    auto data = std::make_shared<ScenarioData>();
    if (p.nodes.empty() || p.edges.empty()) throw DataError("--nodes and --edges are required");
    Diagnostics diag;
    data->network = load_network(p.nodes, p.edges, diag);
    const bool synthetic = cfg && cfg->synthetic_pairs > 0;
    if (!p.demand.empty()) data->demand = load_demand(p.demand, data->network, diag);
    else if (!synthetic && cfg) throw DataError("--demand is required unless --synthetic-pairs is given");
    if (p.cluster_radius > 0.0) {
        Clustering c = cluster_supernodes(data->network, p.cluster_radius);
        data->demand = remap_demand(data->demand, data->network, c, diag);
        data->network = std::move(c.network);
    }
    print_warnings(diag);
    std::string params = cfg && !cfg->params_path.empty() ? cfg->params_path : p.params;
    if (!params.empty()) data->params = ParameterPack::load(params);
    if (!p.grid.empty()) data->grid = GridTable::load(p.grid);
    if (!p.cost_curve.empty()) data->cost_curve = FacilityCostCurve::load(p.cost_curve);
    if (cfg) data->params.railroad(cfg->railroad);
    return data;
}

void write_text(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << text;
}

std::vector<double> parse_list(const std::string& s, const char* what)
{
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError(what, "not a number: '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError(what, "empty list");
    return out;
}

int report_config_error(const ConfigError& e)
{
    std::cerr << "error: invalid configuration\n";
    for (const auto& [field, msg] : e.fields()) std::cerr << "  " << (field.empty() ? "(body)" : field) << ": " << msg << "\n";
    return 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Rail freight decarbonization scenario engine"};
    app.require_subcommand(1);

    DataPaths paths;
    ConfigFlags run_flags, sweep_flags;
    std::string out_path, csv_path, out_dir, ranges, targets, host = "127.0.0.1", persist_dir, synth_out = "-";
    int port = 8080;
    std::uint64_t synth_seed = 1;
    std::size_t synth_pairs = 100;

    auto* run = app.add_subcommand("run", "Evaluate one scenario");
    add_data_options(run, paths, true);
    add_config_options(run, run_flags);
    run->add_option("--out", out_path, "Report JSON path (default: stdout)");
    run->add_option("--csv", csv_path, "CSV summary path");

    auto* sweep = app.add_subcommand("sweep", "Repeat a scenario over ranges or deployment targets");
    add_data_options(sweep, paths, true);
    add_config_options(sweep, sweep_flags);
    auto* ranges_opt = sweep->add_option("--ranges", ranges, "Comma-separated locomotive ranges");
    sweep->add_option("--targets", targets, "Comma-separated deployment targets")->excludes(ranges_opt);
    sweep->add_option("--out-dir", out_dir, "Directory for one report per grid point");

    auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
    add_data_options(serve, paths, true);
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--port", port, "Port");
    serve->add_option("--persist-dir", persist_dir, "Also write finished reports here");

    auto* synth = app.add_subcommand("synth-demand", "Write seeded synthetic demand");
    add_data_options(synth, paths, false);
    synth->add_option("--seed", synth_seed, "Random seed");
    synth->add_option("--pairs", synth_pairs, "Number of O-D pairs");
    synth->add_option("--out", synth_out, "Demand CSV path (default: stdout)");

    auto* validate = app.add_subcommand("validate", "Load and check input files");
    add_data_options(validate, paths, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 1;
    }

    try {
        if (*run) {
            ScenarioConfig cfg = ScenarioConfig::from_json(config_json(run_flags));
            auto data = load_data(paths, &cfg);
            EvaluationReport rep = run_scenario(cfg, *data);
            write_text(out_path, report_text(rep, data->network, data->params));
            if (!csv_path.empty()) write_text(csv_path, csv_summary_header() + csv_summary_row(rep));
        } else if (*sweep) {
            json base = config_json(sweep_flags);
            const bool by_range = !ranges.empty();
            if (!by_range && targets.empty()) throw ConfigError("ranges", "give --ranges or --targets");
            const auto grid = by_range ? parse_list(ranges, "ranges") : parse_list(targets, "targets");
            json first_point = base;
            first_point[by_range ? "range_miles" : "target_deployment"] = grid.front();
            ScenarioConfig first = ScenarioConfig::from_json(first_point);
            auto data = load_data(paths, &first);
            SitingCache cache;
            if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
            std::cout << csv_summary_header();
            for (std::size_t i = 0; i < grid.size(); ++i) {
                json j = base;
                j[by_range ? "range_miles" : "target_deployment"] = grid[i];
                ScenarioConfig cfg = ScenarioConfig::from_json(j);
                EvaluationReport rep = run_scenario(cfg, *data, &cache);
                std::cout << csv_summary_row(rep);
                if (!out_dir.empty())
                    write_text((std::filesystem::path(out_dir) / ("report-" + std::to_string(i) + ".json")).string(),
                               report_text(rep, data->network, data->params));
            }
        } else if (*serve) {
            auto data = load_data(paths, nullptr);
            ScenarioService service(data, ServiceOptions{persist_dir});
            std::cerr << "listening on " << host << ":" << port << "\n";
            service.serve(host, port);
        } else if (*synth) {
            if (paths.nodes.empty() || paths.edges.empty()) throw DataError("--nodes and --edges are required");
            RailNetwork net = load_network(paths.nodes, paths.edges);
            SynthOptions opts;
            opts.seed = synth_seed;
            opts.n_pairs = synth_pairs;
            std::ostringstream out;
            write_demand_csv(net, synth_demand(net, opts), out);
            write_text(synth_out, out.str());
        } else if (*validate) {
            if (!paths.params.empty()) ParameterPack::load(paths.params).validate();
            if (!paths.nodes.empty() || !paths.edges.empty()) {
                Diagnostics diag;
                RailNetwork net = load_network(paths.nodes, paths.edges, diag);
                if (!paths.demand.empty()) load_demand(paths.demand, net, diag);
                print_warnings(diag);
            } else if (!paths.demand.empty()) {
                throw DataError("--demand needs --nodes and --edges");
            }
            if (!paths.grid.empty()) GridTable::load(paths.grid);
            if (!paths.cost_curve.empty()) FacilityCostCurve::load(paths.cost_curve);
            std::cout << "ok\n";
        }
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        return report_config_error(e);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
