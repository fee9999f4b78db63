#include "railcarb/service.hpp"

#include "railcarb/error.hpp"
#include "railcarb/report.hpp"

#include <httplib.h>

#include <condition_variable>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

namespace railcarb {

using nlohmann::json;

namespace {

struct Run {
    std::string status = "running"; // running | done | failed
    json report;
    json facilities;
    std::string error;
    std::string error_kind;
};

json errors_json(const ConfigError& e)
{
    json list = json::array();
    for (const auto& [field, msg] : e.fields()) list.push_back({{"field", field}, {"message", msg}});
    return {{"errors", list}};
}

} // namespace

struct ScenarioService::Impl {
    std::shared_ptr<const ScenarioData> data;
    ServiceOptions options;
    httplib::Server server;
    std::thread listener;

    mutable std::mutex mutex;
    std::condition_variable idle;
    std::map<std::string, Run> runs;
    std::vector<std::thread> workers;
    std::size_t active = 0;
    std::size_t next_id = 1;

    void routes();
    std::string launch(ScenarioConfig cfg);
    std::optional<json> status_json(const std::string& id) const;
    void execute(const std::string& id, ScenarioConfig cfg);
};

ScenarioService::ScenarioService(std::shared_ptr<const ScenarioData> data, ServiceOptions options)
    : impl_(std::make_unique<Impl>())
{
    impl_->data = std::move(data);
    impl_->options = std::move(options);
    impl_->routes();
}

ScenarioService::~ScenarioService()
{
    stop();
    wait_all();
    std::vector<std::thread> workers;
    {
        std::lock_guard lock(impl_->mutex);
        workers.swap(impl_->workers);
    }
    for (auto& t : workers)
        if (t.joinable()) t.join();
}

void ScenarioService::Impl::routes()
{
    server.Get("/network", [this](const httplib::Request&, httplib::Response& res) {
        res.set_content(network_json(data->network).dump(), "application/json");
    });
    server.Get("/parameters", [this](const httplib::Request&, httplib::Response& res) {
        res.set_content(data->params.to_json().dump(), "application/json");
    });
    server.Post("/scenarios", [this](const httplib::Request& req, httplib::Response& res) {
        json body;
        try {
            body = json::parse(req.body);
        } catch (const json::parse_error& e) {
            res.status = 422;
            res.set_content(errors_json(ConfigError("", std::string("malformed JSON: ") + e.what())).dump(),
                            "application/json");
            return;
        }
        try {
            std::string id = launch(ScenarioConfig::from_json(body));
            res.status = 202;
            res.set_content(json{{"id", id}}.dump(), "application/json");
        } catch (const ConfigError& e) {
            res.status = 422;
            res.set_content(errors_json(e).dump(), "application/json");
        }
    });
    server.Get(R"(/scenarios/([A-Za-z0-9-]+))", [this](const httplib::Request& req, httplib::Response& res) {
        auto out = status_json(req.matches[1]);
        if (!out) {
            res.status = 404;
            res.set_content(json{{"error", "unknown scenario id"}}.dump(), "application/json");
            return;
        }
        res.set_content(out->dump(), "application/json");
    });
    server.Get(R"(/scenarios/([A-Za-z0-9-]+)/facilities)", [this](const httplib::Request& req, httplib::Response& res) {
        std::lock_guard lock(mutex);
        auto it = runs.find(req.matches[1]);
        if (it == runs.end()) {
            res.status = 404;
            res.set_content(json{{"error", "unknown scenario id"}}.dump(), "application/json");
        } else if (it->second.status != "done") {
            res.status = 409;
            res.set_content(json{{"id", it->first}, {"status", it->second.status}}.dump(), "application/json");
        } else {
            res.set_content(it->second.facilities.dump(), "application/json");
        }
    });
}

std::string ScenarioService::Impl::launch(ScenarioConfig cfg)
{
    if (cfg.params_path.empty() && !data->params.railroads.count(cfg.railroad))
        throw ConfigError("railroad", "unknown railroad group '" + cfg.railroad + "'");
    std::lock_guard lock(mutex);
    std::string id = "run-" + std::to_string(next_id++);
    runs[id] = Run{};
    ++active;
    workers.emplace_back([this, id, cfg] { execute(id, cfg); });
    return id;
}

std::optional<json> ScenarioService::Impl::status_json(const std::string& id) const
{
    std::lock_guard lock(mutex);
    auto it = runs.find(id);
    if (it == runs.end()) return std::nullopt;
    json out = {{"id", id}, {"status", it->second.status}};
    if (it->second.status == "done") out["report"] = it->second.report;
    if (it->second.status == "failed") out["error"] = {{"kind", it->second.error_kind}, {"message", it->second.error}};
    return out;
}

void ScenarioService::Impl::execute(const std::string& id, ScenarioConfig cfg)
{
    Run result;
    try {
        std::shared_ptr<const ScenarioData> run_data = data;
        if (!cfg.params_path.empty()) {
            auto local = std::make_shared<ScenarioData>(*data);
            local->params = ParameterPack::load(cfg.params_path);
            run_data = local;
        }
        EvaluationReport rep = run_scenario(cfg, *run_data);
        result.report = report_json(rep, run_data->network, run_data->params);
        result.facilities = facilities_json(rep, run_data->network, run_data->params);
        result.status = "done";
        if (!options.persist_dir.empty()) {
            std::filesystem::create_directories(options.persist_dir);
            std::ofstream out(std::filesystem::path(options.persist_dir) / (id + ".json"));
            out << report_text(rep, run_data->network, run_data->params);
        }
    } catch (const InfeasibleError& e) {
        result.status = "failed";
        result.error_kind = "infeasible";
        result.error = e.what();
    } catch (const ConfigError& e) {
        result.status = "failed";
        result.error_kind = "config";
        result.error = e.what();
    } catch (const std::exception& e) {
        result.status = "failed";
        result.error_kind = "data";
        result.error = e.what();
    }
    std::lock_guard lock(mutex);
    runs[id] = std::move(result);
    if (--active == 0) idle.notify_all();
}

int ScenarioService::start(const std::string& host, int port)
{
    int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
    impl_->listener = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return bound;
}

void ScenarioService::serve(const std::string& host, int port)
{
    if (!impl_->server.listen(host, port)) throw Error("cannot listen on " + host + ":" + std::to_string(port));
}

void ScenarioService::stop()
{
    impl_->server.stop();
    if (impl_->listener.joinable()) impl_->listener.join();
}

std::string ScenarioService::submit(const json& config)
{
    return impl_->launch(ScenarioConfig::from_json(config));
}

std::optional<json> ScenarioService::status(const std::string& id) const
{
    return impl_->status_json(id);
}

void ScenarioService::wait_all()
{
    std::unique_lock lock(impl_->mutex);
    impl_->idle.wait(lock, [this] { return impl_->active == 0; });
}

} // namespace railcarb
