#pragma once

#include "railcarb/scenario.hpp"

#include <json.hpp>

#include <memory>
#include <optional>
#include <string>

namespace railcarb {

struct ServiceOptions {
    std::string persist_dir; // when set, finished reports are also written as <dir>/<id>.json
};

// HTTP front end over shared, immutable scenario data. Each POSTed scenario
// runs on its own thread with private state; results live in memory.
//
//   GET  /network                   nodes and edges with coordinates
//   GET  /parameters                the active parameter pack
//   POST /scenarios                 202 {"id"} or 422 {"errors": [{field, message}]}
//   GET  /scenarios/{id}            {"id", "status", "report" | "error"}
//   GET  /scenarios/{id}/facilities per-facility detail
class ScenarioService {
public:
    explicit ScenarioService(std::shared_ptr<const ScenarioData> data, ServiceOptions options = {});
    ~ScenarioService();

    ScenarioService(const ScenarioService&) = delete;
    ScenarioService& operator=(const ScenarioService&) = delete;

    // Binds (port 0 picks a free port), serves on a background thread and
    // returns the bound port. Throws Error when binding fails.
    int start(const std::string& host, int port);
    // Blocks until stop() is called from another thread.
    void serve(const std::string& host, int port);
    void stop();

    // Programmatic equivalents of the HTTP calls.
    std::string submit(const nlohmann::json& config); // throws ConfigError
    std::optional<nlohmann::json> status(const std::string& id) const;
    void wait_all();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace railcarb
