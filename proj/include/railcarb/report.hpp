#pragma once

#include "railcarb/scenario.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace railcarb {

inline constexpr int kReportSchemaVersion = 1;

// Rounding applied at serialization only.
double round_to(double value, int decimals);

nlohmann::json network_json(const RailNetwork& net);
nlohmann::json assignment_json(const FlowAssignment& a, const RailNetwork& net);
nlohmann::json facility_set_json(const FacilitySet& s, const RailNetwork& net);
nlohmann::json sizing_json(const SizingSolution& s, const RailNetwork& net);

// Per-facility detail: traffic, chargers or pumps, utilization.
nlohmann::json facilities_json(const EvaluationReport& rep, const RailNetwork& net, const ParameterPack& params);

nlohmann::json report_json(const EvaluationReport& rep, const RailNetwork& net, const ParameterPack& params);

// Pretty-printed JSON with a trailing newline; byte-stable for equal inputs.
std::string report_text(const EvaluationReport& rep, const RailNetwork& net, const ParameterPack& params);

std::string csv_summary_header();
std::string csv_summary_row(const EvaluationReport& rep);

} // namespace railcarb
