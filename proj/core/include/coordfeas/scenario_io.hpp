#pragma once

#include <cstdint>
#include <string>

#include "coordfeas/sim.hpp"

namespace coordfeas {

// A parsed scenario document plus its file-level envelope.
struct ScenarioFile {
  Scenario scenario;
  std::string csv_path;     // outputs.csv; empty means stdout
  std::string report_path;  // outputs.report; empty means stdout
  std::string digest;       // "fnv1a64:<16 hex>" over the raw document bytes
};

std::uint64_t fnv1a64(const std::string& bytes);
std::string digest_string(const std::string& bytes);

// Parse a JSON scenario document. Unknown keys, missing required fields, and
// type mismatches throw ParseError whose path() names the offending field;
// origin seeds the path for top-level complaints.
ScenarioFile parse_scenario_text(const std::string& text,
                                 const std::string& origin = "<input>");

ScenarioFile load_scenario(const std::string& path);

// Canonical JSON (sorted keys, named references) that parses back to an
// equal scenario.
std::string serialize_scenario(const Scenario& s, const std::string& csv_path = "",
                               const std::string& report_path = "");

bool scenario_equal(const Scenario& a, const Scenario& b);

}  // namespace coordfeas
