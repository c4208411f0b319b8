#pragma once

#include <exception>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scenario.hpp"

namespace peapod::cli {

struct Artifact {
  std::string name;  // file name; the extension selects the format filter
  std::string content;
};

struct Outcome {
  int exit_code = kExitOk;
  nlohmann::json report;
  std::vector<Artifact> artifacts;
};

Outcome run_scenario(const Scenario& scenario);

/// Per-site Larmor frequencies and the coupling matrix, without computing.
nlohmann::json derived_parameters(const Scenario& scenario);

/// Writes the artifacts the scenario's formats allow, plus the JSON report.
/// Returns the paths written, relative to the output directory.
std::vector<std::string> write_outcome(const Scenario& scenario, const Outcome& outcome);

struct ErrorInfo {
  int exit_code;
  std::string kind;
  std::string message;
};

/// Maps an in-flight exception onto an exit code.
ErrorInfo classify(std::exception_ptr error);

nlohmann::json error_json(const ErrorInfo& info);

}  // namespace peapod::cli
