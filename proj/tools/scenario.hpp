#pragma once

// Scenario documents: loading, dotted-path overrides, schema validation and
// construction of the register they describe.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "peapod/physics.hpp"

namespace peapod::cli {

enum class Command { spectrum, gates, evolve, readout, transfer, plan, thermal };

std::string_view to_string(Command command);
Command command_from_string(std::string_view text);
inline constexpr Command kAllCommands[] = {Command::spectrum, Command::gates,    Command::evolve,
                                           Command::readout,  Command::transfer, Command::plan,
                                           Command::thermal};

/// Exit statuses of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitInfeasible = 3,
  kExitDimension = 4,
  kExitNumerical = 5,
};

nlohmann::json read_document(const std::filesystem::path& path);

/// Applies "a.b.c=value". The value is parsed as JSON when possible and kept
/// as a string otherwise; missing objects along the path are created.
void apply_override(nlohmann::json& doc, std::string_view assignment);

struct Scenario {
  Command command = Command::spectrum;
  nlohmann::json doc;
  Defaults defaults;
  RegisterConfig reg;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "out";
  std::vector<std::string> formats{"csv", "json", "svg"};

  /// The command's own section, or an empty object.
  const nlohmann::json& section() const;
  bool wants(std::string_view format) const;
};

/// Validates the document and builds the register. Throws InvalidInput.
Scenario make_scenario(Command command, nlohmann::json doc);

RegisterConfig register_from_json(const nlohmann::json& spec, const Defaults& defaults);

}  // namespace peapod::cli
