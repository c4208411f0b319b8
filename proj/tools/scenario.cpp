#include "scenario.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "peapod/errors.hpp"
#include "schema.hpp"

namespace peapod::cli {

using nlohmann::json;

std::string_view to_string(Command command) {
  switch (command) {
    case Command::spectrum: return "spectrum";
    case Command::gates: return "gates";
    case Command::evolve: return "evolve";
    case Command::readout: return "readout";
    case Command::transfer: return "transfer";
    case Command::plan: return "plan";
    case Command::thermal: return "thermal";
  }
  return "?";
}

Command command_from_string(std::string_view text) {
  for (auto c : kAllCommands) {
    if (to_string(c) == text) return c;
  }
  throw InvalidInput("unknown scenario '" + std::string(text) + "'");
}

json read_document(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw InvalidInput("config " + path.string() + " is not valid JSON: " + e.what());
  }
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw InvalidInput("override must look like key.path=value: " + std::string(assignment));
  }
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }

  json* node = &doc;
  std::stringstream parts(key);
  std::string part;
  std::vector<std::string> path;
  while (std::getline(parts, part, '.')) {
    if (part.empty()) throw InvalidInput("empty component in override key " + key);
    path.push_back(part);
  }
  for (std::size_t k = 0; k < path.size(); ++k) {
    const bool last = k + 1 == path.size();
    if (node->is_array()) {
      const bool numeric = std::all_of(path[k].begin(), path[k].end(), ::isdigit);
      const auto index = numeric ? std::stoul(path[k]) : node->size();
      if (index >= node->size()) throw InvalidInput("override index out of range in " + key);
      node = &(*node)[index];
    } else {
      if (node->is_null()) *node = json::object();
      if (!node->is_object()) throw InvalidInput("override path " + key + " crosses a scalar");
      node = &(*node)[path[k]];
    }
    if (last) *node = value;
  }
}

const json& Scenario::section() const {
  static const json empty = json::object();
  const auto it = doc.find(std::string(to_string(command)));
  return it == doc.end() ? empty : *it;
}

bool Scenario::wants(std::string_view format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

RegisterConfig register_from_json(const json& spec, const Defaults& defaults) {
  json merged = defaults.raw.value("register", json::object());
  // Explicit positions replace the uniform chain description.
  if (spec.contains("positions_m")) {
    merged.erase("count");
    merged.erase("spacing_m");
  }
  if (spec.contains("separation_hz")) merged.erase("gradient_T_per_m");
  for (auto it = spec.begin(); it != spec.end(); ++it) merged[it.key()] = it.value();
  if (merged.contains("separation_hz") && spec.contains("gradient_T_per_m")) {
    throw InvalidInput("give either register.gradient_T_per_m or register.separation_hz, not both");
  }

  Species species = defaults.species_named(merged.value("species", std::string("P31")));
  if (merged.contains("hyperfine_hz")) species.hyperfine = Frequency::from_hz(merged["hyperfine_hz"].get<double>());
  if (merged.contains("gamma_hz_per_T")) species.gamma_hz_per_tesla = merged["gamma_hz_per_T"].get<double>();

  const auto range = coupling_range_from_string(merged.value("coupling_range", std::string("nearest")));
  const double b0 = merged.value("B0_T", 1.0);

  RegisterConfig cfg;
  if (merged.contains("positions_m")) {
    cfg.constants = defaults.constants;
    cfg.species = species;
    cfg.b0_tesla = b0;
    cfg.positions_m = merged["positions_m"].get<std::vector<double>>();
    cfg.range = range;
    if (spec.contains("count") && spec["count"].get<std::size_t>() != cfg.positions_m.size()) {
      throw InvalidInput("register.count does not match register.positions_m");
    }
  } else {
    const double spacing = merged.value("spacing_m", 2.91e-9);
    const auto count = merged.value("count", std::size_t{1});
    cfg = RegisterConfig::uniform(defaults.constants, species, b0, 0.0, spacing, count, range);
  }
  if (merged.contains("separation_hz")) {
    if (cfg.size() < 2) throw InvalidInput("register.separation_hz needs at least two sites");
    const double spacing = cfg.positions_m[1] - cfg.positions_m[0];
    cfg.gradient_tesla_per_m = gradient_for_separation(
        defaults.constants, Frequency::from_hz(merged["separation_hz"].get<double>()), spacing);
  } else {
    cfg.gradient_tesla_per_m = merged.value("gradient_T_per_m", 0.0);
  }
  cfg.validate();
  return cfg;
}

Scenario make_scenario(Command command, json doc) {
  if (!doc.is_object()) throw InvalidInput("config must be a JSON object");
  const auto violations = validate_schema(scenario_schema(), doc);
  if (!violations.empty()) {
    std::string msg = "config does not match the scenario schema:";
    for (const auto& v : violations) msg += "\n  " + v.path + ": " + v.message;
    throw InvalidInput(msg);
  }
  if (doc.contains("scenario") && doc["scenario"].get<std::string>() != to_string(command)) {
    throw InvalidInput("config is a '" + doc["scenario"].get<std::string>() + "' scenario, not '" +
                       std::string(to_string(command)) + "'");
  }

  Scenario s;
  s.command = command;
  json raw = builtin_defaults().raw;
  if (doc.contains("constants")) {
    for (auto it = doc["constants"].begin(); it != doc["constants"].end(); ++it) {
      raw["constants"][it.key()] = it.value();
    }
  }
  s.defaults = parse_defaults(raw.dump());
  s.reg = register_from_json(doc.value("register", json::object()), s.defaults);
  s.seed = doc.value("seed", std::uint64_t{0});
  if (doc.contains("output")) {
    const auto& out = doc["output"];
    if (out.contains("dir")) s.out_dir = out["dir"].get<std::string>();
    if (out.contains("formats")) s.formats = out["formats"].get<std::vector<std::string>>();
  }
  s.doc = std::move(doc);
  return s;
}

}  // namespace peapod::cli
