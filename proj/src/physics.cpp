#include "peapod/physics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "peapod/errors.hpp"
#include "defaults_embedded.hpp"

namespace peapod {

namespace {

double number_field(const nlohmann::json& obj, const char* key) {
  if (!obj.contains(key) || !obj.at(key).is_number()) {
    throw InvalidInput(std::string("defaults: missing numeric field '") + key + "'");
  }
  return obj.at(key).get<double>();
}

}  // namespace

void Constants::validate() const {
  if (!(bohr_magneton > 0 && planck > 0 && boltzmann > 0 && mu0_over_4pi > 0 && g_electron > 0)) {
    throw InvalidInput("physical constants must be strictly positive");
  }
  if (std::abs(g_electron - 2.0) > 0.02) throw InvalidInput("electron g-factor must be close to 2");
}

std::string_view to_string(CouplingRange range) {
  return range == CouplingRange::full ? "full" : "nearest";
}

CouplingRange coupling_range_from_string(std::string_view text) {
  if (text == "nearest" || text == "nearest-neighbor") return CouplingRange::nearest_neighbor;
  if (text == "full") return CouplingRange::full;
  throw InvalidInput("unknown coupling range '" + std::string(text) + "'");
}

RegisterConfig RegisterConfig::uniform(const Constants& constants, const Species& species, double b0,
                                       double gradient, double spacing, std::size_t count,
                                       CouplingRange range) {
  if (count < 1) throw InvalidInput("register needs at least one site");
  if (!(spacing > 0)) throw InvalidInput("site spacing must be positive");
  RegisterConfig cfg;
  cfg.constants = constants;
  cfg.species = species;
  cfg.b0_tesla = b0;
  cfg.gradient_tesla_per_m = gradient;
  cfg.range = range;
  cfg.positions_m.resize(count);
  for (std::size_t i = 0; i < count; ++i) cfg.positions_m[i] = spacing * static_cast<double>(i);
  cfg.validate();
  return cfg;
}

void RegisterConfig::validate() const {
  constants.validate();
  if (positions_m.empty()) throw InvalidInput("register needs at least one site");
  if (!(b0_tesla > 0)) throw InvalidInput("B0 must be positive");
  if (!std::isfinite(gradient_tesla_per_m)) throw InvalidInput("gradient must be finite");
  for (std::size_t i = 1; i < positions_m.size(); ++i) {
    if (!(positions_m[i] > positions_m[i - 1])) {
      throw InvalidInput("site positions must be strictly increasing");
    }
  }
}

const Species& Defaults::species_named(std::string_view name) const {
  auto it = species.find(name);
  if (it == species.end()) throw InvalidInput("unknown species '" + std::string(name) + "'");
  return it->second;
}

RegisterConfig Defaults::default_register() const {
  const auto& reg = raw.at("register");
  return RegisterConfig::uniform(
      constants, species_named(reg.at("species").get<std::string>()), reg.at("B0_T").get<double>(),
      reg.at("gradient_T_per_m").get<double>(), reg.at("spacing_m").get<double>(),
      reg.at("count").get<std::size_t>(),
      coupling_range_from_string(reg.at("coupling_range").get<std::string>()));
}

Defaults parse_defaults(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(std::string("defaults: ") + e.what());
  }
  Defaults out;
  if (!doc.contains("version") || !doc.at("version").is_number_integer()) {
    throw InvalidInput("defaults: missing integer 'version'");
  }
  out.version = doc.at("version").get<int>();
  const auto& c = doc.at("constants");
  out.constants.bohr_magneton = number_field(c, "bohr_magneton_J_per_T");
  out.constants.planck = number_field(c, "planck_J_s");
  out.constants.boltzmann = number_field(c, "boltzmann_J_per_K");
  out.constants.mu0_over_4pi = number_field(c, "mu0_over_4pi_T_m_per_A");
  out.constants.g_electron = number_field(c, "g_electron");
  out.constants.validate();
  for (const auto& [name, entry] : doc.at("species").items()) {
    Species sp;
    sp.name = name;
    const double hyperfine_hz = number_field(entry, "hyperfine_hz");
    if (!(hyperfine_hz > 0)) throw InvalidInput("defaults: hyperfine constant must be positive");
    sp.hyperfine = Frequency::from_hz(hyperfine_hz);
    sp.gamma_hz_per_tesla = number_field(entry, "gamma_hz_per_T");
    if (sp.gamma_hz_per_tesla == 0.0) throw InvalidInput("defaults: gamma must be nonzero");
    out.species.emplace(name, sp);
  }
  out.raw = std::move(doc);
  return out;
}

Defaults load_defaults(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open defaults file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_defaults(buf.str());
}

const Defaults& builtin_defaults() {
  static const Defaults defaults = parse_defaults(embedded::kDefaultsJson);
  return defaults;
}

Frequency electron_larmor(const Constants& constants, double field_tesla) {
  if (field_tesla < 0) throw InvalidInput("field must be non-negative");
  return Frequency::from_rad_s(constants.g_electron * constants.bohr_magneton * field_tesla /
                               constants.hbar());
}

NuclearLarmor nuclear_larmor(const Species& species, double field_tesla) {
  if (field_tesla < 0) throw InvalidInput("field must be non-negative");
  NuclearLarmor out;
  out.magnitude = Frequency::from_hz(std::abs(species.gamma_hz_per_tesla) * field_tesla);
  out.sign = species.gamma_hz_per_tesla < 0 ? -1 : 1;
  return out;
}

Frequency dipolar_coupling(const Constants& constants, double distance_m) {
  if (!(distance_m > 0)) throw InvalidInput("dipolar distance must be positive");
  const double moment = constants.g_electron * constants.bohr_magneton;
  const double energy = constants.mu0_over_4pi * moment * moment /
                        (distance_m * distance_m * distance_m);
  return Frequency::from_rad_s(energy / constants.hbar());
}

double site_field(const RegisterConfig& config, std::size_t site) {
  if (site >= config.size()) throw InvalidInput("site index out of range");
  return config.b0_tesla + config.gradient_tesla_per_m * config.positions_m[site];
}

Frequency single_quantum_splitting(const RegisterConfig& config, std::size_t site) {
  if (site + 1 >= config.size()) throw InvalidInput("site has no right-hand neighbor");
  const double dz = config.positions_m[site + 1] - config.positions_m[site];
  const auto& c = config.constants;
  return Frequency::from_rad_s(c.g_electron * c.bohr_magneton * config.gradient_tesla_per_m * dz /
                               c.hbar());
}

Frequency qubit_transition_splitting(const RegisterConfig& config, std::size_t site) {
  return 3.0 * single_quantum_splitting(config, site);
}

Frequency coupling(const RegisterConfig& config, std::size_t i, std::size_t k) {
  if (i >= config.size() || k >= config.size()) throw InvalidInput("site index out of range");
  if (i == k) return {};
  const std::size_t dist = i > k ? i - k : k - i;
  if (config.range == CouplingRange::nearest_neighbor && dist != 1) return {};
  return dipolar_coupling(config.constants, std::abs(config.positions_m[i] - config.positions_m[k]));
}

nlohmann::json register_to_json(const RegisterConfig& config) {
  nlohmann::json j;
  j["species"] = {{"name", config.species.name},
                  {"hyperfine_hz", config.species.hyperfine.hz()},
                  {"gamma_hz_per_T", config.species.gamma_hz_per_tesla}};
  j["B0_T"] = config.b0_tesla;
  j["gradient_T_per_m"] = config.gradient_tesla_per_m;
  j["positions_m"] = config.positions_m;
  j["coupling_range"] = std::string(to_string(config.range));
  const auto& c = config.constants;
  j["constants"] = {{"bohr_magneton_J_per_T", c.bohr_magneton},
                    {"planck_J_s", c.planck},
                    {"boltzmann_J_per_K", c.boltzmann},
                    {"mu0_over_4pi_T_m_per_A", c.mu0_over_4pi},
                    {"g_electron", c.g_electron}};
  return j;
}

double gradient_for_separation(const Constants& constants, Frequency separation, double spacing_m) {
  if (!(spacing_m > 0)) throw InvalidInput("spacing must be positive");
  return separation.rad_s() * constants.hbar() /
         (constants.g_electron * constants.bohr_magneton * spacing_m);
}

}  // namespace peapod
