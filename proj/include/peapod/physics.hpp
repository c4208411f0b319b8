#pragma once

// Constants, species data and geometry-to-frequency conversions.
// Frequencies are carried as angular frequencies (rad/s, hbar = 1) and
// converted to Hz only where they leave the library.

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "peapod/spin.hpp"

namespace peapod {

class Frequency {
 public:
  constexpr Frequency() = default;
  static constexpr Frequency from_hz(double hz) { return Frequency(kTwoPi * hz); }
  static constexpr Frequency from_rad_s(double w) { return Frequency(w); }

  constexpr double rad_s() const { return rad_s_; }
  constexpr double hz() const { return rad_s_ / kTwoPi; }

  constexpr Frequency operator+(Frequency o) const { return Frequency(rad_s_ + o.rad_s_); }
  constexpr Frequency operator-(Frequency o) const { return Frequency(rad_s_ - o.rad_s_); }
  constexpr Frequency operator-() const { return Frequency(-rad_s_); }
  constexpr Frequency operator*(double k) const { return Frequency(rad_s_ * k); }
  constexpr Frequency operator/(double k) const { return Frequency(rad_s_ / k); }
  constexpr double operator/(Frequency o) const { return rad_s_ / o.rad_s_; }
  constexpr auto operator<=>(const Frequency&) const = default;

 private:
  constexpr explicit Frequency(double w) : rad_s_(w) {}
  double rad_s_ = 0.0;
};

inline constexpr Frequency operator*(double k, Frequency f) { return f * k; }

struct Constants {
  double bohr_magneton = 0.0;   // J/T
  double planck = 0.0;          // J s
  double boltzmann = 0.0;       // J/K
  double mu0_over_4pi = 0.0;    // T m / A
  double g_electron = 0.0;

  double hbar() const { return planck / kTwoPi; }
  void validate() const;
};

struct Species {
  std::string name;
  Frequency hyperfine;            // A
  double gamma_hz_per_tesla = 0;  // signed gamma_I / 2pi
};

enum class CouplingRange { nearest_neighbor, full };

std::string_view to_string(CouplingRange range);
CouplingRange coupling_range_from_string(std::string_view text);

/// Geometry, field and species of a peapod register. Sites are 0-based.
struct RegisterConfig {
  Constants constants;
  Species species;
  double b0_tesla = 1.0;
  double gradient_tesla_per_m = 0.0;
  std::vector<double> positions_m;
  CouplingRange range = CouplingRange::nearest_neighbor;

  static RegisterConfig uniform(const Constants& constants, const Species& species, double b0,
                                double gradient, double spacing, std::size_t count,
                                CouplingRange range = CouplingRange::nearest_neighbor);

  std::size_t size() const { return positions_m.size(); }
  void validate() const;
};

/// Versioned defaults file: constants, species table and a default register.
struct Defaults {
  int version = 0;
  Constants constants;
  std::map<std::string, Species, std::less<>> species;
  nlohmann::json raw;

  const Species& species_named(std::string_view name) const;
  RegisterConfig default_register() const;
};

Defaults parse_defaults(std::string_view json_text);
Defaults load_defaults(const std::filesystem::path& path);
/// Defaults compiled in from data/defaults.json.
const Defaults& builtin_defaults();

Frequency electron_larmor(const Constants& constants, double field_tesla);

struct NuclearLarmor {
  Frequency magnitude;
  int sign = 1;
  Frequency signed_value() const { return magnitude * static_cast<double>(sign); }
};

NuclearLarmor nuclear_larmor(const Species& species, double field_tesla);

/// Secular point-dipole prefactor (mu0/4pi) (g muB)^2 / (hbar r^3).
Frequency dipolar_coupling(const Constants& constants, double distance_m);

double site_field(const RegisterConfig& config, std::size_t site);

/// Difference between the |3/2> <-> |-3/2> frequencies of sites i and i+1.
Frequency qubit_transition_splitting(const RegisterConfig& config, std::size_t site);
/// Same for single-quantum electron transitions (one third of the above).
Frequency single_quantum_splitting(const RegisterConfig& config, std::size_t site);

/// D_{i,k} honouring the configured coupling range; zero for i == k.
Frequency coupling(const RegisterConfig& config, std::size_t i, std::size_t k);

/// Canonical JSON description; the basis of config hashes.
nlohmann::json register_to_json(const RegisterConfig& config);

/// Gradient producing the requested adjacent electron Larmor separation.
double gradient_for_separation(const Constants& constants, Frequency separation, double spacing_m);

}  // namespace peapod
