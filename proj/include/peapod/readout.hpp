#pragma once

// Mobile-electron readout: filter A polarizes, a microwave pulse at the
// caged-spin-conditioned mobile line flips the mobile spin, filter B passes
// flipped spins to the detector.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "peapod/gates.hpp"
#include "peapod/physics.hpp"

namespace peapod {

enum class Polarization { up, down };

struct FilterSpec {
  Polarization pass = Polarization::up;
  double efficiency = 1.0;    // probability a wrong-polarization electron is blocked
  double transmission = 1.0;  // probability a right-polarization electron passes
  void validate() const;
};

/// Probabilities over caged m = +3/2, +1/2, -1/2, -3/2.
struct CagedDistribution {
  std::array<double, 4> p{};
  static CagedDistribution pure(double m);
  void validate() const;
};

struct ReadoutRun {
  int target_site = 0;
  std::uint64_t n = 1;  // electrons leaving filter A
  double flip_angle = kPi;
  FilterSpec filter_a{Polarization::up, 1.0, 1.0};
  FilterSpec filter_b{Polarization::down, 1.0, 1.0};
  std::uint64_t seed = 0;
  void validate() const;
};

/// Frequencies of the caged/mobile pair.
struct ReadoutSetup {
  Frequency caged_larmor;
  Frequency mobile_larmor;
  Frequency d_prime;
  Frequency pulse;              // defaults to the m = +3/2 branch
  double window_hz = 1e6;       // pulse-to-branch matching window
};

ReadoutSetup readout_setup(const RegisterConfig& config, int site, double mobile_distance_m);

/// Mobile-spin line for each caged m, as eigenvalue differences of the pair.
std::array<Frequency, 4> mobile_lines(const ReadoutSetup& setup);

struct DetectorCounts {
  std::uint64_t seed = 0;
  std::uint64_t n = 0;
  std::uint64_t counts = 0;
  double p_hat = 0;
  double p_expected = 0;
  double caged_m = 0;  // the projection realized in this run
};

/// Detection probability for a caged spin fixed at m.
double detection_probability(double caged_m, const ReadoutRun& run, const ReadoutSetup& setup);

/// The caged distribution is sampled once per run (the first electron
/// projects it); electrons are then independent Bernoulli trials.
DetectorCounts readout_run(const CagedDistribution& caged, const ReadoutRun& run,
                           const ReadoutSetup& setup);

/// Flip probability for caged +3/2 minus that for -3/2, for a pulse resonant
/// with the +3/2 branch of Rabi frequency pulse.rabi_hz and the run's flip angle.
double discrimination_power(const ReadoutRun& run, Frequency d_prime, const PulseSegment& pulse);

std::string readout_csv(const std::vector<DetectorCounts>& runs);

}  // namespace peapod
