#pragma once

// Eigenenergies and magnetic-dipole transition catalogs of the register.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "peapod/hamiltonian.hpp"
#include "peapod/physics.hpp"

namespace peapod {

enum class Branch { esr, nmr };

std::string_view to_string(Branch branch);

/// m-values of the adjacent electrons; absent on an edge.
struct NeighborContext {
  std::optional<double> left;
  std::optional<double> right;
  /// Further enumerated neighbors, ordered by distance then left before right.
  std::vector<double> outer;
};

/// One stick. `sense` is the sign of E(m) - E(m-1) for the flipped spin, so a
/// negative sense means the raising transition lowers the energy.
struct TransitionLine {
  double frequency_hz = 0;
  int sense = 1;
  Branch branch = Branch::esr;
  int site = 0;
  int degeneracy = 1;
  bool active = true;
  std::vector<std::string> labels;  // "initial -> final"
  std::vector<NeighborContext> contexts;
  // Basis indices of the pair (final has the larger m); unmerged lines only.
  std::optional<std::size_t> initial_index;
  std::optional<std::size_t> final_index;

  double signed_hz() const { return sense * frequency_hz; }
};

struct StickSpectrum {
  std::vector<TransitionLine> lines;
  std::string config_hash;
  std::string branch;
  double reference_hz = 0;

  /// Sort by frequency then site and merge lines within tol::merge_hz that
  /// share branch, site and sense.
  void normalize();
  int total_degeneracy() const;
  std::vector<double> frequencies_hz() const;
};

struct LabeledEnergy {
  std::size_t index;
  std::string label;
  Frequency energy;
};

/// Energies of the product basis states. The Hamiltonian is diagonal in this
/// basis; the result is ordered by basis index.
std::vector<LabeledEnergy> eigenenergies(const ChainHamiltonian& h);

/// All single-spin |dm| = 1 transitions of the built Hamiltonian, optionally
/// restricted to one spin. Unmerged; frequencies are eigenvalue differences.
std::vector<TransitionLine> transition_catalog(const ChainHamiltonian& h,
                                               std::optional<SpinRef> only = std::nullopt);

StickSpectrum single_molecule_lines(const Constants& constants, double b0_tesla,
                                    const Species& species);

/// Computed line frequencies next to their closed forms and quoted values.
struct LineCheck {
  std::string name;
  double computed_hz;
  double closed_form_hz;
  std::optional<double> quoted_hz;
};

std::vector<LineCheck> single_molecule_cross_check(const Constants& constants, double b0_tesla,
                                                   const Species& species);

enum class NeighborModel { enumerate_all, ideal, polarized_beyond_nn };

/// Neighbor-conditioned lines of the electron at `site` with its own nucleus
/// in `nuclear_m`. In enumerate_all and ideal modes only nearest-neighbor
/// couplings enter; polarized_beyond_nn adds every farther electron at +3/2.
/// Shifts are relative to reference_hz = (Omega_S^i - A m_I) / 2pi.
StickSpectrum chain_electron_lines(const RegisterConfig& config, std::size_t site,
                                   NeighborModel model, double nuclear_m = 0.5);

/// Lines with the neighbors up to `depth` enumerated over all four m-values;
/// farther electrons either ignored or held at +3/2.
StickSpectrum neighborhood_lines(const RegisterConfig& config, std::size_t site, int depth,
                                 bool polarize_rest, double nuclear_m = 0.5);

struct NeighborTraces {
  StickSpectrum nearest;         // nearest neighbors only
  StickSpectrum second;          // plus second neighbors
  StickSpectrum third;           // plus third neighbors
  StickSpectrum polarized;       // nearest enumerated, the rest at +3/2
};

NeighborTraces neighbor_traces(const RegisterConfig& config, std::size_t site);

/// Line shift from all electrons at |i - k| >= 2 fixed at m = +3/2.
Frequency nonlocal_shift(const RegisterConfig& config, std::size_t site);

/// FNV-1a over the canonical register JSON.
std::string config_hash(const RegisterConfig& config);

std::string spectrum_csv(const StickSpectrum& spectrum);
std::string energies_csv(const std::vector<LabeledEnergy>& energies);
/// Stick plot. Line 2 of the output is a version comment.
std::string spectrum_svg(const StickSpectrum& spectrum, const std::string& title);

}  // namespace peapod
