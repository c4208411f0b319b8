#pragma once

// Pulse-level evolution under the secular register Hamiltonian.
//
// Results are expressed in the interaction frame of H0, so free evolution is
// the identity and an ideal resonant pulse reproduces its ideal gate. Each
// tone drives one spin at a signed carrier resolved against the spin's
// transition catalog; every other transition of that spin stays in the model
// with its detuning (rotating-wave approximation at the carrier).

#include <optional>
#include <vector>

#include "peapod/gates.hpp"
#include "peapod/hamiltonian.hpp"
#include "peapod/spectrum.hpp"

namespace peapod {

enum class DriveScope {
  addressed_spin,  // a tone acts on its target spin only
  same_role,       // a tone acts on every spin of the target's role
};

struct SimulationOptions {
  // A carrier must lie this close to one of its spin's lines.
  double carrier_window_hz = 1e6;
  DriveScope scope = DriveScope::addressed_spin;
  // Largest phase an off-resonant term may advance within one Magnus step.
  double magnus_phase_step = 0.05;
};

struct ResolvedTone {
  SpinRef spin;
  double omega;  // signed carrier, rad/s
  double rabi;   // rad/s
  double phase;
  double line_hz;  // catalog line the carrier was matched to
};

std::vector<ResolvedTone> resolve_block(const ChainHamiltonian& h0, const PulseBlock& block,
                                        const SimulationOptions& options = {});

StateVector simulate_sequence(const ChainHamiltonian& h0, const GateSequence& seq,
                              const StateVector& initial, const SimulationOptions& options = {});
Operator simulate_propagator(const ChainHamiltonian& h0, const GateSequence& seq,
                             const SimulationOptions& options = {});

/// Omega_R^2 / (Omega_R^2 + Delta^2).
double rabi_max_transfer(Frequency rabi, Frequency detuning);
/// Two-level transfer probability after `duration` seconds.
double rabi_transfer(Frequency rabi, Frequency detuning, double duration_s);

struct SelectivityEntry {
  std::size_t line;  // index into the catalog
  double frequency_hz;
  double detuning_hz;
  double leakage;
  bool addressed;
};

struct SelectivityReport {
  std::vector<SelectivityEntry> entries;
  std::optional<double> min_margin_hz;  // smallest |detuning| of a non-addressed line
  double worst_leakage = 0.0;           // over non-addressed lines
};

/// Lines within tol::merge_hz of the carrier count as addressed (leakage 1).
SelectivityReport selectivity_report(const PulseSegment& segment, const StickSpectrum& catalog);

/// Selective pi pulse on the target electron's line with the control electron
/// at +3/2, every other electron at +3/2 and the target nucleus at nuclear_m.
GateSequence electron_cnot_pulse(const RegisterConfig& config, int control, int target,
                                 double rabi_hz, double nuclear_m = 0.5);

struct PulseCnotCheck {
  double fidelity = 0;
  double line_hz = 0;
  double wrong_branch_detuning_hz = 0;  // control at -3/2
  double duration_s = 0;
  double rabi_hz = 0;
};

/// Simulated electron CNOT against the controlled inversion, on the subspace
/// with both electrons in +-3/2, all nuclei at +1/2 and other electrons at +3/2.
PulseCnotCheck pulse_cnot_check(const RegisterConfig& config, int control, int target,
                                double rabi_hz, const SimulationOptions& options = {});

}  // namespace peapod
