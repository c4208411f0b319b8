#pragma once

// Ideal gate library, gate sequences and the register-level protocols built
// from them.
//
// Qubit encoding: electron m = +3/2 / -3/2 and nucleus m = +1/2 / -1/2 are the
// logical 0 / 1 states. ±1/2 electron states are spectators of every gate
// except the physical inversion P.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "peapod/physics.hpp"
#include "peapod/spin.hpp"

namespace peapod {

enum class GateKind {
  inversion,         // P = exp(-i pi S_x) on an electron
  cnot_si,           // nucleus flipped iff its electron is in control_m
  cnot_is,           // electron +-3/2 exchanged iff its nucleus is in control_m
  cpf,               // -1 on |+3/2, +3/2> of two electrons
  swap_si,           // electron-nucleus SWAP from three CNOTs
  cnot_ee,           // electron sites[1] exchanged iff electron sites[0] is in control_m
  nuclear_rotation,  // exp(-i angle (cos phase I_x + sin phase I_y))
};

/// logical: bare permutations. pulse: the phases a resonant pi rotation leaves
/// behind (controlled P on electrons, controlled -i sigma_x on nuclei).
enum class PhaseConvention { logical, pulse };

enum class SwapOrder { sis, isi };

std::string_view to_string(GateKind kind);
std::string_view to_string(PhaseConvention convention);
std::string_view to_string(SwapOrder order);
GateKind gate_kind_from_string(std::string_view text);
PhaseConvention phase_convention_from_string(std::string_view text);
SwapOrder swap_order_from_string(std::string_view text);

struct GateSpec {
  GateKind kind = GateKind::inversion;
  // One or more molecules for single-molecule gates (all acted on at once, as
  // by a hard pulse); exactly {control, target} for cpf and cnot_ee.
  std::vector<int> sites;
  std::optional<double> control_m;  // defaults: +3/2 electron, +1/2 nucleus
  double angle = kPi;
  double phase = 0.0;
  SwapOrder order = SwapOrder::sis;
  PhaseConvention convention = PhaseConvention::logical;

  static GateSpec make(GateKind kind, std::vector<int> sites,
                       PhaseConvention convention = PhaseConvention::logical);
};

struct LocalFactor {
  Matrix matrix;
  std::vector<SpinRef> targets;
};

/// The gate as an ordered product of local factors (applied first to last).
std::vector<LocalFactor> local_factors(const GateSpec& spec, const BasisLayout& layout);
Operator ideal_gate(const GateSpec& spec, const BasisLayout& layout);

/// 8x8 single-molecule matrices (electron the more significant factor).
Matrix molecule_cnot_si(double control_m, PhaseConvention convention);
Matrix molecule_cnot_is(double control_m, PhaseConvention convention);
Matrix inversion_matrix();

/// One selective or simultaneous set of drive tones of equal duration.
struct PulseSegment {
  SpinRef target;
  double carrier_hz = 0;
  double rabi_hz = 0;
  double phase = 0;
  double duration_s = 0;
  std::string frame = "rotating";
  // Optional basis labels of the addressed pair, for reports.
  std::optional<std::pair<std::string, std::string>> transition;

  void validate() const;
};

struct PulseBlock {
  std::vector<PulseSegment> segments;
  // What the block is meant to implement, if known.
  std::optional<GateSpec> intent;

  double duration() const;
  void validate() const;
};

using SequenceStep = std::variant<GateSpec, PulseBlock>;

struct GateSequence {
  std::vector<SequenceStep> steps;
  std::string name;

  double total_duration() const;
  void validate() const;
  void append(const GateSequence& other);
};

/// Product of the ideal actions; pulse blocks contribute their intent.
Operator compose_ideal(const GateSequence& seq, const BasisLayout& layout);

/// Three CNOTs on one molecule. With `passive` the CNOT_IS steps are dropped,
/// as they are for a molecule whose electron is not addressed.
GateSequence swap_decomposition(SwapOrder order, int site,
                                PhaseConvention convention = PhaseConvention::logical,
                                bool passive = false);

enum class CoreGate { cnot, cpf };
enum class NuclearPulseMode {
  selective,  // CNOT_SI addresses only the named molecule
  hard,       // CNOT_SI hits every molecule whose electron is at +3/2
};

std::string_view to_string(CoreGate core);
std::string_view to_string(NuclearPulseMode mode);

struct ProtocolOptions {
  CoreGate core = CoreGate::cnot;
  NuclearPulseMode mode = NuclearPulseMode::selective;
  SwapOrder order = SwapOrder::sis;
  int register_size = 2;
};

/// SWAP(i), SWAP(j), core on the electrons, SWAP(i), SWAP(j); j must be i +- 1.
/// With hard pulses and ISI order both swaps share one CNOT_SI step, since
/// two sequential ISI swaps would disturb the first molecule.
GateSequence two_qubit_protocol(int i, int j, const ProtocolOptions& options = {});

/// Basis states with every electron in m = +-3/2.
std::vector<std::size_t> qubit_subspace(const BasisLayout& layout);

/// The core gate on the nuclear qubits of molecules i (control) and j, with
/// the identity on everything else: the target of two_qubit_protocol.
Operator nuclear_core_gate(CoreGate core, int i, int j, const BasisLayout& layout);

/// Nuclear rotation independent of the electron qubit: two simultaneous tones
/// at the nuclear lines of the m_S = +3/2 and -3/2 manifolds.
GateSequence unconditional_nuclear_rotation(const RegisterConfig& config, int site, double angle,
                                            double phase, double rabi_hz);

nlohmann::json to_json(const GateSpec& spec);
nlohmann::json to_json(const PulseSegment& segment);
nlohmann::json to_json(const GateSequence& seq);
GateSpec gate_spec_from_json(const nlohmann::json& j);
PulseSegment pulse_segment_from_json(const nlohmann::json& j);
GateSequence gate_sequence_from_json(const nlohmann::json& j);

}  // namespace peapod
