#include "peapod/gates.hpp"

#include <algorithm>
#include <cmath>

#include "peapod/errors.hpp"
#include "peapod/hamiltonian.hpp"

namespace peapod {

namespace {

const SpinValue kElectron = SpinValue::three_halves();
const SpinValue kNucleus = SpinValue::half();

const cplx kI(0.0, 1.0);

// Nuclear pi rotation about x in the given convention.
Matrix nuclear_flip(PhaseConvention convention) {
  Matrix x = Matrix::Zero(2, 2);
  const cplx v = convention == PhaseConvention::logical ? cplx(1.0) : -kI;
  x(0, 1) = v;
  x(1, 0) = v;
  return x;
}

// Electron +-3/2 exchange; spectator +-1/2 unless the full rotation is wanted.
Matrix electron_flip(PhaseConvention convention) {
  if (convention == PhaseConvention::pulse) return inversion_matrix();
  Matrix x = Matrix::Identity(4, 4);
  x(0, 0) = 0.0;
  x(3, 3) = 0.0;
  x(0, 3) = 1.0;
  x(3, 0) = 1.0;
  return x;
}

double electron_control(const GateSpec& spec) {
  const double m = spec.control_m.value_or(1.5);
  kElectron.index_of(m);
  return m;
}

double nuclear_control(const GateSpec& spec) {
  const double m = spec.control_m.value_or(0.5);
  kNucleus.index_of(m);
  return m;
}

Matrix controlled_pair(double control_m, PhaseConvention convention) {
  Matrix u = Matrix::Identity(16, 16);
  const int c = kElectron.index_of(control_m);
  u.block(4 * c, 4 * c, 4, 4) = electron_flip(convention);
  return u;
}

Matrix nuclear_rotation_matrix(double angle, double phase) {
  Matrix u(2, 2);
  const double c = std::cos(0.5 * angle);
  const double s = std::sin(0.5 * angle);
  u(0, 0) = c;
  u(1, 1) = c;
  u(0, 1) = -kI * s * std::polar(1.0, -phase);
  u(1, 0) = -kI * s * std::polar(1.0, phase);
  return u;
}

std::vector<SpinRef> molecule(int site) { return {{site, Role::electron}, {site, Role::nuclear}}; }

void check_sites(const GateSpec& spec, const BasisLayout& layout) {
  if (spec.sites.empty()) throw InvalidInput("gate has no target sites");
  auto sorted = spec.sites;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InvalidInput("gate target sites must be distinct");
  }
  const bool pair = spec.kind == GateKind::cpf || spec.kind == GateKind::cnot_ee;
  if (pair && spec.sites.size() != 2) {
    throw InvalidInput(std::string(to_string(spec.kind)) + " needs exactly a control and a target site");
  }
  for (int s : spec.sites) {
    const bool needs_nucleus = !pair && spec.kind != GateKind::inversion;
    if (!layout.find({s, Role::electron}) || (needs_nucleus && !layout.find({s, Role::nuclear}))) {
      throw InvalidInput("gate targets site " + std::to_string(s) + ", which is not in the layout");
    }
  }
}

}  // namespace

std::string_view to_string(GateKind kind) {
  switch (kind) {
    case GateKind::inversion: return "inversion";
    case GateKind::cnot_si: return "cnot_si";
    case GateKind::cnot_is: return "cnot_is";
    case GateKind::cpf: return "cpf";
    case GateKind::swap_si: return "swap_si";
    case GateKind::cnot_ee: return "cnot_ee";
    case GateKind::nuclear_rotation: return "nuclear_rotation";
  }
  return "?";
}

std::string_view to_string(PhaseConvention convention) {
  return convention == PhaseConvention::logical ? "logical" : "pulse";
}

std::string_view to_string(SwapOrder order) { return order == SwapOrder::sis ? "sis" : "isi"; }

std::string_view to_string(CoreGate core) { return core == CoreGate::cnot ? "cnot" : "cpf"; }

std::string_view to_string(NuclearPulseMode mode) {
  return mode == NuclearPulseMode::selective ? "selective" : "hard";
}

GateKind gate_kind_from_string(std::string_view text) {
  for (auto k : {GateKind::inversion, GateKind::cnot_si, GateKind::cnot_is, GateKind::cpf,
                 GateKind::swap_si, GateKind::cnot_ee, GateKind::nuclear_rotation}) {
    if (to_string(k) == text) return k;
  }
  throw InvalidInput("unknown gate kind '" + std::string(text) + "'");
}

PhaseConvention phase_convention_from_string(std::string_view text) {
  if (text == "logical") return PhaseConvention::logical;
  if (text == "pulse") return PhaseConvention::pulse;
  throw InvalidInput("unknown phase convention '" + std::string(text) + "'");
}

SwapOrder swap_order_from_string(std::string_view text) {
  if (text == "sis") return SwapOrder::sis;
  if (text == "isi") return SwapOrder::isi;
  throw InvalidInput("unknown swap order '" + std::string(text) + "'");
}

GateSpec GateSpec::make(GateKind kind, std::vector<int> sites, PhaseConvention convention) {
  GateSpec s;
  s.kind = kind;
  s.sites = std::move(sites);
  s.convention = convention;
  return s;
}

Matrix inversion_matrix() {
  Matrix p = Matrix::Zero(4, 4);
  for (int k = 0; k < 4; ++k) p(k, 3 - k) = kI;
  return p;
}

Matrix molecule_cnot_si(double control_m, PhaseConvention convention) {
  Matrix u = Matrix::Identity(8, 8);
  const int e = kElectron.index_of(control_m);
  u.block(2 * e, 2 * e, 2, 2) = nuclear_flip(convention);
  return u;
}

Matrix molecule_cnot_is(double control_m, PhaseConvention convention) {
  Matrix u = Matrix::Identity(8, 8);
  const int n = kNucleus.index_of(control_m);
  const Matrix flip = electron_flip(convention);
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) u(2 * a + n, 2 * b + n) = flip(a, b);
  }
  return u;
}

std::vector<LocalFactor> local_factors(const GateSpec& spec, const BasisLayout& layout) {
  check_sites(spec, layout);
  std::vector<LocalFactor> out;
  const auto conv = spec.convention;
  switch (spec.kind) {
    case GateKind::inversion:
      for (int s : spec.sites) out.push_back({inversion_matrix(), {{s, Role::electron}}});
      break;
    case GateKind::cnot_si: {
      const double m = electron_control(spec);
      for (int s : spec.sites) out.push_back({molecule_cnot_si(m, conv), molecule(s)});
      break;
    }
    case GateKind::cnot_is: {
      const double m = nuclear_control(spec);
      for (int s : spec.sites) out.push_back({molecule_cnot_is(m, conv), molecule(s)});
      break;
    }
    case GateKind::swap_si:
      for (int s : spec.sites) {
        const Matrix si = molecule_cnot_si(1.5, conv);
        const Matrix is = molecule_cnot_is(0.5, conv);
        if (spec.order == SwapOrder::sis) {
          out.push_back({si, molecule(s)});
          out.push_back({is, molecule(s)});
          out.push_back({si, molecule(s)});
        } else {
          out.push_back({is, molecule(s)});
          out.push_back({si, molecule(s)});
          out.push_back({is, molecule(s)});
        }
      }
      break;
    case GateKind::cpf: {
      Matrix u = Matrix::Identity(16, 16);
      u(0, 0) = -1.0;
      out.push_back({u, {{spec.sites[0], Role::electron}, {spec.sites[1], Role::electron}}});
      break;
    }
    case GateKind::cnot_ee:
      out.push_back({controlled_pair(electron_control(spec), conv),
                     {{spec.sites[0], Role::electron}, {spec.sites[1], Role::electron}}});
      break;
    case GateKind::nuclear_rotation:
      for (int s : spec.sites) {
        out.push_back({nuclear_rotation_matrix(spec.angle, spec.phase), {{s, Role::nuclear}}});
      }
      break;
  }
  return out;
}

Operator ideal_gate(const GateSpec& spec, const BasisLayout& layout) {
  Operator u = Operator::identity(layout);
  for (const auto& f : local_factors(spec, layout)) {
    u = embed(f.matrix, std::span<const SpinRef>(f.targets), layout) * u;
  }
  return u;
}

void PulseSegment::validate() const {
  if (!(duration_s > 0) || !std::isfinite(duration_s)) throw InvalidInput("pulse duration must be positive");
  if (!(rabi_hz > 0) || !std::isfinite(rabi_hz)) throw InvalidInput("Rabi frequency must be positive");
  if (!(carrier_hz > 0) || !std::isfinite(carrier_hz)) throw InvalidInput("carrier must be positive");
  if (!std::isfinite(phase)) throw InvalidInput("pulse phase must be finite");
}

double PulseBlock::duration() const { return segments.empty() ? 0.0 : segments.front().duration_s; }

void PulseBlock::validate() const {
  if (segments.empty()) throw InvalidInput("pulse block has no segments");
  for (const auto& s : segments) {
    s.validate();
    if (std::abs(s.duration_s - segments.front().duration_s) > 1e-15 * segments.front().duration_s) {
      throw InvalidInput("simultaneous segments must share one duration");
    }
  }
}

double GateSequence::total_duration() const {
  double t = 0.0;
  for (const auto& step : steps) {
    if (const auto* b = std::get_if<PulseBlock>(&step)) t += b->duration();
  }
  return t;
}

void GateSequence::validate() const {
  if (steps.empty()) throw InvalidInput("gate sequence is empty");
  for (const auto& step : steps) {
    if (const auto* b = std::get_if<PulseBlock>(&step)) b->validate();
  }
}

void GateSequence::append(const GateSequence& other) {
  steps.insert(steps.end(), other.steps.begin(), other.steps.end());
}

Operator compose_ideal(const GateSequence& seq, const BasisLayout& layout) {
  seq.validate();
  Operator u = Operator::identity(layout);
  for (const auto& step : seq.steps) {
    const GateSpec* spec = std::get_if<GateSpec>(&step);
    if (!spec) {
      const auto& block = std::get<PulseBlock>(step);
      if (!block.intent) throw InvalidInput("pulse block without an ideal intent cannot be composed");
      spec = &*block.intent;
    }
    u = ideal_gate(*spec, layout) * u;
  }
  return u;
}

GateSequence swap_decomposition(SwapOrder order, int site, PhaseConvention convention,
                                bool passive) {
  GateSequence seq;
  seq.name = std::string("swap_") + std::string(to_string(order)) + "(" + std::to_string(site) + ")";
  const auto si = GateSpec::make(GateKind::cnot_si, {site}, convention);
  const auto is = GateSpec::make(GateKind::cnot_is, {site}, convention);
  const std::vector<GateSpec> pattern =
      order == SwapOrder::sis ? std::vector<GateSpec>{si, is, si} : std::vector<GateSpec>{is, si, is};
  for (const auto& g : pattern) {
    if (passive && g.kind == GateKind::cnot_is) continue;
    seq.steps.emplace_back(g);
  }
  return seq;
}

namespace {

std::vector<int> all_sites(int n) {
  std::vector<int> s(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) s[static_cast<std::size_t>(k)] = k;
  return s;
}

void append_swaps(GateSequence& seq, int i, int j, const ProtocolOptions& o) {
  if (o.mode == NuclearPulseMode::selective) {
    seq.append(swap_decomposition(o.order, i));
    seq.append(swap_decomposition(o.order, j));
    return;
  }
  const auto si_all = GateSpec::make(GateKind::cnot_si, all_sites(o.register_size));
  if (o.order == SwapOrder::sis) {
    for (int s : {i, j}) {
      seq.steps.emplace_back(si_all);
      seq.steps.emplace_back(GateSpec::make(GateKind::cnot_is, {s}));
      seq.steps.emplace_back(si_all);
    }
  } else {
    const auto is_pair = GateSpec::make(GateKind::cnot_is, {i, j});
    seq.steps.emplace_back(is_pair);
    seq.steps.emplace_back(si_all);
    seq.steps.emplace_back(is_pair);
  }
}

}  // namespace

GateSequence two_qubit_protocol(int i, int j, const ProtocolOptions& options) {
  if (std::abs(i - j) != 1) {
    throw InvalidInput("two-qubit protocol needs adjacent sites; use a bus transfer otherwise");
  }
  if (i < 0 || j < 0 || std::max(i, j) >= options.register_size) {
    throw InvalidInput("protocol sites lie outside the register");
  }
  GateSequence seq;
  seq.name = std::string(to_string(options.core)) + "(" + std::to_string(i) + "," +
             std::to_string(j) + ")";
  append_swaps(seq, i, j, options);
  const auto core_kind = options.core == CoreGate::cnot ? GateKind::cnot_ee : GateKind::cpf;
  seq.steps.emplace_back(GateSpec::make(core_kind, {i, j}));
  append_swaps(seq, i, j, options);
  return seq;
}

std::vector<std::size_t> qubit_subspace(const BasisLayout& layout) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < layout.dimension(); ++i) {
    bool keep = true;
    for (std::size_t s = 0; s < layout.size() && keep; ++s) {
      if (layout.part(s).ref.role == Role::electron) keep = std::abs(layout.m(i, s)) == 1.5;
    }
    if (keep) out.push_back(i);
  }
  return out;
}

Operator nuclear_core_gate(CoreGate core, int i, int j, const BasisLayout& layout) {
  const auto ni = layout.find({i, Role::nuclear});
  const auto nj = layout.find({j, Role::nuclear});
  if (!ni || !nj || i == j) throw InvalidInput("nuclear core gate needs two distinct nuclei of the layout");
  Matrix u = Matrix::Zero(static_cast<Eigen::Index>(layout.dimension()),
                          static_cast<Eigen::Index>(layout.dimension()));
  std::vector<double> m(layout.size());
  for (std::size_t k = 0; k < layout.dimension(); ++k) {
    for (std::size_t s = 0; s < layout.size(); ++s) m[s] = layout.m(k, s);
    const auto col = static_cast<Eigen::Index>(k);
    if (core == CoreGate::cpf) {
      u(col, col) = m[*ni] == 0.5 && m[*nj] == 0.5 ? -1.0 : 1.0;
    } else {
      if (m[*ni] == 0.5) m[*nj] = -m[*nj];
      u(static_cast<Eigen::Index>(layout.index_from_m(m)), col) = 1.0;
    }
  }
  return Operator(layout, std::move(u));
}

GateSequence unconditional_nuclear_rotation(const RegisterConfig& config, int site, double angle,
                                            double phase, double rabi_hz) {
  if (site < 0 || static_cast<std::size_t>(site) >= config.size()) {
    throw InvalidInput("site index out of range");
  }
  if (!(rabi_hz > 0)) throw InvalidInput("Rabi frequency must be positive");
  if (!std::isfinite(angle) || angle < 0) throw InvalidInput("rotation angle must be non-negative");
  GateSpec intent = GateSpec::make(GateKind::nuclear_rotation, {site});
  intent.angle = angle;
  intent.phase = phase;
  GateSequence seq;
  seq.name = "nuclear_rotation(" + std::to_string(site) + ")";
  if (angle == 0.0) {
    seq.steps.emplace_back(intent);
    return seq;
  }
  const ProductEnergyModel model(config);
  const auto s = static_cast<std::size_t>(site);
  PulseBlock block;
  block.intent = intent;
  for (double ms : {1.5, -1.5}) {
    const double nu = model.nuclear_transition(s, -0.5, 0.5, ms);
    PulseSegment seg;
    seg.target = {site, Role::nuclear};
    seg.carrier_hz = std::abs(nu) / kTwoPi;
    seg.rabi_hz = rabi_hz;
    seg.phase = phase;
    seg.duration_s = angle / (kTwoPi * rabi_hz);
    seg.frame = "nmr m_S=" + format_m(ms);
    block.segments.push_back(seg);
  }
  seq.steps.emplace_back(std::move(block));
  return seq;
}

nlohmann::json to_json(const GateSpec& spec) {
  nlohmann::json j;
  j["kind"] = std::string(to_string(spec.kind));
  j["sites"] = spec.sites;
  if (spec.control_m) j["control_m"] = *spec.control_m;
  if (spec.kind == GateKind::nuclear_rotation) {
    j["angle"] = spec.angle;
    j["phase"] = spec.phase;
  }
  if (spec.kind == GateKind::swap_si) j["order"] = std::string(to_string(spec.order));
  j["convention"] = std::string(to_string(spec.convention));
  return j;
}

nlohmann::json to_json(const PulseSegment& s) {
  nlohmann::json j;
  j["target"] = {{"site", s.target.site}, {"role", std::string(to_string(s.target.role))}};
  j["carrier_hz"] = s.carrier_hz;
  j["rabi_hz"] = s.rabi_hz;
  j["phase"] = s.phase;
  j["duration_s"] = s.duration_s;
  j["frame"] = s.frame;
  if (s.transition) j["transition"] = {s.transition->first, s.transition->second};
  return j;
}

nlohmann::json to_json(const GateSequence& seq) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& step : seq.steps) {
    if (const auto* g = std::get_if<GateSpec>(&step)) {
      steps.push_back({{"gate", to_json(*g)}});
    } else {
      const auto& b = std::get<PulseBlock>(step);
      nlohmann::json segs = nlohmann::json::array();
      for (const auto& s : b.segments) segs.push_back(to_json(s));
      nlohmann::json jb = {{"segments", segs}};
      if (b.intent) jb["intent"] = to_json(*b.intent);
      steps.push_back({{"pulse", jb}});
    }
  }
  return {{"name", seq.name}, {"total_duration_s", seq.total_duration()}, {"steps", steps}};
}

namespace {

Role role_from_string(std::string_view text) {
  if (text == "electron") return Role::electron;
  if (text == "nuclear") return Role::nuclear;
  if (text == "mobile") return Role::mobile;
  throw InvalidInput("unknown spin role '" + std::string(text) + "'");
}

}  // namespace

GateSpec gate_spec_from_json(const nlohmann::json& j) {
  try {
    GateSpec s;
    s.kind = gate_kind_from_string(j.at("kind").get<std::string>());
    s.sites = j.at("sites").get<std::vector<int>>();
    if (j.contains("control_m")) s.control_m = j.at("control_m").get<double>();
    s.angle = j.value("angle", kPi);
    s.phase = j.value("phase", 0.0);
    s.order = swap_order_from_string(j.value("order", std::string("sis")));
    s.convention = phase_convention_from_string(j.value("convention", std::string("logical")));
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("gate: ") + e.what());
  }
}

PulseSegment pulse_segment_from_json(const nlohmann::json& j) {
  try {
    PulseSegment s;
    s.target.site = j.at("target").at("site").get<int>();
    s.target.role = role_from_string(j.at("target").at("role").get<std::string>());
    s.carrier_hz = j.at("carrier_hz").get<double>();
    s.rabi_hz = j.at("rabi_hz").get<double>();
    s.phase = j.value("phase", 0.0);
    s.duration_s = j.at("duration_s").get<double>();
    s.frame = j.value("frame", std::string("rotating"));
    if (j.contains("transition")) {
      s.transition = {j.at("transition").at(0).get<std::string>(),
                      j.at("transition").at(1).get<std::string>()};
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("pulse segment: ") + e.what());
  }
}

GateSequence gate_sequence_from_json(const nlohmann::json& j) {
  try {
    GateSequence seq;
    seq.name = j.value("name", std::string());
    for (const auto& step : j.at("steps")) {
      if (step.contains("gate")) {
        seq.steps.emplace_back(gate_spec_from_json(step.at("gate")));
      } else if (step.contains("pulse")) {
        PulseBlock b;
        for (const auto& s : step.at("pulse").at("segments")) {
          b.segments.push_back(pulse_segment_from_json(s));
        }
        if (step.at("pulse").contains("intent")) {
          b.intent = gate_spec_from_json(step.at("pulse").at("intent"));
        }
        seq.steps.emplace_back(std::move(b));
      } else {
        throw InvalidInput("sequence step must be a gate or a pulse");
      }
    }
    seq.validate();
    return seq;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("sequence: ") + e.what());
  }
}

}  // namespace peapod
