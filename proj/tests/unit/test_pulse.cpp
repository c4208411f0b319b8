#include <doctest.h>

#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

#include "peapod/errors.hpp"
#include "peapod/pulse.hpp"
#include "support.hpp"

using namespace peapod;

namespace {

const Constants& constants() { return builtin_defaults().constants; }
const Species& p31() { return builtin_defaults().species_named("P31"); }

std::size_t index_of(const BasisLayout& layout, std::initializer_list<double> ms) {
  std::vector<double> v(ms);
  return layout.index_from_m(v);
}

GateSequence single_tone(SpinRef target, double carrier_hz, double rabi_hz, double duration_s,
                         double phase = 0.0) {
  PulseSegment s;
  s.target = target;
  s.carrier_hz = carrier_hz;
  s.rabi_hz = rabi_hz;
  s.duration_s = duration_s;
  s.phase = phase;
  GateSequence seq;
  seq.steps.push_back(PulseBlock{{s}, std::nullopt});
  return seq;
}

// Nuclear line with the electron at +3/2, in Hz.
double nuclear_line_up() { return 1.5 * p31().hyperfine.hz() - p31().gamma_hz_per_tesla; }

std::vector<std::size_t> electron_qubit_subspace(const BasisLayout& layout) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < layout.dimension(); ++i) {
    bool keep = true;
    for (std::size_t s = 0; s < layout.size(); ++s) {
      if (layout.part(s).ref.role == Role::electron) keep = keep && std::abs(layout.m(i, s)) == 1.5;
    }
    if (keep) out.push_back(i);
  }
  return out;
}

}  // namespace

TEST_CASE("closed-form Rabi helpers") {
  const auto r = Frequency::from_hz(1e6);
  CHECK(rabi_max_transfer(r, Frequency::from_hz(0)) == 1.0);
  CHECK(std::abs(rabi_max_transfer(r, Frequency::from_hz(10e6)) - 1.0 / 101.0) < 1e-15);
  CHECK(std::abs(rabi_max_transfer(r, Frequency::from_hz(10e6)) - 0.0099) < 1e-4);
  CHECK(std::abs(rabi_transfer(r, Frequency::from_hz(0), 0.5e-6) - 1.0) < 1e-15);
  CHECK(rabi_transfer(r, Frequency::from_hz(0), 0.0) == 0.0);
}

TEST_CASE("simulated two-level nuclear drive matches the Rabi formula") {
  const auto h = build_single(constants(), 1.0, p31());
  const auto& layout = h.layout();
  const auto from = index_of(layout, {1.5, -0.5});
  const auto to = static_cast<Eigen::Index>(index_of(layout, {1.5, 0.5}));
  const SpinRef nucleus{0, Role::nuclear};
  const double rabi = 50e3;

  // Resonant pi pulse.
  {
    const auto out = simulate_sequence(h, single_tone(nucleus, nuclear_line_up(), rabi, 1.0 / (2 * rabi)),
                                       StateVector::basis(layout, from));
    CHECK(std::abs(std::norm(out.amplitudes[to]) - 1.0) < 1e-10);
    CHECK(out.is_normalized());
  }
  // Detuned: the maximum transfer and random durations.
  for (double ratio : {0.5, 1.0, 3.0, 10.0}) {
    const double delta = ratio * rabi;
    const double t_peak = 1.0 / (2.0 * std::hypot(rabi, delta));
    const auto out = simulate_sequence(h, single_tone(nucleus, nuclear_line_up() + delta, rabi, t_peak),
                                       StateVector::basis(layout, from));
    CAPTURE(ratio);
    CHECK(std::abs(std::norm(out.amplitudes[to]) -
                   rabi_max_transfer(Frequency::from_hz(rabi), Frequency::from_hz(delta))) < 1e-9);
  }
  peapod::testing::Gen gen(41);
  for (int k = 0; k < 12; ++k) {
    const double delta = gen.uniform(-300e3, 300e3);
    const double t = gen.uniform(1e-7, 60e-6);
    const auto out = simulate_sequence(h, single_tone(nucleus, nuclear_line_up() + delta, rabi, t),
                                       StateVector::basis(layout, from));
    CAPTURE(delta);
    CAPTURE(t);
    CHECK(std::abs(std::norm(out.amplitudes[to]) -
                   rabi_transfer(Frequency::from_hz(rabi), Frequency::from_hz(delta), t)) < 1e-9);
  }
}

TEST_CASE("selectivity report") {
  StickSpectrum catalog;
  for (double f : {0.0, 10e6, -25e6}) {
    TransitionLine line;
    line.frequency_hz = 1e9 + f;
    catalog.lines.push_back(line);
  }
  PulseSegment s;
  s.carrier_hz = 1e9;
  s.rabi_hz = 1e6;
  s.duration_s = 1e-6;
  const auto report = selectivity_report(s, catalog);
  REQUIRE(report.entries.size() == 3);
  CHECK(report.entries[0].addressed);
  CHECK(report.entries[0].leakage == 1.0);
  CHECK(!report.entries[1].addressed);
  CHECK(std::abs(report.entries[1].leakage - 1.0 / 101.0) < 1e-15);
  CHECK(std::abs(report.entries[2].leakage - 1.0 / 626.0) < 1e-15);
  REQUIRE(report.min_margin_hz);
  CHECK(*report.min_margin_hz == doctest::Approx(10e6).epsilon(1e-12));
  CHECK(report.worst_leakage == report.entries[1].leakage);
}

TEST_CASE("electron CNOT pulse fidelity against the Rabi-to-detuning ratio") {
  const auto cfg = RegisterConfig::uniform(constants(), p31(), 1.0, 4e5, 2.91e-9, 2);
  const double d = coupling(cfg, 0, 1).hz();

  const auto probe = pulse_cnot_check(cfg, 0, 1, d / 10);
  CHECK(probe.fidelity >= 0.99);
  CHECK(std::abs(probe.wrong_branch_detuning_hz - 3.0 * d) < 1e-6 * d);
  CHECK(std::abs(probe.duration_s - 5.0 / d) < 1e-15);
  ProductEnergyModel model(cfg);
  const std::vector<double> up{1.5, 1.5};
  const double line = std::abs(model.electron_transition(1, 0.5, 1.5, 0.5, up)) / kTwoPi;
  CHECK(std::abs(probe.line_hz - line) < 1.0);

  // The three-point sweep.
  const double f_lo = probe.fidelity;
  const double f_mid = pulse_cnot_check(cfg, 0, 1, d).fidelity;
  const double f_hi = pulse_cnot_check(cfg, 0, 1, 10 * d).fidelity;
  CHECK(f_lo > f_mid);
  CHECK(f_mid > f_hi);

  // Three decades below Omega_R = D at half-decade steps.
  double previous = 1.0 + 1e-12;
  for (int k = 0; k <= 6; ++k) {
    const double rabi = d * std::pow(10.0, -3.0 + 0.5 * k);
    const double f = pulse_cnot_check(cfg, 0, 1, rabi).fidelity;
    CAPTURE(rabi / d);
    CHECK(f <= previous);
    previous = f;
  }
  CHECK(pulse_cnot_check(cfg, 0, 1, d / 1000).fidelity > 1.0 - 1e-6);

  // Reversed roles.
  CHECK(pulse_cnot_check(cfg, 1, 0, d / 10).fidelity >= 0.99);
  CHECK_THROWS_AS(electron_cnot_pulse(cfg, 0, 0, d), InvalidInput);
  CHECK_THROWS_AS(electron_cnot_pulse(cfg, 0, 1, -1.0), InvalidInput);
}

TEST_CASE("dual-tone nuclear rotation agrees with its ideal gate") {
  const auto cfg = RegisterConfig::uniform(constants(), p31(), 1.0, 0.0, 2.91e-9, 1);
  const auto h = build_chain(cfg);
  const auto sub = electron_qubit_subspace(h.layout());
  for (double phase : {0.0, kPi / 2, 1.1}) {
    for (double angle : {kPi, kPi / 2}) {
      const auto seq = unconditional_nuclear_rotation(cfg, 0, angle, phase, 50e3);
      const auto sim = simulate_propagator(h, seq);
      const auto ideal = compose_ideal(seq, h.layout());
      CAPTURE(phase);
      CAPTURE(angle);
      CHECK(sim.is_unitary());
      CHECK(unitary_fidelity(ideal, sim, sub) > 1.0 - 1e-4);
    }
  }
}

TEST_CASE("Magnus stepping converges") {
  const auto cfg = RegisterConfig::uniform(constants(), p31(), 1.0, 0.0, 2.91e-9, 1);
  const auto h = build_chain(cfg);
  const auto seq = unconditional_nuclear_rotation(cfg, 0, kPi, 0.4, 200e3);
  SimulationOptions coarse;
  SimulationOptions fine;
  fine.magnus_phase_step = coarse.magnus_phase_step / 4;
  const auto a = simulate_propagator(h, seq, coarse);
  const auto b = simulate_propagator(h, seq, fine);
  CHECK((a.matrix - b.matrix).cwiseAbs().maxCoeff() < 1e-6);

  // Two tones at one carrier act like one tone of the summed Rabi frequency,
  // which takes the exact single-tone path.
  const SpinRef electron{0, Role::electron};
  const auto lines = single_molecule_lines(constants(), 1.0, p31());
  double carrier = 0;
  for (const auto& l : lines.lines) {
    if (l.branch == Branch::esr) carrier = l.frequency_hz;
  }
  REQUIRE(carrier > 0);
  const double t = 0.7e-6;
  PulseSegment s1;
  s1.target = electron;
  s1.carrier_hz = carrier;
  s1.rabi_hz = 0.3e6;
  s1.duration_s = t;
  s1.phase = 0.25;
  PulseSegment s2 = s1;
  s2.rabi_hz = 0.5e6;
  GateSequence pair;
  pair.steps.push_back(PulseBlock{{s1, s2}, std::nullopt});
  const auto joint = simulate_propagator(h, pair);
  const auto single = simulate_propagator(h, single_tone(electron, carrier, 0.8e6, t, 0.25));
  CHECK((joint.matrix - single.matrix).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("carrier resolution and size limits") {
  const auto h = build_single(constants(), 1.0, p31());
  const SpinRef nucleus{0, Role::nuclear};
  CHECK_THROWS_AS(simulate_propagator(h, single_tone(nucleus, nuclear_line_up() + 2e6, 1e3, 1e-6)),
                  InvalidInput);
  SimulationOptions wide;
  wide.carrier_window_hz = 3e6;
  const auto tones = resolve_block(h, std::get<PulseBlock>(single_tone(nucleus, nuclear_line_up() + 2e6, 1e3, 1e-6).steps[0]), wide);
  REQUIRE(tones.size() == 1);
  CHECK(std::abs(tones[0].line_hz - nuclear_line_up()) < 1.0);

  const auto cfg4 = RegisterConfig::uniform(constants(), p31(), 1.0, 4e5, 2.91e-9, 4);
  const auto h4 = build_chain(cfg4);
  const double d = coupling(cfg4, 0, 1).hz();
  CHECK_THROWS_AS(simulate_propagator(h4, electron_cnot_pulse(cfg4, 0, 1, d / 10)), DimensionLimit);
  // A state vector of dimension 4096 is within limits.
  const auto state = simulate_sequence(h4, electron_cnot_pulse(cfg4, 0, 1, d / 10),
                                       StateVector::basis(h4.layout(), 0));
  CHECK(state.is_normalized(1e-10));
}

TEST_CASE("spectator molecules leave a nuclear drive unchanged") {
  // Nucleus 0 only sees its own electron, so on a three-molecule chain the
  // propagator factorizes into the single-molecule one times the identity.
  const auto one_cfg = RegisterConfig::uniform(constants(), p31(), 1.0, 4e5, 2.91e-9, 1);
  const auto three_cfg = RegisterConfig::uniform(constants(), p31(), 1.0, 4e5, 2.91e-9, 3);
  const auto seq = unconditional_nuclear_rotation(three_cfg, 0, kPi / 2, 0.7, 100e3);
  const auto one = simulate_propagator(build_chain(one_cfg), seq);
  const auto three = simulate_propagator(build_chain(three_cfg), seq);
  const Matrix expect = Eigen::kroneckerProduct(one.matrix, Matrix::Identity(64, 64)).eval();
  CHECK((three.matrix - expect).cwiseAbs().maxCoeff() < 1e-7);
}
