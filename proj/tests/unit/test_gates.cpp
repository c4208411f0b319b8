#include <doctest.h>

#include <chrono>
#include <cmath>

#include "peapod/errors.hpp"
#include "peapod/gates.hpp"
#include "support.hpp"

using namespace peapod;

namespace {

const Constants& constants() { return builtin_defaults().constants; }
const Species& p31() { return builtin_defaults().species_named("P31"); }

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// Basis states with every electron in +-3/2: the qubit subspace.
std::vector<std::size_t> oracle_subspace(const BasisLayout& layout) {
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

std::size_t index_of(const BasisLayout& layout, std::initializer_list<double> ms) {
  std::vector<double> v(ms);
  return layout.index_from_m(v);
}

// Truth-table oracle: the SWAP exchanges the electron qubit (+3/2 / -3/2)
// with the nuclear qubit (+1/2 / -1/2).
Matrix swap_truth_table(const BasisLayout& one) {
  Matrix u = Matrix::Identity(8, 8);
  const double e[] = {1.5, -1.5};
  const double n[] = {0.5, -0.5};
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const auto from = static_cast<Eigen::Index>(index_of(one, {e[a], n[b]}));
      const auto to = static_cast<Eigen::Index>(index_of(one, {e[b], n[a]}));
      u.col(from).setZero();
      u(to, from) = 1.0;
    }
  }
  return u;
}

}  // namespace

TEST_CASE("ideal gate truth tables") {
  const auto one = BasisLayout::molecules(1);
  const auto si = ideal_gate(GateSpec::make(GateKind::cnot_si, {0}), one);
  CHECK(si.is_unitary());
  const auto a = index_of(one, {1.5, -0.5});
  const auto b = index_of(one, {1.5, 0.5});
  const auto c = index_of(one, {-1.5, -0.5});
  CHECK(std::abs(si.matrix(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a))) == 1.0);
  CHECK(std::abs(si.matrix(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c))) == 1.0);

  const auto is = ideal_gate(GateSpec::make(GateKind::cnot_is, {0}), one);
  const auto up32 = static_cast<Eigen::Index>(index_of(one, {1.5, 0.5}));
  const auto dn32 = static_cast<Eigen::Index>(index_of(one, {-1.5, 0.5}));
  const auto half = static_cast<Eigen::Index>(index_of(one, {0.5, 0.5}));
  const auto off = static_cast<Eigen::Index>(index_of(one, {1.5, -0.5}));
  CHECK(std::abs(is.matrix(dn32, up32)) == 1.0);
  CHECK(is.matrix(half, half) == cplx(1.0));  // +-1/2 spectators
  CHECK(is.matrix(off, off) == cplx(1.0));    // control not satisfied

  // P S_z P^dagger = -S_z.
  const Matrix p = inversion_matrix();
  const Matrix sz = spin_matrix(SpinValue::three_halves(), Axis::z);
  CHECK(max_abs(p * sz * p.adjoint() + sz) < 1e-15);

  const auto two = BasisLayout::molecules(2);
  const auto cpf = ideal_gate(GateSpec::make(GateKind::cpf, {0, 1}), two);
  for (std::size_t i = 0; i < two.dimension(); ++i) {
    const bool flip = two.m(i, 0) == 1.5 && two.m(i, 2) == 1.5;
    CHECK(cpf.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) ==
          cplx(flip ? -1.0 : 1.0));
  }
  CHECK_THROWS_AS(ideal_gate(GateSpec::make(GateKind::cpf, {0}), two), InvalidInput);
  CHECK_THROWS_AS(ideal_gate(GateSpec::make(GateKind::cnot_si, {2}), two), InvalidInput);
  auto bad = GateSpec::make(GateKind::cnot_si, {0});
  bad.control_m = 0.25;
  CHECK_THROWS_AS(ideal_gate(bad, one), InvalidInput);
}

TEST_CASE("gates are unitary and the involutions square to one") {
  const auto two = BasisLayout::molecules(2);
  const auto sub = oracle_subspace(two);
  for (auto conv : {PhaseConvention::logical, PhaseConvention::pulse}) {
    for (auto kind : {GateKind::inversion, GateKind::cnot_si, GateKind::cnot_is, GateKind::cpf,
                      GateKind::swap_si, GateKind::cnot_ee}) {
      const std::vector<int> sites =
          kind == GateKind::cpf || kind == GateKind::cnot_ee ? std::vector<int>{0, 1}
                                                              : std::vector<int>{1};
      const auto u = ideal_gate(GateSpec::make(kind, sites, conv), two);
      CAPTURE(to_string(kind));
      CHECK(u.is_unitary());
      if (conv == PhaseConvention::logical || kind == GateKind::cpf || kind == GateKind::swap_si) {
        CHECK(unitary_fidelity(Operator::identity(two), u * u, sub) > 1.0 - 1e-12);
      }
    }
  }
  // P^2 = -1 on the electron: identity up to a global phase.
  const auto p = ideal_gate(GateSpec::make(GateKind::inversion, {0}), two);
  CHECK(unitary_fidelity(Operator::identity(two), p * p) > 1.0 - 1e-12);
}

TEST_CASE("both SWAP decompositions reproduce the SWAP truth table") {
  const auto one = BasisLayout::molecules(1);
  const auto sub = oracle_subspace(one);
  const Operator truth(one, swap_truth_table(one));
  for (auto conv : {PhaseConvention::logical}) {
    const auto sis = compose_ideal(swap_decomposition(SwapOrder::sis, 0, conv), one);
    const auto isi = compose_ideal(swap_decomposition(SwapOrder::isi, 0, conv), one);
    CHECK(std::abs(unitary_fidelity(sis, isi, sub) - 1.0) <= 1e-10);
    CHECK(std::abs(unitary_fidelity(truth, sis, sub) - 1.0) <= 1e-10);
    CHECK(std::abs(unitary_fidelity(truth, isi, sub) - 1.0) <= 1e-10);
    // Involution.
    CHECK(std::abs(unitary_fidelity(Operator::identity(one), sis * sis, sub) - 1.0) <= 1e-10);
    // The swap_si gate kind agrees with its decomposition.
    auto spec = GateSpec::make(GateKind::swap_si, {0}, conv);
    spec.order = SwapOrder::isi;
    CHECK(std::abs(unitary_fidelity(ideal_gate(spec, one), isi) - 1.0) <= 1e-12);
  }
  // The exchanged pair named in the decomposition.
  const auto sis = compose_ideal(swap_decomposition(SwapOrder::sis, 0), one);
  const auto from = static_cast<Eigen::Index>(index_of(one, {1.5, -0.5}));
  const auto to = static_cast<Eigen::Index>(index_of(one, {-1.5, 0.5}));
  CHECK(std::abs(std::abs(sis.matrix(to, from)) - 1.0) < 1e-15);
}

TEST_CASE("passive molecule: SIS gives identity, ISI gives CNOT_SI") {
  const auto one = BasisLayout::molecules(1);
  const auto sub = oracle_subspace(one);
  const auto sis = compose_ideal(swap_decomposition(SwapOrder::sis, 0, PhaseConvention::logical, true), one);
  const auto isi = compose_ideal(swap_decomposition(SwapOrder::isi, 0, PhaseConvention::logical, true), one);
  const auto cnot = ideal_gate(GateSpec::make(GateKind::cnot_si, {0}), one);
  CHECK(std::abs(unitary_fidelity(Operator::identity(one), sis, sub) - 1.0) <= 1e-10);
  CHECK(std::abs(unitary_fidelity(cnot, isi, sub) - 1.0) <= 1e-10);
  CHECK(swap_decomposition(SwapOrder::isi, 0, PhaseConvention::logical, true).steps.size() == 1);
}

TEST_CASE("two-qubit protocol acts on the nuclei and restores the electrons") {
  const auto t0 = std::chrono::steady_clock::now();
  const auto two = BasisLayout::molecules(2);
  const auto sub = oracle_subspace(two);
  for (auto core : {CoreGate::cpf, CoreGate::cnot}) {
    for (auto order : {SwapOrder::sis, SwapOrder::isi}) {
      for (auto mode : {NuclearPulseMode::selective, NuclearPulseMode::hard}) {
        ProtocolOptions o;
        o.core = core;
        o.order = order;
        o.mode = mode;
        const auto seq = two_qubit_protocol(0, 1, o);
        CHECK(seq.steps.size() >= 5);
        const auto net = compose_ideal(seq, two);
        // Oracle: the core gate with the nuclei in the role of the electrons.
        Matrix expect = Matrix::Identity(64, 64);
        for (auto i : sub) {
          const double n0 = two.m(i, 1), n1 = two.m(i, 3);
          const auto ii = static_cast<Eigen::Index>(i);
          if (core == CoreGate::cpf) {
            if (n0 == 0.5 && n1 == 0.5) expect(ii, ii) = -1.0;
          } else if (n0 == 0.5) {
            const auto j = static_cast<Eigen::Index>(
                index_of(two, {two.m(i, 0), n0, two.m(i, 2), -n1}));
            expect(ii, ii) = 0.0;
            expect(j, ii) = 1.0;
          }
        }
        CAPTURE(to_string(core));
        CAPTURE(to_string(order));
        CAPTURE(to_string(mode));
        CHECK(unitary_fidelity(Operator(two, expect), net, sub) >= 1.0 - 1e-9);
        // Electrons start and end at +3/2 for every nuclear input.
        for (double n0 : {0.5, -0.5}) {
          for (double n1 : {0.5, -0.5}) {
            const auto in = static_cast<Eigen::Index>(index_of(two, {1.5, n0, 1.5, n1}));
            double p = 0.0;
            for (Eigen::Index r = 0; r < 64; ++r) {
              if (two.m(static_cast<std::size_t>(r), 0) == 1.5 &&
                  two.m(static_cast<std::size_t>(r), 2) == 1.5) {
                p += std::norm(net.matrix(r, in));
              }
            }
            CHECK(std::abs(p - 1.0) <= 1e-12);
          }
        }
      }
    }
  }
  CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() < 10.0);
  CHECK_THROWS_AS(two_qubit_protocol(0, 2, {}), InvalidInput);
  CHECK_THROWS_AS(two_qubit_protocol(1, 2, {}), InvalidInput);
}

TEST_CASE("hard pulses leave a passive third molecule invariant") {
  const auto three = BasisLayout::molecules(3);
  const auto sub = oracle_subspace(three);
  for (auto order : {SwapOrder::sis, SwapOrder::isi}) {
    ProtocolOptions o;
    o.core = CoreGate::cpf;
    o.order = order;
    o.mode = NuclearPulseMode::hard;
    o.register_size = 3;
    const auto net = compose_ideal(two_qubit_protocol(0, 1, o), three);
    // Passive populations: molecule 2's electron and nucleus unchanged.
    for (auto i : sub) {
      const auto col = net.matrix.col(static_cast<Eigen::Index>(i));
      double stay = 0.0;
      for (Eigen::Index r = 0; r < col.size(); ++r) {
        const auto rr = static_cast<std::size_t>(r);
        if (three.m(rr, 4) == three.m(i, 4) && three.m(rr, 5) == three.m(i, 5)) stay += std::norm(col[r]);
      }
      CHECK(std::abs(stay - 1.0) <= 1e-12);
    }
    // And the active pair still sees the CPF on its nuclei.
    Matrix expect = Matrix::Identity(512, 512);
    for (auto i : sub) {
      if (three.m(i, 1) == 0.5 && three.m(i, 3) == 0.5) {
        expect(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = -1.0;
      }
    }
    CHECK(unitary_fidelity(Operator(three, expect), net, sub) >= 1.0 - 1e-9);
  }
}

TEST_CASE("unconditional nuclear rotation") {
  const auto cfg = RegisterConfig::uniform(constants(), p31(), 1.0, 0.0, 2.91e-9, 1);
  const auto seq = unconditional_nuclear_rotation(cfg, 0, kPi, 0.0, 50e3);
  REQUIRE(seq.steps.size() == 1);
  const auto& block = std::get<PulseBlock>(seq.steps[0]);
  REQUIRE(block.segments.size() == 2);
  const double a = p31().hyperfine.hz();
  const double wi = p31().gamma_hz_per_tesla;
  CHECK(std::abs(block.segments[0].carrier_hz - (1.5 * a - wi)) <= 1e-6);
  CHECK(std::abs(block.segments[1].carrier_hz - (1.5 * a + wi)) <= 1e-6);
  CHECK(std::abs(block.segments[0].carrier_hz - 190.4e6) < 0.05e6);
  CHECK(std::abs(block.segments[1].carrier_hz - 224.8e6) < 0.05e6);
  CHECK(std::abs(block.duration() - 1.0 / (2.0 * 50e3)) < 1e-18);

  const auto one = BasisLayout::molecules(1);
  const auto ideal = compose_ideal(seq, one);
  for (double ms : {1.5, -1.5}) {
    const auto up = static_cast<Eigen::Index>(index_of(one, {ms, 0.5}));
    const auto dn = static_cast<Eigen::Index>(index_of(one, {ms, -0.5}));
    CHECK(std::abs(std::abs(ideal.matrix(dn, up)) - 1.0) < 1e-12);
  }
  const auto zero = unconditional_nuclear_rotation(cfg, 0, 0.0, 0.0, 50e3);
  CHECK(max_abs(compose_ideal(zero, one).matrix - Matrix::Identity(8, 8)) < 1e-15);
  CHECK_THROWS_AS(unconditional_nuclear_rotation(cfg, 1, kPi, 0.0, 50e3), InvalidInput);
}

TEST_CASE("sequence JSON round trip") {
  const auto cfg = RegisterConfig::uniform(constants(), p31(), 1.0, 4e5, 2.91e-9, 2);
  auto seq = two_qubit_protocol(0, 1, {});
  seq.append(unconditional_nuclear_rotation(cfg, 1, kPi / 2, 0.3, 20e3));
  const auto j = to_json(seq);
  const auto back = gate_sequence_from_json(j);
  CHECK(to_json(back).dump() == j.dump());
  CHECK(back.steps.size() == seq.steps.size());
  CHECK(std::abs(back.total_duration() - seq.total_duration()) < 1e-18);
  const auto two = BasisLayout::molecules(2);
  CHECK(unitary_fidelity(compose_ideal(seq, two), compose_ideal(back, two)) > 1.0 - 1e-12);

  CHECK_THROWS_AS(gate_sequence_from_json(nlohmann::json::parse(R"({"steps": [{"gate": {"kind": "teleport", "sites": [0]}}]})")),
                  InvalidInput);
  CHECK_THROWS_AS(gate_sequence_from_json(nlohmann::json::parse(R"({"steps": []})")), InvalidInput);
  PulseSegment s;
  s.carrier_hz = 1e9;
  s.rabi_hz = 0.0;
  s.duration_s = 1e-6;
  CHECK_THROWS_AS(s.validate(), InvalidInput);
}

TEST_CASE("protocol target helper") {
  const auto two = BasisLayout::molecules(2);
  CHECK(qubit_subspace(two) == oracle_subspace(two));
  const auto sub = oracle_subspace(two);
  for (auto core : {CoreGate::cpf, CoreGate::cnot}) {
    ProtocolOptions o;
    o.core = core;
    const auto target = nuclear_core_gate(core, 0, 1, two);
    CHECK(target.is_unitary());
    CHECK(unitary_fidelity(target, compose_ideal(two_qubit_protocol(0, 1, o), two), sub) >= 1.0 - 1e-9);
  }
  // Control on the second molecule.
  const auto cnot10 = nuclear_core_gate(CoreGate::cnot, 1, 0, two);
  const auto in = static_cast<Eigen::Index>(index_of(two, {1.5, 0.5, 1.5, 0.5}));
  const auto out = static_cast<Eigen::Index>(index_of(two, {1.5, -0.5, 1.5, 0.5}));
  CHECK(cnot10.matrix(out, in) == cplx(1.0));
  CHECK_THROWS_AS(nuclear_core_gate(CoreGate::cpf, 0, 0, two), InvalidInput);
  CHECK_THROWS_AS(nuclear_core_gate(CoreGate::cpf, 0, 2, two), InvalidInput);
}
