#include "peapod/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "peapod/errors.hpp"

namespace peapod {

namespace {

const cplx kI(0.0, 1.0);

// exp(-i K) for Hermitian K; closed form for 2x2.
Matrix expm_i(const Matrix& k) {
  if (k.rows() == 2) {
    const double a = 0.5 * (k(0, 0).real() + k(1, 1).real());
    const double bz = 0.5 * (k(0, 0).real() - k(1, 1).real());
    const cplx off = k(0, 1);  // bx - i by
    const double norm = std::sqrt(bz * bz + std::norm(off));
    const cplx phase = std::polar(1.0, -a);
    const double c = std::cos(norm);
    const double s = norm > 0 ? std::sin(norm) / norm : 1.0;
    Matrix u(2, 2);
    u(0, 0) = phase * (c - kI * s * bz);
    u(1, 1) = phase * (c + kI * s * bz);
    u(0, 1) = phase * (-kI * s * off);
    u(1, 0) = phase * (-kI * s * std::conj(off));
    return u;
  }
  return propagator(k, 1.0);
}

struct DriveTerm {
  Eigen::Index a;  // larger m of the driven spin
  Eigen::Index b;
  cplx amplitude;  // coefficient of |a><b|
  double omega;    // carrier, rad/s
};

class Evolver {
 public:
  Evolver(const ChainHamiltonian& h0, const SimulationOptions& options)
      : h0_(h0), layout_(h0.layout()), options_(options), energies_(h0.diagonal()) {}

  std::vector<ResolvedTone> resolve(const PulseBlock& block) {
    block.validate();
    std::vector<ResolvedTone> tones;
    for (const auto& seg : block.segments) {
      const auto slot = layout_.slot(seg.target);
      const auto& lines = lines_of(slot);
      double best = std::numeric_limits<double>::infinity();
      double nu = 0.0;
      for (double l : lines) {
        const double miss = std::abs(std::abs(l) / kTwoPi - seg.carrier_hz);
        if (miss < best) {
          best = miss;
          nu = l;
        }
      }
      if (!(best <= options_.carrier_window_hz)) {
        throw InvalidInput("carrier " + std::to_string(seg.carrier_hz) + " Hz matches no " +
                           std::string(to_string(seg.target.role)) + " transition of site " +
                           std::to_string(seg.target.site) + " within the window");
      }
      const double omega = (nu < 0 ? -1.0 : 1.0) * kTwoPi * seg.carrier_hz;
      const double line_hz = std::abs(nu) / kTwoPi;
      const auto add = [&](SpinRef ref) {
        tones.push_back({ref, omega, kTwoPi * seg.rabi_hz, seg.phase, line_hz});
      };
      if (options_.scope == DriveScope::addressed_spin) {
        add(seg.target);
      } else {
        for (const auto& part : layout_.parts()) {
          if (part.ref.role == seg.target.role && part.spin == layout_.part(slot).spin) add(part.ref);
        }
      }
    }
    return tones;
  }

  void apply_gate(const GateSpec& gate, Matrix& psi) {
    for (const auto& f : local_factors(gate, layout_)) {
      apply_local(f.matrix, std::span<const SpinRef>(f.targets), layout_, psi);
    }
  }

  void apply_block(const PulseBlock& block, double t_start, Matrix& psi) {
    const auto tones = resolve(block);
    std::map<std::size_t, std::vector<ResolvedTone>> by_slot;
    for (const auto& t : tones) by_slot[layout_.slot(t.spin)].push_back(t);

    // Driven spins joined by a coupling must be propagated together.
    std::vector<std::size_t> driven;
    for (const auto& [slot, _] : by_slot) driven.push_back(slot);
    std::vector<std::size_t> parent(driven.size());
    std::iota(parent.begin(), parent.end(), 0);
    const auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    const auto pos = [&](std::size_t slot) -> std::optional<std::size_t> {
      auto it = std::find(driven.begin(), driven.end(), slot);
      if (it == driven.end()) return std::nullopt;
      return static_cast<std::size_t>(it - driven.begin());
    };
    for (const auto& p : h0_.pair_terms()) {
      if (p.coefficient == 0.0) continue;
      const auto pa = pos(p.a);
      const auto pb = pos(p.b);
      if (pa && pb) parent[find(*pa)] = find(*pb);
    }
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t k = 0; k < driven.size(); ++k) groups[find(k)].push_back(driven[k]);

    const double duration = block.duration();
    for (const auto& [_, slots] : groups) propagate_group(slots, by_slot, t_start, duration, psi);
  }

 private:
  const std::vector<double>& lines_of(std::size_t slot) {
    auto it = line_cache_.find(slot);
    if (it != line_cache_.end()) return it->second;
    std::vector<double> lines;
    const auto stride = layout_.stride(slot);
    for (std::size_t i = 0; i < layout_.dimension(); ++i) {
      if (layout_.digit(i, slot) == 0) continue;
      const double nu = energies_[static_cast<Eigen::Index>(i - stride)] -
                        energies_[static_cast<Eigen::Index>(i)];
      const bool known = std::any_of(lines.begin(), lines.end(), [&](double l) {
        return std::abs(l - nu) <= kTwoPi * tol::merge_hz;
      });
      if (!known) lines.push_back(nu);
    }
    return line_cache_.emplace(slot, std::move(lines)).first->second;
  }

  void propagate_group(const std::vector<std::size_t>& slots,
                       const std::map<std::size_t, std::vector<ResolvedTone>>& by_slot,
                       double t_start, double duration, Matrix& psi) {
    const std::size_t g = slots.size();
    std::vector<std::size_t> local_stride(g, 1);
    std::size_t local_dim = 1;
    for (std::size_t k = g; k-- > 0;) {
      local_stride[k] = local_dim;
      local_dim *= static_cast<std::size_t>(layout_.part(slots[k]).spin.dim());
    }
    const auto ld = static_cast<Eigen::Index>(local_dim);
    const auto digit_of = [&](std::size_t local, std::size_t k) {
      return static_cast<int>((local / local_stride[k]) %
                              static_cast<std::size_t>(layout_.part(slots[k]).spin.dim()));
    };

    bool time_independent = true;
    std::vector<double> frame(g, 0.0);
    std::vector<DriveTerm> terms;
    for (std::size_t k = 0; k < g; ++k) {
      const auto& tones = by_slot.at(slots[k]);
      if (tones.size() == 1) {
        frame[k] = tones.front().omega;
      } else {
        time_independent = false;
      }
      const Matrix splus = spin_matrix(layout_.part(slots[k]).spin, Axis::plus);
      for (std::size_t b = 0; b < local_dim; ++b) {
        const int d = digit_of(b, k);
        if (d == 0) continue;
        const std::size_t a = b - local_stride[k];
        for (const auto& t : tones) {
          terms.push_back({static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b),
                           0.5 * t.rabi * std::polar(1.0, -t.phase) * splus(d - 1, d), t.omega});
        }
      }
    }

    std::vector<double> local_m(local_dim * g);
    for (std::size_t l = 0; l < local_dim; ++l) {
      for (std::size_t k = 0; k < g; ++k) {
        local_m[l * g + k] = layout_.part(slots[k]).spin.m(digit_of(l, k));
      }
    }

    // Blocks depend on the local energies only through their differences.
    // Spectator configurations with equal differences (to within a phase of
    // 1e-9 over the block) share one propagator.
    const double resolution = 1e-9 / duration;
    std::map<std::vector<long long>, Matrix> cache;
    std::vector<long long> key(local_dim);

    std::vector<std::size_t> members(local_dim);
    Eigen::VectorXd e(ld);
    Matrix gathered(ld, psi.cols());
    for (std::size_t base = 0; base < layout_.dimension(); ++base) {
      bool is_base = true;
      for (auto s : slots) is_base = is_base && layout_.digit(base, s) == 0;
      if (!is_base) continue;
      for (std::size_t l = 0; l < local_dim; ++l) {
        std::size_t idx = base;
        for (std::size_t k = 0; k < g; ++k) {
          idx += static_cast<std::size_t>(digit_of(l, k)) * layout_.stride(slots[k]);
        }
        members[l] = idx;
        e[static_cast<Eigen::Index>(l)] = energies_[static_cast<Eigen::Index>(idx)];
      }
      for (std::size_t l = 0; l < local_dim; ++l) {
        key[l] = std::llround((e[static_cast<Eigen::Index>(l)] - e[0]) / resolution);
      }
      auto hit = cache.find(key);
      if (hit == cache.end()) {
        hit = cache.emplace(key, time_independent ? exact_block(e, frame, local_m, terms, t_start, duration)
                                                  : magnus_block(e, terms, t_start, duration))
                  .first;
      }
      const Matrix& u = hit->second;
      for (std::size_t l = 0; l < local_dim; ++l) {
        gathered.row(static_cast<Eigen::Index>(l)) = psi.row(static_cast<Eigen::Index>(members[l]));
      }
      const Matrix out = u * gathered;
      for (std::size_t l = 0; l < local_dim; ++l) {
        psi.row(static_cast<Eigen::Index>(members[l])) = out.row(static_cast<Eigen::Index>(l));
      }
    }
  }

  // e^{i Hd t_e} e^{-i (Hd + V) T} e^{-i Hd t_s} with Hd = H0 - sum omega S_z.
  static Matrix exact_block(const Eigen::VectorXd& e, const std::vector<double>& frame,
                            const std::vector<double>& local_m, const std::vector<DriveTerm>& terms,
                            double t_start, double duration) {
    const auto ld = e.size();
    const std::size_t g = frame.size();
    Eigen::VectorXd hd(ld);
    for (Eigen::Index l = 0; l < ld; ++l) {
      double v = e[l];
      for (std::size_t k = 0; k < g; ++k) v -= frame[k] * local_m[static_cast<std::size_t>(l) * g + k];
      hd[l] = v;
    }
    hd.array() -= hd.mean();
    Matrix k = Matrix::Zero(ld, ld);
    for (Eigen::Index l = 0; l < ld; ++l) k(l, l) = hd[l];
    for (const auto& t : terms) {
      k(t.a, t.b) += t.amplitude;
      k(t.b, t.a) += std::conj(t.amplitude);
    }
    Matrix u = duration * k;
    u = expm_i(u);
    const double t_end = t_start + duration;
    for (Eigen::Index r = 0; r < ld; ++r) {
      for (Eigen::Index c = 0; c < ld; ++c) {
        u(r, c) *= std::polar(1.0, hd[r] * t_end - hd[c] * t_start);
      }
    }
    return u;
  }

  // Fourth-order Magnus integration of the H0 interaction-frame drive.
  Matrix magnus_block(const Eigen::VectorXd& e, const std::vector<DriveTerm>& terms, double t_start,
                      double duration) const {
    const auto ld = e.size();
    std::vector<double> offsets(terms.size());
    double max_offset = 0.0, max_rabi = 0.0;
    for (std::size_t n = 0; n < terms.size(); ++n) {
      offsets[n] = e[terms[n].a] - e[terms[n].b] - terms[n].omega;
      max_offset = std::max(max_offset, std::abs(offsets[n]));
      max_rabi = std::max(max_rabi, std::abs(terms[n].amplitude));
    }
    const double steps_phase = max_offset * duration / options_.magnus_phase_step;
    const double steps_rabi = max_rabi * duration / 0.02;
    const auto steps = static_cast<long>(std::ceil(std::max({steps_phase, steps_rabi, 16.0})));
    const double h = duration / static_cast<double>(steps);
    const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
    const double c2 = 0.5 + std::sqrt(3.0) / 6.0;
    const auto h_at = [&](double t) {
      Matrix m = Matrix::Zero(ld, ld);
      for (std::size_t n = 0; n < terms.size(); ++n) {
        const cplx v = terms[n].amplitude * std::polar(1.0, offsets[n] * t);
        m(terms[n].a, terms[n].b) += v;
        m(terms[n].b, terms[n].a) += std::conj(v);
      }
      return m;
    };
    Matrix u = Matrix::Identity(ld, ld);
    for (long s = 0; s < steps; ++s) {
      const double t0 = t_start + h * static_cast<double>(s);
      const Matrix h1 = h_at(t0 + c1 * h);
      const Matrix h2 = h_at(t0 + c2 * h);
      const Matrix commutator = h2 * h1 - h1 * h2;
      Matrix k = 0.5 * h * (h1 + h2) - kI * (std::sqrt(3.0) * h * h / 12.0) * commutator;
      k = 0.5 * (k + k.adjoint()).eval();
      u = expm_i(k) * u;
    }
    return u;
  }

  const ChainHamiltonian& h0_;
  const BasisLayout& layout_;
  SimulationOptions options_;
  Eigen::VectorXd energies_;
  std::map<std::size_t, std::vector<double>> line_cache_;
};

void run(Evolver& ev, const GateSequence& seq, Matrix& psi) {
  seq.validate();
  double t = 0.0;
  for (const auto& step : seq.steps) {
    if (const auto* g = std::get_if<GateSpec>(&step)) {
      ev.apply_gate(*g, psi);
    } else {
      const auto& b = std::get<PulseBlock>(step);
      ev.apply_block(b, t, psi);
      t += b.duration();
    }
  }
}

}  // namespace

std::vector<ResolvedTone> resolve_block(const ChainHamiltonian& h0, const PulseBlock& block,
                                        const SimulationOptions& options) {
  Evolver ev(h0, options);
  return ev.resolve(block);
}

StateVector simulate_sequence(const ChainHamiltonian& h0, const GateSequence& seq,
                              const StateVector& initial, const SimulationOptions& options) {
  if (!(initial.layout == h0.layout())) throw InvalidInput("initial state layout does not match H0");
  if (h0.layout().dimension() > kStateDimLimit) throw DimensionLimit("state dimension above limit");
  Evolver ev(h0, options);
  Matrix psi = initial.amplitudes;
  run(ev, seq, psi);
  return StateVector(h0.layout(), psi.col(0));
}

Operator simulate_propagator(const ChainHamiltonian& h0, const GateSequence& seq,
                             const SimulationOptions& options) {
  const auto dim = h0.layout().dimension();
  if (dim > kPropagatorDimLimit) {
    throw DimensionLimit("propagator of dimension " + std::to_string(dim) + " exceeds the limit of " +
                         std::to_string(kPropagatorDimLimit));
  }
  Evolver ev(h0, options);
  Matrix psi = Matrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  run(ev, seq, psi);
  return Operator(h0.layout(), std::move(psi));
}

double rabi_max_transfer(Frequency rabi, Frequency detuning) {
  const double r2 = rabi.rad_s() * rabi.rad_s();
  const double d2 = detuning.rad_s() * detuning.rad_s();
  if (r2 + d2 == 0.0) return 0.0;
  return r2 / (r2 + d2);
}

double rabi_transfer(Frequency rabi, Frequency detuning, double duration_s) {
  const double w = std::hypot(rabi.rad_s(), detuning.rad_s());
  const double s = std::sin(0.5 * w * duration_s);
  return rabi_max_transfer(rabi, detuning) * s * s;
}

SelectivityReport selectivity_report(const PulseSegment& segment, const StickSpectrum& catalog) {
  SelectivityReport report;
  const auto rabi = Frequency::from_hz(segment.rabi_hz);
  for (std::size_t k = 0; k < catalog.lines.size(); ++k) {
    const double f = catalog.lines[k].frequency_hz;
    const double delta = f - segment.carrier_hz;
    SelectivityEntry entry{k, f, delta, 1.0, std::abs(delta) <= tol::merge_hz};
    if (!entry.addressed) {
      entry.leakage = rabi_max_transfer(rabi, Frequency::from_hz(delta));
      report.worst_leakage = std::max(report.worst_leakage, entry.leakage);
      if (!report.min_margin_hz || std::abs(delta) < *report.min_margin_hz) {
        report.min_margin_hz = std::abs(delta);
      }
    }
    report.entries.push_back(entry);
  }
  return report;
}

namespace {

struct CnotLines {
  double nu;        // signed, rad/s, control at +3/2
  double nu_wrong;  // control at -3/2
};

CnotLines cnot_lines(const RegisterConfig& config, int control, int target, double nuclear_m) {
  const auto n = config.size();
  if (control < 0 || target < 0 || static_cast<std::size_t>(std::max(control, target)) >= n ||
      control == target) {
    throw InvalidInput("electron CNOT needs two distinct sites of the register");
  }
  const ProductEnergyModel model(config);
  std::vector<double> electrons(n, 1.5);
  CnotLines out{};
  out.nu = model.electron_transition(static_cast<std::size_t>(target), -0.5, 0.5, nuclear_m, electrons);
  electrons[static_cast<std::size_t>(control)] = -1.5;
  out.nu_wrong =
      model.electron_transition(static_cast<std::size_t>(target), -0.5, 0.5, nuclear_m, electrons);
  return out;
}

}  // namespace

GateSequence electron_cnot_pulse(const RegisterConfig& config, int control, int target,
                                 double rabi_hz, double nuclear_m) {
  if (!(rabi_hz > 0)) throw InvalidInput("Rabi frequency must be positive");
  const auto lines = cnot_lines(config, control, target, nuclear_m);
  PulseSegment seg;
  seg.target = {target, Role::electron};
  seg.carrier_hz = std::abs(lines.nu) / kTwoPi;
  seg.rabi_hz = rabi_hz;
  seg.duration_s = 1.0 / (2.0 * rabi_hz);
  seg.frame = "esr";
  PulseBlock block;
  block.segments.push_back(seg);
  block.intent = GateSpec::make(GateKind::cnot_ee, {control, target}, PhaseConvention::pulse);
  GateSequence seq;
  seq.name = "cnot_ee_pulse(" + std::to_string(control) + "," + std::to_string(target) + ")";
  seq.steps.emplace_back(std::move(block));
  return seq;
}

PulseCnotCheck pulse_cnot_check(const RegisterConfig& config, int control, int target,
                                double rabi_hz, const SimulationOptions& options) {
  const auto h0 = build_chain(config);
  const auto seq = electron_cnot_pulse(config, control, target, rabi_hz);
  const auto u = simulate_propagator(h0, seq, options);
  const auto ideal = ideal_gate(std::get<PulseBlock>(seq.steps.front()).intent.value(), h0.layout());

  const auto& layout = h0.layout();
  std::vector<std::size_t> subspace;
  const auto c_slot = layout.slot({control, Role::electron});
  const auto t_slot = layout.slot({target, Role::electron});
  for (std::size_t i = 0; i < layout.dimension(); ++i) {
    bool keep = true;
    for (std::size_t s = 0; s < layout.size() && keep; ++s) {
      const double m = layout.m(i, s);
      if (layout.part(s).ref.role == Role::nuclear) {
        keep = m == 0.5;
      } else if (s == c_slot || s == t_slot) {
        keep = std::abs(m) == 1.5;
      } else {
        keep = m == 1.5;
      }
    }
    if (keep) subspace.push_back(i);
  }
  const auto lines = cnot_lines(config, control, target, 0.5);
  PulseCnotCheck out;
  out.fidelity = unitary_fidelity(ideal, u, subspace);
  out.line_hz = std::abs(lines.nu) / kTwoPi;
  out.wrong_branch_detuning_hz = std::abs(lines.nu - lines.nu_wrong) / kTwoPi;
  out.duration_s = seq.total_duration();
  out.rabi_hz = rabi_hz;
  return out;
}

}  // namespace peapod
