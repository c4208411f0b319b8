#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "peapod/errors.hpp"
#include "peapod/format.hpp"
#include "peapod/gates.hpp"
#include "peapod/planner.hpp"
#include "peapod/pulse.hpp"
#include "peapod/readout.hpp"
#include "peapod/spectrum.hpp"
#include "peapod/transfer.hpp"
#include "peapod/version.hpp"

namespace peapod::cli {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

json line_json(const TransitionLine& l) {
  return {{"frequency_hz", l.frequency_hz}, {"branch", std::string(to_string(l.branch))},
          {"site", l.site},                 {"degeneracy", l.degeneracy},
          {"sense", l.sense},               {"active", l.active},
          {"labels", l.labels}};
}

json lines_json(const StickSpectrum& s) {
  json out = json::array();
  for (const auto& l : s.lines) out.push_back(line_json(l));
  return out;
}

std::string populations_csv(const BasisLayout& layout, const std::vector<double>& p, double floor) {
  std::ostringstream os;
  os << "index,label,population\n";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < floor) continue;
    os << i << ",\"" << layout.label(i) << "\"," << format_number(p[i]) << '\n';
  }
  return os.str();
}

std::size_t site_arg(const json& section, const char* key, std::size_t fallback, const RegisterConfig& reg) {
  const auto site = section.value(key, fallback);
  if (site >= reg.size()) {
    throw InvalidInput(std::string(key) + " " + std::to_string(site) + " is outside a register of " +
                       std::to_string(reg.size()));
  }
  return site;
}

// ---------------------------------------------------------------- spectrum

Outcome run_spectrum(const Scenario& s) {
  Outcome o;
  const auto& sec = s.section();
  const auto& reg = s.reg;
  const auto hash = config_hash(reg);
  o.report["config_hash"] = hash;

  if (reg.size() == 1) {
    const double field = site_field(reg, 0);
    const auto h = build_single(reg.constants, field, reg.species);
    const auto energies = eigenenergies(h);
    json e = json::array();
    for (const auto& x : energies) e.push_back({{"index", x.index}, {"label", x.label}, {"energy_hz", x.energy.hz()}});
    o.report["energies"] = e;
    o.artifacts.push_back({"energies.csv", energies_csv(energies)});

    const auto lines = single_molecule_lines(reg.constants, field, reg.species);
    o.report["lines"] = lines_json(lines);
    json checks = json::array();
    for (const auto& c : single_molecule_cross_check(reg.constants, field, reg.species)) {
      json entry = {{"name", c.name}, {"computed_hz", c.computed_hz}, {"closed_form_hz", c.closed_form_hz}};
      entry["quoted_hz"] = c.quoted_hz ? json(*c.quoted_hz) : json(nullptr);
      checks.push_back(entry);
    }
    o.report["cross_check"] = checks;
    o.artifacts.push_back({"lines.csv", spectrum_csv(lines)});
    o.artifacts.push_back({"lines.svg", spectrum_svg(lines, reg.species.name + " single molecule, " +
                                                                format_number(field) + " T")});
    return o;
  }

  const auto site = site_arg(sec, "site", reg.size() / 2, reg);
  const std::string model_name = sec.value("model", std::string("enumerate_all"));
  const auto model = model_name == "ideal"                 ? NeighborModel::ideal
                     : model_name == "polarized_beyond_nn" ? NeighborModel::polarized_beyond_nn
                                                           : NeighborModel::enumerate_all;
  const double nuclear_m = sec.value("nuclear_m", 0.5);
  const auto lines = chain_electron_lines(reg, site, model, nuclear_m);
  o.report["site"] = site;
  o.report["model"] = model_name;
  o.report["reference_hz"] = lines.reference_hz;
  o.report["lines"] = lines_json(lines);
  o.artifacts.push_back({"lines.csv", spectrum_csv(lines)});
  o.artifacts.push_back({"lines.svg", spectrum_svg(lines, "site " + std::to_string(site) + " electron, " + model_name)});

  if (sec.value("traces", reg.range == CouplingRange::full)) {
    const auto t = neighbor_traces(reg, site);
    const std::pair<const char*, const StickSpectrum*> traces[] = {
        {"nearest", &t.nearest}, {"second", &t.second}, {"third", &t.third}, {"polarized", &t.polarized}};
    json summary = json::object();
    for (const auto& [name, spec] : traces) {
      summary[name] = {{"lines", spec->lines.size()}, {"total_degeneracy", spec->total_degeneracy()}};
      o.artifacts.push_back({std::string("trace_") + name + ".csv", spectrum_csv(*spec)});
      o.artifacts.push_back({std::string("trace_") + name + ".svg", spectrum_svg(*spec, std::string("neighbors: ") + name)});
    }
    summary["nonlocal_shift_hz"] = nonlocal_shift(reg, site).hz();
    o.report["traces"] = summary;
  }

  if (sec.value("catalog", false)) {
    const auto h = build_chain(reg);
    StickSpectrum catalog;
    catalog.lines = transition_catalog(h);
    catalog.config_hash = hash;
    catalog.normalize();
    o.report["catalog_lines"] = catalog.lines.size();
    o.artifacts.push_back({"catalog.csv", spectrum_csv(catalog)});
    o.artifacts.push_back({"catalog.svg", spectrum_svg(catalog, "full transition catalog")});
    if (h.layout().dimension() <= 4096) o.artifacts.push_back({"energies.csv", energies_csv(eigenenergies(h))});
  }
  return o;
}

// ------------------------------------------------------------------- gates

std::string fixed7(double f) { return format_fixed(f, 7); }

Matrix swap_truth_table(const BasisLayout& one) {
  Matrix u = Matrix::Identity(8, 8);
  const double e[] = {1.5, -1.5};
  const double n[] = {0.5, -0.5};
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const double from_m[] = {e[a], n[b]};
      const double to_m[] = {e[b], n[a]};
      const auto from = static_cast<Eigen::Index>(one.index_from_m(from_m));
      const auto to = static_cast<Eigen::Index>(one.index_from_m(to_m));
      u.col(from).setZero();
      u(to, from) = 1.0;
    }
  }
  return u;
}

json check_eq3(bool& ok) {
  const auto one = BasisLayout::molecules(1);
  const auto sub = qubit_subspace(one);
  const Operator truth(one, swap_truth_table(one));
  const auto sis = compose_ideal(swap_decomposition(SwapOrder::sis, 0), one);
  const auto isi = compose_ideal(swap_decomposition(SwapOrder::isi, 0), one);
  const auto p_sis = compose_ideal(swap_decomposition(SwapOrder::sis, 0, PhaseConvention::logical, true), one);
  const auto p_isi = compose_ideal(swap_decomposition(SwapOrder::isi, 0, PhaseConvention::logical, true), one);
  const auto cnot = ideal_gate(GateSpec::make(GateKind::cnot_si, {0}), one);
  const double f[] = {unitary_fidelity(sis, isi, sub), unitary_fidelity(truth, sis, sub),
                      unitary_fidelity(truth, isi, sub),
                      unitary_fidelity(Operator::identity(one), p_sis, sub),
                      unitary_fidelity(cnot, p_isi, sub)};
  bool agree = true;
  for (double x : f) agree = agree && std::abs(x - 1.0) <= 1e-10;
  ok = ok && agree;
  return {{"sis_vs_isi", f[0]},
          {"sis_vs_swap", f[1]},
          {"isi_vs_swap", f[2]},
          {"passive_sis_vs_identity", f[3]},
          {"passive_isi_vs_cnot_si", f[4]},
          {"fidelity", fixed7(std::min({f[0], f[1], f[2]}))},
          {"agree", agree}};
}

json check_protocol(const Scenario& s, bool& ok, Outcome& o) {
  const auto& sec = s.section();
  ProtocolOptions opt;
  opt.core = sec.value("core", std::string("cpf")) == "cnot" ? CoreGate::cnot : CoreGate::cpf;
  opt.order = swap_order_from_string(sec.value("order", std::string("sis")));
  opt.mode = sec.value("mode", std::string("selective")) == "hard" ? NuclearPulseMode::hard
                                                                  : NuclearPulseMode::selective;
  const int i = sec.value("control", 0);
  const int j = sec.value("target", 1);
  const int n = std::clamp(std::max(i, j) + 1, 2, 3);
  opt.register_size = n;
  const auto layout = BasisLayout::molecules(n);
  const auto seq = two_qubit_protocol(i, j, opt);
  const auto net = compose_ideal(seq, layout);
  const auto sub = qubit_subspace(layout);
  const double fidelity = unitary_fidelity(nuclear_core_gate(opt.core, i, j, layout), net, sub);

  // Electron return: probability of all electrons at +3/2 after each input
  // with all electrons at +3/2.
  double worst_return = 1.0;
  for (std::size_t in = 0; in < layout.dimension(); ++in) {
    bool start = true;
    for (std::size_t slot = 0; slot < layout.size(); ++slot) {
      if (layout.part(slot).ref.role == Role::electron) start = start && layout.m(in, slot) == 1.5;
    }
    if (!start) continue;
    double p = 0.0;
    for (std::size_t out = 0; out < layout.dimension(); ++out) {
      bool up = true;
      for (std::size_t slot = 0; slot < layout.size(); ++slot) {
        if (layout.part(slot).ref.role == Role::electron) up = up && layout.m(out, slot) == 1.5;
      }
      if (up) p += std::norm(net.matrix(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in)));
    }
    worst_return = std::min(worst_return, p);
  }
  const bool pass = fidelity >= 1.0 - 1e-9 && std::abs(worst_return - 1.0) <= 1e-12;
  ok = ok && pass;
  o.artifacts.push_back({"protocol_sequence.json", to_json(seq).dump(2) + "\n"});
  return {{"core", std::string(to_string(opt.core))},
          {"order", std::string(to_string(opt.order))},
          {"mode", std::string(to_string(opt.mode))},
          {"sites", {i, j}},
          {"molecules", n},
          {"steps", seq.steps.size()},
          {"fidelity", fidelity},
          {"fidelity_text", fixed7(fidelity)},
          {"electron_return_probability", worst_return},
          {"pass", pass}};
}

json check_pulse(const Scenario& s, Outcome& o) {
  const auto& sec = s.section();
  const auto& reg = s.reg;
  if (reg.size() < 2) throw InvalidInput("the pulse check needs a register of at least two molecules");
  const int i = sec.value("control", 0);
  const int j = sec.value("target", 1);
  const double d = coupling(reg, static_cast<std::size_t>(std::min(i, j)), static_cast<std::size_t>(std::max(i, j))).hz();
  const auto ratios = sec.value("rabi_over_d", std::vector<double>{0.1, 1.0, 10.0});
  json points = json::array();
  std::ostringstream csv;
  csv << "rabi_over_d,rabi_hz,fidelity\n";
  double previous = kInf;
  bool monotone = true;
  auto sorted = ratios;
  std::sort(sorted.begin(), sorted.end());
  for (double r : sorted) {
    const auto c = pulse_cnot_check(reg, i, j, r * d);
    monotone = monotone && c.fidelity <= previous;
    previous = c.fidelity;
    points.push_back({{"rabi_over_d", r}, {"rabi_hz", c.rabi_hz}, {"fidelity", c.fidelity},
                      {"line_hz", c.line_hz}, {"duration_s", c.duration_s},
                      {"wrong_branch_detuning_hz", c.wrong_branch_detuning_hz}});
    csv << format_number(r) << ',' << format_number(c.rabi_hz) << ',' << format_number(c.fidelity) << '\n';
  }
  o.artifacts.push_back({"pulse_sweep.csv", csv.str()});
  return {{"coupling_hz", d}, {"points", points}, {"monotone_decreasing", monotone}};
}

Outcome run_gates(const Scenario& s) {
  Outcome o;
  const std::string check = s.section().value("check", std::string("all"));
  bool ok = true;
  o.report["check"] = check;
  if (check == "eq3" || check == "all") o.report["eq3"] = check_eq3(ok);
  if (check == "protocol" || check == "all") o.report["protocol"] = check_protocol(s, ok, o);
  if (check == "pulse" || (check == "all" && s.reg.size() >= 2 && s.reg.size() <= 3)) {
    o.report["pulse"] = check_pulse(s, o);
  }
  o.report["pass"] = ok;
  if (!ok) o.exit_code = kExitNumerical;
  return o;
}

// ------------------------------------------------------------------ evolve

Outcome run_evolve(const Scenario& s) {
  Outcome o;
  const auto& sec = s.section();
  const auto& reg = s.reg;
  const std::string preset = sec.value("preset", std::string("electron_cnot"));
  GateSequence seq;
  if (preset == "electron_cnot") {
    if (reg.size() < 2) throw InvalidInput("electron_cnot needs at least two molecules");
    const int i = static_cast<int>(site_arg(sec, "control", 0, reg));
    const int j = static_cast<int>(site_arg(sec, "target", 1, reg));
    const double d = coupling(reg, static_cast<std::size_t>(std::min(i, j)), static_cast<std::size_t>(std::max(i, j))).hz();
    seq = electron_cnot_pulse(reg, i, j, sec.value("rabi_hz", d / 10));
  } else if (preset == "nuclear_rotation") {
    const int site = static_cast<int>(site_arg(sec, "site", 0, reg));
    seq = unconditional_nuclear_rotation(reg, site, sec.value("angle", kPi), sec.value("phase", 0.0),
                                         sec.value("rabi_hz", 50e3));
  } else {
    if (!sec.contains("sequence")) throw InvalidInput("evolve.sequence is required for the sequence preset");
    seq = gate_sequence_from_json(sec["sequence"]);
  }

  SimulationOptions opt;
  opt.carrier_window_hz = sec.value("carrier_window_hz", opt.carrier_window_hz);
  opt.magnus_phase_step = sec.value("magnus_phase_step", opt.magnus_phase_step);
  opt.scope = sec.value("scope", std::string("addressed_spin")) == "same_role" ? DriveScope::same_role
                                                                              : DriveScope::addressed_spin;
  const auto h = build_chain(reg);
  const auto& layout = h.layout();
  std::size_t start = 0;
  if (sec.contains("initial_m")) {
    const auto ms = sec["initial_m"].get<std::vector<double>>();
    start = layout.index_from_m(ms);
  }
  const auto final_state = simulate_sequence(h, seq, StateVector::basis(layout, start), opt);
  std::vector<double> pops(layout.dimension());
  for (std::size_t k = 0; k < pops.size(); ++k) pops[k] = std::norm(final_state.amplitudes[static_cast<Eigen::Index>(k)]);

  json top = json::array();
  std::vector<std::size_t> order(pops.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return pops[a] > pops[b]; });
  for (std::size_t k = 0; k < std::min<std::size_t>(8, order.size()); ++k) {
    if (pops[order[k]] < 1e-12) break;
    top.push_back({{"index", order[k]}, {"label", layout.label(order[k])}, {"population", pops[order[k]]}});
  }
  o.report["preset"] = preset;
  o.report["initial"] = layout.label(start);
  o.report["duration_s"] = seq.total_duration();
  o.report["norm"] = final_state.norm();
  o.report["largest_populations"] = top;
  if (layout.dimension() <= kPropagatorDimLimit) {
    if (preset == "electron_cnot") {
      // The pulse is resonant only with the nuclei at +1/2.
      const int i = sec.value("control", 0), j = sec.value("target", 1);
      const auto c = pulse_cnot_check(reg, i, j, std::get<PulseBlock>(seq.steps[0]).segments[0].rabi_hz, opt);
      o.report["fidelity_vs_ideal"] = c.fidelity;
      o.report["fidelity_subspace"] = "electrons +-3/2, nuclei +1/2";
    } else {
      const auto u = simulate_propagator(h, seq, opt);
      o.report["fidelity_vs_ideal"] = unitary_fidelity(compose_ideal(seq, layout), u, qubit_subspace(layout));
      o.report["fidelity_subspace"] = "electrons +-3/2";
    }
  }
  o.artifacts.push_back({"populations.csv", populations_csv(layout, pops, 1e-12)});
  o.artifacts.push_back({"sequence.json", to_json(seq).dump(2) + "\n"});
  return o;
}

// ----------------------------------------------------------------- readout

FilterSpec filter_from(const json& sec, const char* key, FilterSpec f) {
  if (!sec.contains(key)) return f;
  const auto& j = sec[key];
  if (j.contains("pass")) f.pass = j["pass"].get<std::string>() == "up" ? Polarization::up : Polarization::down;
  f.efficiency = j.value("efficiency", f.efficiency);
  f.transmission = j.value("transmission", f.transmission);
  return f;
}

Outcome run_readout(const Scenario& s) {
  Outcome o;
  const auto& sec = s.section();
  const auto site = site_arg(sec, "site", 0, s.reg);
  const double distance = sec.value("mobile_distance_m", s.defaults.raw["readout"].value("mobile_distance_m", 0.8e-9));
  const auto setup = readout_setup(s.reg, static_cast<int>(site), distance);

  ReadoutRun run;
  run.target_site = static_cast<int>(site);
  run.n = sec.value("electrons", std::uint64_t{10000});
  run.flip_angle = sec.value("flip_angle", kPi);
  run.filter_a = filter_from(sec, "filter_a", run.filter_a);
  run.filter_b = filter_from(sec, "filter_b", run.filter_b);

  CagedDistribution caged = CagedDistribution::pure(1.5);
  if (sec.contains("caged_distribution")) {
    const auto p = sec["caged_distribution"].get<std::vector<double>>();
    std::copy(p.begin(), p.end(), caged.p.begin());
  } else if (sec.contains("caged_m")) {
    caged = CagedDistribution::pure(sec["caged_m"].get<double>());
  }

  const auto runs = sec.value("runs", std::uint64_t{1});
  std::vector<DetectorCounts> results;
  json list = json::array();
  for (std::uint64_t r = 0; r < runs; ++r) {
    run.seed = s.seed + r;
    const auto c = readout_run(caged, run, setup);
    results.push_back(c);
    list.push_back({{"seed", c.seed}, {"n", c.n}, {"counts", c.counts}, {"p_hat", c.p_hat},
                    {"p_expected", c.p_expected}, {"caged_m", c.caged_m}});
  }
  const auto lines = mobile_lines(setup);
  o.report["site"] = site;
  o.report["d_prime_hz"] = setup.d_prime.hz();
  o.report["pulse_hz"] = setup.pulse.hz();
  o.report["mobile_lines_hz"] = {lines[0].hz(), lines[1].hz(), lines[2].hz(), lines[3].hz()};
  o.report["runs"] = list;
  o.artifacts.push_back({"readout.csv", readout_csv(results)});
  return o;
}

// ---------------------------------------------------------------- transfer

Outcome run_transfer(const Scenario& s) {
  Outcome o;
  const auto& sec = s.section();
  if (s.reg.size() < 2) throw InvalidInput("bus transfer needs at least two molecules");
  for (const char* key : {"swap_duration_s", "hop_speed_m_per_s"}) {
    if (!sec.contains(key)) throw InvalidInput(std::string("transfer.") + key + " is required");
  }
  const int i = sec.value("from", 0);
  const int k = sec.value("to", static_cast<int>(s.reg.size()) - 1);
  double t2 = s.defaults.raw["transfer"].value("mobile_T2_s", kInf);
  if (sec.contains("mobile_T2_s")) t2 = sec["mobile_T2_s"].is_null() ? kInf : sec["mobile_T2_s"].get<double>();
  const auto r = bus_transfer(i, k, s.reg, t2, sec["swap_duration_s"].get<double>(),
                              sec["hop_speed_m_per_s"].get<double>());
  o.report["schedule"] = to_json(r.schedule);
  o.report["ideal_fidelity"] = r.ideal_fidelity;
  o.report["decoherence_factor"] = r.decoherence_factor;
  o.report["fidelity"] = r.fidelity;
  o.artifacts.push_back({"transfer_schedule.json", to_json(r.schedule).dump(2) + "\n"});
  return o;
}

// -------------------------------------------------------------------- plan

StickSpectrum layout_sticks(const PlanReport& r) {
  StickSpectrum s;
  s.branch = "esr";
  for (const auto& iv : r.intervals) {
    TransitionLine l;
    l.frequency_hz = iv.center_hz;
    l.site = iv.site;
    l.labels = {"site " + std::to_string(iv.site) + (iv.line > 0 ? " upper" : iv.line < 0 ? " lower" : " channel")};
    s.lines.push_back(l);
  }
  return s;
}

Outcome run_plan(const Scenario& s) {
  Outcome o;
  const auto& sec = s.section();
  PlanConstraints pc;
  pc.guard_hz = sec.value("guard_hz", 0.0);
  pc.weak_coupling_threshold = sec.value("weak_coupling_threshold", pc.weak_coupling_threshold);
  pc.scheme = addressing_scheme_from_string(sec.value("scheme", std::string("lines")));

  if (sec.value("search", false)) {
    if (s.reg.size() < 2) throw InvalidInput("gradient search needs at least two molecules");
    SearchBounds bounds;
    bounds.ceiling_hz = sec.value("ceiling_hz", bounds.ceiling_hz);
    const double spacing = s.reg.positions_m[1] - s.reg.positions_m[0];
    const auto g = min_gradient_search(s.reg.size(), s.reg.constants, s.reg.species, s.reg.b0_tesla,
                                       spacing, pc, bounds);
    o.report["search"] = {{"gradient_T_per_m", g.gradient_tesla_per_m}, {"separation_hz", g.separation_hz}};
    o.report["plan"] = to_json(g.report);
    o.artifacts.push_back({"plan.txt", to_text(g.report)});
    o.artifacts.push_back({"layout.csv", spectrum_csv(layout_sticks(g.report))});
    o.artifacts.push_back({"layout.svg", spectrum_svg(layout_sticks(g.report), "addressing layout")});
    return o;
  }

  const auto r = plan(s.reg, pc);
  o.report["plan"] = to_json(r);
  o.artifacts.push_back({"plan.txt", to_text(r)});
  o.artifacts.push_back({"layout.csv", spectrum_csv(layout_sticks(r))});
  o.artifacts.push_back({"layout.svg", spectrum_svg(layout_sticks(r), "addressing layout")});
  if (!r.feasible()) o.exit_code = kExitInfeasible;
  return o;
}

// ----------------------------------------------------------------- thermal

Outcome run_thermal(const Scenario& s) {
  Outcome o;
  const auto& sec = s.section();
  double t = 0.1;
  if (sec.contains("temperature_K")) {
    const auto& v = sec["temperature_K"];
    if (v.is_string()) {
      if (v.get<std::string>() != "inf") throw InvalidInput("thermal.temperature_K must be a number or \"inf\"");
      t = kInf;
    } else {
      t = v.get<double>();
    }
  }
  const auto h = build_chain(s.reg);
  const auto state = thermal_populations(h, t);
  json spins = json::array();
  for (const auto& part : h.layout().parts()) {
    json manifolds = json::object();
    for (int d = 0; d < part.spin.dim(); ++d) {
      const double m = part.spin.m(d);
      manifolds[format_number(m)] = state.manifold_population(part.ref, m);
    }
    spins.push_back({{"site", part.ref.site},
                     {"role", std::string(to_string(part.ref.role))},
                     {"ground_manifold_population", state.ground_manifold_population(h, part.ref)},
                     {"manifolds", manifolds}});
  }
  o.report["temperature_K"] = std::isinf(t) ? json("inf") : json(t);
  o.report["field_T"] = s.reg.b0_tesla;
  o.report["spins"] = spins;
  o.artifacts.push_back({"thermal.csv", populations_csv(h.layout(), state.populations, 0.0)});
  return o;
}

}  // namespace

Outcome run_scenario(const Scenario& s) {
  Outcome o;
  switch (s.command) {
    case Command::spectrum: o = run_spectrum(s); break;
    case Command::gates: o = run_gates(s); break;
    case Command::evolve: o = run_evolve(s); break;
    case Command::readout: o = run_readout(s); break;
    case Command::transfer: o = run_transfer(s); break;
    case Command::plan: o = run_plan(s); break;
    case Command::thermal: o = run_thermal(s); break;
  }
  o.report["command"] = std::string(to_string(s.command));
  o.report["seed"] = s.seed;
  o.report["version"] = kVersion;
  return o;
}

nlohmann::json derived_parameters(const Scenario& s) {
  const auto& reg = s.reg;
  json sites = json::array();
  for (std::size_t i = 0; i < reg.size(); ++i) {
    const auto p = site_parameters(reg, i);
    sites.push_back({{"site", i},
                     {"position_m", reg.positions_m[i]},
                     {"field_T", site_field(reg, i)},
                     {"electron_larmor_hz", Frequency::from_rad_s(p.electron_larmor).hz()},
                     {"nuclear_larmor_hz", Frequency::from_rad_s(p.nuclear_larmor).hz()},
                     {"hyperfine_hz", Frequency::from_rad_s(p.hyperfine).hz()}});
  }
  json d = json::array();
  for (std::size_t i = 0; i < reg.size(); ++i) {
    json row = json::array();
    for (std::size_t k = 0; k < reg.size(); ++k) row.push_back(coupling(reg, i, k).hz());
    d.push_back(row);
  }
  return {{"command", std::string(to_string(s.command))},
          {"dry_run", true},
          {"register", register_to_json(reg)},
          {"config_hash", config_hash(reg)},
          {"sites", sites},
          {"coupling_hz", d},
          {"hilbert_dimension", std::pow(8.0, static_cast<double>(reg.size()))}};
}

std::vector<std::string> write_outcome(const Scenario& s, const Outcome& o) {
  std::filesystem::create_directories(s.out_dir);
  std::vector<std::string> written;
  const auto put = [&](const std::string& name, const std::string& content) {
    std::ofstream out(s.out_dir / name, std::ios::binary);
    if (!out) throw InvalidInput("cannot write " + (s.out_dir / name).string());
    out << content;
    written.push_back(name);
  };
  for (const auto& a : o.artifacts) {
    const auto ext = std::filesystem::path(a.name).extension().string();
    const auto format = ext.empty() ? std::string() : ext.substr(1);
    if (format == "csv" || format == "json" || format == "svg") {
      if (!s.wants(format)) continue;
    }
    put(a.name, a.content);
  }
  if (s.wants("json")) put(std::string(to_string(s.command)) + "_report.json", o.report.dump(2) + "\n");
  return written;
}

ErrorInfo classify(std::exception_ptr error) {
  try {
    std::rethrow_exception(error);
  } catch (const InvalidInput& e) {
    return {kExitConfig, "config_error", e.what()};
  } catch (const nlohmann::json::exception& e) {
    return {kExitConfig, "config_error", e.what()};
  } catch (const Infeasible& e) {
    return {kExitInfeasible, "infeasible", e.what()};
  } catch (const DimensionLimit& e) {
    return {kExitDimension, "dimension_limit", e.what()};
  } catch (const NumericalFailure& e) {
    return {kExitNumerical, "numerical_failure", e.what()};
  } catch (const std::filesystem::filesystem_error& e) {
    return {kExitConfig, "config_error", e.what()};
  } catch (const std::exception& e) {
    return {kExitNumerical, "internal_error", e.what()};
  }
}

nlohmann::json error_json(const ErrorInfo& info) {
  return {{"error", {{"exit_code", info.exit_code}, {"kind", info.kind}, {"message", info.message}}}};
}

}  // namespace peapod::cli
