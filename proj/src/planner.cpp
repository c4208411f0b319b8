#include "peapod/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "peapod/errors.hpp"
#include "peapod/format.hpp"

namespace peapod {

std::string_view to_string(AddressingScheme scheme) {
  return scheme == AddressingScheme::lines ? "lines" : "channel";
}

AddressingScheme addressing_scheme_from_string(std::string_view text) {
  if (text == "lines") return AddressingScheme::lines;
  if (text == "channel") return AddressingScheme::channel;
  throw InvalidInput("unknown addressing scheme '" + std::string(text) + "'");
}

namespace {

double max_adjacent_coupling_hz(const RegisterConfig& config) {
  double d = 0.0;
  for (std::size_t i = 0; i + 1 < config.size(); ++i) {
    d = std::max(d, dipolar_coupling(config.constants,
                                     config.positions_m[i + 1] - config.positions_m[i]).hz());
  }
  return d;
}

}  // namespace

LayoutSpec spectral_layout(const RegisterConfig& config, double guard_hz) {
  config.validate();
  if (!(guard_hz >= 0) || !std::isfinite(guard_hz)) throw InvalidInput("guard band must be >= 0");
  LayoutSpec spec;
  spec.config = config;
  spec.guard_hz = guard_hz;
  spec.d_nn_hz = max_adjacent_coupling_hz(config);
  spec.half_width_hz = 3.0 * spec.d_nn_hz + guard_hz;
  const double half_a = 0.5 * config.species.hyperfine.hz();
  for (std::size_t i = 0; i < config.size(); ++i) {
    const double f = electron_larmor(config.constants, site_field(config, i)).hz();
    for (int line : {-1, +1}) {
      const double c = f + line * half_a;
      spec.intervals.push_back({static_cast<int>(i), line, c, c - spec.half_width_hz,
                                c + spec.half_width_hz});
    }
  }
  return spec;
}

std::vector<LineInterval> channel_intervals(const LayoutSpec& layout) {
  std::vector<LineInterval> out;
  for (std::size_t k = 0; k + 1 < layout.intervals.size(); k += 2) {
    const auto& lo = layout.intervals[k];
    const auto& hi = layout.intervals[k + 1];
    out.push_back({lo.site, 0, 0.5 * (lo.center_hz + hi.center_hz), std::min(lo.low_hz, hi.low_hz),
                   std::max(lo.high_hz, hi.high_hz)});
  }
  return out;
}

std::vector<NuclearGap> nuclear_addressability(const RegisterConfig& config) {
  config.validate();
  std::vector<NuclearGap> out;
  for (std::size_t i = 0; i + 1 < config.size(); ++i) {
    const double gap = std::abs(config.species.gamma_hz_per_tesla * config.gradient_tesla_per_m *
                                (config.positions_m[i + 1] - config.positions_m[i]));
    out.push_back({static_cast<int>(i), gap,
                   gap > 0 ? 1.0 / gap : std::numeric_limits<double>::infinity()});
  }
  return out;
}

PlanReport check_overlap(const LayoutSpec& layout, double weak_coupling_threshold,
                         AddressingScheme scheme) {
  if (!(weak_coupling_threshold >= 0)) throw InvalidInput("weak-coupling threshold must be >= 0");
  PlanReport r;
  r.scheme = scheme;
  r.guard_hz = layout.guard_hz;
  r.half_width_hz = layout.half_width_hz;
  r.threshold = weak_coupling_threshold;
  r.intervals = scheme == AddressingScheme::lines ? layout.intervals : channel_intervals(layout);

  auto sorted = r.intervals;
  std::sort(sorted.begin(), sorted.end(), [](const LineInterval& a, const LineInterval& b) {
    if (a.site != b.site) return a.site < b.site;
    return a.line < b.line;
  });
  for (std::size_t a = 0; a < sorted.size(); ++a) {
    for (std::size_t b = a + 1; b < sorted.size(); ++b) {
      const auto& x = sorted[a];
      const auto& y = sorted[b];
      if (x.site == y.site) continue;
      const double gap = std::abs(x.center_hz - y.center_hz);
      if (!r.min_gap_hz || gap < *r.min_gap_hz) r.min_gap_hz = gap;
      if (x.high_hz > y.low_hz && y.high_hz > x.low_hz) {
        r.conflicts.push_back({x.site, x.line, y.site, y.line, gap});
      }
    }
  }
  r.conflict_free = r.conflicts.empty();

  const auto& config = layout.config;
  for (std::size_t i = 0; i + 1 < config.size(); ++i) {
    const double sep = std::abs(electron_larmor(config.constants, site_field(config, i + 1)).hz() -
                                electron_larmor(config.constants, site_field(config, i)).hz());
    const double d = dipolar_coupling(config.constants,
                                      config.positions_m[i + 1] - config.positions_m[i]).hz();
    const double ratio = sep / d;
    const bool ok = ratio >= weak_coupling_threshold;
    r.ratios.push_back({static_cast<int>(i), sep, d, ratio, ok});
    r.weak_coupling_ok = r.weak_coupling_ok && ok;
  }
  r.nuclear_gaps = nuclear_addressability(config);
  return r;
}

PlanReport plan(const RegisterConfig& config, const PlanConstraints& constraints) {
  return check_overlap(spectral_layout(config, constraints.guard_hz),
                       constraints.weak_coupling_threshold, constraints.scheme);
}

GradientSearchResult min_gradient_search(std::size_t count, const Constants& constants,
                                         const Species& species, double b0_tesla, double spacing_m,
                                         const PlanConstraints& constraints,
                                         const SearchBounds& bounds) {
  if (count < 1) throw InvalidInput("register needs at least one site");
  if (!(bounds.grid_ratio > 1.0)) throw InvalidInput("grid ratio must exceed 1");
  const auto make = [&](double separation_hz) {
    const double g = gradient_for_separation(constants, Frequency::from_hz(separation_hz), spacing_m);
    return RegisterConfig::uniform(constants, species, b0_tesla, g, spacing_m, count);
  };
  const auto feasible = [&](double separation_hz) {
    return plan(make(separation_hz), constraints).feasible();
  };
  const auto finish = [&](double separation_hz) {
    GradientSearchResult out;
    out.config = make(separation_hz);
    out.separation_hz = separation_hz;
    out.gradient_tesla_per_m = out.config.gradient_tesla_per_m;
    out.report = plan(out.config, constraints);
    return out;
  };
  if (count == 1) return finish(0.0);

  const double d_nn = dipolar_coupling(constants, spacing_m).hz();
  // Below threshold * D_nn the weak-coupling constraint fails outright.
  const double floor_hz = std::max(constraints.weak_coupling_threshold * d_nn, 1e3);
  if (floor_hz > bounds.ceiling_hz) {
    throw Infeasible("weak-coupling floor lies above the search ceiling");
  }
  if (feasible(floor_hz)) return finish(floor_hz);

  double lo = floor_hz;
  double hi = std::numeric_limits<double>::quiet_NaN();
  if (constraints.scheme == AddressingScheme::channel) {
    if (feasible(bounds.ceiling_hz)) hi = bounds.ceiling_hz;
  } else {
    for (double x = floor_hz * bounds.grid_ratio; x <= bounds.ceiling_hz; x *= bounds.grid_ratio) {
      if (feasible(x)) {
        hi = x;
        break;
      }
      lo = x;
    }
  }
  if (std::isnan(hi)) {
    throw Infeasible("no feasible separation up to " + format_number(bounds.ceiling_hz) + " Hz");
  }
  while (hi - lo > bounds.relative_tolerance * hi) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return finish(hi);
}

nlohmann::json to_json(const PlanReport& r) {
  nlohmann::json intervals = nlohmann::json::array();
  for (const auto& i : r.intervals) {
    intervals.push_back({{"site", i.site},
                         {"line", i.line},
                         {"center_hz", i.center_hz},
                         {"low_hz", i.low_hz},
                         {"high_hz", i.high_hz}});
  }
  nlohmann::json conflicts = nlohmann::json::array();
  for (const auto& c : r.conflicts) {
    conflicts.push_back({{"site_a", c.site_a},
                         {"line_a", c.line_a},
                         {"site_b", c.site_b},
                         {"line_b", c.line_b},
                         {"gap_hz", c.gap_hz}});
  }
  nlohmann::json ratios = nlohmann::json::array();
  for (const auto& w : r.ratios) {
    ratios.push_back({{"site", w.site},
                      {"separation_hz", w.separation_hz},
                      {"coupling_hz", w.coupling_hz},
                      {"ratio", w.ratio},
                      {"ok", w.ok}});
  }
  nlohmann::json gaps = nlohmann::json::array();
  for (const auto& g : r.nuclear_gaps) {
    nlohmann::json jg = {{"site", g.site}, {"gap_hz", g.gap_hz}};
    if (std::isinf(g.min_duration_s)) {
      jg["min_duration_s"] = nullptr;
    } else {
      jg["min_duration_s"] = g.min_duration_s;
    }
    gaps.push_back(jg);
  }
  nlohmann::json j = {{"scheme", std::string(to_string(r.scheme))},
                      {"guard_hz", r.guard_hz},
                      {"half_width_hz", r.half_width_hz},
                      {"weak_coupling_threshold", r.threshold},
                      {"intervals", intervals},
                      {"conflicts", conflicts},
                      {"weak_coupling", ratios},
                      {"nuclear_gaps", gaps},
                      {"conflict_free", r.conflict_free},
                      {"weak_coupling_ok", r.weak_coupling_ok},
                      {"feasible", r.feasible()}};
  j["min_gap_hz"] = r.min_gap_hz ? nlohmann::json(*r.min_gap_hz) : nlohmann::json(nullptr);
  return j;
}

std::string to_text(const PlanReport& r) {
  std::ostringstream os;
  os << "scheme " << to_string(r.scheme) << ", half-width " << format_fixed(r.half_width_hz / 1e6, 3)
     << " MHz (guard " << format_fixed(r.guard_hz / 1e6, 3) << " MHz)\n";
  os << "site  line   center/MHz      low/MHz     high/MHz\n";
  for (const auto& i : r.intervals) {
    char line = i.line > 0 ? '+' : (i.line < 0 ? '-' : '=');
    os << std::string(4 - std::min<std::size_t>(4, std::to_string(i.site).size()), ' ') << i.site
       << "     " << line << "  " << format_fixed(i.center_hz / 1e6, 3) << "  "
       << format_fixed(i.low_hz / 1e6, 3) << "  " << format_fixed(i.high_hz / 1e6, 3) << '\n';
  }
  if (r.conflicts.empty()) {
    os << "no line conflicts\n";
  } else {
    for (const auto& c : r.conflicts) {
      os << "conflict: site " << c.site_a << " (" << (c.line_a >= 0 ? '+' : '-') << ") vs site "
         << c.site_b << " (" << (c.line_b >= 0 ? '+' : '-') << "), centers "
         << format_fixed(c.gap_hz / 1e6, 3) << " MHz apart\n";
    }
  }
  for (const auto& w : r.ratios) {
    os << "pair " << w.site << "-" << w.site + 1 << ": separation/D = " << format_fixed(w.ratio, 2)
       << (w.ok ? "" : "  (below threshold)") << '\n';
  }
  for (const auto& g : r.nuclear_gaps) {
    os << "nuclear gap " << g.site << "-" << g.site + 1 << ": " << format_fixed(g.gap_hz / 1e3, 3)
       << " kHz\n";
  }
  os << "verdict: " << (r.feasible() ? "feasible" : "infeasible") << '\n';
  return os.str();
}

}  // namespace peapod
