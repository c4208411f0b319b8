#include "peapod/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "peapod/errors.hpp"
#include "peapod/format.hpp"
#include "peapod/version.hpp"

namespace peapod {

std::string_view to_string(Branch branch) { return branch == Branch::esr ? "ESR" : "NMR"; }

void StickSpectrum::normalize() {
  std::stable_sort(lines.begin(), lines.end(), [](const TransitionLine& a, const TransitionLine& b) {
    if (a.frequency_hz != b.frequency_hz) return a.frequency_hz < b.frequency_hz;
    return a.site < b.site;
  });
  std::vector<TransitionLine> merged;
  for (auto& line : lines) {
    // Compare against every line of the current cluster so site interleaving
    // inside the merge window cannot split a degenerate group.
    TransitionLine* target = nullptr;
    for (auto it = merged.rbegin(); it != merged.rend(); ++it) {
      if (line.frequency_hz - it->frequency_hz > tol::merge_hz) break;
      if (it->site == line.site && it->branch == line.branch && it->sense == line.sense) {
        target = &*it;
        break;
      }
    }
    if (!target) {
      merged.push_back(std::move(line));
      continue;
    }
    target->degeneracy += line.degeneracy;
    target->active = target->active || line.active;
    target->labels.insert(target->labels.end(), line.labels.begin(), line.labels.end());
    target->contexts.insert(target->contexts.end(), line.contexts.begin(), line.contexts.end());
    target->initial_index.reset();
    target->final_index.reset();
  }
  lines = std::move(merged);
}

int StickSpectrum::total_degeneracy() const {
  int total = 0;
  for (const auto& l : lines) total += l.degeneracy;
  return total;
}

std::vector<double> StickSpectrum::frequencies_hz() const {
  std::vector<double> out;
  out.reserve(lines.size());
  for (const auto& l : lines) out.push_back(l.frequency_hz);
  return out;
}

std::vector<LabeledEnergy> eigenenergies(const ChainHamiltonian& h) {
  const auto d = h.diagonal();
  std::vector<LabeledEnergy> out;
  out.reserve(static_cast<std::size_t>(d.size()));
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    out.push_back({idx, h.layout().label(idx), Frequency::from_rad_s(d[i])});
  }
  return out;
}

std::vector<TransitionLine> transition_catalog(const ChainHamiltonian& h,
                                               std::optional<SpinRef> only) {
  const auto& layout = h.layout();
  const auto energies = h.diagonal();
  std::vector<std::size_t> slots;
  if (only) {
    slots.push_back(layout.slot(*only));
  } else {
    for (std::size_t s = 0; s < layout.size(); ++s) slots.push_back(s);
  }
  std::vector<TransitionLine> out;
  for (std::size_t i = 0; i < layout.dimension(); ++i) {
    for (auto s : slots) {
      if (layout.digit(i, s) == 0) continue;
      const std::size_t j = i - layout.stride(s);  // one step up in m
      const double nu = energies[static_cast<Eigen::Index>(j)] - energies[static_cast<Eigen::Index>(i)];
      const auto& part = layout.part(s);
      TransitionLine line;
      line.frequency_hz = std::abs(nu) / kTwoPi;
      line.sense = nu < 0 ? -1 : 1;
      line.branch = part.ref.role == Role::nuclear ? Branch::nmr : Branch::esr;
      line.site = part.ref.site;
      line.labels.push_back(layout.label(i) + " -> " + layout.label(j));
      line.initial_index = i;
      line.final_index = j;
      out.push_back(std::move(line));
    }
  }
  return out;
}

StickSpectrum single_molecule_lines(const Constants& constants, double b0_tesla,
                                    const Species& species) {
  const auto h = build_single(constants, b0_tesla, species);
  StickSpectrum spec;
  spec.lines = transition_catalog(h);
  spec.config_hash = config_hash(h.config());
  spec.branch = "ESR+NMR";
  spec.reference_hz = electron_larmor(constants, b0_tesla).hz();
  spec.normalize();
  return spec;
}

std::vector<LineCheck> single_molecule_cross_check(const Constants& constants, double b0_tesla,
                                                   const Species& species) {
  const auto h = build_single(constants, b0_tesla, species);
  const auto& layout = h.layout();
  const auto p = site_parameters(h.config(), 0);
  const auto energy = [&](double ms, double mi) {
    const double ms_pair[] = {ms, mi};
    return h.energy(layout.index_from_m(ms_pair));
  };
  std::vector<LineCheck> out;
  for (double mi : {0.5, -0.5}) {
    const double computed = std::abs(energy(0.5, mi) - energy(-0.5, mi)) / kTwoPi;
    const double closed = std::abs(p.electron_larmor - p.hyperfine * mi) / kTwoPi;
    out.push_back({"ESR m_I=" + format_m(mi), computed, closed, std::nullopt});
  }
  for (double ms : {1.5, 0.5, -0.5, -1.5}) {
    const double computed = std::abs(energy(ms, 0.5) - energy(ms, -0.5)) / kTwoPi;
    const double closed = std::abs(p.nuclear_larmor - p.hyperfine * ms) / kTwoPi;
    std::optional<double> quoted;
    // Dual-frequency rotation values stated for the +-3/2 manifolds of P31 at 1 T.
    if (species.name == "P31" && b0_tesla == 1.0) {
      if (ms == 1.5) quoted = 204.5e6;
      if (ms == -1.5) quoted = 210.7e6;
    }
    out.push_back({"NMR m_S=" + format_m(ms), computed, closed, quoted});
  }
  return out;
}

namespace {

constexpr double kAllM[] = {1.5, 0.5, -0.5, -1.5};
constexpr double kQubitM[] = {1.5, -1.5};

StickSpectrum context_lines(const RegisterConfig& config, std::size_t site, int depth,
                            std::span<const double> allowed, bool polarize_rest, double nuclear_m) {
  const std::size_t n = config.size();
  if (site >= n) throw InvalidInput("site index out of range");
  if (depth < 1) throw InvalidInput("neighborhood depth must be at least 1");
  if (std::abs(nuclear_m) != 0.5) throw InvalidInput("nuclear m must be +-1/2");
  const ProductEnergyModel model(config);
  const auto& p = model.site(site);

  std::vector<std::size_t> enumerated;
  std::vector<std::size_t> rest;
  for (int d = 1; d <= depth; ++d) {
    const auto du = static_cast<std::size_t>(d);
    if (site >= du) enumerated.push_back(site - du);
    if (site + du < n) enumerated.push_back(site + du);
  }
  long double rest_shift = 0.0L;
  if (polarize_rest) {
    // Far electrons first so the small terms accumulate before the large ones.
    for (std::size_t dist = n; dist > static_cast<std::size_t>(depth); --dist) {
      if (site >= dist) rest_shift += 1.5L * model.coupling(site, site - dist);
      if (site + dist < n) rest_shift += 1.5L * model.coupling(site, site + dist);
    }
  }
  std::vector<double> d_enum;
  for (auto k : enumerated) d_enum.push_back(model.coupling(site, k));

  StickSpectrum spec;
  spec.config_hash = config_hash(config);
  spec.branch = "ESR";
  const double base = p.electron_larmor - p.hyperfine * nuclear_m;
  spec.reference_hz = base / kTwoPi;

  std::vector<std::size_t> digits(enumerated.size(), 0);
  const std::size_t radix = allowed.size();
  while (true) {
    long double nu = static_cast<long double>(base) + rest_shift;
    bool active = true;
    NeighborContext ctx;
    std::string label;
    for (std::size_t e = 0; e < enumerated.size(); ++e) {
      const double m = allowed[digits[e]];
      nu += static_cast<long double>(d_enum[e]) * m;
      active = active && std::abs(m) == 1.5;
      const auto k = enumerated[e];
      if (k + 1 == site) {
        ctx.left = m;
      } else if (k == site + 1) {
        ctx.right = m;
      } else {
        ctx.outer.push_back(m);
      }
      if (!label.empty()) label += ' ';
      label += "S" + std::to_string(k) + "=" + format_m(m);
    }
    TransitionLine line;
    line.frequency_hz = static_cast<double>(std::abs(nu) / static_cast<long double>(kTwoPi));
    line.sense = nu < 0 ? -1 : 1;
    line.branch = Branch::esr;
    line.site = static_cast<int>(site);
    line.active = active;
    line.labels.push_back(label.empty() ? "isolated" : label);
    line.contexts.push_back(std::move(ctx));
    spec.lines.push_back(std::move(line));

    std::size_t pos = 0;
    while (pos < digits.size() && ++digits[pos] == radix) digits[pos++] = 0;
    if (pos == digits.size()) break;
  }
  spec.normalize();
  return spec;
}

}  // namespace

StickSpectrum chain_electron_lines(const RegisterConfig& config, std::size_t site,
                                   NeighborModel model, double nuclear_m) {
  switch (model) {
    case NeighborModel::enumerate_all:
      return context_lines(config, site, 1, kAllM, false, nuclear_m);
    case NeighborModel::ideal:
      return context_lines(config, site, 1, kQubitM, false, nuclear_m);
    case NeighborModel::polarized_beyond_nn:
      return context_lines(config, site, 1, kAllM, true, nuclear_m);
  }
  throw InvalidInput("unknown neighbor model");
}

StickSpectrum neighborhood_lines(const RegisterConfig& config, std::size_t site, int depth,
                                 bool polarize_rest, double nuclear_m) {
  return context_lines(config, site, depth, kAllM, polarize_rest, nuclear_m);
}

NeighborTraces neighbor_traces(const RegisterConfig& config, std::size_t site) {
  if (config.range != CouplingRange::full) {
    throw InvalidInput("neighbor traces need the full coupling range");
  }
  NeighborTraces t;
  t.nearest = neighborhood_lines(config, site, 1, false);
  t.second = neighborhood_lines(config, site, 2, false);
  t.third = neighborhood_lines(config, site, 3, false);
  t.polarized = neighborhood_lines(config, site, 1, true);
  return t;
}

Frequency nonlocal_shift(const RegisterConfig& config, std::size_t site) {
  if (config.range != CouplingRange::full) {
    throw InvalidInput("nonlocal shift needs the full coupling range");
  }
  const std::size_t n = config.size();
  if (site >= n) throw InvalidInput("site index out of range");
  const ProductEnergyModel model(config);
  long double shift = 0.0L;
  for (std::size_t dist = n; dist >= 2; --dist) {
    if (site >= dist) shift += 1.5L * model.coupling(site, site - dist);
    if (site + dist < n) shift += 1.5L * model.coupling(site, site + dist);
  }
  return Frequency::from_rad_s(static_cast<double>(shift));
}

std::string config_hash(const RegisterConfig& config) {
  const std::string text = register_to_json(config).dump();
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
    h >>= 4;
  }
  return out;
}

std::string spectrum_csv(const StickSpectrum& spectrum) {
  auto lines = spectrum.lines;
  std::stable_sort(lines.begin(), lines.end(), [](const TransitionLine& a, const TransitionLine& b) {
    if (a.frequency_hz != b.frequency_hz) return a.frequency_hz < b.frequency_hz;
    return a.site < b.site;
  });
  std::ostringstream os;
  os << "frequency_hz,branch,site,degeneracy,active,labels\n";
  for (const auto& l : lines) {
    std::string labels;
    for (const auto& s : l.labels) {
      if (!labels.empty()) labels += ';';
      labels += s;
    }
    os << format_number(l.frequency_hz) << ',' << to_string(l.branch) << ',' << l.site << ','
       << l.degeneracy << ',' << (l.active ? 1 : 0) << ",\"" << labels << "\"\n";
  }
  return os.str();
}

std::string energies_csv(const std::vector<LabeledEnergy>& energies) {
  std::ostringstream os;
  os << "index,label,energy_hz\n";
  for (const auto& e : energies) {
    os << e.index << ",\"" << e.label << "\"," << format_number(e.energy.hz()) << '\n';
  }
  return os.str();
}

std::string spectrum_svg(const StickSpectrum& spectrum, const std::string& title) {
  constexpr double width = 800, height = 320, left = 60, right = 20, top = 40, bottom = 50;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  double lo = 0, hi = 1;
  int max_deg = 1;
  if (!spectrum.lines.empty()) {
    lo = hi = spectrum.lines.front().frequency_hz;
    for (const auto& l : spectrum.lines) {
      lo = std::min(lo, l.frequency_hz);
      hi = std::max(hi, l.frequency_hz);
      max_deg = std::max(max_deg, l.degeneracy);
    }
  }
  double span = hi - lo;
  if (span <= 0) span = std::max(1.0, std::abs(hi) * 1e-6);
  lo -= 0.05 * span;
  hi += 0.05 * span;
  const auto x_of = [&](double f) { return left + plot_w * (f - lo) / (hi - lo); };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<!-- peapod " << kVersion << " -->\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << left << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title
     << "</text>\n";
  const double axis_y = top + plot_h;
  os << "<line x1=\"" << left << "\" y1=\"" << axis_y << "\" x2=\"" << left + plot_w << "\" y2=\""
     << axis_y << "\" stroke=\"black\"/>\n";
  constexpr int ticks = 5;
  for (int t = 0; t <= ticks; ++t) {
    const double f = lo + (hi - lo) * t / ticks;
    const double x = x_of(f);
    os << "<line x1=\"" << format_fixed(x, 2) << "\" y1=\"" << axis_y << "\" x2=\""
       << format_fixed(x, 2) << "\" y2=\"" << axis_y + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << format_fixed(x, 2) << "\" y=\"" << axis_y + 20
       << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">"
       << format_fixed(f / 1e6, 3) << "</text>\n";
  }
  os << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 10
     << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">frequency (MHz)</text>\n";
  for (const auto& l : spectrum.lines) {
    const double x = x_of(l.frequency_hz);
    const double y = axis_y - plot_h * l.degeneracy / max_deg;
    os << "<line x1=\"" << format_fixed(x, 2) << "\" y1=\"" << axis_y << "\" x2=\""
       << format_fixed(x, 2) << "\" y2=\"" << format_fixed(y, 2) << "\" stroke=\""
       << (l.active ? "black" : "#999999") << "\" stroke-width=\"2\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace peapod
