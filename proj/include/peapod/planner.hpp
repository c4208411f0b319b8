#pragma once

// Frequency-addressing feasibility of a register in a field gradient.
//
// Every electron contributes two hyperfine lines at Omega_S^i +- A/2, each
// widened to +-(3 D_nn + guard) to cover its neighbor-conditioned structure.

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "peapod/physics.hpp"

namespace peapod {

enum class AddressingScheme {
  lines,    // any two lines of different sites must not overlap
  channel,  // each site's doublet occupies its own band; no interleaving
};

std::string_view to_string(AddressingScheme scheme);
AddressingScheme addressing_scheme_from_string(std::string_view text);

struct LineInterval {
  int site;
  int line;  // +1 for Omega_S + A/2, -1 for Omega_S - A/2; 0 for a channel
  double center_hz;
  double low_hz;
  double high_hz;
};

struct LayoutSpec {
  RegisterConfig config;
  double guard_hz = 0;
  double d_nn_hz = 0;       // largest adjacent coupling
  double half_width_hz = 0;  // 3 D_nn + guard
  std::vector<LineInterval> intervals;
};

LayoutSpec spectral_layout(const RegisterConfig& config, double guard_hz);

struct PlanConstraints {
  double guard_hz = 0;
  double weak_coupling_threshold = 10.0;
  AddressingScheme scheme = AddressingScheme::lines;
};

struct Conflict {
  int site_a, line_a;
  int site_b, line_b;
  double gap_hz;  // center to center
};

struct WeakCouplingRatio {
  int site;  // pair (site, site + 1)
  double separation_hz;
  double coupling_hz;
  double ratio;
  bool ok;
};

struct NuclearGap {
  int site;  // pair (site, site + 1)
  double gap_hz;
  double min_duration_s;  // 1 / gap; infinite for a vanishing gap
};

struct PlanReport {
  AddressingScheme scheme = AddressingScheme::lines;
  double guard_hz = 0;
  double half_width_hz = 0;
  double threshold = 10.0;
  std::vector<LineInterval> intervals;
  std::vector<Conflict> conflicts;
  std::vector<WeakCouplingRatio> ratios;
  std::vector<NuclearGap> nuclear_gaps;
  std::optional<double> min_gap_hz;  // smallest cross-site center gap
  bool conflict_free = true;
  bool weak_coupling_ok = true;
  bool feasible() const { return conflict_free && weak_coupling_ok; }
};

std::vector<LineInterval> channel_intervals(const LayoutSpec& layout);

PlanReport check_overlap(const LayoutSpec& layout, double weak_coupling_threshold = 10.0,
                         AddressingScheme scheme = AddressingScheme::lines);
PlanReport plan(const RegisterConfig& config, const PlanConstraints& constraints = {});

std::vector<NuclearGap> nuclear_addressability(const RegisterConfig& config);

struct SearchBounds {
  double ceiling_hz = 2e9;   // largest adjacent separation tried
  double grid_ratio = 1.002;  // geometric scan step
  double relative_tolerance = 1e-9;
};

struct GradientSearchResult {
  double gradient_tesla_per_m = 0;
  double separation_hz = 0;
  RegisterConfig config;
  PlanReport report;
};

/// Smallest gradient at which the plan is feasible. The line scheme is not
/// monotone in the gradient, so it is scanned on a geometric grid with the
/// first feasible cell refined by bisection; the channel scheme is bisected.
GradientSearchResult min_gradient_search(std::size_t count, const Constants& constants,
                                         const Species& species, double b0_tesla, double spacing_m,
                                         const PlanConstraints& constraints = {},
                                         const SearchBounds& bounds = {});

nlohmann::json to_json(const PlanReport& report);
std::string to_text(const PlanReport& report);

}  // namespace peapod
