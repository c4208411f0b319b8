#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "peapod/errors.hpp"
#include "peapod/planner.hpp"
#include "support.hpp"

using namespace peapod;

namespace {

const Constants& constants() { return builtin_defaults().constants; }
const Species& species(const char* name) { return builtin_defaults().species_named(name); }

RegisterConfig at_separation(const char* name, double separation_hz, std::size_t n) {
  const double g = gradient_for_separation(constants(), Frequency::from_hz(separation_hz), 2.91e-9);
  return RegisterConfig::uniform(constants(), species(name), 1.0, g, 2.91e-9, n);
}

// Brute-force oracle: every cross-site pair of intervals.
std::size_t count_overlaps(const std::vector<LineInterval>& v) {
  std::size_t n = 0;
  for (std::size_t a = 0; a < v.size(); ++a) {
    for (std::size_t b = a + 1; b < v.size(); ++b) {
      if (v[a].site != v[b].site && v[a].low_hz < v[b].high_hz && v[b].low_hz < v[a].high_hz) ++n;
    }
  }
  return n;
}

const LineInterval& find(const std::vector<LineInterval>& v, int site, int line) {
  return *std::find_if(v.begin(), v.end(), [&](const auto& x) { return x.site == site && x.line == line; });
}

}  // namespace

TEST_CASE("single molecule layout") {
  const auto cfg = RegisterConfig::uniform(constants(), species("P31"), 1.0, 0.0, 2.91e-9, 1);
  const auto layout = spectral_layout(cfg, 0.0);
  REQUIRE(layout.intervals.size() == 2);
  const auto& up = find(layout.intervals, 0, 1);
  const auto& dn = find(layout.intervals, 0, -1);
  CHECK(std::abs(up.center_hz - dn.center_hz - 138.4e6) < 1e-3);
  CHECK(dn.high_hz < up.low_hz);
  CHECK(layout.d_nn_hz == 0.0);
  const auto report = plan(cfg);
  CHECK(report.feasible());
  CHECK(report.conflicts.empty());
  CHECK(!report.min_gap_hz);
  CHECK(report.nuclear_gaps.empty());
}

TEST_CASE("45 MHz phosphorus chain: three fit, four collide") {
  const auto three = at_separation("P31", 45e6, 3);
  const auto layout = spectral_layout(three, 0.0);
  CHECK(layout.intervals.size() == 6);
  const double d = coupling(three, 0, 1).hz();
  CHECK(std::abs(layout.half_width_hz - 3 * d) < 1e-6);
  CHECK(std::abs(d - 2.11e6) < 0.02e6);
  const double c0 = 0.5 * (find(layout.intervals, 0, 1).center_hz + find(layout.intervals, 0, -1).center_hz);
  // Site 2's lower line lands 20.8 MHz above site 0's center.
  CHECK(std::abs(find(layout.intervals, 2, -1).center_hz - c0 - 20.8e6) < 1e3);
  const auto r3 = plan(three);
  CHECK(r3.feasible());
  CHECK(r3.conflicts.empty());
  CHECK(count_overlaps(r3.intervals) == 0);
  REQUIRE(r3.min_gap_hz);
  CHECK(std::abs(*r3.min_gap_hz - 45e6) < 1.0);

  const auto four = at_separation("P31", 45e6, 4);
  const auto r4 = plan(four);
  CHECK(!r4.feasible());
  CHECK(r4.weak_coupling_ok);
  REQUIRE(r4.conflicts.size() == 1);
  const auto& c = r4.conflicts[0];
  CHECK(c.site_a == 0);
  CHECK(c.line_a == 1);
  CHECK(c.site_b == 3);
  CHECK(c.line_b == -1);
  CHECK(std::abs(c.gap_hz - 3.4e6) < 1e3);
  CHECK(count_overlaps(r4.intervals) == 1);

  // The guard band stays below the verdict-changing value.
  CHECK(plan(three, {15e6}).feasible());
  CHECK(!plan(three, {17e6}).feasible());
}

TEST_CASE("55 MHz five-molecule schemes are conflict-free") {
  const auto b = plan(at_separation("P31", 55e6, 5));
  CHECK(b.feasible());
  CHECK(count_overlaps(b.intervals) == 0);
  REQUIRE(b.min_gap_hz);
  CHECK(std::abs(*b.min_gap_hz - 26.6e6) < 0.05e6);

  const auto n15 = at_separation("N15", 55e6, 5);
  for (auto scheme : {AddressingScheme::lines, AddressingScheme::channel}) {
    PlanConstraints pc;
    pc.scheme = scheme;
    const auto c = plan(n15, pc);
    CAPTURE(to_string(scheme));
    CHECK(c.feasible());
    CHECK(count_overlaps(c.intervals) == 0);
  }
  // Doublet 21.2 MHz wide sits inside its 55 MHz channel.
  const auto layout = spectral_layout(n15, 0.0);
  const auto ch = channel_intervals(layout);
  REQUIRE(ch.size() == 5);
  for (const auto& band : ch) {
    CHECK(band.line == 0);
    CHECK(band.high_hz - band.low_hz < 55e6);
    const auto& up = find(layout.intervals, band.site, 1);
    const auto& dn = find(layout.intervals, band.site, -1);
    CHECK(std::abs(std::abs(up.center_hz - dn.center_hz) - 21.2e6) < 1e-3);
  }
}

TEST_CASE("zero gradient overlaps everything") {
  const auto cfg = RegisterConfig::uniform(constants(), species("P31"), 1.0, 0.0, 2.91e-9, 2);
  const auto r = plan(cfg);
  CHECK(!r.feasible());
  CHECK(!r.weak_coupling_ok);
  CHECK(r.conflicts.size() == 2);
  for (const auto& c : r.conflicts) CHECK(c.gap_hz == 0.0);
  REQUIRE(r.nuclear_gaps.size() == 1);
  CHECK(r.nuclear_gaps[0].gap_hz == 0.0);
  CHECK(std::isinf(r.nuclear_gaps[0].min_duration_s));
}

TEST_CASE("nuclear addressability at 4e5 T/m") {
  const auto p = RegisterConfig::uniform(constants(), species("P31"), 1.0, 4e5, 2.91e-9, 3);
  const auto n = RegisterConfig::uniform(constants(), species("N15"), 1.0, 4e5, 2.91e-9, 3);
  for (const auto& g : nuclear_addressability(p)) {
    CHECK(std::abs(g.gap_hz - 20e3) < 0.05 * 20e3);
    CHECK(std::abs(g.min_duration_s * g.gap_hz - 1.0) < 1e-12);
  }
  for (const auto& g : nuclear_addressability(n)) CHECK(std::abs(g.gap_hz - 5e3) < 0.05 * 5e3);
  CHECK(nuclear_addressability(p).size() == 2);
}

TEST_CASE("layout properties") {
  peapod::testing::Gen gen(17);
  for (int trial = 0; trial < 30; ++trial) {
    const auto n = static_cast<std::size_t>(gen.integer(2, 6));
    const double sep = gen.uniform(5e6, 200e6);
    const auto cfg = at_separation(gen.integer(0, 1) ? "P31" : "N15", sep, n);
    const auto r = plan(cfg);
    // Verdict matches the brute-force oracle.
    CHECK(r.conflicts.size() == count_overlaps(r.intervals));
    CHECK(r.conflict_free == r.conflicts.empty());

    // A common field offset translates the layout without changing the verdict.
    auto shifted = cfg;
    shifted.b0_tesla += gen.uniform(0.01, 0.5);
    const auto rs = plan(shifted);
    CHECK(rs.conflicts.size() == r.conflicts.size());
    CHECK(rs.feasible() == r.feasible());

    // Mirrored positions give the mirrored spectrum: same conflict count.
    auto mirrored = cfg;
    mirrored.gradient_tesla_per_m = -cfg.gradient_tesla_per_m;
    mirrored.b0_tesla = 2.0;
    auto reference = cfg;
    reference.b0_tesla = 2.0;
    CHECK(plan(mirrored).conflicts.size() == plan(reference).conflicts.size());

    // A wider guard never removes a conflict.
    std::size_t previous = 0;
    for (double guard : {0.0, 1e6, 5e6, 20e6}) {
      PlanConstraints pc;
      pc.guard_hz = guard;
      const auto count = plan(cfg, pc).conflicts.size();
      CHECK(count >= previous);
      previous = count;
    }
  }
}

TEST_CASE("channel feasibility is monotone in the gradient") {
  PlanConstraints pc;
  pc.scheme = AddressingScheme::channel;
  bool seen = false;
  for (double sep = 1e6; sep < 300e6; sep *= 1.05) {
    const bool ok = plan(at_separation("N15", sep, 5), pc).feasible();
    if (seen) CHECK(ok);
    seen = seen || ok;
  }
  CHECK(seen);
}

TEST_CASE("minimal gradient search") {
  const auto p = min_gradient_search(5, constants(), species("P31"), 1.0, 2.91e-9);
  CHECK(p.report.feasible());
  const double d = coupling(p.config, 0, 1).hz();
  CHECK(std::abs(p.separation_hz - 10 * d) < 1e-6 * d);
  // One percent less violates the weak-coupling floor.
  auto below = p.config;
  below.gradient_tesla_per_m *= 0.99;
  CHECK(!plan(below).feasible());

  PlanConstraints pc;
  pc.scheme = AddressingScheme::channel;
  const auto n = min_gradient_search(5, constants(), species("N15"), 1.0, 2.91e-9, pc);
  CHECK(n.report.feasible());
  CHECK(std::abs(n.separation_hz - 33.8712e6) < 1e3);
  auto lower = n.config;
  lower.gradient_tesla_per_m *= 0.99;
  CHECK(!plan(lower, pc).feasible());

  // A guard wide enough to force interleaving in the line scheme.
  PlanConstraints guarded;
  guarded.guard_hz = 8e6;
  const auto g = min_gradient_search(4, constants(), species("P31"), 1.0, 2.91e-9, guarded);
  CHECK(g.report.feasible());
  bool any_infeasible_below = false;
  for (double f : {0.99, 0.95, 0.9}) {
    auto c = g.config;
    c.gradient_tesla_per_m *= f;
    any_infeasible_below = any_infeasible_below || !plan(c, guarded).feasible();
  }
  CHECK(any_infeasible_below);
  auto c = g.config;
  c.gradient_tesla_per_m *= 0.99;
  CHECK(!plan(c, guarded).feasible());

  SearchBounds tight;
  tight.ceiling_hz = 5e6;
  CHECK_THROWS_AS(min_gradient_search(5, constants(), species("P31"), 1.0, 2.91e-9, {}, tight), Infeasible);
}

TEST_CASE("report exports") {
  const auto r = plan(at_separation("P31", 45e6, 4));
  const auto j = to_json(r);
  CHECK(j["conflicts"].size() == 1);
  CHECK(j["feasible"] == false);
  CHECK(to_json(r).dump() == j.dump());
  const auto text = to_text(r);
  CHECK(text.find("conflict") != std::string::npos);
  CHECK(addressing_scheme_from_string("channel") == AddressingScheme::channel);
  CHECK_THROWS_AS(addressing_scheme_from_string("tdm"), InvalidInput);
}
