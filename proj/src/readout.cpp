#include "peapod/readout.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "peapod/errors.hpp"
#include "peapod/format.hpp"
#include "peapod/hamiltonian.hpp"
#include "peapod/pulse.hpp"

namespace peapod {

namespace {

constexpr double kCagedM[] = {1.5, 0.5, -0.5, -1.5};

bool probability(double p) { return p >= 0.0 && p <= 1.0; }

double u01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

void FilterSpec::validate() const {
  if (!probability(efficiency) || !probability(transmission)) {
    throw InvalidInput("filter efficiency and transmission must lie in [0, 1]");
  }
}

CagedDistribution CagedDistribution::pure(double m) {
  CagedDistribution d;
  d.p.at(static_cast<std::size_t>(SpinValue::three_halves().index_of(m))) = 1.0;
  return d;
}

void CagedDistribution::validate() const {
  double total = 0.0;
  for (double v : p) {
    if (!probability(v)) throw InvalidInput("caged-spin probabilities must lie in [0, 1]");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidInput("caged-spin distribution must sum to 1");
}

void ReadoutRun::validate() const {
  if (n < 1) throw InvalidInput("readout needs at least one electron");
  if (!std::isfinite(flip_angle)) throw InvalidInput("flip angle must be finite");
  filter_a.validate();
  filter_b.validate();
  if (filter_a.pass == filter_b.pass) {
    throw InvalidInput("filter B must pass the polarization filter A blocks");
  }
}

ReadoutSetup readout_setup(const RegisterConfig& config, int site, double mobile_distance_m) {
  if (site < 0 || static_cast<std::size_t>(site) >= config.size()) {
    throw InvalidInput("site index out of range");
  }
  const double field = site_field(config, static_cast<std::size_t>(site));
  ReadoutSetup s;
  s.caged_larmor = electron_larmor(config.constants, field);
  s.mobile_larmor = s.caged_larmor;
  s.d_prime = dipolar_coupling(config.constants, mobile_distance_m);
  s.pulse = s.mobile_larmor + 1.5 * s.d_prime;
  return s;
}

std::array<Frequency, 4> mobile_lines(const ReadoutSetup& setup) {
  const auto h = build_readout_pair(setup.caged_larmor, setup.mobile_larmor, setup.d_prime);
  const auto& layout = h.layout;
  std::array<Frequency, 4> out;
  for (std::size_t k = 0; k < 4; ++k) {
    const double up[] = {kCagedM[k], 0.5};
    const double down[] = {kCagedM[k], -0.5};
    const auto a = static_cast<Eigen::Index>(layout.index_from_m(up));
    const auto b = static_cast<Eigen::Index>(layout.index_from_m(down));
    out[k] = Frequency::from_rad_s(h.matrix(a, a).real() - h.matrix(b, b).real());
  }
  return out;
}

double detection_probability(double caged_m, const ReadoutRun& run, const ReadoutSetup& setup) {
  run.validate();
  const auto lines = mobile_lines(setup);
  const auto k = static_cast<std::size_t>(SpinValue::three_halves().index_of(caged_m));
  const bool resonant = std::abs(lines[k].hz() - setup.pulse.hz()) <= setup.window_hz;
  const double s = std::sin(0.5 * run.flip_angle);
  const double flip = resonant ? s * s : 0.0;
  const auto& a = run.filter_a;
  const auto& b = run.filter_b;
  // Polarization purity of electrons leaving A.
  const double passed = a.transmission + (1.0 - a.efficiency);
  const double purity = passed > 0 ? a.transmission / passed : 1.0;
  // B passes the polarization opposite to A: flipped good spins, unflipped bad ones.
  const double b_pol = purity * flip + (1.0 - purity) * (1.0 - flip);
  return b_pol * b.transmission + (1.0 - b_pol) * (1.0 - b.efficiency);
}

DetectorCounts readout_run(const CagedDistribution& caged, const ReadoutRun& run,
                           const ReadoutSetup& setup) {
  caged.validate();
  run.validate();
  std::mt19937_64 rng(run.seed);
  const double draw = u01(rng);
  double acc = 0.0;
  std::size_t pick = 3;
  for (std::size_t k = 0; k < 4; ++k) {
    acc += caged.p[k];
    if (draw < acc) {
      pick = k;
      break;
    }
  }
  while (caged.p[pick] == 0.0) --pick;  // rounding in the cumulative sum
  DetectorCounts out;
  out.seed = run.seed;
  out.n = run.n;
  out.caged_m = kCagedM[pick];
  out.p_expected = detection_probability(out.caged_m, run, setup);
  for (std::uint64_t e = 0; e < run.n; ++e) {
    if (u01(rng) < out.p_expected) ++out.counts;
  }
  out.p_hat = static_cast<double>(out.counts) / static_cast<double>(run.n);
  return out;
}

double discrimination_power(const ReadoutRun& run, Frequency d_prime, const PulseSegment& pulse) {
  if (!(d_prime.rad_s() > 0)) throw InvalidInput("D' must be positive");
  if (!(pulse.rabi_hz > 0)) throw InvalidInput("Rabi frequency must be positive");
  const auto rabi = Frequency::from_hz(pulse.rabi_hz);
  const double duration = std::abs(run.flip_angle) / rabi.rad_s();
  const double right = rabi_transfer(rabi, Frequency{}, duration);
  const double wrong = rabi_transfer(rabi, 3.0 * d_prime, duration);
  return right - wrong;
}

std::string readout_csv(const std::vector<DetectorCounts>& runs) {
  std::ostringstream os;
  os << "seed,n,counts,p_hat\n";
  for (const auto& r : runs) {
    os << r.seed << ',' << r.n << ',' << r.counts << ',' << format_number(r.p_hat) << '\n';
  }
  return os.str();
}

}  // namespace peapod
