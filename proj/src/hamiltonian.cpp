#include "peapod/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "peapod/errors.hpp"

namespace peapod {

ChainHamiltonian::ChainHamiltonian(RegisterConfig config, BasisLayout layout,
                                   std::vector<LinearTerm> linear, std::vector<PairTerm> pairs,
                                   Eigen::MatrixXd couplings)
    : config_(std::move(config)),
      layout_(std::move(layout)),
      linear_(std::move(linear)),
      pairs_(std::move(pairs)),
      couplings_(std::move(couplings)) {}

double ChainHamiltonian::energy(std::size_t index) const {
  double e = 0.0;
  for (const auto& t : linear_) e += t.coefficient * layout_.m(index, t.slot);
  for (const auto& t : pairs_) e += t.coefficient * layout_.m(index, t.a) * layout_.m(index, t.b);
  return e;
}

Eigen::VectorXd ChainHamiltonian::diagonal() const {
  const auto dim = layout_.dimension();
  if (dim > kStateDimLimit) throw DimensionLimit("register too large for a diagonal");
  Eigen::VectorXd d(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) d[static_cast<Eigen::Index>(i)] = energy(i);
  return d;
}

Operator ChainHamiltonian::op() const {
  const auto dim = layout_.dimension();
  if (dim > kPropagatorDimLimit) {
    throw DimensionLimit("dense Hamiltonian of dimension " + std::to_string(dim) +
                         " exceeds the limit of " + std::to_string(kPropagatorDimLimit));
  }
  Operator h(layout_, Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));
  for (const auto& t : linear_) {
    const auto& part = layout_.part(t.slot);
    h.matrix += t.coefficient * embed(spin_matrix(part.spin, Axis::z), part.ref, layout_).matrix;
  }
  for (const auto& t : pairs_) {
    const auto& pa = layout_.part(t.a);
    const auto& pb = layout_.part(t.b);
    h.matrix += t.coefficient * (embed(spin_matrix(pa.spin, Axis::z), pa.ref, layout_).matrix *
                                 embed(spin_matrix(pb.spin, Axis::z), pb.ref, layout_).matrix);
  }
  return h;
}

SiteParameters site_parameters(const RegisterConfig& config, std::size_t site) {
  const double field = site_field(config, site);
  SiteParameters p;
  p.electron_larmor = electron_larmor(config.constants, field).rad_s();
  p.nuclear_larmor = nuclear_larmor(config.species, field).signed_value().rad_s();
  p.hyperfine = config.species.hyperfine.rad_s();
  return p;
}

namespace {

bool pair_retained(const RegisterConfig& config, const ChainOptions& options, std::size_t i,
                   std::size_t k) {
  const std::size_t dist = i > k ? i - k : k - i;
  if (dist == 0) return false;
  if (config.range == CouplingRange::nearest_neighbor) return dist == 1;
  return !options.max_pair_distance || dist <= *options.max_pair_distance;
}

}  // namespace

ChainHamiltonian build_chain(const RegisterConfig& config, ChainOptions options) {
  config.validate();
  const std::size_t n = config.size();
  // 8^n without overflow
  std::size_t dim = 1;
  for (std::size_t i = 0; i < n; ++i) {
    dim *= 8;
    if (dim > kStateDimLimit) {
      throw DimensionLimit("register of " + std::to_string(n) + " molecules exceeds the state limit");
    }
  }
  BasisLayout layout = BasisLayout::molecules(static_cast<int>(n));
  std::vector<LinearTerm> linear;
  std::vector<PairTerm> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = site_parameters(config, i);
    const auto e = layout.slot({static_cast<int>(i), Role::electron});
    const auto nu = layout.slot({static_cast<int>(i), Role::nuclear});
    linear.push_back({e, p.electron_larmor});
    linear.push_back({nu, p.nuclear_larmor});
    pairs.push_back({e, nu, -p.hyperfine});
  }
  Eigen::MatrixXd couplings = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                    static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i + 1; k < n; ++k) {
      if (!pair_retained(config, options, i, k)) continue;
      const double d = dipolar_coupling(config.constants,
                                        config.positions_m[k] - config.positions_m[i]).rad_s();
      couplings(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = d;
      couplings(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = d;
      pairs.push_back({layout.slot({static_cast<int>(i), Role::electron}),
                       layout.slot({static_cast<int>(k), Role::electron}), d});
    }
  }
  return ChainHamiltonian(config, std::move(layout), std::move(linear), std::move(pairs),
                          std::move(couplings));
}

ChainHamiltonian build_single(const Constants& constants, double b0_tesla, const Species& species) {
  if (!(b0_tesla > 0)) throw InvalidInput("B0 must be positive");
  return build_chain(RegisterConfig::uniform(constants, species, b0_tesla, 0.0, 1e-9, 1));
}

ProductEnergyModel::ProductEnergyModel(RegisterConfig config, ChainOptions options)
    : config_(std::move(config)), options_(options) {
  config_.validate();
  sites_.reserve(config_.size());
  for (std::size_t i = 0; i < config_.size(); ++i) sites_.push_back(site_parameters(config_, i));
}

double ProductEnergyModel::coupling(std::size_t i, std::size_t k) const {
  if (!pair_retained(config_, options_, i, k)) return 0.0;
  return dipolar_coupling(config_.constants,
                          std::abs(config_.positions_m[k] - config_.positions_m[i])).rad_s();
}

double ProductEnergyModel::energy(std::span<const double> electron_m,
                                  std::span<const double> nuclear_m) const {
  const std::size_t n = size();
  if (electron_m.size() != n || nuclear_m.size() != n) {
    throw InvalidInput("product state does not match register size");
  }
  double e = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = sites_[i];
    e += p.electron_larmor * electron_m[i] + p.nuclear_larmor * nuclear_m[i] -
         p.hyperfine * electron_m[i] * nuclear_m[i];
    for (std::size_t k = i + 1; k < n; ++k) e += coupling(i, k) * electron_m[i] * electron_m[k];
  }
  return e;
}

double ProductEnergyModel::electron_transition(std::size_t site, double m_from, double m_to,
                                               double nuclear_m,
                                               std::span<const double> electron_m) const {
  const std::size_t n = size();
  if (site >= n) throw InvalidInput("site index out of range");
  if (electron_m.size() != n) throw InvalidInput("electron state does not match register size");
  const double dm = m_to - m_from;
  const auto& p = sites_[site];
  double local_field = p.electron_larmor - p.hyperfine * nuclear_m;
  for (std::size_t k = 0; k < n; ++k) {
    if (k != site) local_field += coupling(site, k) * electron_m[k];
  }
  return dm * local_field;
}

double ProductEnergyModel::nuclear_transition(std::size_t site, double m_from, double m_to,
                                              double electron_m) const {
  const auto& p = sites_.at(site);
  return (m_to - m_from) * (p.nuclear_larmor - p.hyperfine * electron_m);
}

Operator build_readout_pair(Frequency caged_larmor, Frequency mobile_larmor, Frequency d_prime) {
  for (double v : {caged_larmor.rad_s(), mobile_larmor.rad_s(), d_prime.rad_s()}) {
    if (!std::isfinite(v)) throw InvalidInput("readout pair parameters must be finite");
  }
  const BasisLayout layout({{{0, Role::electron}, SpinValue::three_halves()},
                            {{0, Role::mobile}, SpinValue::half()}});
  const SpinRef caged{0, Role::electron};
  const SpinRef mobile{0, Role::mobile};
  const auto sz_c = embed(spin_matrix(SpinValue::three_halves(), Axis::z), caged, layout);
  const auto sz_m = embed(spin_matrix(SpinValue::half(), Axis::z), mobile, layout);
  Matrix h = caged_larmor.rad_s() * sz_c.matrix + mobile_larmor.rad_s() * sz_m.matrix +
             d_prime.rad_s() * (sz_c.matrix * sz_m.matrix);
  return Operator(layout, std::move(h));
}

double ThermalState::manifold_population(SpinRef ref, double m) const {
  const auto slot = layout.slot(ref);
  const int digit = layout.part(slot).spin.index_of(m);
  double total = 0.0;
  for (std::size_t i = 0; i < populations.size(); ++i) {
    if (layout.digit(i, slot) == digit) total += populations[i];
  }
  return total;
}

double ThermalState::ground_manifold_population(const ChainHamiltonian& h, SpinRef ref) const {
  std::size_t lowest = 0;
  double e_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < layout.dimension(); ++i) {
    const double e = h.energy(i);
    if (e < e_min) {
      e_min = e;
      lowest = i;
    }
  }
  return manifold_population(ref, layout.m(lowest, layout.slot(ref)));
}

ThermalState thermal_populations(const ChainHamiltonian& h, double temperature_kelvin) {
  if (!(temperature_kelvin > 0)) throw InvalidInput("temperature must be positive");
  const auto energies = h.diagonal();
  const auto& c = h.config().constants;
  // E (rad/s) * hbar / (kB T); zero for T = infinity.
  const double beta = std::isinf(temperature_kelvin) ? 0.0
                                                     : c.hbar() / (c.boltzmann * temperature_kelvin);
  const double e_min = energies.minCoeff();
  ThermalState out{h.layout(), {}, temperature_kelvin, h.config().b0_tesla};
  out.populations.resize(static_cast<std::size_t>(energies.size()));
  double z = 0.0;
  for (Eigen::Index i = 0; i < energies.size(); ++i) {
    const double w = std::exp(-beta * (energies[i] - e_min));
    out.populations[static_cast<std::size_t>(i)] = w;
    z += w;
  }
  for (auto& p : out.populations) p /= z;
  return out;
}

}  // namespace peapod
