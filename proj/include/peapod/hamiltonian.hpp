#pragma once

// Secular spin Hamiltonians of the register, the mobile/caged readout pair,
// and thermal equilibrium populations.
//
// Sign convention: per molecule
//     E(m_S, m_I) = Omega_S m_S + Omega_I m_I - A m_S m_I,   Omega_I = gamma_I B (signed)
// which reproduces the tabulated single-molecule energies label for label.
// Dipolar terms enter as +D_ik m_i m_k.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "peapod/physics.hpp"
#include "peapod/spin.hpp"

namespace peapod {

/// coefficient * S_z(slot), rad/s
struct LinearTerm {
  std::size_t slot;
  double coefficient;
};

/// coefficient * S_z(a) S_z(b), rad/s
struct PairTerm {
  std::size_t a;
  std::size_t b;
  double coefficient;
};

struct ChainOptions {
  // Keep only dipolar pairs with |i - k| <= max_pair_distance (full range only).
  std::optional<std::size_t> max_pair_distance;
};

/// Diagonal (all z-type) register Hamiltonian in angular-frequency units.
class ChainHamiltonian {
 public:
  ChainHamiltonian(RegisterConfig config, BasisLayout layout, std::vector<LinearTerm> linear,
                   std::vector<PairTerm> pairs, Eigen::MatrixXd couplings);

  const RegisterConfig& config() const { return config_; }
  const BasisLayout& layout() const { return layout_; }
  const std::vector<LinearTerm>& linear_terms() const { return linear_; }
  const std::vector<PairTerm>& pair_terms() const { return pairs_; }
  /// D_{i,k} in rad/s over the retained pair set.
  const Eigen::MatrixXd& couplings() const { return couplings_; }
  std::size_t sites() const { return config_.size(); }

  double energy(std::size_t index) const;
  Eigen::VectorXd diagonal() const;
  /// Dense operator assembled from embedded spin operators.
  Operator op() const;

 private:
  RegisterConfig config_;
  BasisLayout layout_;
  std::vector<LinearTerm> linear_;
  std::vector<PairTerm> pairs_;
  Eigen::MatrixXd couplings_;
};

ChainHamiltonian build_single(const Constants& constants, double b0_tesla, const Species& species);
ChainHamiltonian build_chain(const RegisterConfig& config, ChainOptions options = {});

/// Per-site parameters shared by every energy evaluation.
struct SiteParameters {
  double electron_larmor;  // rad/s
  double nuclear_larmor;   // signed, rad/s
  double hyperfine;        // rad/s (enters as -A m_S m_I)
};

SiteParameters site_parameters(const RegisterConfig& config, std::size_t site);

/// Product-state energy bookkeeping for registers too long to hold a basis.
/// Couplings are evaluated on demand from site positions.
class ProductEnergyModel {
 public:
  explicit ProductEnergyModel(RegisterConfig config, ChainOptions options = {});

  std::size_t size() const { return config_.size(); }
  const RegisterConfig& config() const { return config_; }
  const SiteParameters& site(std::size_t i) const { return sites_.at(i); }
  double coupling(std::size_t i, std::size_t k) const;

  double energy(std::span<const double> electron_m, std::span<const double> nuclear_m) const;
  /// E after the electron at `site` moves m_from -> m_to minus E before.
  double electron_transition(std::size_t site, double m_from, double m_to, double nuclear_m,
                             std::span<const double> electron_m) const;
  double nuclear_transition(std::size_t site, double m_from, double m_to, double electron_m) const;

 private:
  RegisterConfig config_;
  ChainOptions options_;
  std::vector<SiteParameters> sites_;
};

/// Caged (S = 3/2, site 0) and mobile (S = 1/2) electrons coupled by D' S_z S_z.
Operator build_readout_pair(Frequency caged_larmor, Frequency mobile_larmor, Frequency d_prime);

struct ThermalState {
  BasisLayout layout;
  std::vector<double> populations;
  double temperature = 0;
  double field = 0;

  /// Total population with the given spin in projection m.
  double manifold_population(SpinRef ref, double m) const;
  /// Population of the lowest-energy manifold of the given spin.
  double ground_manifold_population(const ChainHamiltonian& h, SpinRef ref) const;
};

/// Boltzmann populations over the product basis; T may be +infinity.
ThermalState thermal_populations(const ChainHamiltonian& h, double temperature_kelvin);

}  // namespace peapod
