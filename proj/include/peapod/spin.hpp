#pragma once

// Spin algebra over explicit tensor-product bases: angular momentum matrices,
// embedding of local operators, propagators and gate fidelity.

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "peapod/tolerance.hpp"

namespace peapod {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Spin quantum number, stored as 2s so half-integers stay exact.
class SpinValue {
 public:
  static SpinValue from_twice(int twice_s);
  static SpinValue half() { return SpinValue(1); }
  static SpinValue three_halves() { return SpinValue(3); }

  int twice() const { return twice_; }
  double value() const { return 0.5 * twice_; }
  int dim() const { return twice_ + 1; }

  /// m of the k-th basis state; k = 0 is m = +s (descending order).
  double m(int k) const { return 0.5 * (twice_ - 2 * k); }
  int index_of(double m) const;

  bool operator==(const SpinValue&) const = default;

 private:
  explicit SpinValue(int twice_s) : twice_(twice_s) {}
  int twice_;
};

enum class Role { electron, nuclear, mobile };

std::string_view to_string(Role role);

struct SpinRef {
  int site = 0;
  Role role = Role::electron;
  bool operator==(const SpinRef&) const = default;
};

struct Subsystem {
  SpinRef ref;
  SpinValue spin;
};

/// Ordered tensor-product layout. Subsystems are kept in canonical order:
/// site ascending with the electron before the nucleus, mobile spins last.
/// Within a subsystem, basis states run from m = +s down to m = -s.
class BasisLayout {
 public:
  explicit BasisLayout(std::vector<Subsystem> parts);

  /// `count` molecules, each an S = 3/2 electron and an I = 1/2 nucleus.
  static BasisLayout molecules(int count);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return parts_.size(); }
  const std::vector<Subsystem>& parts() const { return parts_; }
  const Subsystem& part(std::size_t slot) const { return parts_.at(slot); }

  std::optional<std::size_t> find(SpinRef ref) const;
  std::size_t slot(SpinRef ref) const;
  std::size_t stride(std::size_t slot) const { return strides_[slot]; }

  int digit(std::size_t index, std::size_t slot) const {
    return static_cast<int>((index / strides_[slot]) % parts_[slot].spin.dim());
  }
  double m(std::size_t index, std::size_t slot) const {
    return parts_[slot].spin.m(digit(index, slot));
  }
  std::size_t index_from_digits(std::span<const int> digits) const;
  std::size_t index_from_m(std::span<const double> ms) const;

  /// Human-readable label, e.g. "S0=+3/2 I0=-1/2".
  std::string label(std::size_t index) const;

  bool operator==(const BasisLayout& other) const;

 private:
  std::vector<Subsystem> parts_;
  std::vector<std::size_t> strides_;
  std::size_t dimension_ = 1;
};

std::string format_m(double m);

/// Dense operator over an explicit basis layout.
struct Operator {
  BasisLayout layout;
  Matrix matrix;

  Operator(BasisLayout layout, Matrix matrix);
  static Operator identity(const BasisLayout& layout);

  std::size_t dimension() const { return layout.dimension(); }
  double hermiticity_error() const;
  double unitarity_error() const;
  bool is_hermitian(double tolerance = tol::hermitian) const {
    return hermiticity_error() <= tolerance;
  }
  bool is_unitary(double tolerance = tol::unitary) const {
    return unitarity_error() <= tolerance;
  }

  Operator adjoint() const;
  Operator operator*(const Operator& rhs) const;
  Operator operator+(const Operator& rhs) const;
};

struct StateVector {
  BasisLayout layout;
  Vector amplitudes;

  StateVector(BasisLayout layout, Vector amplitudes);
  static StateVector basis(const BasisLayout& layout, std::size_t index);

  double norm() const { return amplitudes.norm(); }
  bool is_normalized(double tolerance = tol::normalization) const;
  double population(std::size_t index) const { return std::norm(amplitudes[index]); }
};

enum class Axis { x, y, z, plus, minus };

/// (2s+1)-dimensional angular momentum matrix in the descending-m basis.
Matrix spin_matrix(SpinValue s, Axis axis);

/// Local operator on one subsystem, identity on all others.
Operator embed(const Matrix& local, SpinRef target, const BasisLayout& layout);

/// Local operator on several subsystems; the first target is the most
/// significant factor of `local`.
Operator embed(const Matrix& local, std::span<const SpinRef> targets,
               const BasisLayout& layout);

/// Applies a local operator to a state in place without forming the full matrix.
void apply_local(const Matrix& local, std::span<const SpinRef> targets, StateVector& state);
/// Same, applied to every column of a dim x k block (e.g. a propagator).
void apply_local(const Matrix& local, std::span<const SpinRef> targets, const BasisLayout& layout,
                 Matrix& columns);

/// exp(-i H t) by unitary diagonalization. H must be Hermitian.
Operator propagator(const Operator& hamiltonian, double t);
Matrix propagator(const Matrix& hamiltonian, double t);

/// |tr(P U^dagger V P)| / dim(P) over the whole space.
double unitary_fidelity(const Operator& u, const Operator& v);
/// Same, restricted to the span of the listed basis states.
double unitary_fidelity(const Operator& u, const Operator& v,
                        std::span<const std::size_t> subspace);

}  // namespace peapod
