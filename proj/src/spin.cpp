#include "peapod/spin.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

#include "peapod/errors.hpp"

namespace peapod {

SpinValue SpinValue::from_twice(int twice_s) {
  if (twice_s < 1) throw InvalidInput("spin quantum number must be positive");
  return SpinValue(twice_s);
}

int SpinValue::index_of(double m) const {
  const double k = 0.5 * twice_ - m;
  const double rounded = std::round(k);
  if (std::abs(k - rounded) > 1e-9 || rounded < 0 || rounded > twice_) {
    throw InvalidInput("m = " + std::to_string(m) + " is not a valid projection for s = " +
                       std::to_string(value()));
  }
  return static_cast<int>(rounded);
}

std::string_view to_string(Role role) {
  switch (role) {
    case Role::electron: return "electron";
    case Role::nuclear: return "nuclear";
    case Role::mobile: return "mobile";
  }
  return "?";
}

std::string format_m(double m) {
  const long twice = std::lround(2.0 * m);
  std::string out = twice >= 0 ? "+" : "-";
  const long mag = twice >= 0 ? twice : -twice;
  if (mag % 2 == 0) {
    out += std::to_string(mag / 2);
  } else {
    out += std::to_string(mag) + "/2";
  }
  return out;
}

namespace {

auto canonical_key(const Subsystem& s) {
  const int mobile = s.ref.role == Role::mobile ? 1 : 0;
  const int role_rank = s.ref.role == Role::nuclear ? 1 : 0;
  return std::make_tuple(mobile, s.ref.site, role_rank);
}

char role_letter(Role role) {
  switch (role) {
    case Role::electron: return 'S';
    case Role::nuclear: return 'I';
    case Role::mobile: return 'M';
  }
  return '?';
}

}  // namespace

BasisLayout::BasisLayout(std::vector<Subsystem> parts) : parts_(std::move(parts)) {
  if (parts_.empty()) throw InvalidInput("basis layout needs at least one subsystem");
  std::stable_sort(parts_.begin(), parts_.end(), [](const Subsystem& a, const Subsystem& b) {
    return canonical_key(a) < canonical_key(b);
  });
  for (std::size_t i = 1; i < parts_.size(); ++i) {
    if (parts_[i].ref == parts_[i - 1].ref) {
      throw InvalidInput("duplicate subsystem in basis layout");
    }
  }
  strides_.assign(parts_.size(), 1);
  dimension_ = 1;
  for (std::size_t i = parts_.size(); i-- > 0;) {
    strides_[i] = dimension_;
    dimension_ *= static_cast<std::size_t>(parts_[i].spin.dim());
  }
}

BasisLayout BasisLayout::molecules(int count) {
  if (count < 1) throw InvalidInput("register needs at least one molecule");
  std::vector<Subsystem> parts;
  for (int site = 0; site < count; ++site) {
    parts.push_back({{site, Role::electron}, SpinValue::three_halves()});
    parts.push_back({{site, Role::nuclear}, SpinValue::half()});
  }
  return BasisLayout(std::move(parts));
}

std::optional<std::size_t> BasisLayout::find(SpinRef ref) const {
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (parts_[i].ref == ref) return i;
  }
  return std::nullopt;
}

std::size_t BasisLayout::slot(SpinRef ref) const {
  if (auto found = find(ref)) return *found;
  throw InvalidInput("unknown subsystem " + std::string(to_string(ref.role)) + " at site " +
                     std::to_string(ref.site));
}

std::size_t BasisLayout::index_from_digits(std::span<const int> digits) const {
  if (digits.size() != parts_.size()) throw InvalidInput("digit count does not match layout");
  std::size_t index = 0;
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (digits[i] < 0 || digits[i] >= parts_[i].spin.dim()) {
      throw InvalidInput("basis digit out of range");
    }
    index += static_cast<std::size_t>(digits[i]) * strides_[i];
  }
  return index;
}

std::size_t BasisLayout::index_from_m(std::span<const double> ms) const {
  if (ms.size() != parts_.size()) throw InvalidInput("m-value count does not match layout");
  std::vector<int> digits(parts_.size());
  for (std::size_t i = 0; i < parts_.size(); ++i) digits[i] = parts_[i].spin.index_of(ms[i]);
  return index_from_digits(digits);
}

std::string BasisLayout::label(std::size_t index) const {
  std::string out;
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (i) out += ' ';
    out += role_letter(parts_[i].ref.role);
    out += std::to_string(parts_[i].ref.site);
    out += '=';
    out += format_m(m(index, i));
  }
  return out;
}

bool BasisLayout::operator==(const BasisLayout& other) const {
  if (parts_.size() != other.parts_.size()) return false;
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (!(parts_[i].ref == other.parts_[i].ref) || !(parts_[i].spin == other.parts_[i].spin)) {
      return false;
    }
  }
  return true;
}

Operator::Operator(BasisLayout layout_in, Matrix matrix_in)
    : layout(std::move(layout_in)), matrix(std::move(matrix_in)) {
  const auto dim = static_cast<Eigen::Index>(layout.dimension());
  if (matrix.rows() != dim || matrix.cols() != dim) {
    throw InvalidInput("operator matrix does not match layout dimension");
  }
}

Operator Operator::identity(const BasisLayout& layout) {
  const auto dim = static_cast<Eigen::Index>(layout.dimension());
  return Operator(layout, Matrix::Identity(dim, dim));
}

double Operator::hermiticity_error() const {
  return (matrix - matrix.adjoint()).norm();
}

double Operator::unitarity_error() const {
  const auto dim = matrix.rows();
  return (matrix.adjoint() * matrix - Matrix::Identity(dim, dim)).norm();
}

Operator Operator::adjoint() const { return Operator(layout, matrix.adjoint()); }

Operator Operator::operator*(const Operator& rhs) const {
  if (!(layout == rhs.layout)) throw InvalidInput("operator layouts differ");
  return Operator(layout, matrix * rhs.matrix);
}

Operator Operator::operator+(const Operator& rhs) const {
  if (!(layout == rhs.layout)) throw InvalidInput("operator layouts differ");
  return Operator(layout, matrix + rhs.matrix);
}

StateVector::StateVector(BasisLayout layout_in, Vector amplitudes_in)
    : layout(std::move(layout_in)), amplitudes(std::move(amplitudes_in)) {
  if (amplitudes.size() != static_cast<Eigen::Index>(layout.dimension())) {
    throw InvalidInput("state vector does not match layout dimension");
  }
}

StateVector StateVector::basis(const BasisLayout& layout, std::size_t index) {
  if (index >= layout.dimension()) throw InvalidInput("basis index out of range");
  Vector amps = Vector::Zero(static_cast<Eigen::Index>(layout.dimension()));
  amps[static_cast<Eigen::Index>(index)] = 1.0;
  return StateVector(layout, std::move(amps));
}

bool StateVector::is_normalized(double tolerance) const {
  return std::abs(amplitudes.norm() - 1.0) <= tolerance;
}

Matrix spin_matrix(SpinValue s, Axis axis) {
  const int dim = s.dim();
  const double sv = s.value();
  Matrix plus = Matrix::Zero(dim, dim);
  // S+ |m> = sqrt(s(s+1) - m(m+1)) |m+1>; row k-1 holds m+1.
  for (int k = 1; k < dim; ++k) {
    const double m = s.m(k);
    plus(k - 1, k) = std::sqrt(sv * (sv + 1.0) - m * (m + 1.0));
  }
  switch (axis) {
    case Axis::plus: return plus;
    case Axis::minus: return plus.adjoint();
    case Axis::x: return 0.5 * (plus + plus.adjoint());
    case Axis::y: return cplx(0.0, -0.5) * (plus - plus.adjoint());
    case Axis::z: {
      Matrix z = Matrix::Zero(dim, dim);
      for (int k = 0; k < dim; ++k) z(k, k) = s.m(k);
      return z;
    }
  }
  throw InvalidInput("unknown spin axis");
}

namespace {

struct LocalIndexing {
  std::vector<std::size_t> slots;
  std::vector<int> dims;
  std::size_t local_dim = 1;
  std::vector<std::size_t> local_strides;

  LocalIndexing(std::span<const SpinRef> targets, const BasisLayout& layout) {
    for (const auto& ref : targets) {
      const auto slot = layout.slot(ref);
      if (std::find(slots.begin(), slots.end(), slot) != slots.end()) {
        throw InvalidInput("repeated target subsystem");
      }
      slots.push_back(slot);
      dims.push_back(layout.part(slot).spin.dim());
    }
    local_strides.assign(slots.size(), 1);
    for (std::size_t i = slots.size(); i-- > 0;) {
      local_strides[i] = local_dim;
      local_dim *= static_cast<std::size_t>(dims[i]);
    }
  }

  std::size_t local_index(std::size_t full, const BasisLayout& layout) const {
    std::size_t out = 0;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      out += static_cast<std::size_t>(layout.digit(full, slots[i])) * local_strides[i];
    }
    return out;
  }

  // Full index with all target digits replaced by the digits of `local`.
  std::size_t replace(std::size_t full, std::size_t local, const BasisLayout& layout) const {
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const auto stride = layout.stride(slots[i]);
      const auto old_digit = static_cast<std::size_t>(layout.digit(full, slots[i]));
      const auto new_digit = (local / local_strides[i]) % static_cast<std::size_t>(dims[i]);
      full = full - old_digit * stride + new_digit * stride;
    }
    return full;
  }
};

}  // namespace

Operator embed(const Matrix& local, SpinRef target, const BasisLayout& layout) {
  const SpinRef targets[] = {target};
  return embed(local, std::span<const SpinRef>(targets), layout);
}

Operator embed(const Matrix& local, std::span<const SpinRef> targets, const BasisLayout& layout) {
  const LocalIndexing idx(targets, layout);
  if (local.rows() != static_cast<Eigen::Index>(idx.local_dim) || local.cols() != local.rows()) {
    throw InvalidInput("local operator dimension does not match target subsystems");
  }
  const auto dim = layout.dimension();
  Matrix full = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t row = 0; row < dim; ++row) {
    const auto lr = idx.local_index(row, layout);
    for (std::size_t lc = 0; lc < idx.local_dim; ++lc) {
      const cplx v = local(static_cast<Eigen::Index>(lr), static_cast<Eigen::Index>(lc));
      if (v == cplx(0.0, 0.0)) continue;
      const auto col = idx.replace(row, lc, layout);
      full(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = v;
    }
  }
  return Operator(layout, std::move(full));
}

namespace {

template <typename Dense>
void apply_local_rows(const Matrix& local, std::span<const SpinRef> targets,
                      const BasisLayout& layout, Dense& rows) {
  const LocalIndexing idx(targets, layout);
  if (local.rows() != static_cast<Eigen::Index>(idx.local_dim) || local.cols() != local.rows()) {
    throw InvalidInput("local operator dimension does not match target subsystems");
  }
  if (rows.rows() != static_cast<Eigen::Index>(layout.dimension())) {
    throw InvalidInput("state dimension does not match layout");
  }
  const auto ld = static_cast<Eigen::Index>(idx.local_dim);
  std::vector<std::size_t> members(idx.local_dim);
  Matrix gathered(ld, rows.cols());
  for (std::size_t base = 0; base < layout.dimension(); ++base) {
    if (idx.local_index(base, layout) != 0) continue;
    for (std::size_t l = 0; l < idx.local_dim; ++l) {
      members[l] = idx.replace(base, l, layout);
      gathered.row(static_cast<Eigen::Index>(l)) = rows.row(static_cast<Eigen::Index>(members[l]));
    }
    const Matrix out = local * gathered;
    for (std::size_t l = 0; l < idx.local_dim; ++l) {
      rows.row(static_cast<Eigen::Index>(members[l])) = out.row(static_cast<Eigen::Index>(l));
    }
  }
}

}  // namespace

void apply_local(const Matrix& local, std::span<const SpinRef> targets, StateVector& state) {
  apply_local_rows(local, targets, state.layout, state.amplitudes);
}

void apply_local(const Matrix& local, std::span<const SpinRef> targets, const BasisLayout& layout,
                 Matrix& columns) {
  apply_local_rows(local, targets, layout, columns);
}

Matrix propagator(const Matrix& h, double t) {
  const auto dim = h.rows();
  if (h.cols() != dim) throw InvalidInput("propagator needs a square generator");
  const double scale = std::max(1.0, h.norm());
  if ((h - h.adjoint()).norm() > tol::hermitian * scale) {
    throw InvalidInput("propagator generator is not Hermitian");
  }
  const Matrix off = h - Matrix(h.diagonal().asDiagonal());
  if (off.isZero(0.0)) {
    Matrix u = Matrix::Zero(dim, dim);
    for (Eigen::Index k = 0; k < dim; ++k) u(k, k) = std::polar(1.0, -h(k, k).real() * t);
    return u;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  if (solver.info() != Eigen::Success) throw NumericalFailure("eigendecomposition failed");
  const Eigen::VectorXd& evals = solver.eigenvalues();
  Vector phases(dim);
  for (Eigen::Index k = 0; k < dim; ++k) phases[k] = std::polar(1.0, -evals[k] * t);
  const Matrix& vecs = solver.eigenvectors();
  return vecs * phases.asDiagonal() * vecs.adjoint();
}

Operator propagator(const Operator& hamiltonian, double t) {
  return Operator(hamiltonian.layout, propagator(hamiltonian.matrix, t));
}

double unitary_fidelity(const Operator& u, const Operator& v) {
  if (!(u.layout == v.layout)) throw InvalidInput("fidelity operands have different layouts");
  const cplx tr = (u.matrix.adjoint() * v.matrix).trace();
  return std::abs(tr) / static_cast<double>(u.dimension());
}

double unitary_fidelity(const Operator& u, const Operator& v, std::span<const std::size_t> subspace) {
  if (!(u.layout == v.layout)) throw InvalidInput("fidelity operands have different layouts");
  if (subspace.empty()) throw InvalidInput("fidelity subspace is empty");
  // tr(P U^dag V P) = sum_{a in S} <U e_a, V e_a>
  cplx tr = 0.0;
  for (auto a : subspace) {
    if (a >= u.dimension()) throw InvalidInput("subspace index out of range");
    const auto ai = static_cast<Eigen::Index>(a);
    tr += u.matrix.col(ai).dot(v.matrix.col(ai));
  }
  return std::abs(tr) / static_cast<double>(subspace.size());
}

}  // namespace peapod
