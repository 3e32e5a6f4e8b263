#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "osqc/rng.hpp"

// Dense complex linear algebra for small multi-qubit registers.
//
// Conventions used throughout:
//   - qubit 0 is the leftmost tensor factor, i.e. the most significant bit
//     of a computational-basis index;
//   - registers hold at most 4 qubits (system + partner + two probe qubits);
//   - all types are immutable after construction.

namespace osqc {

inline constexpr int kMaxQubits = 4;
inline constexpr double kNormTol = 1e-12;
inline constexpr double kHermTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kBasisTol = 1e-10;

template <typename T>
using CVec = Eigen::Vector<std::complex<T>, Eigen::Dynamic>;
template <typename T>
using CMat = Eigen::Matrix<std::complex<T>, Eigen::Dynamic, Eigen::Dynamic>;

namespace detail {

// Tolerances are stated for double; wider scalars keep them, narrower ones
// scale with machine epsilon.
template <typename T>
constexpr T scaled_tol(double base) {
  const T floor_tol = T(100) * std::numeric_limits<T>::epsilon();
  const T b = static_cast<T>(base);
  return b > floor_tol ? b : floor_tol;
}

inline int qubits_for_dim(Eigen::Index dim, const char* what) {
  int n = 0;
  Eigen::Index d = 1;
  while (d < dim) {
    d <<= 1;
    ++n;
  }
  if (d != dim || n < 1) {
    throw std::invalid_argument(std::string(what) + ": dimension " +
                                std::to_string(dim) + " is not 2^n with n >= 1");
  }
  if (n > kMaxQubits) {
    throw std::invalid_argument(std::string(what) + ": " + std::to_string(n) +
                                " qubits exceeds the fixed register limit of " +
                                std::to_string(kMaxQubits));
  }
  return n;
}

// Bit of qubit q in basis index i for an n-qubit register (qubit 0 = MSB).
inline int bit_of(Eigen::Index i, int q, int n) {
  return static_cast<int>((i >> (n - 1 - q)) & 1);
}

}  // namespace detail

template <typename T = double>
class StateVector {
 public:
  using Scalar = T;
  using Complex = std::complex<T>;
  using Vector = CVec<T>;

  explicit StateVector(Vector amplitudes)
      : amplitudes_(std::move(amplitudes)),
        num_qubits_(detail::qubits_for_dim(amplitudes_.size(), "StateVector")) {
    const T norm2 = amplitudes_.squaredNorm();
    if (std::abs(norm2 - T(1)) > detail::scaled_tol<T>(kNormTol)) {
      throw std::invalid_argument("StateVector: squared norm " +
                                  std::to_string(static_cast<double>(norm2)) +
                                  " is not 1 within 1e-12");
    }
  }

  static StateVector normalized(Vector v) {
    const T n = v.norm();
    if (n <= T(0)) throw std::invalid_argument("StateVector: zero vector");
    return StateVector(Vector(v / n));
  }

  static StateVector basis(int num_qubits, int index) {
    if (num_qubits < 1 || num_qubits > kMaxQubits) {
      throw std::invalid_argument("StateVector::basis: bad qubit count");
    }
    Vector v = Vector::Zero(Eigen::Index(1) << num_qubits);
    v(index) = Complex(1);
    return StateVector(std::move(v));
  }

  int num_qubits() const { return num_qubits_; }
  Eigen::Index dim() const { return amplitudes_.size(); }
  const Vector& amplitudes() const { return amplitudes_; }
  Complex operator()(Eigen::Index i) const { return amplitudes_(i); }

 private:
  Vector amplitudes_;
  int num_qubits_;
};

template <typename T = double>
class DensityMatrix {
 public:
  using Scalar = T;
  using Complex = std::complex<T>;
  using Matrix = CMat<T>;

  explicit DensityMatrix(Matrix entries)
      : entries_(std::move(entries)),
        num_qubits_(detail::qubits_for_dim(entries_.rows(), "DensityMatrix")) {
    if (entries_.rows() != entries_.cols()) {
      throw std::invalid_argument("DensityMatrix: not square");
    }
    if ((entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() >
        detail::scaled_tol<T>(kHermTol)) {
      throw std::invalid_argument("DensityMatrix: not Hermitian within 1e-12");
    }
    if (std::abs(entries_.trace() - Complex(1)) > detail::scaled_tol<T>(kNormTol)) {
      throw std::invalid_argument("DensityMatrix: trace is not 1 within 1e-12");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(entries_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -detail::scaled_tol<T>(kPsdTol)) {
      throw std::invalid_argument("DensityMatrix: not positive semidefinite");
    }
  }

  explicit DensityMatrix(const StateVector<T>& psi)
      : entries_(psi.amplitudes() * psi.amplitudes().adjoint()),
        num_qubits_(psi.num_qubits()) {}

  static DensityMatrix maximally_mixed(int num_qubits) {
    const Eigen::Index d = Eigen::Index(1) << num_qubits;
    return DensityMatrix(Matrix(Matrix::Identity(d, d) / T(d)));
  }

  int num_qubits() const { return num_qubits_; }
  Eigen::Index dim() const { return entries_.rows(); }
  const Matrix& entries() const { return entries_; }

 private:
  Matrix entries_;
  int num_qubits_;
};

// A positive operator-valued measure: Hermitian PSD elements summing to I.
template <typename T = double>
struct Povm {
  std::vector<CMat<T>> elements;

  explicit Povm(std::vector<CMat<T>> elems) : elements(std::move(elems)) {
    if (elements.empty()) throw std::invalid_argument("Povm: no elements");
    const Eigen::Index d = elements.front().rows();
    CMat<T> sum = CMat<T>::Zero(d, d);
    for (const auto& m : elements) {
      if (m.rows() != d || m.cols() != d) {
        throw std::invalid_argument("Povm: element dimensions differ");
      }
      if ((m - m.adjoint()).cwiseAbs().maxCoeff() > detail::scaled_tol<T>(kPsdTol)) {
        throw std::invalid_argument("Povm: element not Hermitian");
      }
      Eigen::SelfAdjointEigenSolver<CMat<T>> es(m, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -detail::scaled_tol<T>(kPsdTol)) {
        throw std::invalid_argument("Povm: element not positive semidefinite");
      }
      sum += m;
    }
    if ((sum - CMat<T>::Identity(d, d)).cwiseAbs().maxCoeff() >
        detail::scaled_tol<T>(kPsdTol)) {
      throw std::invalid_argument("Povm: elements do not sum to identity");
    }
  }

  Eigen::Index dim() const { return elements.front().rows(); }
};

// A random reordering of particle indices {0..m-1} together with the seed it
// was drawn from. apply/invert move element i to mapping[i] and back.
class PermutationMap {
 public:
  PermutationMap(std::vector<int> mapping, std::uint64_t seed)
      : mapping_(std::move(mapping)), seed_(seed) {
    std::vector<int> seen(mapping_.size(), 0);
    for (int v : mapping_) {
      if (v < 0 || v >= static_cast<int>(mapping_.size()) || seen[v]++) {
        throw std::invalid_argument("PermutationMap: not a bijection");
      }
    }
  }

  static PermutationMap identity(int size) {
    std::vector<int> m(size);
    std::iota(m.begin(), m.end(), 0);
    return PermutationMap(std::move(m), 0);
  }

  static PermutationMap random(int size, Rng& rng) {
    std::vector<int> m(size);
    std::iota(m.begin(), m.end(), 0);
    for (int i = size - 1; i > 0; --i) {
      std::swap(m[i], m[rng.uniform_int(static_cast<std::uint64_t>(i) + 1)]);
    }
    return PermutationMap(std::move(m), rng.seed());
  }

  PermutationMap inverse() const {
    std::vector<int> inv(mapping_.size());
    for (std::size_t i = 0; i < mapping_.size(); ++i) inv[mapping_[i]] = int(i);
    return PermutationMap(std::move(inv), seed_);
  }

  int operator()(int i) const { return mapping_.at(i); }
  int size() const { return static_cast<int>(mapping_.size()); }
  std::uint64_t seed() const { return seed_; }
  const std::vector<int>& mapping() const { return mapping_; }

 private:
  std::vector<int> mapping_;
  std::uint64_t seed_;
};

// Reorders a list: the element at position i moves to position pi(i).
template <typename Item>
std::vector<Item> permute_particles(const std::vector<Item>& items,
                                    const PermutationMap& pi) {
  if (static_cast<int>(items.size()) != pi.size()) {
    throw std::invalid_argument("permute_particles: size mismatch");
  }
  std::vector<Item> out(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) out[pi(int(i))] = items[i];
  return out;
}

// ---------------------------------------------------------------------------
// Free operations
// ---------------------------------------------------------------------------

template <typename T>
StateVector<T> tensor(const StateVector<T>& a, const StateVector<T>& b) {
  if (a.num_qubits() + b.num_qubits() > kMaxQubits) {
    throw std::invalid_argument("tensor: combined register exceeds 4 qubits");
  }
  CVec<T> out(a.dim() * b.dim());
  for (Eigen::Index i = 0; i < a.dim(); ++i) {
    out.segment(i * b.dim(), b.dim()) = a(i) * b.amplitudes();
  }
  return StateVector<T>(std::move(out));
}

template <typename T>
DensityMatrix<T> tensor(const DensityMatrix<T>& a, const DensityMatrix<T>& b) {
  if (a.num_qubits() + b.num_qubits() > kMaxQubits) {
    throw std::invalid_argument("tensor: combined register exceeds 4 qubits");
  }
  CMat<T> out(a.dim() * b.dim(), a.dim() * b.dim());
  for (Eigen::Index i = 0; i < a.dim(); ++i) {
    for (Eigen::Index j = 0; j < a.dim(); ++j) {
      out.block(i * b.dim(), j * b.dim(), b.dim(), b.dim()) =
          a.entries()(i, j) * b.entries();
    }
  }
  return DensityMatrix<T>(std::move(out));
}

template <typename T>
bool is_unitary(const CMat<T>& u, T tol = T(-1)) {
  if (u.rows() != u.cols()) return false;
  if (tol < T(0)) tol = detail::scaled_tol<T>(kNormTol);
  return ((u.adjoint() * u) - CMat<T>::Identity(u.rows(), u.cols()))
             .cwiseAbs()
             .maxCoeff() <= tol * T(16);
}

// Embeds an operator acting on `targets` (in the given order) into the full
// n-qubit register.
template <typename T>
CMat<T> embed_operator(const CMat<T>& op, const std::vector<int>& targets,
                       int num_qubits) {
  const int k = static_cast<int>(targets.size());
  if (op.rows() != (Eigen::Index(1) << k)) {
    throw std::invalid_argument("embed_operator: operator/target size mismatch");
  }
  std::vector<int> seen(num_qubits, 0);
  for (int t : targets) {
    if (t < 0 || t >= num_qubits || seen[t]++) {
      throw std::invalid_argument("embed_operator: bad target index");
    }
  }
  const Eigen::Index dim = Eigen::Index(1) << num_qubits;
  CMat<T> full = CMat<T>::Zero(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      bool same = true;
      for (int q = 0; q < num_qubits && same; ++q) {
        if (std::find(targets.begin(), targets.end(), q) == targets.end() &&
            detail::bit_of(r, q, num_qubits) != detail::bit_of(c, q, num_qubits)) {
          same = false;
        }
      }
      if (!same) continue;
      Eigen::Index rt = 0, ct = 0;
      for (int j = 0; j < k; ++j) {
        rt = (rt << 1) | detail::bit_of(r, targets[j], num_qubits);
        ct = (ct << 1) | detail::bit_of(c, targets[j], num_qubits);
      }
      full(r, c) = op(rt, ct);
    }
  }
  return full;
}

template <typename T>
StateVector<T> apply_unitary(const StateVector<T>& psi, const CMat<T>& u,
                             const std::vector<int>& targets) {
  if (!is_unitary(u)) throw std::invalid_argument("apply_unitary: not unitary");
  const CMat<T> full = embed_operator(u, targets, psi.num_qubits());
  return StateVector<T>(CVec<T>(full * psi.amplitudes()));
}

template <typename T>
DensityMatrix<T> apply_unitary(const DensityMatrix<T>& rho, const CMat<T>& u,
                               const std::vector<int>& targets) {
  if (!is_unitary(u)) throw std::invalid_argument("apply_unitary: not unitary");
  const CMat<T> full = embed_operator(u, targets, rho.num_qubits());
  return DensityMatrix<T>(CMat<T>(full * rho.entries() * full.adjoint()));
}

// Reduced state on `keep` (result qubit order follows the order given).
template <typename T>
DensityMatrix<T> partial_trace(const DensityMatrix<T>& rho,
                               const std::vector<int>& keep) {
  const int n = rho.num_qubits();
  if (keep.empty()) throw std::invalid_argument("partial_trace: empty keep set");
  std::vector<int> seen(n, 0);
  for (int q : keep) {
    if (q < 0 || q >= n || seen[q]++) {
      throw std::invalid_argument("partial_trace: bad keep index");
    }
  }
  std::vector<int> traced;
  for (int q = 0; q < n; ++q) {
    if (std::find(keep.begin(), keep.end(), q) == keep.end()) traced.push_back(q);
  }
  const int k = static_cast<int>(keep.size());
  const int m = static_cast<int>(traced.size());
  const Eigen::Index dk = Eigen::Index(1) << k;
  const Eigen::Index dm = Eigen::Index(1) << m;
  auto full_index = [&](Eigen::Index kept_bits, Eigen::Index traced_bits) {
    Eigen::Index idx = 0;
    for (int j = 0; j < k; ++j) {
      if ((kept_bits >> (k - 1 - j)) & 1) idx |= Eigen::Index(1) << (n - 1 - keep[j]);
    }
    for (int j = 0; j < m; ++j) {
      if ((traced_bits >> (m - 1 - j)) & 1) idx |= Eigen::Index(1) << (n - 1 - traced[j]);
    }
    return idx;
  };
  CMat<T> out = CMat<T>::Zero(dk, dk);
  for (Eigen::Index r = 0; r < dk; ++r) {
    for (Eigen::Index c = 0; c < dk; ++c) {
      std::complex<T> s(0);
      for (Eigen::Index t = 0; t < dm; ++t) {
        s += rho.entries()(full_index(r, t), full_index(c, t));
      }
      out(r, c) = s;
    }
  }
  return DensityMatrix<T>(std::move(out));
}

template <typename T>
void check_orthonormal(const std::vector<StateVector<T>>& basis) {
  const Eigen::Index d = basis.front().dim();
  if (static_cast<Eigen::Index>(basis.size()) != d) {
    throw std::invalid_argument("basis: wrong number of vectors");
  }
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = 0; j < basis.size(); ++j) {
      const std::complex<T> g = basis[i].amplitudes().dot(basis[j].amplitudes());
      const T want = (i == j) ? T(1) : T(0);
      if (std::abs(g - std::complex<T>(want)) > detail::scaled_tol<T>(kBasisTol)) {
        throw std::invalid_argument("basis: not orthonormal within 1e-10");
      }
    }
  }
}

template <typename T>
std::vector<T> born_probabilities(const StateVector<T>& psi,
                                  const std::vector<StateVector<T>>& basis) {
  check_orthonormal(basis);
  std::vector<T> p(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) {
    p[k] = std::norm(basis[k].amplitudes().dot(psi.amplitudes()));
  }
  return p;
}

template <typename T>
struct MeasurementResult {
  int outcome;
  StateVector<T> post_state;
};

// Projective measurement in an orthonormal basis; outcome drawn from the
// given stream, post-state is the normalized projection.
template <typename T>
MeasurementResult<T> measure_projective(const StateVector<T>& psi,
                                        const std::vector<StateVector<T>>& basis,
                                        Rng& rng) {
  const std::vector<T> p = born_probabilities(psi, basis);
  const double x = rng.uniform();
  double acc = 0.0;
  int outcome = static_cast<int>(p.size()) - 1;
  for (std::size_t k = 0; k < p.size(); ++k) {
    acc += static_cast<double>(p[k]);
    if (x < acc) {
      outcome = static_cast<int>(k);
      break;
    }
  }
  const std::complex<T> amp = basis[outcome].amplitudes().dot(psi.amplitudes());
  CVec<T> post = basis[outcome].amplitudes() * (amp / std::abs(amp));
  return {outcome, StateVector<T>::normalized(std::move(post))};
}

template <typename T>
int measure_povm(const DensityMatrix<T>& rho, const Povm<T>& povm, Rng& rng) {
  if (povm.dim() != rho.dim()) {
    throw std::invalid_argument("measure_povm: dimension mismatch");
  }
  const double x = rng.uniform();
  double acc = 0.0;
  for (std::size_t k = 0; k < povm.elements.size(); ++k) {
    acc += static_cast<double>(
        std::real((povm.elements[k] * rho.entries()).trace()));
    if (x < acc) return static_cast<int>(k);
  }
  return static_cast<int>(povm.elements.size()) - 1;
}

template <typename T>
int measure_povm(const StateVector<T>& psi, const Povm<T>& povm, Rng& rng) {
  return measure_povm(DensityMatrix<T>(psi), povm, rng);
}

template <typename T>
T fidelity(const DensityMatrix<T>& rho, const StateVector<T>& psi) {
  if (rho.dim() != psi.dim()) {
    throw std::invalid_argument("fidelity: dimension mismatch");
  }
  const std::complex<T> v =
      psi.amplitudes().dot(rho.entries() * psi.amplitudes());
  return std::max(T(0), std::min(T(1), std::real(v)));
}

// ---------------------------------------------------------------------------
// Common states and gates
// ---------------------------------------------------------------------------

namespace gates {

template <typename T = double>
CMat<T> identity(Eigen::Index dim = 2) {
  return CMat<T>::Identity(dim, dim);
}

template <typename T = double>
CMat<T> pauli_x() {
  CMat<T> m(2, 2);
  m << std::complex<T>(0), std::complex<T>(1), std::complex<T>(1),
      std::complex<T>(0);
  return m;
}

template <typename T = double>
CMat<T> pauli_y() {
  CMat<T> m(2, 2);
  m << std::complex<T>(0), std::complex<T>(0, -1), std::complex<T>(0, 1),
      std::complex<T>(0);
  return m;
}

template <typename T = double>
CMat<T> pauli_z() {
  CMat<T> m(2, 2);
  m << std::complex<T>(1), std::complex<T>(0), std::complex<T>(0),
      std::complex<T>(-1);
  return m;
}

template <typename T = double>
CMat<T> hadamard() {
  const T s = T(1) / std::sqrt(T(2));
  CMat<T> m(2, 2);
  m << std::complex<T>(s), std::complex<T>(s), std::complex<T>(s),
      std::complex<T>(-s);
  return m;
}

// Dense-coding operations in transcript order: I, X, iY, Z encode 00,01,10,11.
template <typename T = double>
CMat<T> dense_coding_op(int symbol) {
  switch (symbol) {
    case 0: return identity<T>();
    case 1: return pauli_x<T>();
    case 2: return std::complex<T>(0, 1) * pauli_y<T>();
    case 3: return pauli_z<T>();
    default: throw std::invalid_argument("dense_coding_op: symbol out of range");
  }
}

}  // namespace gates

namespace states {

template <typename T = double>
StateVector<T> ket(int num_qubits, int index) {
  return StateVector<T>::basis(num_qubits, index);
}

// Coding states (|0> + (-1)^j |1>)/sqrt(2).
template <typename T = double>
StateVector<T> gv_coding(int j) {
  const T s = T(1) / std::sqrt(T(2));
  CVec<T> v(2);
  v << std::complex<T>(s), std::complex<T>(j ? -s : s);
  return StateVector<T>(std::move(v));
}

template <typename T = double>
StateVector<T> plus() {
  return gv_coding<T>(0);
}

template <typename T = double>
StateVector<T> minus() {
  return gv_coding<T>(1);
}

enum BellIndex { kPhiPlus = 0, kPhiMinus = 1, kPsiPlus = 2, kPsiMinus = 3 };

template <typename T = double>
StateVector<T> bell(int k) {
  const T s = T(1) / std::sqrt(T(2));
  CVec<T> v = CVec<T>::Zero(4);
  switch (k) {
    case kPhiPlus:  v(0) = s; v(3) = s; break;
    case kPhiMinus: v(0) = s; v(3) = -s; break;
    case kPsiPlus:  v(1) = s; v(2) = s; break;
    case kPsiMinus: v(1) = s; v(2) = -s; break;
    default: throw std::invalid_argument("bell: index out of range");
  }
  return StateVector<T>(std::move(v));
}

template <typename T = double>
std::vector<StateVector<T>> bell_basis() {
  return {bell<T>(0), bell<T>(1), bell<T>(2), bell<T>(3)};
}

template <typename T = double>
StateVector<T> ghz() {
  const T s = T(1) / std::sqrt(T(2));
  CVec<T> v = CVec<T>::Zero(8);
  v(0) = s;
  v(7) = s;
  return StateVector<T>(std::move(v));
}

template <typename T = double>
StateVector<T> w_state() {
  const T s = T(1) / std::sqrt(T(3));
  CVec<T> v = CVec<T>::Zero(8);
  v(1) = s;
  v(2) = s;
  v(4) = s;
  return StateVector<T>(std::move(v));
}

// Haar-random pure state: normalized vector of iid standard complex Gaussians.
template <typename T = double>
StateVector<T> haar_random(int num_qubits, Rng& rng) {
  CVec<T> v(Eigen::Index(1) << num_qubits);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = std::complex<T>(T(rng.normal()), T(rng.normal()));
  }
  return StateVector<T>::normalized(std::move(v));
}

// Haar-random unitary via QR of a complex Gaussian matrix.
template <typename T = double>
CMat<T> random_unitary(Eigen::Index dim, Rng& rng) {
  CMat<T> g(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      g(i, j) = std::complex<T>(T(rng.normal()), T(rng.normal()));
    }
  }
  Eigen::HouseholderQR<CMat<T>> qr(g);
  CMat<T> q = qr.householderQ();
  CMat<T> r = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < dim; ++j) {
    const std::complex<T> d = r(j, j);
    q.col(j) *= (std::abs(d) > T(0)) ? d / std::abs(d) : std::complex<T>(1);
  }
  return q;
}

// Random mixed state from a Haar pure state on a doubled register.
template <typename T = double>
DensityMatrix<T> random_mixed(int num_qubits, Rng& rng) {
  const Eigen::Index d = Eigen::Index(1) << num_qubits;
  CMat<T> g(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      g(i, j) = std::complex<T>(T(rng.normal()), T(rng.normal()));
    }
  }
  CMat<T> m = g * g.adjoint();
  m /= m.trace();
  return DensityMatrix<T>(CMat<T>((m + m.adjoint()) / T(2)));
}

}  // namespace states

}  // namespace osqc
