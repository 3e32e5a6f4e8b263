#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "osqc/qstate.hpp"

// Classical and quantum information measures. Logarithms are base 2
// throughout; every returned quantity is in bits.

namespace osqc {

template <typename T = double>
class ProbDist {
 public:
  explicit ProbDist(std::vector<T> p) : p_(std::move(p)) {
    T sum = 0;
    for (T x : p_) {
      if (x < T(0)) throw std::invalid_argument("ProbDist: negative entry");
      sum += x;
    }
    if (std::abs(sum - T(1)) > T(kNormTol)) {
      throw std::invalid_argument("ProbDist: probabilities do not sum to 1");
    }
  }
  const std::vector<T>& probabilities() const { return p_; }
  std::size_t size() const { return p_.size(); }

 private:
  std::vector<T> p_;
};

template <typename T>
T binary_entropy(T p) {
  if (p < T(0) || p > T(1)) {
    throw std::invalid_argument("binary_entropy: argument outside [0,1]");
  }
  T h = 0;
  for (T q : {p, T(1) - p}) {
    if (q > T(0)) h -= q * std::log2(q);
  }
  return h;
}

template <typename T>
T shannon_entropy(const ProbDist<T>& dist) {
  T h = 0;
  for (T p : dist.probabilities()) {
    if (p > T(0)) h -= p * std::log2(p);
  }
  return h;
}

// Relative entropy of the distribution with respect to uniform,
// H(m || 1/d) = log2(d) - H(m): how far the outcomes are from ignorance.
template <typename T>
T entropic_knowledge(const ProbDist<T>& dist) {
  return std::log2(T(dist.size())) - shannon_entropy(dist);
}

template <typename T>
T von_neumann_entropy(const DensityMatrix<T>& rho) {
  Eigen::SelfAdjointEigenSolver<CMat<T>> es(rho.entries(),
                                            Eigen::EigenvaluesOnly);
  T h = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const T lambda = es.eigenvalues()(i);
    if (lambda > T(1e-14)) h -= lambda * std::log2(lambda);
  }
  return h;
}

// chi = S(sum_i p_i rho_i) - sum_i p_i S(rho_i).
template <typename T>
T holevo_bound(const std::vector<std::pair<T, DensityMatrix<T>>>& ensemble) {
  if (ensemble.empty()) throw std::invalid_argument("holevo_bound: empty ensemble");
  const Eigen::Index d = ensemble.front().second.dim();
  std::vector<T> probs;
  CMat<T> avg = CMat<T>::Zero(d, d);
  T avg_entropy = 0;
  for (const auto& [p, rho] : ensemble) {
    if (rho.dim() != d) {
      throw std::invalid_argument("holevo_bound: dimension mismatch");
    }
    probs.push_back(p);
    avg += p * rho.entries();
    avg_entropy += p * von_neumann_entropy(rho);
  }
  ProbDist<T> check(std::move(probs));  // validates the prior
  return von_neumann_entropy(DensityMatrix<T>(std::move(avg))) - avg_entropy;
}

// Information through a binary symmetric channel with flip probability e.
// Dense-coding protocols are scored as independent bit-channels, so callers
// apply this per bit and sum.
template <typename T>
T mutual_information_binary(T e) {
  if (e < T(0) || e > T(1)) {
    throw std::invalid_argument("mutual_information_binary: error outside [0,1]");
  }
  return T(1) - binary_entropy(e);
}

// ---------------------------------------------------------------------------
// Duality
// ---------------------------------------------------------------------------

// Which-path distinguishability P and coherence C. P + C = 1 for pure probe
// states and P + C <= 1 in general.
template <typename T = double>
struct DualityPair {
  T distinguishability;
  T coherence;

  DualityPair(T p, T c) : distinguishability(p), coherence(c) {
    if (p < -T(kPsdTol) || p > T(1) + T(kPsdTol) || c < -T(kPsdTol) ||
        c > T(1) + T(kPsdTol)) {
      throw std::invalid_argument("DualityPair: value outside [0,1]");
    }
    if (p + c > T(1) + T(kPsdTol)) {
      throw std::invalid_argument("DualityPair: P + C exceeds 1");
    }
  }
};

// Pure probe branches u = C0|R>, d = C1|R>: P = 1 - |<u|d>|, C = |<u|d>|.
template <typename T>
DualityPair<T> duality_quantities(const StateVector<T>& u,
                                  const StateVector<T>& d) {
  if (u.dim() != d.dim()) {
    throw std::invalid_argument("duality_quantities: dimension mismatch");
  }
  const T overlap = std::abs(u.amplitudes().dot(d.amplitudes()));
  return DualityPair<T>(T(1) - overlap, overlap);
}

template <typename T>
CMat<T> matrix_sqrt_psd(const CMat<T>& m) {
  Eigen::SelfAdjointEigenSolver<CMat<T>> es(m);
  CVec<T> s(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    s(i) = std::sqrt(std::max(T(0), es.eigenvalues()(i)));
  }
  return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
}

// Uhlmann fidelity F = Tr sqrt(sqrt(rho) sigma sqrt(rho)); for pure states
// this reduces to |<a|b>|.
template <typename T>
T fidelity_mixed(const DensityMatrix<T>& rho, const DensityMatrix<T>& sigma) {
  const CMat<T> sr = matrix_sqrt_psd(rho.entries());
  const CMat<T> inner = sr * sigma.entries() * sr;
  Eigen::SelfAdjointEigenSolver<CMat<T>> es(inner, Eigen::EigenvaluesOnly);
  T f = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    f += std::sqrt(std::max(T(0), es.eigenvalues()(i)));
  }
  return std::min(f, T(1));
}

// Duality pair for a probe prepared in a mixed state. The conclusive
// discrimination probability of the two probe branches is bounded by
// 1 - F(rho_u, rho_d), and the system coherence is |Tr(C1^dag C0 rho)|;
// the pair satisfies P + C <= 1 with equality in the pure case.
template <typename T>
DualityPair<T> duality_quantities_mixed(const CMat<T>& c0, const CMat<T>& c1,
                                        const DensityMatrix<T>& probe) {
  if (!is_unitary(c0) || !is_unitary(c1)) {
    throw std::invalid_argument("duality_quantities_mixed: branch not unitary");
  }
  const DensityMatrix<T> rho_u(CMat<T>(c0 * probe.entries() * c0.adjoint()));
  const DensityMatrix<T> rho_d(CMat<T>(c1 * probe.entries() * c1.adjoint()));
  const T p = T(1) - fidelity_mixed(rho_u, rho_d);
  const T c = std::abs((c1.adjoint() * c0 * probe.entries()).trace());
  return DualityPair<T>(std::max(T(0), p), c);
}

// ---------------------------------------------------------------------------
// Entanglement measures
// ---------------------------------------------------------------------------

// Pure two-qubit concurrence from the Bell expansion c = |sum_j a_j^2| in the
// phase convention {Phi+, i Phi-, i Psi+, Psi-} that makes the formula agree
// with the spin-flip definition.
template <typename T>
T concurrence_pure(const StateVector<T>& psi) {
  if (psi.num_qubits() != 2) {
    throw std::invalid_argument("concurrence_pure: needs a 2-qubit state");
  }
  const std::complex<T> i(0, 1);
  std::vector<CVec<T>> basis;
  basis.push_back(states::bell<T>(states::kPhiPlus).amplitudes());
  basis.push_back(i * states::bell<T>(states::kPhiMinus).amplitudes());
  basis.push_back(i * states::bell<T>(states::kPsiPlus).amplitudes());
  basis.push_back(states::bell<T>(states::kPsiMinus).amplitudes());
  std::complex<T> sum(0);
  for (const auto& b : basis) {
    const std::complex<T> a = b.dot(psi.amplitudes());
    sum += a * a;
  }
  return std::min(T(1), std::abs(sum));
}

// Wootters concurrence for a (possibly mixed) two-qubit state.
template <typename T>
T concurrence(const DensityMatrix<T>& rho) {
  if (rho.num_qubits() != 2) {
    throw std::invalid_argument("concurrence: needs a 2-qubit state");
  }
  CMat<T> yy(4, 4);
  yy.setZero();
  yy(0, 3) = std::complex<T>(-1);
  yy(1, 2) = std::complex<T>(1);
  yy(2, 1) = std::complex<T>(1);
  yy(3, 0) = std::complex<T>(-1);
  const CMat<T> tilde = yy * rho.entries().conjugate() * yy;
  Eigen::ComplexEigenSolver<CMat<T>> es(rho.entries() * tilde);
  std::vector<T> lambdas;
  for (Eigen::Index i = 0; i < 4; ++i) {
    lambdas.push_back(std::sqrt(std::max(T(0), std::real(es.eigenvalues()(i)))));
  }
  std::sort(lambdas.begin(), lambdas.end(), std::greater<T>());
  return std::max(T(0), lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]);
}

// Tangle: squared concurrence.
template <typename T>
T tangle(const DensityMatrix<T>& rho) {
  const T c = concurrence(rho);
  return c * c;
}

// Entanglement of formation from a concurrence value.
template <typename T>
T entanglement_of_formation(T c) {
  if (c < T(0) || c > T(1)) {
    throw std::invalid_argument("entanglement_of_formation: c outside [0,1]");
  }
  return binary_entropy(T(0.5) + T(0.5) * std::sqrt(T(1) - c * c));
}

template <typename T = double>
struct MonogamyTriple {
  T tangle_ab;   // E(A|B)
  T tangle_ae;   // E(A|E)
  T tangle_abe;  // E(A|BE) = 4 det(rho_A) for pure states

  T residual() const { return tangle_abe - tangle_ab - tangle_ae; }
  bool satisfied(T slack = T(1e-9)) const {
    return tangle_ab + tangle_ae <= tangle_abe + slack;
  }
};

template <typename T>
MonogamyTriple<T> monogamy_triple(const StateVector<T>& psi) {
  if (psi.num_qubits() != 3) {
    throw std::invalid_argument("monogamy_triple: needs a 3-qubit state");
  }
  const DensityMatrix<T> rho(psi);
  const DensityMatrix<T> rho_a = partial_trace(rho, {0});
  const T det_a = std::real(
      rho_a.entries()(0, 0) * rho_a.entries()(1, 1) -
      rho_a.entries()(0, 1) * rho_a.entries()(1, 0));
  return MonogamyTriple<T>{tangle(partial_trace(rho, {0, 1})),
                           tangle(partial_trace(rho, {0, 2})),
                           T(4) * det_a};
}

// Residual three-party entanglement tau = E(A|BE) - E(A|B) - E(A|E).
template <typename T>
T three_tangle(const StateVector<T>& psi) {
  return monogamy_triple(psi).residual();
}

template <typename T>
std::pair<T, T> purity_measures(const DensityMatrix<T>& rho) {
  const T purity =
      std::real((rho.entries() * rho.entries()).trace());
  return {purity, T(1) - purity};
}

// Left-hand side of the duality-as-monogamy reading: H(P/2) + H((1-P)/2)
// for a pure pair with C = 1 - P.
template <typename T>
T duality_monogamy_lhs(T p) {
  if (p < T(0) || p > T(1)) {
    throw std::invalid_argument("duality_monogamy_lhs: P outside [0,1]");
  }
  return binary_entropy(p / T(2)) + binary_entropy((T(1) - p) / T(2));
}

}  // namespace osqc
