#include "osqc/attacks.hpp"

#include <cmath>
#include <stdexcept>

namespace osqc {

const char* to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::kGenericProbe: return "generic_probe";
    case AttackKind::kSymmetricNg: return "symmetric_ng";
    case AttackKind::kInterceptResend: return "intercept_resend";
    case AttackKind::kTimingDelay: return "timing_delay";
    case AttackKind::kPairingGuess: return "pairing_guess";
  }
  return "unknown";
}

AttackKind attack_kind_from_string(const std::string& s) {
  if (s == "generic_probe") return AttackKind::kGenericProbe;
  if (s == "symmetric_ng") return AttackKind::kSymmetricNg;
  if (s == "intercept_resend") return AttackKind::kInterceptResend;
  if (s == "timing_delay") return AttackKind::kTimingDelay;
  if (s == "pairing_guess") return AttackKind::kPairingGuess;
  throw std::invalid_argument("unknown attack kind: " + s);
}

void AttackParams::validate() const {
  if (lambda < 0.0 || lambda > 1.0) {
    throw std::invalid_argument("attack.lambda: must be within [0,1]");
  }
  if (std::abs(overlap_eps) > 1.0 || std::abs(overlap_big_e) > 1.0) {
    throw std::invalid_argument("attack overlaps: magnitude must be <= 1");
  }
  if (!std::isfinite(theta) || !std::isfinite(theta_prime)) {
    throw std::invalid_argument("attack angles must be finite");
  }
  if (kind == AttackKind::kSymmetricNg) {
    const double c = std::cos(theta);
    if (std::abs(overlap_eps - c) > 1e-12 || std::abs(overlap_big_e - c) > 1e-12) {
      throw std::invalid_argument(
          "symmetric attack requires both probe overlaps equal to cos(theta)");
    }
  }
  if (ir_basis < -1 || ir_basis > 1) {
    throw std::invalid_argument("attack.ir_basis: must be 0, 1 or -1");
  }
}

AttackParams AttackParams::symmetric_ng(double theta, double lambda) {
  AttackParams p;
  p.kind = AttackKind::kSymmetricNg;
  p.theta = theta;
  p.lambda = lambda;
  p.overlap_eps = std::cos(theta);
  p.overlap_big_e = std::cos(theta);
  return p;
}

ProbeVectors build_probe_vectors(double overlap_eps, double overlap_big_e,
                                 bool need_flip_branch) {
  // 2x2 Gram matrix [[1, c],[c, 1]] is PSD iff |c| <= 1.
  if (std::abs(overlap_eps) > 1.0 || std::abs(overlap_big_e) > 1.0) {
    throw std::invalid_argument(
        "probe overlaps: Gram matrix not PSD (|overlap| > 1)");
  }
  ProbeVectors pv;
  pv.dim = need_flip_branch ? 4 : 2;
  auto pair_in_span = [&](double c, int base) {
    CVec<double> v0 = CVec<double>::Zero(pv.dim);
    CVec<double> v1 = CVec<double>::Zero(pv.dim);
    v0(base) = 1.0;
    v1(base) = c;
    v1(base + 1) = std::sqrt(std::max(0.0, 1.0 - c * c));
    return std::make_pair(v0, v1);
  };
  std::tie(pv.eps0, pv.eps1) = pair_in_span(overlap_eps, 0);
  if (need_flip_branch) {
    std::tie(pv.big_e0, pv.big_e1) = pair_in_span(overlap_big_e, 2);
  } else {
    pv.big_e0 = CVec<double>::Zero(pv.dim);
    pv.big_e1 = CVec<double>::Zero(pv.dim);
  }
  CVec<double> r = pv.eps0 + pv.eps1;
  const double n = r.norm();
  if (n > 1e-9) {
    pv.ready = r / n;
  } else {
    pv.ready = pv.eps0;  // eps1 = -eps0; any direction in the span works
  }
  return pv;
}

CMat<double> generic_probe_unitary(const CMat<double>& c0,
                                   const CMat<double>& c1) {
  if (!is_unitary(c0) || !is_unitary(c1)) {
    throw std::invalid_argument("generic_probe_unitary: block not unitary");
  }
  if (c0.rows() != c1.rows()) {
    throw std::invalid_argument("generic_probe_unitary: block sizes differ");
  }
  const Eigen::Index p = c0.rows();
  CMat<double> u = CMat<double>::Zero(2 * p, 2 * p);
  u.topLeftCorner(p, p) = c0;
  u.bottomRightCorner(p, p) = c1;
  return u;
}

CMat<double> probe_isometry(double cos_keep, double sin_flip,
                            double cos_keep_prime, double sin_flip_prime,
                            const ProbeVectors& probes) {
  const Eigen::Index p = probes.dim;
  CMat<double> v = CMat<double>::Zero(2 * p, 2);
  // |0>|E> -> cos |0>|eps0> + sin |1>|E0>
  v.col(0).segment(0, p) = cos_keep * probes.eps0;
  v.col(0).segment(p, p) = sin_flip * probes.big_e0;
  // |1>|E> -> cos' |1>|eps1> + sin' |0>|E1>
  v.col(1).segment(p, p) = cos_keep_prime * probes.eps1;
  v.col(1).segment(0, p) = sin_flip_prime * probes.big_e1;
  // Isometry requires orthonormal columns.
  const CMat<double> g = v.adjoint() * v;
  if ((g - CMat<double>::Identity(2, 2)).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("probe_isometry: columns not orthonormal");
  }
  return v;
}

CMat<double> generic_isometry(const AttackParams& params) {
  params.validate();
  const bool flips = std::abs(std::sin(params.theta)) > 1e-14 ||
                     std::abs(std::sin(params.theta_prime)) > 1e-14;
  const ProbeVectors pv =
      build_probe_vectors(params.overlap_eps, params.overlap_big_e, flips);
  return probe_isometry(std::cos(params.theta), std::sin(params.theta),
                        std::cos(params.theta_prime), std::sin(params.theta_prime),
                        pv);
}

ProbeVectors ng_probe_vectors(double theta) {
  const double c = std::cos(theta);
  return build_probe_vectors(c, c, true);
}

CMat<double> ng_isometry(double theta) {
  const double c = std::cos(theta);
  const double a = std::sqrt((1.0 + c) / 2.0);
  const double b = std::sqrt((1.0 - c) / 2.0);
  return probe_isometry(a, b, a, b, ng_probe_vectors(theta));
}

std::vector<CMat<double>> isometry_kraus(const CMat<double>& v) {
  if (v.cols() != 2 || v.rows() % 2 != 0) {
    throw std::invalid_argument("isometry_kraus: expected (2p) x 2 isometry");
  }
  const Eigen::Index p = v.rows() / 2;
  std::vector<CMat<double>> ks;
  ks.reserve(p);
  for (Eigen::Index m = 0; m < p; ++m) {
    CMat<double> k(2, 2);
    k(0, 0) = v(m, 0);
    k(0, 1) = v(m, 1);
    k(1, 0) = v(p + m, 0);
    k(1, 1) = v(p + m, 1);
    ks.push_back(std::move(k));
  }
  return ks;
}

std::vector<CMat<double>> ng_kraus(double theta) {
  return isometry_kraus(ng_isometry(theta));
}

CMat<double> unitary_extension(const CMat<double>& v, const CVec<double>& ready) {
  const Eigen::Index p = v.rows() / 2;
  if (ready.size() != p || std::abs(ready.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("unitary_extension: bad ready vector");
  }
  // Probe-basis rotation R with first column = ready, completed by QR.
  CMat<double> seed = CMat<double>::Zero(p, p);
  seed.col(0) = ready;
  Eigen::HouseholderQR<CMat<double>> qr_r(seed);
  CMat<double> r_basis = qr_r.householderQ();
  // householderQ's first column may differ from ready by a phase; fix it.
  const std::complex<double> phase = r_basis.col(0).dot(ready);
  r_basis.col(0) *= phase;

  // In the rotated probe basis, input columns (x, r0) map to V's columns.
  // Full QR of [v0 v1] provides an orthonormal complement for the rest.
  CMat<double> known(2 * p, 2);
  known.col(0) = v.col(0);
  known.col(1) = v.col(1);
  Eigen::HouseholderQR<CMat<double>> qr_c(known);
  CMat<double> q = qr_c.householderQ();
  CMat<double> u_rot = CMat<double>::Zero(2 * p, 2 * p);
  u_rot.col(0) = v.col(0);
  u_rot.col(p) = v.col(1);
  Eigen::Index next = 2;
  for (Eigen::Index j = 0; j < 2 * p; ++j) {
    if (j == 0 || j == p) continue;
    u_rot.col(j) = q.col(next++);
  }
  // Undo the probe-basis rotation on the input side.
  CMat<double> rot = CMat<double>::Zero(2 * p, 2 * p);
  rot.topLeftCorner(p, p) = r_basis;
  rot.bottomRightCorner(p, p) = r_basis;
  CMat<double> u = u_rot * rot.adjoint();
  if (!is_unitary(u, 1e-11)) {
    throw std::runtime_error("unitary_extension: completion failed");
  }
  return u;
}

StateVector<double> apply_isometry(const StateVector<double>& psi,
                                   const CMat<double>& v, int target) {
  const Eigen::Index p = v.rows() / 2;
  int probe_qubits = 0;
  while ((Eigen::Index(1) << probe_qubits) < p) ++probe_qubits;
  if ((Eigen::Index(1) << probe_qubits) != p) {
    throw std::invalid_argument("apply_isometry: probe dim not a power of 2");
  }
  const int n = psi.num_qubits();
  if (n + probe_qubits > kMaxQubits) {
    throw std::invalid_argument("apply_isometry: register would exceed 4 qubits");
  }
  if (target < 0 || target >= n) {
    throw std::invalid_argument("apply_isometry: bad target");
  }
  const Eigen::Index dim = psi.dim();
  CVec<double> out = CVec<double>::Zero(dim * p);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const std::complex<double> amp = psi(i);
    if (amp == std::complex<double>(0)) continue;
    const int bit = detail::bit_of(i, target, n);
    for (int bp = 0; bp < 2; ++bp) {
      Eigen::Index base = i;
      if (bp != bit) base ^= Eigen::Index(1) << (n - 1 - target);
      for (Eigen::Index m = 0; m < p; ++m) {
        const std::complex<double> coeff = v(bp * p + m, bit);
        if (coeff != std::complex<double>(0)) {
          out(base * p + m) += amp * coeff;
        }
      }
    }
  }
  return StateVector<double>::normalized(std::move(out));
}

ProbeRecord symmetric_attack(const StateVector<double>& psi, int target,
                             const AttackParams& params) {
  const CMat<double> v = generic_isometry(params);
  const int probe_qubits = (v.rows() / 2 == 4) ? 2 : 1;
  StateVector<double> joint = apply_isometry(psi, v, target);
  return ProbeRecord{std::move(joint), psi.num_qubits(), probe_qubits, {target}};
}

ProbeRecord ng_attack(const StateVector<double>& psi, int target,
                      const AttackParams& params) {
  if (params.kind != AttackKind::kSymmetricNg) {
    throw std::invalid_argument("ng_attack: params.kind must be symmetric_ng");
  }
  params.validate();
  StateVector<double> joint = apply_isometry(psi, ng_isometry(params.theta), target);
  return ProbeRecord{std::move(joint), psi.num_qubits(), 2, {target}};
}

SampledBranch apply_channel_sampled(const StateVector<double>& psi, int target,
                                    const std::vector<CMat<double>>& kraus,
                                    Rng& rng) {
  const int n = psi.num_qubits();
  std::vector<CVec<double>> branches;
  std::vector<double> probs;
  branches.reserve(kraus.size());
  for (const auto& k : kraus) {
    CMat<double> full = embed_operator(k, {target}, n);
    CVec<double> b = full * psi.amplitudes();
    const double p = b.squaredNorm();
    branches.push_back(std::move(b));
    probs.push_back(p);
  }
  const double x = rng.uniform();
  double acc = 0.0;
  int chosen = static_cast<int>(probs.size()) - 1;
  for (std::size_t m = 0; m < probs.size(); ++m) {
    acc += probs[m];
    if (x < acc) {
      chosen = static_cast<int>(m);
      break;
    }
  }
  return SampledBranch{StateVector<double>::normalized(std::move(branches[chosen])),
                       chosen};
}

DensityMatrix<double> apply_channel(const DensityMatrix<double>& rho, int target,
                                    const std::vector<CMat<double>>& kraus) {
  const int n = rho.num_qubits();
  CMat<double> out = CMat<double>::Zero(rho.dim(), rho.dim());
  for (const auto& k : kraus) {
    const CMat<double> full = embed_operator(k, {target}, n);
    out += full * rho.entries() * full.adjoint();
  }
  return DensityMatrix<double>(CMat<double>((out + out.adjoint()) / 2.0));
}

CMat<double> probe_pair_state(const std::vector<CMat<double>>& ops_a,
                              const std::vector<CMat<double>>& ops_b,
                              const StateVector<double>& phi) {
  if (phi.num_qubits() != 2) {
    throw std::invalid_argument("probe_pair_state: expected a 2-qubit state");
  }
  const std::size_t pa = ops_a.size(), pb = ops_b.size();
  std::vector<CVec<double>> vs(pa * pb);
  for (std::size_t m = 0; m < pa; ++m) {
    for (std::size_t n = 0; n < pb; ++n) {
      CMat<double> op(4, 4);
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          op.block(2 * i, 2 * j, 2, 2) = ops_a[m](i, j) * ops_b[n];
        }
      }
      vs[m * pb + n] = op * phi.amplitudes();
    }
  }
  const Eigen::Index d = static_cast<Eigen::Index>(pa * pb);
  CMat<double> sigma(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      sigma(r, c) = vs[c].dot(vs[r]);  // <v_c|v_r>
    }
  }
  return sigma;
}

CMat<double> probe_pair_state_single_qubit(
    const std::vector<CMat<double>>& leg1, const std::vector<CMat<double>>& leg2,
    const CMat<double>& encode_between, const StateVector<double>& phi) {
  if (phi.num_qubits() != 2) {
    throw std::invalid_argument("probe_pair_state_single_qubit: expected 2 qubits");
  }
  const std::size_t p1 = leg1.size(), p2 = leg2.size();
  std::vector<CVec<double>> vs(p1 * p2);
  const CMat<double> id = CMat<double>::Identity(2, 2);
  for (std::size_t m = 0; m < p1; ++m) {
    for (std::size_t n = 0; n < p2; ++n) {
      const CMat<double> a = leg2[n] * encode_between * leg1[m];
      CMat<double> op(4, 4);
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          op.block(2 * i, 2 * j, 2, 2) = a(i, j) * id;
        }
      }
      vs[m * p2 + n] = op * phi.amplitudes();
    }
  }
  const Eigen::Index d = static_cast<Eigen::Index>(p1 * p2);
  CMat<double> sigma(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      sigma(r, c) = vs[c].dot(vs[r]);
    }
  }
  return sigma;
}

}  // namespace osqc
