#pragma once

#include <optional>
#include <string>
#include <vector>

#include "osqc/qstate.hpp"

// Eavesdropper models. The probe interactions come in two families:
//
//   - a conditional-probe unitary  U = |0><0| (x) C0 + |1><1| (x) C1  acting
//     on one traveling qubit and a single probe qubit;
//   - an entangling isometry  |x>|E> -> cos |x>|eps_x> + sin |x^1>|E_x>  with
//     prescribed probe overlaps, realized on a two-qubit probe register with
//     the eps-span orthogonal to the E-span.
//
// The symmetric single-qubit attack is the special case with amplitudes
// sqrt((1 +- cos t)/2) and overlaps <eps0|eps1> = <E0|E1> = cos t.

namespace osqc {

enum class AttackKind {
  kGenericProbe,
  kSymmetricNg,
  kInterceptResend,
  kTimingDelay,
  kPairingGuess,
};

const char* to_string(AttackKind kind);
AttackKind attack_kind_from_string(const std::string& s);

struct AttackParams {
  AttackKind kind = AttackKind::kSymmetricNg;
  double theta = 0.0;           // eavesdropping strength, radians
  double theta_prime = 0.0;     // asymmetric branch angle (generic probe)
  double lambda = 1.0;          // fraction of particles attacked
  double overlap_eps = 0.0;     // <eps0|eps1>
  double overlap_big_e = 0.0;   // <E0|E1>
  bool attack_both_legs = true; // two-leg protocols: attack each transit
  int delay_slots = 1;          // timing attack
  int ir_basis = -1;            // intercept-resend basis: 0 = Z, 1 = X, -1 = random

  void validate() const;

  // Symmetric incoherent attack with strength theta: amplitudes
  // sqrt((1 +- cos theta)/2), all probe overlaps equal to cos theta.
  static AttackParams symmetric_ng(double theta, double lambda);
};

// The four probe vectors with the prescribed pairwise overlaps, built by
// Gram-Schmidt in the smallest register that satisfies them, plus the ready
// vector (the symmetric direction between eps0 and eps1) used for the
// unattacked branch.
struct ProbeVectors {
  int dim;                 // 2 (one probe qubit) or 4 (two probe qubits)
  CVec<double> eps0, eps1;
  CVec<double> big_e0, big_e1;
  CVec<double> ready;
};

ProbeVectors build_probe_vectors(double overlap_eps, double overlap_big_e,
                                 bool need_flip_branch);

// U = |0><0| (x) C0 + |1><1| (x) C1  on qubit (x) probe.
CMat<double> generic_probe_unitary(const CMat<double>& c0,
                                   const CMat<double>& c1);

// Isometry (2 * probe_dim) x 2 for the entangling attack. Column x is the
// image of |x>|E>. Index order: system bit is most significant.
CMat<double> probe_isometry(double cos_keep, double sin_flip,
                            double cos_keep_prime, double sin_flip_prime,
                            const ProbeVectors& probes);

// Eq-9-style attack from explicit parameters (theta, theta_prime, overlaps).
CMat<double> generic_isometry(const AttackParams& params);

// Symmetric single-qubit attack: 8 x 2 isometry onto a two-qubit probe.
CMat<double> ng_isometry(double theta);

// Probe vectors used by ng_isometry (dim 4, overlaps cos theta).
ProbeVectors ng_probe_vectors(double theta);

// Kraus decomposition of a system (x) probe isometry: K_m = (I (x) <m|) V.
std::vector<CMat<double>> isometry_kraus(const CMat<double>& v);

std::vector<CMat<double>> ng_kraus(double theta);

// Completes V into a full unitary U on system (x) probe such that
// U(|x> (x) |ready>) = V|x>. Used by brute-force oracles that evolve the
// probe register explicitly.
CMat<double> unitary_extension(const CMat<double>& v, const CVec<double>& ready);

// Joint post-interaction state of an attacked register plus probe qubits.
struct ProbeRecord {
  StateVector<double> joint;     // original qubits followed by probe qubits
  int system_qubits;
  int probe_qubits;
  std::vector<int> attacked;     // indices of attacked system qubits
};

// Applies a system (x) probe isometry to `target`, appending the probe
// qubits at the end of the register.
StateVector<double> apply_isometry(const StateVector<double>& psi,
                                   const CMat<double>& v, int target);

// Entangling attack (general asymmetric form) on one qubit of a register.
ProbeRecord symmetric_attack(const StateVector<double>& psi, int target,
                             const AttackParams& params);

// Symmetric incoherent attack on one qubit of a register.
ProbeRecord ng_attack(const StateVector<double>& psi, int target,
                      const AttackParams& params);

// Applies the channel obtained by tracing out the probe, sampling one Kraus
// branch with Born weights. Returns the collapsed state and the branch index
// (the probe measurement record).
struct SampledBranch {
  StateVector<double> state;
  int branch;
};
SampledBranch apply_channel_sampled(const StateVector<double>& psi, int target,
                                    const std::vector<CMat<double>>& kraus,
                                    Rng& rng);

// Deterministic channel application on a density matrix.
DensityMatrix<double> apply_channel(const DensityMatrix<double>& rho, int target,
                                    const std::vector<CMat<double>>& kraus);

// Joint reduced state of the two probes after each qubit of `phi` (a 2-qubit
// pure state) is attacked through `ops_a` / `ops_b` branch operators. Entry
// ((m,n),(m',n')) equals <v_{m'n'}|v_{mn}> with v_{mn} = (A_m (x) B_n) phi.
// Branch lists of length p give a (p*p) x (p*p) matrix.
CMat<double> probe_pair_state(const std::vector<CMat<double>>& ops_a,
                              const std::vector<CMat<double>>& ops_b,
                              const StateVector<double>& phi);

// As above for branch operators acting on the first qubit only (two-leg
// protocols: A_m then, after encoding, B_n on the same qubit).
CMat<double> probe_pair_state_single_qubit(
    const std::vector<CMat<double>>& leg1, const std::vector<CMat<double>>& leg2,
    const CMat<double>& encode_between, const StateVector<double>& phi);

}  // namespace osqc
