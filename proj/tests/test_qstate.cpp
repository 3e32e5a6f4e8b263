#include <doctest.h>

#include <cmath>
#include <complex>

#include "osqc/qstate.hpp"

using namespace osqc;
using Cd = std::complex<double>;

namespace {

CMat<double> kron(const CMat<double>& a, const CMat<double>& b) {
  CMat<double> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("state vector invariants") {
  CVec<double> good(2);
  good << Cd(1), Cd(0);
  CHECK_NOTHROW((StateVector<double>(good)));

  CVec<double> bad_norm(2);
  bad_norm << Cd(1), Cd(1);
  CHECK_THROWS_AS((StateVector<double>(bad_norm)), std::invalid_argument);

  CVec<double> bad_len(3);
  bad_len << Cd(1), Cd(0), Cd(0);
  CHECK_THROWS_AS((StateVector<double>(bad_len)), std::invalid_argument);

  // register limit is 4 qubits
  CVec<double> five = CVec<double>::Zero(32);
  five(0) = Cd(1);
  CHECK_THROWS_AS((StateVector<double>(five)), std::invalid_argument);
}

TEST_CASE("density matrix invariants") {
  CHECK_NOTHROW((void)DensityMatrix<double>::maximally_mixed(2));

  CMat<double> not_herm(2, 2);
  not_herm << Cd(0.5), Cd(0.5), Cd(-0.5), Cd(0.5);
  CHECK_THROWS_AS((DensityMatrix<double>(not_herm)), std::invalid_argument);

  CMat<double> bad_trace = CMat<double>::Identity(2, 2);
  CHECK_THROWS_AS((DensityMatrix<double>(bad_trace)), std::invalid_argument);

  CMat<double> not_psd(2, 2);
  not_psd << Cd(1.5), Cd(0), Cd(0), Cd(-0.5);
  CHECK_THROWS_AS((DensityMatrix<double>(not_psd)), std::invalid_argument);
}

TEST_CASE("tensor of basis states") {
  const auto zero = states::ket<double>(1, 0);
  const auto one = states::ket<double>(1, 1);
  const auto zo = tensor(zero, one);
  CHECK(zo.num_qubits() == 2);
  CHECK(std::abs(zo(1) - Cd(1)) < 1e-15);  // |01>
  CHECK(std::abs(zo(0)) < 1e-15);

  // coding state (x) ready probe matches an explicit Kronecker product
  const auto psi0 = states::gv_coding<double>(0);
  const auto joint = tensor(psi0, zero);
  CHECK(std::abs(joint(0) - Cd(1 / std::sqrt(2.0))) < 1e-15);
  CHECK(std::abs(joint(2) - Cd(1 / std::sqrt(2.0))) < 1e-15);

  // trace multiplicativity
  const auto rho = DensityMatrix<double>(states::bell<double>(states::kPsiPlus));
  const auto mixed = DensityMatrix<double>::maximally_mixed(1);
  const auto prod = tensor(rho, mixed);
  CHECK(std::abs(prod.entries().trace() - Cd(1)) < 1e-12);

  // register limit
  const auto two = tensor(zero, zero);
  const auto four = tensor(two, two);
  CHECK_THROWS_AS(tensor(four, zero), std::invalid_argument);
}

TEST_CASE("apply_unitary basics") {
  const auto zero = states::ket<double>(1, 0);
  const auto h = gates::hadamard<double>();

  const auto plus = apply_unitary(zero, h, {0});
  CHECK(std::abs(plus(0) - Cd(1 / std::sqrt(2.0))) < 1e-12);
  CHECK(std::abs(plus(1) - Cd(1 / std::sqrt(2.0))) < 1e-12);

  // Pauli-X leaves |+> unchanged
  const auto x_plus = apply_unitary(plus, gates::pauli_x<double>(), {0});
  CHECK((x_plus.amplitudes() - plus.amplitudes()).norm() < 1e-12);

  // conditional-probe block unitary with identity blocks acts as identity
  CMat<double> u = CMat<double>::Zero(4, 4);
  u.topLeftCorner(2, 2) = gates::identity<double>();
  u.bottomRightCorner(2, 2) = gates::identity<double>();
  const auto pair = states::bell<double>(states::kPsiPlus);
  const auto same = apply_unitary(pair, u, {0, 1});
  CHECK((same.amplitudes() - pair.amplitudes()).norm() < 1e-12);

  // errors
  CMat<double> not_unitary = CMat<double>::Ones(2, 2);
  CHECK_THROWS_AS(apply_unitary(zero, not_unitary, {0}), std::invalid_argument);
  CHECK_THROWS_AS(apply_unitary(pair, h, {2}), std::invalid_argument);
  CHECK_THROWS_AS(apply_unitary(pair, u, {0, 0}), std::invalid_argument);
}

TEST_CASE("apply_unitary preserves norm and trace on random registers") {
  Rng rng(20240811);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_int(3));
    const auto psi = states::haar_random<double>(n, rng);
    const int k = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
    const auto u = states::random_unitary<double>(Eigen::Index(1) << k, rng);
    std::vector<int> targets;
    for (int q = 0; q < k; ++q) targets.push_back(q);
    const auto out = apply_unitary(psi, u, targets);
    CHECK(std::abs(out.amplitudes().squaredNorm() - 1.0) < 1e-12);

    const DensityMatrix<double> rho(psi);
    const auto rho_out = apply_unitary(rho, u, targets);
    CHECK(std::abs(rho_out.entries().trace() - Cd(1)) < 1e-12);
    CHECK((rho_out.entries() - rho_out.entries().adjoint()).cwiseAbs().maxCoeff() <
          1e-12);
  }
}

TEST_CASE("partial trace") {
  // either side of a maximally entangled pair is maximally mixed
  const DensityMatrix<double> pair(states::bell<double>(states::kPsiPlus));
  for (int keep : {0, 1}) {
    const auto red = partial_trace(pair, {keep});
    CHECK((red.entries() - CMat<double>::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff() <
          1e-12);
  }

  // product state: tracing one factor returns the other
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = states::random_mixed<double>(1, rng);
    const auto b = states::random_mixed<double>(1, rng);
    const auto ab = tensor(a, b);
    const auto back = partial_trace(ab, {0});
    CHECK((back.entries() - a.entries()).cwiseAbs().maxCoeff() < 1e-12);
    const auto other = partial_trace(ab, {1});
    CHECK((other.entries() - b.entries()).cwiseAbs().maxCoeff() < 1e-12);
  }

  CHECK_THROWS_AS(partial_trace(pair, {}), std::invalid_argument);
  CHECK_THROWS_AS(partial_trace(pair, {3}), std::invalid_argument);
}

TEST_CASE("partial trace of the probe interaction output") {
  // |psi_0>(x)|R> evolved through the conditional-probe unitary and
  // recombined leaves the probe in (|u><u| + |d><d|)/2.
  Rng rng(99);
  const auto c0 = states::random_unitary<double>(2, rng);
  const auto c1 = states::random_unitary<double>(2, rng);
  CMat<double> u = CMat<double>::Zero(4, 4);
  u.topLeftCorner(2, 2) = c0;
  u.bottomRightCorner(2, 2) = c1;

  const auto joint0 = tensor(states::gv_coding<double>(0), states::ket<double>(1, 0));
  auto evolved = apply_unitary(joint0, u, {0, 1});
  evolved = apply_unitary(evolved, gates::hadamard<double>(), {0});

  const CVec<double> uvec = c0.col(0);  // C0 |0>
  const CVec<double> dvec = c1.col(0);
  const CMat<double> expected =
      0.5 * (uvec * uvec.adjoint() + dvec * dvec.adjoint());
  const auto probe = partial_trace(DensityMatrix<double>(evolved), {1});
  CHECK((probe.entries() - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("partial trace of tensor equals factor on random input") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = states::random_mixed<double>(2, rng);
    const auto b = states::random_mixed<double>(1, rng);
    const auto ab = tensor(a, b);
    const auto red = partial_trace(ab, {0, 1});
    CHECK((red.entries() - a.entries()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("projective measurement") {
  Rng rng(42);

  // Bell state measured in the Bell basis is deterministic.
  const auto psiplus = states::bell<double>(states::kPsiPlus);
  const auto basis = states::bell_basis<double>();
  const auto probs = born_probabilities(psiplus, basis);
  CHECK(probs[states::kPsiPlus] == doctest::Approx(1.0).epsilon(1e-12));

  // |psi_0> in the computational basis: both outcomes at 1/2.
  const auto zo = std::vector<StateVector<double>>{states::ket<double>(1, 0),
                                                   states::ket<double>(1, 1)};
  const auto p2 = born_probabilities(states::gv_coding<double>(0), zo);
  CHECK(p2[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p2[1] == doctest::Approx(0.5).epsilon(1e-12));

  // |00> in the Bell basis: Phi+ and Phi- each at 1/2, Psi at 0.
  const auto p3 = born_probabilities(states::ket<double>(2, 0), basis);
  CHECK(p3[states::kPhiPlus] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p3[states::kPhiMinus] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p3[states::kPsiPlus] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(p3[0] + p3[1] + p3[2] + p3[3] - 1.0) < 1e-12);

  const auto m = measure_projective(psiplus, basis, rng);
  CHECK(m.outcome == states::kPsiPlus);
  CHECK((m.post_state.amplitudes() - psiplus.amplitudes()).norm() < 1e-12);

  // non-orthonormal basis rejected
  auto bad = basis;
  bad[1] = bad[0];
  CHECK_THROWS_AS(born_probabilities(psiplus, bad), std::invalid_argument);
}

TEST_CASE("measurement statistics are reproducible for a fixed seed") {
  const auto plus = states::gv_coding<double>(0);
  const auto zo = std::vector<StateVector<double>>{states::ket<double>(1, 0),
                                                   states::ket<double>(1, 1)};
  std::vector<int> first, second;
  for (int rep = 0; rep < 2; ++rep) {
    Rng rng(123456);
    auto& sink = rep == 0 ? first : second;
    for (int k = 0; k < 200; ++k) {
      sink.push_back(measure_projective(plus, zo, rng).outcome);
    }
  }
  CHECK(first == second);
  int ones = 0;
  for (int b : first) ones += b;
  CHECK(ones > 60);  // loose 3-sigma band around 100
  CHECK(ones < 140);
}

TEST_CASE("povm validation and sampling") {
  Rng rng(5);
  // single-element POVM {I} always yields outcome 0
  Povm<double> trivial({gates::identity<double>()});
  CHECK(measure_povm(DensityMatrix<double>::maximally_mixed(1), trivial, rng) == 0);

  // elements must sum to identity
  CHECK_THROWS_AS((Povm<double>({0.5 * gates::identity<double>()})),
                  std::invalid_argument);

  // dimension mismatch
  Povm<double> one_qubit({gates::identity<double>()});
  CHECK_THROWS_AS(
      measure_povm(DensityMatrix<double>::maximally_mixed(2), one_qubit, rng),
      std::invalid_argument);

  // POVM outcome probabilities sum to one on random states
  for (int trial = 0; trial < 20; ++trial) {
    const auto rho = states::random_mixed<double>(1, rng);
    CMat<double> m0(2, 2), m1(2, 2);
    const double w = rng.uniform();
    m0 << Cd(w), Cd(0), Cd(0), Cd(1 - w);
    m1 = gates::identity<double>() - m0;
    const Povm<double> povm({m0, m1});
    double total = 0;
    for (const auto& el : povm.elements) {
      total += std::real((el * rho.entries()).trace());
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("optimal path-discrimination povm") {
  // elements (1 - |d><d|)/(1+|<u|d>|), (1 - |u><u|)/(1+|<u|d>|) and the rest
  auto make_povm = [](const CVec<double>& u, const CVec<double>& d) {
    const double c = std::abs(u.dot(d));
    const CMat<double> id = gates::identity<double>();
    CMat<double> ma = (id - d * d.adjoint()) / (1.0 + c);
    CMat<double> mb = (id - u * u.adjoint()) / (1.0 + c);
    CMat<double> m0 = id - ma - mb;
    return Povm<double>({ma, mb, m0});
  };

  // orthogonal probe branches: outcome "a" with certainty on |u>
  CVec<double> u(2), d(2);
  u << Cd(1), Cd(0);
  d << Cd(0), Cd(1);
  auto povm = make_povm(u, d);
  const DensityMatrix<double> rho_u{StateVector<double>(u)};
  CHECK(std::real((povm.elements[0] * rho_u.entries()).trace()) ==
        doctest::Approx(1.0).epsilon(1e-12));

  // overlapping branches: conclusive "a" probability 1 - |<u|d>|
  const double angle = 0.7;
  d << Cd(std::cos(angle)), Cd(std::sin(angle));
  povm = make_povm(u, d);
  CHECK(std::real((povm.elements[0] * rho_u.entries()).trace()) ==
        doctest::Approx(1.0 - std::cos(angle)).epsilon(1e-12));
}

TEST_CASE("permutations") {
  Rng rng(77);
  const auto id = PermutationMap::identity(6);
  const std::vector<int> items{10, 11, 12, 13, 14, 15};
  CHECK(permute_particles(items, id) == items);

  const auto pi = PermutationMap::random(6, rng);
  const auto shuffled = permute_particles(items, pi);
  CHECK(permute_particles(shuffled, pi.inverse()) == items);

  // fixed seed reproduces the same permutation
  Rng rng_a(101), rng_b(101);
  const auto pa = PermutationMap::random(6, rng_a);
  const auto pb = PermutationMap::random(6, rng_b);
  CHECK(pa.mapping() == pb.mapping());

  CHECK_THROWS_AS(permute_particles(std::vector<int>{1, 2}, pi),
                  std::invalid_argument);
  CHECK_THROWS_AS((PermutationMap({0, 0, 1}, 0)), std::invalid_argument);
}

TEST_CASE("the core instantiates for other scalar types") {
  const auto zero = states::ket<float>(1, 0);
  const auto plus = apply_unitary(zero, gates::hadamard<float>(), {0});
  CHECK(std::abs(plus(0) - std::complex<float>(1.0f / std::sqrt(2.0f))) < 1e-6f);
  const DensityMatrix<float> rho(states::bell<float>(states::kPsiPlus));
  const auto red = partial_trace(rho, {0});
  CHECK(std::abs(red.entries()(0, 0) - std::complex<float>(0.5f)) < 1e-6f);
}

TEST_CASE("embed_operator matches explicit kronecker products") {
  Rng rng(3);
  const auto u = states::random_unitary<double>(2, rng);
  const CMat<double> id = gates::identity<double>();

  // acting on qubit 0 of two: U (x) I
  CHECK((embed_operator(u, {0}, 2) - kron(u, id)).cwiseAbs().maxCoeff() < 1e-14);
  // acting on qubit 1 of two: I (x) U
  CHECK((embed_operator(u, {1}, 2) - kron(id, u)).cwiseAbs().maxCoeff() < 1e-14);

  // two-qubit operator with swapped target order equals SWAP-conjugation
  const auto v = states::random_unitary<double>(4, rng);
  CMat<double> swap = CMat<double>::Zero(4, 4);
  swap(0, 0) = swap(3, 3) = Cd(1);
  swap(1, 2) = swap(2, 1) = Cd(1);
  const auto direct = embed_operator(v, {0, 1}, 2);
  const auto swapped = embed_operator(v, {1, 0}, 2);
  CHECK((swapped - swap * direct * swap).cwiseAbs().maxCoeff() < 1e-12);
}
