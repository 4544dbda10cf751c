#include <doctest.h>

#include <Eigen/SVD>

#include "stitchlab/model.hpp"

using namespace stitchlab;

namespace {

std::shared_ptr<const LatticeGraph> chain_graph(int n) {
  return std::make_shared<LatticeGraph>(LatticeGraph::chain(n));
}

StateVector basis_state(const SiteSpace& space, std::size_t index) {
  cxvec v = cxvec::Zero(space.dim());
  v[static_cast<Eigen::Index>(index)] = 1.0;
  return StateVector(space, v);
}

}  // namespace

TEST_CASE("embed a single-site operator") {
  SiteSpace space = SiteSpace::qubits(chain_graph(3));
  cxmat full = embed(LocalOperator(Region::single(1, 3), preset_matrix("pauli_z")), space);
  CHECK(std::abs(full.trace()) < 1e-14);
  EigenSolveResult es = hermitian_eigensolve(full);
  CHECK(es.eigenvalues.minCoeff() == doctest::Approx(-1.0));
  CHECK(es.eigenvalues.maxCoeff() == doctest::Approx(1.0));
  // acts on site 1 only: basis index ordering has site 0 slowest
  CHECK(full(0, 0) == cx(1.0, 0.0));   // |up up up>
  CHECK(full(2, 2) == cx(-1.0, 0.0));  // |up dn up>

  cxmat id = embed(LocalOperator(Region({0, 2}, 3), cxmat::Identity(4, 4)), space);
  CHECK((id - cxmat::Identity(8, 8)).norm() < 1e-14);
}

TEST_CASE("embedding preserves the operator norm") {
  auto rng = derived_rng(3, "embed-norm");
  SiteSpace space = SiteSpace::qubits(chain_graph(5));
  for (int t = 0; t < 10; ++t) {
    cxmat a = random_hermitian(4, rng);
    double local = operator_norm(a);
    cxmat full = embed(LocalOperator(Region({1, 3}, 5), a), space);
    CHECK(operator_norm(full) == doctest::Approx(local).epsilon(1e-10));
  }
}

TEST_CASE("partial trace of a Bell state is maximally mixed") {
  SiteSpace space = SiteSpace::qubits(chain_graph(2));
  cxvec bell(4);
  bell << 1.0 / std::sqrt(2.0), 0, 0, 1.0 / std::sqrt(2.0);
  DensityMatrix rho = DensityMatrix::pure(StateVector(space, bell));
  cxmat red = partial_trace(rho, Region::single(0, 2)).matrix();
  CHECK((red - cxmat::Identity(2, 2) / 2.0).norm() < 1e-14);
}

TEST_CASE("partial trace of a product is the factor") {
  auto rng = derived_rng(5, "pt-product");
  SiteSpace space = SiteSpace::qubits(chain_graph(4));
  cxmat rho_a = random_density(4, rng);
  cxmat rho_b = random_density(4, rng);
  Region a({0, 1}, 4);
  cxmat rho = kron_regions(space, a, rho_a, rho_b);
  DensityMatrix full = DensityMatrix::dense(space, rho);
  CHECK((full.reduced(a).matrix() - rho_a).norm() < 1e-13);
  CHECK((full.reduced(a.complement()).matrix() - rho_b).norm() < 1e-13);
}

TEST_CASE("reduction eigenvalues equal squared Schmidt coefficients") {
  auto rng = derived_rng(7, "schmidt");
  SiteSpace space = SiteSpace::qubits(chain_graph(3));
  cxvec psi = random_unit_vector(8, rng);
  // independent oracle: SVD of the amplitude tensor across the (01|2) cut
  cxmat reshaped(4, 2);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 2; ++b) reshaped(a, b) = psi[a * 2 + b];
  Eigen::JacobiSVD<cxmat> svd(reshaped);
  DensityMatrix rho = DensityMatrix::pure(StateVector(space, psi));
  EigenSolveResult es = hermitian_eigensolve(rho.reduced(Region({0, 1}, 3)).matrix());
  realvec evals = es.eigenvalues.reverse();
  for (int i = 0; i < svd.singularValues().size(); ++i)
    CHECK(evals[i] == doctest::Approx(std::pow(svd.singularValues()(i), 2)).epsilon(1e-10));
}

TEST_CASE("partial trace of an embedded operator") {
  SiteSpace space = SiteSpace::qubits(chain_graph(3));
  cxmat a = preset_matrix("pauli_x");
  cxmat full = embed(LocalOperator(Region::single(0, 3), a), space);
  cxmat reduced = partial_trace_matrix(full, space, Region::single(0, 3));
  CHECK((reduced - 4.0 * a).norm() < 1e-13);  // dim of the traced factor
}

TEST_CASE("local trace distance") {
  SiteSpace space = SiteSpace::qubits(chain_graph(4));
  DensityMatrix up = DensityMatrix::pure(basis_state(space, 0));
  DensityMatrix down = DensityMatrix::pure(basis_state(space, 15));
  Region x({1, 2}, 4);
  CHECK(local_trace_distance(up, up, x) == doctest::Approx(0.0));
  CHECK(local_trace_distance(up, down, x) == doctest::Approx(2.0));

  auto rng = derived_rng(11, "ltd-mono");
  for (int t = 0; t < 50; ++t) {
    DensityMatrix rho = DensityMatrix::dense(space, random_density(16, rng));
    DensityMatrix omega = DensityMatrix::dense(space, random_density(16, rng));
    Region small({1}, 4), big({0, 1, 2}, 4);
    CHECK(local_trace_distance(rho, omega, small) <=
          local_trace_distance(rho, omega, big) + 1e-12);
    CHECK(local_trace_distance(rho, omega, big) <= 2.0 + 1e-12);
  }
}

TEST_CASE("hermitian eigensolver") {
  cxmat d = cxmat::Zero(3, 3);
  d(0, 0) = 3;
  d(1, 1) = 1;
  d(2, 2) = 2;
  EigenSolveResult es = hermitian_eigensolve(d);
  CHECK(es.eigenvalues[0] == doctest::Approx(1));
  CHECK(es.eigenvalues[1] == doctest::Approx(2));
  CHECK(es.eigenvalues[2] == doctest::Approx(3));

  EigenSolveResult sx = hermitian_eigensolve(preset_matrix("pauli_x"));
  CHECK(sx.eigenvalues[0] == doctest::Approx(-1));
  CHECK(sx.eigenvalues[1] == doctest::Approx(1));

  auto rng = derived_rng(13, "eig");
  cxmat m = random_hermitian(32, rng);
  EigenSolveResult r = hermitian_eigensolve(m);
  for (int i = 0; i < 32; ++i) {
    CHECK((m * r.eigenvectors.col(i) - r.eigenvalues[i] * r.eigenvectors.col(i)).norm() <=
          1e-9 * operator_norm(m));
  }
  CHECK((r.eigenvectors.adjoint() * r.eigenvectors - cxmat::Identity(32, 32)).norm() < 1e-10);

  cxmat bad = cxmat::Zero(2, 2);
  bad(0, 1) = 1.0;
  CHECK_THROWS_WITH(hermitian_eigensolve(bad), "non-Hermitian input");
}

TEST_CASE("iterative lowest eigenpairs agree with the dense solver") {
  // 10-qubit random local Hamiltonian; the iterative path engages above 512
  auto graph = chain_graph(10);
  SiteSpace space = SiteSpace::qubits(graph);
  auto rng = derived_rng(17, "lanczos");
  Interaction q;
  for (int i = 0; i + 1 < 10; ++i) q.add_term(Region({i, i + 1}, 10), random_hermitian(4, rng));
  LinearOp op = assemble_op(q, space);
  EigenSolveResult low = lowest_eigenpairs(op, 4, 1e-10);

  cxmat dense = cxmat::Zero(1024, 1024);
  for (const auto& [support, local] : q.terms()) dense += embed(local, space);
  EigenSolveResult full = hermitian_eigensolve(dense);
  for (int i = 0; i < 4; ++i) CHECK(low.eigenvalues[i] == doctest::Approx(full.eigenvalues[i]).epsilon(1e-8));
}

TEST_CASE("iterative solver resolves degenerate lowest levels") {
  // diagonal operator with a 3-fold degenerate bottom level
  LinearOp op;
  op.dim = 600;
  op.apply = [](const cxvec& in, cxvec& out) {
    out = in;
    for (Eigen::Index i = 0; i < in.size(); ++i) out[i] *= i < 3 ? 1.0 : 2.0 + static_cast<double>(i) * 0.001;
  };
  EigenSolveResult es = lowest_eigenpairs(op, 5, 1e-10);
  CHECK(es.eigenvalues[0] == doctest::Approx(1.0));
  CHECK(es.eigenvalues[1] == doctest::Approx(1.0));
  CHECK(es.eigenvalues[2] == doctest::Approx(1.0));
  CHECK(es.eigenvalues[3] > 1.5);
  CHECK((es.eigenvectors.adjoint() * es.eigenvectors - cxmat::Identity(5, 5)).norm() < 1e-8);
}

TEST_CASE("kernel projector") {
  cxmat d = cxmat::Zero(3, 3);
  d(2, 2) = 1.0;
  cxmat p = kernel_projector(d, 1e-8);
  CHECK(p(0, 0) == cx(1.0, 0.0));
  CHECK(p(1, 1) == cx(1.0, 0.0));
  CHECK(p(2, 2) == cx(0.0, 0.0));
  CHECK((p * p - p).norm() < 1e-12);
  CHECK((p - p.adjoint()).norm() < 1e-12);

  cxmat pos = cxmat::Identity(3, 3) * 2.0;
  CHECK(kernel_projector(pos, 1e-8).norm() == 0.0);

  // frustration-free chain of single-site projectors: kernel is |down...down>
  SiteSpace space = SiteSpace::qubits(chain_graph(4));
  Interaction q;
  for (int i = 0; i < 4; ++i) q.add_term(Region::single(i, 4), preset_matrix("proj_up"));
  cxmat h = cxmat::Zero(16, 16);
  for (const auto& [s, local] : q.terms()) h += embed(local, space);
  cxmat pk = kernel_projector(h, 1e-8);
  CHECK(pk.trace().real() == doctest::Approx(1.0));
  CHECK(pk(15, 15) == cx(1.0, 0.0));

  cxmat ambiguous = cxmat::Zero(2, 2);
  ambiguous(1, 1) = 5e-8;  // inside (tol, 10 tol)
  CHECK_THROWS(kernel_projector(ambiguous, 1e-8));
}

TEST_CASE("conditional expectation") {
  SiteSpace space = SiteSpace::qubits(chain_graph(3));
  Region b({2}, 3);
  SiteSpace bspace = space.restrict_to(b);
  DensityMatrix tracial = DensityMatrix::dense(bspace, cxmat::Identity(2, 2) / 2.0);
  CPMap e = conditional_expectation(tracial, b, space);
  CHECK(e.direction() == MapDirection::heisenberg);
  CHECK(e.preservation_residual() < 1e-12);

  cxmat identity = cxmat::Identity(8, 8);
  CHECK((e.apply(identity) - identity).norm() < 1e-12);

  // product operators: E(A (x) B) = A (x) tr(B)/dim 1
  auto rng = derived_rng(23, "condexp");
  cxmat a = random_hermitian(4, rng), bop = random_hermitian(2, rng);
  cxmat full = kron_regions(space, b.complement(), a, bop);
  cxmat expected = kron_regions(space, b.complement(), a * (bop.trace() / 2.0), cxmat::Identity(2, 2));
  CHECK((e.apply(full) - expected).norm() < 1e-12);
  CHECK((cond_exp_apply(full, b, space) - expected).norm() < 1e-12);

  // adjoint duality tr(S E(O)) = tr(E*(S) O)
  CPMap adj = e.adjoint();
  for (int t = 0; t < 20; ++t) {
    cxmat o = random_hermitian(8, rng);
    cxmat s = random_density(8, rng);
    cx lhs = (s * e.apply(o)).trace();
    cx rhs = (adj.apply(s) * o).trace();
    CHECK(std::abs(lhs - rhs) < 1e-11);
    // structured adjoint agrees: tr_b(S) (x) sigma_b
    cxmat sig = tracial.matrix();
    CHECK((adj.apply(s) - adjoint_cond_exp_apply(s, b, space, &sig)).norm() < 1e-11);
  }
}

TEST_CASE("delta decomposition telescopes exactly") {
  SiteSpace space = SiteSpace::qubits(chain_graph(8));
  auto rng = derived_rng(29, "delta");
  Region x({3, 4}, 8);

  // supported exactly on x: only the k = 0 term survives
  cxmat local = random_hermitian(4, rng);
  cxmat full = embed(LocalOperator(x, local), space);
  auto terms = delta_decomposition(full, x, space);
  CHECK((terms[0].matrix - local).norm() < 1e-11);
  for (size_t k = 1; k < terms.size(); ++k) CHECK(terms[k].matrix.norm() < 1e-11);

  // global identity: k = 0 term is the identity
  auto id_terms = delta_decomposition(cxmat::Identity(256, 256), x, space);
  CHECK((id_terms[0].matrix - cxmat::Identity(4, 4)).norm() < 1e-12);
  for (size_t k = 1; k < id_terms.size(); ++k) CHECK(id_terms[k].matrix.norm() < 1e-12);

  // random operator reconstructs exactly once the shells cover the chain
  cxmat a = random_hermitian(256, rng);
  auto shells = delta_decomposition(a, x, space);
  cxmat sum = cxmat::Zero(256, 256);
  for (const auto& term : shells) sum += embed(term, space);
  CHECK((sum - a).norm() < 1e-11);
  // shell k has no component under the previous conditional expectation
  for (size_t k = 1; k < shells.size(); ++k) {
    Region prev = shells[k - 1].support;
    cxmat embedded = embed(shells[k], space);
    CHECK(cond_exp_apply(embedded, prev.complement(), space).norm() < 1e-10);
  }
}

TEST_CASE("choi check classifies maps") {
  SiteSpace space = SiteSpace::qubits(chain_graph(1));
  auto rng = derived_rng(31, "choi");

  // unitary conjugation
  cxmat h = random_hermitian(2, rng);
  EigenSolveResult es = hermitian_eigensolve(h);
  cxvec phase(2);
  for (int i = 0; i < 2; ++i) phase[i] = std::exp(cx(0, es.eigenvalues[i]));
  cxmat u = es.eigenvectors * phase.asDiagonal() * es.eigenvectors.adjoint();
  CPMap conj(MapDirection::schrodinger, space, {{Region::all(1), u}});
  ChoiReport rep = choi_check(conj);
  CHECK(rep.cp);
  CHECK(rep.tp_or_ip);
  CHECK(rep.unital_residual < 1e-12);
  CHECK(rep.contraction_excess < 1e-10);

  // transpose map: the canonical non-CP example, min Choi eigenvalue -1/2
  cxmat k00 = cxmat::Zero(2, 2), k01 = cxmat::Zero(2, 2), k10 = cxmat::Zero(2, 2),
        k11 = cxmat::Zero(2, 2), kxy;
  // transpose via Kraus-like sum E_ij . E_ij (not a CP decomposition)
  // implement directly: Choi of transpose is the swap; use a custom check
  // through four conjugation terms T(rho) = sum_ij E_ij rho E_ij with E_ij = |i><j|
  k00(0, 0) = 1;
  k01(0, 1) = 1;
  k10(1, 0) = 1;
  k11(1, 1) = 1;
  std::vector<KrausOp> ops;
  for (const cxmat* m : {&k00, &k01, &k10, &k11}) {
    cxmat scaled = *m;
    ops.push_back({Region::all(1), scaled});
  }
  // sum_ij E_ij rho E_ij^dag is the dephasing-completely-mixed map, which IS CP;
  // the transpose needs E_ij rho E_ij^T style terms, so check it via a direct
  // linear map: Phi(rho) = rho^T has Choi = SWAP with eigenvalues +-1
  // -> emulate with Kraus pairs (E_01 + E_10)/sqrt2 and i-weighted combinations
  cxmat s1 = (k01 + k10) / std::sqrt(2.0);
  cxmat s2 = (k01 - k10) / std::sqrt(2.0);
  CPMap swapish(MapDirection::schrodinger, space,
                {{Region::all(1), k00}, {Region::all(1), k11}, {Region::all(1), s1}, {Region::all(1), s2}});
  // this map is rho -> rho^T + correction only when the s2 term enters with a
  // negative weight, which Kraus form cannot express; assert CP here and use
  // the negative-weight linear combination below for the non-CP direction
  CHECK(choi_check(swapish).cp);

  // conditional expectations are identity-preserving and CP
  SiteSpace space3 = SiteSpace::qubits(chain_graph(3));
  DensityMatrix sig = DensityMatrix::dense(space3.restrict_to(Region({1}, 3)),
                                           random_density(2, rng));
  ChoiReport ce = choi_check(conditional_expectation(sig, Region({1}, 3), space3));
  CHECK(ce.cp);
  CHECK(ce.tp_or_ip);
}

TEST_CASE("transpose map fails complete positivity") {
  // direct Choi of the transpose on one qubit: C = sum_ij E_ij (x) E_ij^T = SWAP/2
  cxmat choi = cxmat::Zero(4, 4);
  choi(0, 0) = choi(3, 3) = 0.5;
  choi(1, 2) = choi(2, 1) = 0.5;
  EigenSolveResult es = hermitian_eigensolve(choi);
  CHECK(es.eigenvalues.minCoeff() == doctest::Approx(-0.5));
}

TEST_CASE("trace norm contraction of trace-preserving maps") {
  SiteSpace space = SiteSpace::qubits(chain_graph(2));
  auto rng = derived_rng(37, "contract");
  for (int m = 0; m < 3; ++m) {
    // random trace-preserving CP map via normalized random Kraus ops
    std::vector<cxmat> raw;
    cxmat gram = cxmat::Zero(4, 4);
    for (int k = 0; k < 3; ++k) {
      raw.push_back(random_hermitian(4, rng) + cx(0, 1) * random_hermitian(4, rng));
      gram += raw.back().adjoint() * raw.back();
    }
    EigenSolveResult es = hermitian_eigensolve(gram);
    cxvec inv_sqrt(4);
    for (int i = 0; i < 4; ++i) inv_sqrt[i] = 1.0 / std::sqrt(es.eigenvalues[i]);
    cxmat fix = es.eigenvectors * inv_sqrt.asDiagonal() * es.eigenvectors.adjoint();
    std::vector<KrausOp> ops;
    for (auto& k : raw) ops.push_back({Region::all(2), k * fix});
    CPMap map(MapDirection::schrodinger, space, std::move(ops));
    CHECK(map.preservation_residual() < 1e-10);
    for (int t = 0; t < 20; ++t) {
      cxmat rho = random_density(4, rng), omega = random_density(4, rng);
      CHECK(trace_norm(map.apply(rho) - map.apply(omega)) <=
            trace_norm(rho - omega) + 1e-10);
    }
  }
}

TEST_CASE("commutators control the distance to the conditional expectation") {
  // || A - E_{Z^c}(A) || <= 2 max over the Pauli basis of A_{Z^c} of ||[O, A]||
  SiteSpace space = SiteSpace::qubits(chain_graph(3));
  Region zc({2}, 3);  // conditional expectation onto sites {0,1}
  auto rng = derived_rng(41, "comnorm");
  std::vector<cxmat> basis = {preset_matrix("pauli_x"), preset_matrix("pauli_y"),
                              preset_matrix("pauli_z")};
  for (int t = 0; t < 30; ++t) {
    cxmat a = random_hermitian(8, rng);
    cxmat ea = cond_exp_apply(a, zc, space);
    double lhs = operator_norm(a - ea);
    double max_comm = 0.0;
    for (const auto& o : basis) {
      cxmat oe = embed(LocalOperator(zc, o), space);
      max_comm = std::max(max_comm, operator_norm(oe * a - a * oe));
    }
    CHECK(lhs <= 2.0 * max_comm + 1e-11);
  }
  // commuting with the whole basis forces A = E(A)
  cxmat sup = random_hermitian(4, rng);
  cxmat a = kron_regions(space, zc.complement(), sup, cxmat::Identity(2, 2));
  CHECK(operator_norm(a - cond_exp_apply(a, zc, space)) < 1e-10);
}

TEST_CASE("composition of conjugations keeps locality tails subadditive") {
  SiteSpace space = SiteSpace::qubits(chain_graph(6));
  auto rng = derived_rng(43, "alp");
  // two layers of local unitary conjugations with overlapping supports
  auto unitary_on = [&](const Region& support) {
    cxmat h = random_hermitian(static_cast<Eigen::Index>(space.dim_of(support)), rng);
    EigenSolveResult es = hermitian_eigensolve(h);
    cxvec ph(es.eigenvalues.size());
    for (Eigen::Index i = 0; i < ph.size(); ++i) ph[i] = std::exp(cx(0, es.eigenvalues[i]));
    return es.eigenvectors * ph.asDiagonal() * es.eigenvectors.adjoint();
  };
  Region s1({2, 3}, 6), s2({3, 4}, 6);
  cxmat u1 = embed(LocalOperator(s1, unitary_on(s1), false), space);
  cxmat u2 = embed(LocalOperator(s2, unitary_on(s2), false), space);
  Region x({2}, 6);
  const LatticeGraph& g = space.graph();
  auto tail = [&](const cxmat& image, int r) {
    Region xr = g.fatten(x, r);
    return operator_norm(image - cond_exp_apply(image, xr.complement(), space));
  };
  cxmat o = embed(LocalOperator(x, random_unit_hermitian(2, rng)), space);
  cxmat img1 = u1 * o * u1.adjoint();
  cxmat img12 = u2 * img1 * u2.adjoint();
  // each factor spreads by one site; tail of the composition vanishes at the
  // summed radius and obeys the triangle-assembled bound before that
  double t1 = tail(u1 * o * u1.adjoint(), 1);
  cxmat o2 = embed(LocalOperator(g.fatten(x, 1), random_unit_hermitian(8, rng)), space);
  double t2 = tail(u2 * o2 * u2.adjoint(), 1);
  CHECK(t1 < 1e-9);
  CHECK(t2 < 1e-9);
  CHECK(tail(img12, 2) < t1 + t2 + 1e-9);
}
