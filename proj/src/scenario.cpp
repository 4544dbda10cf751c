#include "stitchlab/scenario.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <stdexcept>

namespace stitchlab {

SiteSpace Scenario::space() const {
  int n = graph->size();
  std::vector<int> sites(n), dims(n, 2);
  for (int i = 0; i < n; ++i) sites[i] = i;
  return SiteSpace(graph, sites, dims, dim_cap);
}

HamiltonianModel Scenario::model() const {
  HamiltonianModel m;
  m.space = space();
  m.interaction = hamiltonian;
  m.kernel_tol = kernel_tol;
  const std::size_t dim = m.space.dim();
  switch (ground_kind) {
    case GroundKind::all_down: {
      cxvec amps = cxvec::Zero(dim);
      amps[static_cast<Eigen::Index>(dim) - 1] = 1.0;  // down = last local basis state
      m.ground_vector = StateVector(m.space, amps);
      break;
    }
    case GroundKind::circuit: {
      if (certificate.kind() != InvertibilityCertificate::Kind::finite_depth_circuit)
        throw std::runtime_error("circuit ground requires a circuit certificate");
      AuxSpace aux = AuxSpace::make(m.space, certificate.aux_dims());
      if (!aux.trivial_aux)
        throw std::runtime_error("circuit ground construction supports trivial auxiliaries only");
      TimeDependentInteraction q = certificate.generator(aux.doubled);
      cxvec pi = cxvec::Ones(1);
      for (int i = 0; i < aux.doubled.n_sites(); ++i) {
        const cxvec& local = certificate.pi_site()[i];
        cxvec next(pi.size() * local.size());
        for (Eigen::Index a = 0; a < pi.size(); ++a)
          for (Eigen::Index b = 0; b < local.size(); ++b)
            next[a * local.size() + b] = pi[a] * local[b];
        pi = std::move(next);
      }
      Propagator u = propagate(q, 0.0, q.total_time(), aux.doubled);
      cxvec omega = u.u * pi;
      m.ground_vector = StateVector(m.space, omega);
      break;
    }
    case GroundKind::solve: {
      LinearOp h = assemble_op(hamiltonian, m.space);
      EigenSolveResult es = lowest_eigenpairs(h, 2, 1e-11);
      m.ground_vector = StateVector(m.space, es.eigenvectors.col(0));
      break;
    }
  }
  return m;
}

Scenario::PerturbedGround Scenario::perturbed_ground() const {
  if (!perturbation) throw std::runtime_error("scenario has no perturbation");
  Interaction total = hamiltonian;
  total.add_scaled(*perturbation, 1.0);
  SiteSpace sp = space();
  LinearOp h = assemble_op(total, sp);
  int k = 6;
  EigenSolveResult es = lowest_eigenpairs(h, k, 1e-11);
  while (es.eigenvalues.size() == k &&
         es.eigenvalues[k - 1] - es.eigenvalues[0] <= kernel_tol &&
         k < static_cast<int>(sp.dim())) {
    k *= 2;
    es = lowest_eigenpairs(h, k, 1e-11);
  }
  PerturbedGround out;
  out.energy = es.eigenvalues[0];
  Eigen::Index i = 0;
  for (; i < es.eigenvalues.size(); ++i) {
    if (es.eigenvalues[i] - out.energy > kernel_tol) break;
    out.states.emplace_back(sp, es.eigenvectors.col(i));
  }
  out.gap_above = i < es.eigenvalues.size() ? es.eigenvalues[i] - out.energy : 0.0;
  return out;
}

std::vector<std::string> builtin_scenario_names() {
  return {"bell-impurity", "ising-ltqo-fail", "circuit-chain", "lr-chain"};
}

namespace {

double get(const std::map<std::string, double>& overrides, const std::string& key, double dflt) {
  auto it = overrides.find(key);
  return it == overrides.end() ? dflt : it->second;
}

Scenario make_bell_impurity(const std::map<std::string, double>& ov) {
  Scenario s;
  s.name = "bell-impurity";
  const int length = static_cast<int>(get(ov, "L", 10));
  const double c = get(ov, "c", 0.5);
  const double tail_g = get(ov, "g", 0.25);
  const double tail_lambda = get(ov, "lambda", 1.0);
  const int tail_len = static_cast<int>(get(ov, "K", 6));
  if (length < 4) throw ConfigError("bell-impurity needs L >= 4");
  s.graph = std::make_shared<LatticeGraph>(LatticeGraph::chain(length));
  const int n = length;
  for (int i = 0; i < n; ++i)
    s.hamiltonian.add_term(Region::single(i, n), preset_matrix("proj_up"));

  Region anchor({0, n - 1}, n);
  Interaction j(anchor, "bell-impurity-j");
  j.add_term(Region::single(0, n), -preset_matrix("proj_up"));
  j.add_term(Region::single(n - 1, n), -preset_matrix("proj_up"));
  j.add_term(Region({0, n - 1}, n), -std::exp(-c * n) * preset_matrix("bell_proj"));
  const cxmat sx = preset_matrix("pauli_x");
  const cxmat xx = Eigen::kroneckerProduct(sx, sx).eval();
  for (int k = 1; k <= std::min(tail_len, n - 2); ++k) {
    double coeff = tail_g * std::exp(-tail_lambda * (k - 1));
    j.add_term(Region({0, k}, n), -coeff * xx);
    j.add_term(Region({n - 1 - k, n - 1}, n), -coeff * xx);
  }
  s.perturbation = std::move(j);
  s.ground_kind = Scenario::GroundKind::all_down;
  s.exponents = {1.0, 0.0};
  s.plan.expect_ff = true;
  s.plan.expect_gap = true;
  s.plan.expect_ltqo = true;
  s.plan.expect_invertibility = true;
  for (int x = 1; x <= std::min(5, n / 2 - 1); ++x) s.plan.decay_centers.push_back(x);
  s.plan.decay_radius = 1;
  s.plan.iso_center = n / 2;
  s.plan.iso_r = 1;
  return s;
}

Scenario make_ising(const std::map<std::string, double>& ov) {
  Scenario s;
  s.name = "ising-ltqo-fail";
  const int length = static_cast<int>(get(ov, "L", 8));
  if (length < 4) throw ConfigError("ising-ltqo-fail needs L >= 4");
  s.graph = std::make_shared<LatticeGraph>(LatticeGraph::chain(length));
  const int n = length;
  for (int i = 0; i + 1 < n; ++i)
    s.hamiltonian.add_term(Region({i, i + 1}, n), preset_matrix("ising_zz"));
  // boundary symmetry breaking; J = -B removes it
  s.hamiltonian.add_term(Region::single(0, n), preset_matrix("proj_up"));
  Interaction j(Region::single(0, n), "minus-b");
  j.add_term(Region::single(0, n), -preset_matrix("proj_up"));
  s.perturbation = std::move(j);
  s.ground_kind = Scenario::GroundKind::all_down;
  s.exponents = {1.0, 0.0};
  s.plan.expect_ff = true;
  s.plan.expect_gap = true;
  s.plan.expect_ltqo = false;  // the bundled counterexample
  s.plan.expect_invertibility = true;
  for (int x = 2; x <= n / 2; ++x) s.plan.decay_centers.push_back(x);
  s.plan.decay_radius = 1;
  return s;
}

Scenario make_circuit_chain(const std::map<std::string, double>& ov) {
  Scenario s;
  s.name = "circuit-chain";
  const int length = static_cast<int>(get(ov, "L", 8));
  const double theta = get(ov, "theta", 0.6);
  if (length < 4 || length % 2 != 0) throw ConfigError("circuit-chain needs even L >= 4");
  s.graph = std::make_shared<LatticeGraph>(LatticeGraph::chain(length));
  const int n = length;

  // depth-1 brick layer of exp(i theta XX) gates on disjoint bonds
  const cxmat sx = preset_matrix("pauli_x");
  cxmat xx = Eigen::kroneckerProduct(sx, sx).eval();
  EigenSolveResult es = hermitian_eigensolve(theta * xx);
  cxvec phase(es.eigenvalues.size());
  for (Eigen::Index i = 0; i < phase.size(); ++i) phase[i] = std::exp(cx(0.0, es.eigenvalues[i]));
  cxmat gate = es.eigenvectors * phase.asDiagonal() * es.eigenvectors.adjoint();

  std::vector<InvertibilityCertificate::Gate> gates;
  for (int i = 0; i + 1 < n; i += 2) gates.push_back({Region({i, i + 1}, n), gate, 0});

  // H = sum_i G proj_up_i G^dag, frustration-free with ground state G |down..down>
  cxvec down(2);
  down << 0.0, 1.0;
  std::vector<cxvec> pi(n, down);
  for (int i = 0; i < n; ++i) {
    int block = i - (i % 2);
    if (block + 1 >= n) block = n - 2;
    Region support({block, block + 1}, n);
    cxmat local = i % 2 == 0 ? Eigen::kroneckerProduct(preset_matrix("proj_up"), cxmat::Identity(2, 2)).eval()
                             : Eigen::kroneckerProduct(cxmat::Identity(2, 2), preset_matrix("proj_up")).eval();
    s.hamiltonian.add_term(support, gate * local * gate.adjoint());
  }
  s.certificate = InvertibilityCertificate::circuit(std::move(gates), std::vector<int>(n, 1),
                                                    std::move(pi), cxvec::Ones(1));
  s.ground_kind = Scenario::GroundKind::circuit;

  Interaction j(Region::single(0, n), "edge-field");
  j.add_term(Region::single(0, n), -0.3 * preset_matrix("pauli_x"));
  s.perturbation = std::move(j);
  s.exponents = {1.0, 0.0};
  s.plan.expect_ff = true;
  s.plan.expect_gap = true;
  s.plan.expect_ltqo = true;
  s.plan.expect_invertibility = true;
  for (int x = 2; x <= n / 2; ++x) s.plan.decay_centers.push_back(x);
  s.plan.decay_radius = 1;
  return s;
}

Scenario make_lr_chain(const std::map<std::string, double>& ov) {
  Scenario s;
  s.name = "lr-chain";
  const int length = static_cast<int>(get(ov, "L", 8));
  s.graph = std::make_shared<LatticeGraph>(LatticeGraph::chain(length));
  const int n = length;
  for (int i = 0; i + 1 < n; ++i)
    s.hamiltonian.add_term(Region({i, i + 1}, n), preset_matrix("heisenberg_bond"));
  s.ground_kind = Scenario::GroundKind::solve;
  s.exponents = {1.0, 0.0};
  s.plan.check_assumptions = false;
  return s;
}

}  // namespace

Scenario builtin_scenario(const std::string& name,
                          const std::map<std::string, double>& overrides) {
  if (name == "bell-impurity") return make_bell_impurity(overrides);
  if (name == "ising-ltqo-fail") return make_ising(overrides);
  if (name == "circuit-chain") return make_circuit_chain(overrides);
  if (name == "lr-chain") return make_lr_chain(overrides);
  throw ConfigError("unknown scenario: " + name);
}

}  // namespace stitchlab
