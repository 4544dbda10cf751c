#include "stitchlab/model.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stitchlab {

Interaction::Interaction(std::optional<Region> anchor, std::string label)
    : anchor_(std::move(anchor)), label_(std::move(label)) {}

void Interaction::add_term(const Region& support, const cxmat& matrix) {
  if (matrix.norm() == 0.0) return;
  if ((matrix - matrix.adjoint()).norm() > 1e-10 * (1.0 + matrix.norm()))
    throw std::invalid_argument("interaction term must be Hermitian");
  if (anchor_ && !support.intersects(*anchor_))
    throw std::invalid_argument("term support disjoint from anchor region");
  auto it = terms_.find(support);
  if (it == terms_.end()) {
    terms_.emplace(support, LocalOperator(support, matrix));
  } else {
    it->second.matrix += matrix;
    if (it->second.matrix.norm() < 1e-300) terms_.erase(it);
  }
}

void Interaction::add_scaled(const Interaction& other, double coeff) {
  for (const auto& [support, op] : other.terms()) add_term(support, coeff * op.matrix);
}

Interaction Interaction::scaled(double coeff) const {
  Interaction out(anchor_, label_);
  out.add_scaled(*this, coeff);
  return out;
}

Interaction obc_restrict(const Interaction& q, const Region& z) {
  Interaction out(std::nullopt, q.label());
  for (const auto& [support, op] : q.terms())
    if (support.subset_of(z)) out.add_term(support, op.matrix);
  return out;
}

Interaction truncate_across(const Interaction& q, const Region& z) {
  Interaction out(std::nullopt, q.label());
  for (const auto& [support, op] : q.terms())
    if (support.subset_of(z) || !support.intersects(z)) out.add_term(support, op.matrix);
  return out;
}

Interaction crossing_remainder(const Interaction& q, const Region& z, const LatticeGraph& graph) {
  Interaction out(graph.boundary(z), q.label().empty() ? "" : q.label() + "~crossing");
  for (const auto& [support, op] : q.terms())
    if (support.intersects(z) && !support.subset_of(z)) out.add_term(support, op.matrix);
  return out;
}

double interaction_norm_m(const Interaction& q, const DecayFunction& m,
                          const LatticeGraph& graph) {
  std::map<Region, double> norms;
  for (const auto& [support, op] : q.terms()) norms[support] = op.norm();
  double sup = 0.0;
  for (int x = 0; x < graph.size(); ++x) {
    double sum = 0.0;
    for (const auto& [support, op] : q.terms()) {
      if (!support.contains(x)) continue;
      double denom = m.at(1 + graph.region_diameter(support));
      if (denom == 0.0) {
        if (norms[support] > 0.0) return std::numeric_limits<double>::infinity();
        continue;
      }
      sum += norms[support] / denom;
    }
    sup = std::max(sup, sum);
  }
  return sup;
}

double interaction_norm_f(const Interaction& q, const DecayFunction& f,
                          const LatticeGraph& graph) {
  if (f.kind() != DecayKind::f_function)
    throw std::invalid_argument("interaction_norm_f expects an F-function");
  std::map<Region, double> norms;
  for (const auto& [support, op] : q.terms()) norms[support] = op.norm();
  double sup = 0.0;
  for (int x = 0; x < graph.size(); ++x)
    for (int y = 0; y < graph.size(); ++y) {
      double sum = 0.0;
      for (const auto& [support, op] : q.terms())
        if (support.contains(x) && support.contains(y)) sum += norms[support];
      if (sum == 0.0) continue;
      double denom = f.at(graph.distance(x, y));
      if (denom == 0.0) return std::numeric_limits<double>::infinity();
      sup = std::max(sup, sum / denom);
    }
  return sup;
}

Interaction interaction_commutator(const Interaction& z1, const Interaction& z2,
                                   const SiteSpace& space) {
  std::optional<Region> anchor = z1.anchor() ? z1.anchor() : z2.anchor();
  Interaction out(anchor, "");
  for (const auto& [s1, a] : z1.terms())
    for (const auto& [s2, b] : z2.terms()) {
      if (!s1.intersects(s2)) continue;
      Region u = s1.unite(s2);
      SiteSpace local = space.restrict_to(u);
      cxmat ae = embed(LocalOperator(s1, a.matrix), local);
      cxmat be = embed(LocalOperator(s2, b.matrix), local);
      cxmat comm = cx(0.0, 1.0) * (ae * be - be * ae);
      if (comm.norm() > 0.0) out.add_term(u, comm);
    }
  return out;
}

cxmat assemble(const Interaction& q, const SiteSpace& space) {
  if (space.dim() > (std::size_t{1} << 12))
    throw ResourceCapError("dense assembly above 2^12: use assemble_op");
  cxmat h = cxmat::Zero(space.dim(), space.dim());
  for (const auto& [support, op] : q.terms()) {
    if (!space.covers(support)) throw std::invalid_argument("support outside graph");
    h += embed(op, space);
  }
  return h;
}

LinearOp assemble_op(const Interaction& q, const SiteSpace& space) {
  struct Term {
    SiteSpace::Split split;
    cxmat matrix;
  };
  auto terms = std::make_shared<std::vector<Term>>();
  for (const auto& [support, op] : q.terms()) {
    if (!space.covers(support)) throw std::invalid_argument("support outside graph");
    terms->push_back({space.split(support), op.matrix});
  }
  LinearOp out;
  out.dim = space.dim();
  out.apply = [terms](const cxvec& in, cxvec& result) {
    result.setZero(in.size());
    for (const auto& term : *terms) {
      const auto& sp = term.split;
      const std::size_t dk = sp.keep_dim(), dr = sp.rest_dim();
      for (std::size_t b = 0; b < dr; ++b) {
        const std::size_t ob = sp.rest_offsets[b];
        for (std::size_t i = 0; i < dk; ++i) {
          cx acc(0.0, 0.0);
          for (std::size_t j = 0; j < dk; ++j)
            acc += term.matrix(i, j) * in[static_cast<Eigen::Index>(sp.keep_offsets[j] + ob)];
          result[static_cast<Eigen::Index>(sp.keep_offsets[i] + ob)] += acc;
        }
      }
    }
  };
  return out;
}

DensityMatrix HamiltonianModel::ground_density() const {
  if (!ground_vector) throw std::runtime_error("model has no ground vector");
  return DensityMatrix::pure(*ground_vector);
}

FrustrationFreeReport check_frustration_free(const HamiltonianModel& model, double tol) {
  if (!model.ground_vector)
    throw std::runtime_error("check_frustration_free requires a ground vector");
  FrustrationFreeReport rep;
  const cxvec& omega = model.ground_vector->amplitudes();
  cxvec scratch(omega.size());
  double worst_eig = 0.0, worst_res = 0.0;
  for (const auto& [support, op] : model.interaction.terms()) {
    EigenSolveResult es = hermitian_eigensolve(op.matrix);
    double mine = es.eigenvalues.minCoeff();
    apply_local(op, model.space, omega, scratch, false);
    double res = scratch.norm();
    if (mine < worst_eig || res > worst_res) rep.worst_offender = support.to_string();
    worst_eig = std::min(worst_eig, mine);
    worst_res = std::max(worst_res, res);
  }
  rep.worst_term_min_eig = worst_eig;
  rep.worst_term_residual = worst_res;
  LinearOp h = assemble_op(model.interaction, model.space);
  h.apply(omega, scratch);
  rep.hamiltonian_residual = scratch.norm();
  rep.pass = worst_eig >= -tol && worst_res <= tol && rep.hamiltonian_residual <= tol * 10.0;
  return rep;
}

namespace {

// Kernel basis of the OBC restriction to a region, on the restricted space.
cxmat ball_kernel_basis(const HamiltonianModel& model, const Region& z, const SiteSpace& sub) {
  Interaction hz = obc_restrict(model.interaction, z);
  if (sub.dim() <= 512) {
    cxmat dense = cxmat::Zero(sub.dim(), sub.dim());
    for (const auto& [support, op] : hz.terms()) dense += embed(op, sub);
    return kernel_basis(dense, model.kernel_tol);
  }
  return kernel_basis(assemble_op(hz, sub), model.kernel_tol);
}

}  // namespace

LtqoProfile measure_ltqo(const HamiltonianModel& model, int x, const std::vector<int>& r_grid,
                         const std::vector<int>& k_grid, const LtqoConfig& cfg) {
  if (!model.ground_vector) throw std::runtime_error("measure_ltqo requires a ground vector");
  const LatticeGraph& g = model.space.graph();
  DensityMatrix mu = model.ground_density();
  LtqoProfile prof;
  prof.center = x;
  for (int r : r_grid) {
    Region z = g.ball(x, r);
    SiteSpace sub = model.space.restrict_to(z);
    cxmat kernel = ball_kernel_basis(model, z, sub);
    if (kernel.cols() == 0) continue;
    auto rng = derived_rng(cfg.seed, "ltqo/" + std::to_string(x) + "/" + std::to_string(r));
    std::vector<cxvec> probes;
    for (Eigen::Index c = 0; c < kernel.cols(); ++c) probes.push_back(kernel.col(c));
    if (kernel.cols() > 1) {
      std::normal_distribution<double> gauss;
      for (int t = 0; t < cfg.n_random; ++t) {
        cxvec coeff(kernel.cols());
        for (Eigen::Index c = 0; c < kernel.cols(); ++c) coeff[c] = cx(gauss(rng), gauss(rng));
        cxvec v = kernel * coeff;
        v.normalize();
        probes.push_back(std::move(v));
      }
    }
    for (int k : k_grid) {
      if (k > r) continue;
      Region window = g.ball(x, r - k);
      DensityMatrix mu_win = mu.reduced(window);
      double sup = 0.0;
      for (const cxvec& v : probes) {
        DensityMatrix rho = DensityMatrix::pure(StateVector(sub, v)).reduced(window);
        sup = std::max(sup, local_trace_distance(rho, mu_win, window));
      }
      prof.rows.push_back({r, k, sup});
    }
  }
  // fit the smallest candidate exponent; measured(r,k) is non-increasing in k,
  // so every candidate yields a non-increasing m_o table
  std::vector<double> cands = cfg.d_o_candidates;
  std::sort(cands.begin(), cands.end());
  prof.fitted_d_o = cands.empty() ? 0.0 : cands.front();
  prof.k_grid = k_grid;
  for (int k : k_grid) {
    double mo = 0.0;
    for (const auto& row : prof.rows)
      if (row.k == k)
        mo = std::max(mo, row.measured_sup /
                              std::pow(std::max(1.0, static_cast<double>(row.r)), prof.fitted_d_o));
    prof.m_o.push_back(mo);
  }
  if (prof.m_o.empty()) {
    prof.decaying = false;
  } else {
    double head = prof.m_o.front(), tail = prof.m_o.back();
    prof.decaying = tail <= std::max(cfg.pass_abs, cfg.pass_ratio * head);
  }
  return prof;
}

GapProfile measure_gap(const HamiltonianModel& model, int x, const std::vector<int>& r_grid,
                       const std::vector<double>& d_gamma_candidates) {
  const LatticeGraph& g = model.space.graph();
  GapProfile prof;
  prof.center = x;
  const double tol = model.kernel_tol;
  for (int r : r_grid) {
    Region z = g.ball(x, r);
    SiteSpace sub = model.space.restrict_to(z);
    Interaction hz = obc_restrict(model.interaction, z);
    realvec evals;
    if (sub.dim() <= 512) {
      cxmat dense = cxmat::Zero(sub.dim(), sub.dim());
      for (const auto& [support, op] : hz.terms()) dense += embed(op, sub);
      evals = hermitian_eigensolve(dense).eigenvalues;
    } else {
      LinearOp op = assemble_op(hz, sub);
      int k = 8;
      while (true) {
        k = std::min<int>(k, static_cast<int>(op.dim));
        EigenSolveResult es = lowest_eigenpairs(op, k);
        if (es.eigenvalues.size() > 0 &&
            es.eigenvalues[es.eigenvalues.size() - 1] <= 10.0 * tol &&
            k < static_cast<int>(op.dim)) {
          k *= 2;
          continue;
        }
        evals = es.eigenvalues;
        break;
      }
    }
    int kernel_dim = 0;
    while (kernel_dim < evals.size() && evals[kernel_dim] <= tol) ++kernel_dim;
    for (Eigen::Index i = 0; i < evals.size(); ++i)
      if (evals[i] > tol && evals[i] < 10.0 * tol)
        throw std::runtime_error("kernel tolerance ambiguous: eigenvalue " +
                                 std::to_string(evals[i]));
    if (kernel_dim == evals.size())
      throw std::runtime_error("no gap resolvable at tolerance for r=" + std::to_string(r));
    prof.rows.push_back({r, evals[kernel_dim], kernel_dim});
  }
  // smallest constant per candidate over rows with r >= 1; pick the candidate
  // minimizing the constant, ties toward smaller exponent
  double best_c = std::numeric_limits<double>::infinity(), best_d = 0.0;
  std::vector<double> cands = d_gamma_candidates;
  std::sort(cands.begin(), cands.end());
  for (double d : cands) {
    double c = 0.0;
    for (const auto& row : prof.rows)
      if (row.r >= 1) c = std::max(c, 1.0 / (row.gamma * std::pow(row.r, d)));
    if (c < best_c - 1e-15) {
      best_c = c;
      best_d = d;
    }
  }
  prof.fitted_c_gamma = best_c;
  prof.fitted_d_gamma = best_d;
  return prof;
}

cxmat preset_matrix(const std::string& name) {
  auto m2 = [](cx a, cx b, cx c, cx d) {
    cxmat m(2, 2);
    m << a, b, c, d;
    return m;
  };
  if (name == "pauli_x") return m2(0, 1, 1, 0);
  if (name == "pauli_y") return m2(0, cx(0, -1), cx(0, 1), 0);
  if (name == "pauli_z") return m2(1, 0, 0, -1);
  if (name == "proj_up") return m2(1, 0, 0, 0);
  if (name == "proj_down") return m2(0, 0, 0, 1);
  if (name == "identity2") return cxmat::Identity(2, 2);
  if (name == "bell_proj") {
    cxvec b(4);
    b << 1.0 / std::sqrt(2.0), 0, 0, 1.0 / std::sqrt(2.0);
    return b * b.adjoint();
  }
  if (name == "ising_zz") {
    // (1 - sz sz)/2, projector onto antialigned pairs
    cxmat sz = m2(1, 0, 0, -1);
    cxmat zz = Eigen::kroneckerProduct(sz, sz).eval();
    return (cxmat::Identity(4, 4) - zz) / 2.0;
  }
  if (name == "heisenberg_bond") {
    cxmat sx = m2(0, 1, 1, 0), sy = m2(0, cx(0, -1), cx(0, 1), 0), sz = m2(1, 0, 0, -1);
    cxmat h = Eigen::kroneckerProduct(sx, sx).eval() + Eigen::kroneckerProduct(sy, sy).eval() +
              Eigen::kroneckerProduct(sz, sz).eval();
    return h / 4.0;
  }
  throw ConfigError("unknown preset matrix: " + name);
}

}  // namespace stitchlab
