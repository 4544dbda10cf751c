#include "stitchlab/tensorops.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stitchlab {

SiteSpace::SiteSpace(std::shared_ptr<const LatticeGraph> graph, std::vector<int> sites,
                     std::vector<int> local_dims, std::size_t dim_cap)
    : graph_(std::move(graph)), sites_(std::move(sites)), dims_(std::move(local_dims)), cap_(dim_cap) {
  if (!graph_) throw std::invalid_argument("site space needs a graph");
  if (sites_.size() != dims_.size())
    throw std::invalid_argument("sites and local_dims size mismatch");
  dim_ = 1;
  for (size_t i = 0; i < sites_.size(); ++i) {
    if (sites_[i] < 0 || sites_[i] >= graph_->size())
      throw std::invalid_argument("site not in graph");
    if (dims_[i] < 1) throw std::invalid_argument("local dimension must be >= 1");
    if (dim_ > cap_ / static_cast<std::size_t>(dims_[i]))
      throw ResourceCapError("Hilbert dimension exceeds cap " + std::to_string(cap_));
    dim_ *= static_cast<std::size_t>(dims_[i]);
  }
  strides_.assign(sites_.size(), 1);
  for (int i = static_cast<int>(sites_.size()) - 2; i >= 0; --i)
    strides_[i] = strides_[i + 1] * static_cast<std::size_t>(dims_[i + 1]);
}

SiteSpace SiteSpace::qubits(std::shared_ptr<const LatticeGraph> graph, std::size_t dim_cap) {
  int n = graph->size();
  std::vector<int> sites(n), dims(n, 2);
  for (int i = 0; i < n; ++i) sites[i] = i;
  return SiteSpace(std::move(graph), std::move(sites), std::move(dims), dim_cap);
}

int SiteSpace::position_of(int site) const {
  for (size_t i = 0; i < sites_.size(); ++i)
    if (sites_[i] == site) return static_cast<int>(i);
  return -1;
}

bool SiteSpace::covers(const Region& region) const {
  for (int s : region.sites())
    if (position_of(s) < 0) return false;
  return true;
}

std::size_t SiteSpace::dim_of(const Region& region) const {
  std::size_t d = 1;
  for (size_t i = 0; i < sites_.size(); ++i)
    if (region.contains(sites_[i])) d *= static_cast<std::size_t>(dims_[i]);
  return d;
}

SiteSpace SiteSpace::restrict_to(const Region& region) const {
  std::vector<int> s, d;
  for (size_t i = 0; i < sites_.size(); ++i)
    if (region.contains(sites_[i])) {
      s.push_back(sites_[i]);
      d.push_back(dims_[i]);
    }
  return SiteSpace(graph_, std::move(s), std::move(d), cap_);
}

SiteSpace::Split SiteSpace::split(const Region& keep) const {
  std::vector<int> keep_pos, rest_pos;
  for (size_t i = 0; i < sites_.size(); ++i)
    (keep.contains(sites_[i]) ? keep_pos : rest_pos).push_back(static_cast<int>(i));
  auto offsets = [&](const std::vector<int>& pos) {
    std::size_t d = 1;
    for (int p : pos) d *= static_cast<std::size_t>(dims_[p]);
    std::vector<std::size_t> out(d, 0);
    std::vector<int> digits(pos.size(), 0);
    for (std::size_t idx = 0; idx < d; ++idx) {
      std::size_t off = 0;
      for (size_t j = 0; j < pos.size(); ++j)
        off += static_cast<std::size_t>(digits[j]) * strides_[pos[j]];
      out[idx] = off;
      for (int j = static_cast<int>(pos.size()) - 1; j >= 0; --j) {
        if (++digits[j] < dims_[pos[j]]) break;
        digits[j] = 0;
      }
    }
    return out;
  };
  Split sp;
  sp.keep_offsets = offsets(keep_pos);
  sp.rest_offsets = offsets(rest_pos);
  return sp;
}

LocalOperator::LocalOperator(Region s, cxmat m, bool check_hermitian)
    : support(std::move(s)), matrix(std::move(m)) {
  if (matrix.rows() != matrix.cols()) throw std::invalid_argument("local operator must be square");
  if (check_hermitian)
    hermitian_flag = (matrix - matrix.adjoint()).norm() <= 1e-12 * (1.0 + matrix.norm());
}

StateVector::StateVector(SiteSpace space, cxvec amplitudes)
    : space_(std::move(space)), amps_(std::move(amplitudes)) {
  if (static_cast<std::size_t>(amps_.size()) != space_.dim())
    throw std::invalid_argument("state vector dimension mismatch");
  if (std::abs(amps_.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("state vector must be normalized");
}

DensityMatrix DensityMatrix::pure(StateVector psi) {
  DensityMatrix d(psi.space());
  d.pure_ = psi.amplitudes();
  return d;
}

DensityMatrix DensityMatrix::dense(SiteSpace space, cxmat rho) {
  if (static_cast<std::size_t>(rho.rows()) != space.dim() || rho.rows() != rho.cols())
    throw std::invalid_argument("density matrix dimension mismatch");
  if (std::abs(rho.trace().real() - 1.0) > 1e-8 || std::abs(rho.trace().imag()) > 1e-8)
    throw std::invalid_argument("density matrix must have unit trace");
  DensityMatrix d(std::move(space));
  d.dense_ = std::move(rho);
  return d;
}

cxmat DensityMatrix::matrix() const {
  if (dense_) return *dense_;
  return (*pure_) * pure_->adjoint();
}

DensityMatrix DensityMatrix::reduced(const Region& keep) const {
  Region kept = keep.intersect(space_.site_region());
  auto sp = space_.split(kept);
  const std::size_t dk = sp.keep_dim(), dr = sp.rest_dim();
  cxmat out = cxmat::Zero(dk, dk);
  if (pure_) {
    const cxvec& v = *pure_;
    for (std::size_t b = 0; b < dr; ++b) {
      const std::size_t ob = sp.rest_offsets[b];
      for (std::size_t a = 0; a < dk; ++a) {
        cx va = v[static_cast<Eigen::Index>(sp.keep_offsets[a] + ob)];
        if (va == cx(0.0, 0.0)) continue;
        for (std::size_t a2 = 0; a2 < dk; ++a2)
          out(a, a2) += va * std::conj(v[static_cast<Eigen::Index>(sp.keep_offsets[a2] + ob)]);
      }
    }
  } else {
    const cxmat& rho = *dense_;
    for (std::size_t b = 0; b < dr; ++b) {
      const std::size_t ob = sp.rest_offsets[b];
      for (std::size_t a = 0; a < dk; ++a)
        for (std::size_t a2 = 0; a2 < dk; ++a2)
          out(a, a2) += rho(sp.keep_offsets[a] + ob, sp.keep_offsets[a2] + ob);
    }
  }
  return DensityMatrix::dense(space_.restrict_to(kept), std::move(out));
}

double DensityMatrix::expectation(const LocalOperator& op) const {
  DensityMatrix r = reduced(op.support);
  return (r.matrix() * op.matrix).trace().real();
}

void DensityMatrix::validate(double tol) const {
  if (pure_) {
    if (std::abs(pure_->norm() - 1.0) > tol)
      throw std::runtime_error("density matrix validation: pure state not normalized");
    return;
  }
  Eigen::SelfAdjointEigenSolver<cxmat> es(*dense_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol)
    throw std::runtime_error("density matrix validation: negative eigenvalue");
}

cxmat embed(const LocalOperator& op, const SiteSpace& space) {
  if (!space.covers(op.support)) throw std::invalid_argument("operator support outside space");
  auto sp = space.split(op.support);
  const std::size_t dk = sp.keep_dim(), dr = sp.rest_dim();
  if (static_cast<std::size_t>(op.matrix.rows()) != dk)
    throw std::invalid_argument("local operator dimension mismatch");
  cxmat out = cxmat::Zero(space.dim(), space.dim());
  for (std::size_t b = 0; b < dr; ++b) {
    const std::size_t ob = sp.rest_offsets[b];
    for (std::size_t a = 0; a < dk; ++a)
      for (std::size_t a2 = 0; a2 < dk; ++a2) {
        cx v = op.matrix(a, a2);
        if (v != cx(0.0, 0.0)) out(sp.keep_offsets[a] + ob, sp.keep_offsets[a2] + ob) = v;
      }
  }
  return out;
}

void apply_local(const LocalOperator& op, const SiteSpace& space, const cxvec& in, cxvec& out,
                 bool accumulate) {
  if (!space.covers(op.support)) throw std::invalid_argument("operator support outside space");
  auto sp = space.split(op.support);
  const std::size_t dk = sp.keep_dim(), dr = sp.rest_dim();
  if (!accumulate) out.setZero(in.size());
  for (std::size_t b = 0; b < dr; ++b) {
    const std::size_t ob = sp.rest_offsets[b];
    for (std::size_t a = 0; a < dk; ++a) {
      cx acc(0.0, 0.0);
      for (std::size_t a2 = 0; a2 < dk; ++a2)
        acc += op.matrix(a, a2) * in[static_cast<Eigen::Index>(sp.keep_offsets[a2] + ob)];
      out[static_cast<Eigen::Index>(sp.keep_offsets[a] + ob)] += acc;
    }
  }
}

cxmat partial_trace_matrix(const cxmat& m, const SiteSpace& space, const Region& keep) {
  auto sp = space.split(keep.intersect(space.site_region()));
  const std::size_t dk = sp.keep_dim(), dr = sp.rest_dim();
  cxmat out = cxmat::Zero(dk, dk);
  for (std::size_t b = 0; b < dr; ++b) {
    const std::size_t ob = sp.rest_offsets[b];
    for (std::size_t a = 0; a < dk; ++a)
      for (std::size_t a2 = 0; a2 < dk; ++a2)
        out(a, a2) += m(sp.keep_offsets[a] + ob, sp.keep_offsets[a2] + ob);
  }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, const Region& keep) {
  return rho.reduced(keep);
}

cxmat kron_regions(const SiteSpace& space, const Region& r, const cxmat& a, const cxmat& b) {
  auto sp = space.split(r.intersect(space.site_region()));
  const std::size_t dk = sp.keep_dim(), dr = sp.rest_dim();
  if (static_cast<std::size_t>(a.rows()) != dk || static_cast<std::size_t>(b.rows()) != dr)
    throw std::invalid_argument("kron_regions dimension mismatch");
  cxmat out(space.dim(), space.dim());
  for (std::size_t i = 0; i < dk; ++i)
    for (std::size_t j = 0; j < dr; ++j)
      for (std::size_t i2 = 0; i2 < dk; ++i2)
        for (std::size_t j2 = 0; j2 < dr; ++j2)
          out(sp.keep_offsets[i] + sp.rest_offsets[j], sp.keep_offsets[i2] + sp.rest_offsets[j2]) =
              a(i, i2) * b(j, j2);
  return out;
}

double local_trace_distance(const DensityMatrix& rho, const DensityMatrix& omega,
                            const Region& x_region) {
  if (!rho.space().same_layout(omega.space()))
    throw std::invalid_argument("states live on different spaces");
  cxmat d = rho.reduced(x_region).matrix() - omega.reduced(x_region).matrix();
  return trace_norm(d);
}

EigenSolveResult hermitian_eigensolve(const cxmat& m) {
  if ((m - m.adjoint()).norm() > 1e-10 * (1.0 + m.norm()))
    throw std::invalid_argument("non-Hermitian input");
  Eigen::SelfAdjointEigenSolver<cxmat> es((m + m.adjoint()) / 2.0);
  if (es.info() != Eigen::Success) throw std::runtime_error("dense eigensolver failed");
  return EigenSolveResult{es.eigenvalues(), es.eigenvectors()};
}

namespace {

// One Lanczos sweep with full reorthogonalization against both the Krylov
// basis and previously converged vectors.
struct SweepResult {
  std::vector<double> ritz_values;
  std::vector<cxvec> ritz_vectors;
};

SweepResult lanczos_sweep(const LinearOp& op, const std::vector<cxvec>& deflated, int steps,
                          std::mt19937_64& rng) {
  const Eigen::Index n = static_cast<Eigen::Index>(op.dim);
  auto project_out = [&](cxvec& v) {
    for (const cxvec& w : deflated) v -= w.dot(v) * w;
  };
  cxvec q = random_unit_vector(n, rng);
  project_out(q);
  if (q.norm() < 1e-8) q = random_unit_vector(n, rng), project_out(q);
  q.normalize();

  std::vector<cxvec> basis{q};
  std::vector<double> alpha, beta;
  cxvec w(n);
  for (int it = 0; it < steps; ++it) {
    op.apply(basis.back(), w);
    double a = basis.back().dot(w).real();
    alpha.push_back(a);
    w -= a * basis.back();
    if (basis.size() > 1) w -= beta.back() * basis[basis.size() - 2];
    project_out(w);
    for (const cxvec& b : basis) w -= b.dot(w) * b;  // full reorthogonalization
    for (const cxvec& b : basis) w -= b.dot(w) * b;  // second pass for stability
    double nb = w.norm();
    if (nb < 1e-12) break;  // invariant subspace exhausted
    beta.push_back(nb);
    basis.push_back(w / nb);
  }
  const int m = static_cast<int>(alpha.size());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    t(i, i) = alpha[i];
    if (i + 1 < m && i < static_cast<int>(beta.size())) t(i, i + 1) = t(i + 1, i) = beta[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
  SweepResult out;
  for (int j = 0; j < m; ++j) {
    cxvec v = cxvec::Zero(n);
    for (int i = 0; i < m; ++i) v += es.eigenvectors()(i, j) * basis[i];
    v.normalize();
    out.ritz_values.push_back(es.eigenvalues()(j));
    out.ritz_vectors.push_back(std::move(v));
  }
  return out;
}

}  // namespace

EigenSolveResult lowest_eigenpairs(const LinearOp& op, int k, double residual_tol, int max_iter,
                                   std::uint64_t seed) {
  const Eigen::Index n = static_cast<Eigen::Index>(op.dim);
  k = std::min<int>(k, static_cast<int>(n));
  if (n <= 512) {
    cxmat dense(n, n);
    cxvec e = cxvec::Zero(n), col(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      e.setZero();
      e[j] = 1.0;
      op.apply(e, col);
      dense.col(j) = col;
    }
    EigenSolveResult full = hermitian_eigensolve(dense);
    EigenSolveResult out;
    out.eigenvalues = full.eigenvalues.head(k);
    out.eigenvectors = full.eigenvectors.leftCols(k);
    return out;
  }
  std::mt19937_64 rng(seed);
  std::vector<cxvec> converged_vecs;
  std::vector<double> converged_vals;
  double scale = 1.0;
  int stagnant = 0;
  while (static_cast<int>(converged_vecs.size()) < k) {
    int steps = std::min<int>(static_cast<int>(n) - static_cast<int>(converged_vecs.size()),
                              std::max(60, 2 * k + 30 + 40 * stagnant));
    steps = std::min(steps, max_iter);
    SweepResult sweep = lanczos_sweep(op, converged_vecs, steps, rng);
    if (sweep.ritz_values.empty()) break;
    scale = std::max({scale, std::abs(sweep.ritz_values.front()), std::abs(sweep.ritz_values.back())});
    bool accepted = false;
    cxvec av(n);
    for (size_t j = 0; j < sweep.ritz_values.size() &&
                       static_cast<int>(converged_vecs.size()) < k;
         ++j) {
      const cxvec& v = sweep.ritz_vectors[j];
      op.apply(v, av);
      double lam = v.dot(av).real();
      if ((av - lam * v).norm() <= residual_tol * scale) {
        // re-orthogonalize against accepted set
        cxvec u = v;
        for (const cxvec& w : converged_vecs) u -= w.dot(u) * w;
        if (u.norm() < 0.5) continue;  // duplicate of an accepted vector
        u.normalize();
        converged_vecs.push_back(u);
        converged_vals.push_back(lam);
        accepted = true;
      } else {
        break;  // ritz values above the first unconverged one are not reliable
      }
    }
    if (!accepted) {
      ++stagnant;
      if (stagnant > 8) throw std::runtime_error("iterative eigensolver failed to converge");
    } else {
      stagnant = 0;
    }
  }
  // sort ascending
  std::vector<int> order(converged_vals.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return converged_vals[a] < converged_vals[b]; });
  EigenSolveResult out;
  out.eigenvalues.resize(static_cast<Eigen::Index>(order.size()));
  out.eigenvectors.resize(n, static_cast<Eigen::Index>(order.size()));
  for (size_t i = 0; i < order.size(); ++i) {
    out.eigenvalues[static_cast<Eigen::Index>(i)] = converged_vals[order[i]];
    out.eigenvectors.col(static_cast<Eigen::Index>(i)) = converged_vecs[order[i]];
  }
  return out;
}

namespace {
void kernel_guard(const realvec& evals, double tol) {
  for (Eigen::Index i = 0; i < evals.size(); ++i)
    if (evals[i] > tol && evals[i] < 10.0 * tol)
      throw std::runtime_error("kernel tolerance ambiguous: eigenvalue " +
                               std::to_string(evals[i]) + " in (tol, 10 tol)");
}
}  // namespace

cxmat kernel_projector(const cxmat& m, double tol) {
  EigenSolveResult es = hermitian_eigensolve(m);
  if (es.eigenvalues.minCoeff() < -tol)
    throw std::invalid_argument("kernel_projector expects a PSD matrix");
  kernel_guard(es.eigenvalues, tol);
  cxmat p = cxmat::Zero(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < es.eigenvalues.size(); ++i)
    if (es.eigenvalues[i] <= tol) p += es.eigenvectors.col(i) * es.eigenvectors.col(i).adjoint();
  return p;
}

cxmat kernel_basis(const cxmat& m, double tol) {
  EigenSolveResult es = hermitian_eigensolve(m);
  kernel_guard(es.eigenvalues, tol);
  int dim = 0;
  while (dim < es.eigenvalues.size() && es.eigenvalues[dim] <= tol) ++dim;
  return es.eigenvectors.leftCols(dim);
}

cxmat kernel_basis(const LinearOp& op, double tol, int max_dim_hint) {
  int k = std::max(2, max_dim_hint);
  while (true) {
    k = std::min<int>(k, static_cast<int>(op.dim));
    EigenSolveResult es = lowest_eigenpairs(op, k);
    if (es.eigenvalues.size() == 0) return cxmat(op.dim, 0);
    if (es.eigenvalues[es.eigenvalues.size() - 1] <= 10.0 * tol &&
        k < static_cast<int>(op.dim)) {
      k *= 2;
      continue;
    }
    kernel_guard(es.eigenvalues, tol);
    int dim = 0;
    while (dim < es.eigenvalues.size() && es.eigenvalues[dim] <= tol) ++dim;
    return es.eigenvectors.leftCols(dim);
  }
}

CPMap::CPMap(MapDirection direction, SiteSpace space, std::vector<KrausOp> kraus)
    : direction_(direction), space_(std::move(space)), kraus_(std::move(kraus)) {
  for (const auto& k : kraus_) {
    if (!space_.covers(k.support)) throw std::invalid_argument("kraus support outside space");
    if (static_cast<std::size_t>(k.matrix.rows()) != space_.dim_of(k.support) ||
        k.matrix.rows() != k.matrix.cols())
      throw std::invalid_argument("kraus operator dimension mismatch");
  }
}

namespace {
// K_emb * O * K_emb^dagger without materializing the embedding.
cxmat sandwich_local(const KrausOp& k, const SiteSpace& space, const cxmat& o) {
  auto sp = space.split(k.support.intersect(space.site_region()));
  const std::size_t dk = sp.keep_dim(), dr = sp.rest_dim();
  const std::size_t n = space.dim();
  cxmat left = cxmat::Zero(n, n);
  for (std::size_t b = 0; b < dr; ++b) {
    const std::size_t ob = sp.rest_offsets[b];
    for (std::size_t a = 0; a < dk; ++a) {
      for (std::size_t a2 = 0; a2 < dk; ++a2) {
        cx v = k.matrix(a, a2);
        if (v == cx(0.0, 0.0)) continue;
        left.row(sp.keep_offsets[a] + ob) += v * o.row(sp.keep_offsets[a2] + ob);
      }
    }
  }
  cxmat out = cxmat::Zero(n, n);
  for (std::size_t b = 0; b < dr; ++b) {
    const std::size_t ob = sp.rest_offsets[b];
    for (std::size_t a = 0; a < dk; ++a) {
      for (std::size_t a2 = 0; a2 < dk; ++a2) {
        cx v = std::conj(k.matrix(a, a2));
        if (v == cx(0.0, 0.0)) continue;
        out.col(sp.keep_offsets[a] + ob) += v * left.col(sp.keep_offsets[a2] + ob);
      }
    }
  }
  return out;
}
}  // namespace

cxmat CPMap::apply(const cxmat& in) const {
  cxmat out = cxmat::Zero(space_.dim(), space_.dim());
  for (const auto& k : kraus_) out += sandwich_local(k, space_, in);
  return out;
}

CPMap CPMap::adjoint() const {
  std::vector<KrausOp> adj;
  adj.reserve(kraus_.size());
  for (const auto& k : kraus_) adj.push_back({k.support, k.matrix.adjoint()});
  MapDirection d = direction_ == MapDirection::schrodinger ? MapDirection::heisenberg
                                                           : MapDirection::schrodinger;
  return CPMap(d, space_, std::move(adj));
}

double CPMap::preservation_residual() const {
  cxmat identity = cxmat::Identity(space_.dim(), space_.dim());
  // sum K^dag K = 1 for trace preservation, sum K K^dag = 1 for identity
  // preservation.
  cxmat acc = direction_ == MapDirection::schrodinger ? adjoint().apply(identity)
                                                      : apply(identity);
  return operator_norm(acc - identity);
}

CPMap conditional_expectation(const DensityMatrix& sigma_b, const Region& b,
                              const SiteSpace& space) {
  if (!space.covers(b)) throw std::invalid_argument("region outside space");
  cxmat sig = sigma_b.matrix();
  if (static_cast<std::size_t>(sig.rows()) != space.dim_of(b))
    throw std::invalid_argument("sigma_b dimension mismatch with region");
  if (std::abs(sig.trace().real() - 1.0) > 1e-8)
    throw std::invalid_argument("sigma_b is not a density matrix");
  EigenSolveResult es = hermitian_eigensolve(sig);
  if (es.eigenvalues.minCoeff() < -1e-10)
    throw std::invalid_argument("sigma_b is not a density matrix");
  const Eigen::Index db = sig.rows();
  std::vector<KrausOp> kraus;
  for (Eigen::Index i = 0; i < db; ++i) {
    double lam = std::max(0.0, es.eigenvalues[i]);
    if (lam < 1e-14) continue;
    for (Eigen::Index j = 0; j < db; ++j) {
      cxmat k = cxmat::Zero(db, db);
      k.row(j) = std::sqrt(lam) * es.eigenvectors.col(i).adjoint();
      kraus.push_back({b, std::move(k)});
    }
  }
  return CPMap(MapDirection::heisenberg, space, std::move(kraus));
}

cxmat cond_exp_apply(const cxmat& op, const Region& b, const SiteSpace& space,
                     const cxmat* sigma_b_local) {
  Region bb = b.intersect(space.site_region());
  Region keep = space.site_region().minus(bb);
  auto sp = space.split(keep);
  const std::size_t dk = sp.keep_dim(), dr = sp.rest_dim();
  cxmat a = cxmat::Zero(dk, dk);
  if (sigma_b_local == nullptr) {
    for (std::size_t bidx = 0; bidx < dr; ++bidx) {
      const std::size_t ob = sp.rest_offsets[bidx];
      for (std::size_t i = 0; i < dk; ++i)
        for (std::size_t j = 0; j < dk; ++j)
          a(i, j) += op(sp.keep_offsets[i] + ob, sp.keep_offsets[j] + ob);
    }
    a /= static_cast<double>(dr);
  } else {
    const cxmat& sig = *sigma_b_local;
    for (std::size_t b1 = 0; b1 < dr; ++b1)
      for (std::size_t b2 = 0; b2 < dr; ++b2) {
        cx w = sig(b1, b2);
        if (w == cx(0.0, 0.0)) continue;
        for (std::size_t i = 0; i < dk; ++i)
          for (std::size_t j = 0; j < dk; ++j)
            a(i, j) += w * op(sp.keep_offsets[i] + sp.rest_offsets[b2],
                              sp.keep_offsets[j] + sp.rest_offsets[b1]);
      }
  }
  cxmat idb = cxmat::Identity(dr, dr);
  return kron_regions(space, keep, a, idb);
}

cxmat adjoint_cond_exp_apply(const cxmat& s, const Region& b, const SiteSpace& space,
                             const cxmat* sigma_b_local) {
  Region bb = b.intersect(space.site_region());
  Region keep = space.site_region().minus(bb);
  cxmat tr_b = partial_trace_matrix(s, space, keep);
  cxmat sig;
  if (sigma_b_local == nullptr) {
    std::size_t db = space.dim_of(bb);
    sig = cxmat::Identity(db, db) / static_cast<double>(db);
  } else {
    sig = *sigma_b_local;
  }
  return kron_regions(space, keep, tr_b, sig);
}

std::vector<LocalOperator> delta_decomposition(const cxmat& op_full, const Region& x,
                                               const SiteSpace& space) {
  const LatticeGraph& g = space.graph();
  if (x.is_empty()) throw std::invalid_argument("delta_decomposition needs a nonempty region");
  Region avail = space.site_region();
  Region xk = x.intersect(avail);
  std::vector<LocalOperator> terms;
  cxmat prev_local;  // E_{(X_{k-1})^c}(A) local matrix on X_{k-1}
  Region prev_region;
  for (int k = 0;; ++k) {
    Region shell = k == 0 ? xk : g.fatten(x, k).intersect(avail);
    // identical consecutive shells contribute a zero term; skip them
    if (k > 0 && shell == prev_region && shell != avail) continue;
    std::size_t comp_dim = space.dim() / std::max<std::size_t>(1, space.dim_of(shell));
    cxmat local = partial_trace_matrix(op_full, space, shell) / static_cast<double>(comp_dim);
    cxmat term = local;
    if (k > 0) {
      LocalOperator prev_op(prev_region, prev_local, false);
      term -= embed(prev_op, space.restrict_to(shell));
    }
    terms.emplace_back(shell, std::move(term), false);
    if (shell == avail) break;
    prev_local = std::move(local);
    prev_region = shell;
  }
  return terms;
}

ChoiReport choi_check(const std::function<cxmat(const cxmat&)>& map, const SiteSpace& space,
                      MapDirection direction, int n_contraction_trials, std::uint64_t seed) {
  const std::size_t d = space.dim();
  if (d > 64) throw ResourceCapError("choi_check restricted to spaces of dimension <= 64");
  ChoiReport rep;
  cxmat choi = cxmat::Zero(d * d, d * d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      cxmat e = cxmat::Zero(d, d);
      e(i, j) = 1.0;
      cxmat phi = map(e);
      for (std::size_t k = 0; k < d; ++k)
        for (std::size_t l = 0; l < d; ++l) choi(i * d + k, j * d + l) = phi(k, l) / double(d);
    }
  Eigen::SelfAdjointEigenSolver<cxmat> es((choi + choi.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
  rep.min_choi_eig = es.eigenvalues().minCoeff();
  rep.cp = rep.min_choi_eig >= -1e-10;
  cxmat identity = cxmat::Identity(d, d);
  if (direction == MapDirection::heisenberg) {
    rep.unital_residual = operator_norm(map(identity) - identity);
  } else {
    // trace preservation from the Choi partial trace: tr Phi(E_ij) = delta_ij
    double worst = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        cxmat e = cxmat::Zero(d, d);
        e(i, j) = 1.0;
        cx tr = map(e).trace();
        worst = std::max(worst, std::abs(tr - (i == j ? cx(1, 0) : cx(0, 0))));
      }
    rep.unital_residual = worst;
  }
  rep.tp_or_ip = rep.unital_residual <= 1e-10;
  std::mt19937_64 rng(seed);
  for (int t = 0; t < n_contraction_trials; ++t) {
    cxmat o = random_hermitian(static_cast<Eigen::Index>(d), rng);
    cxmat img = map(o);
    double excess = direction == MapDirection::heisenberg
                        ? operator_norm(img) - operator_norm(o)
                        : trace_norm(img) - trace_norm(o);
    rep.contraction_excess = std::max(rep.contraction_excess, excess);
  }
  return rep;
}

ChoiReport choi_check(const CPMap& map, int n_contraction_trials, std::uint64_t seed) {
  ChoiReport rep = choi_check([&](const cxmat& in) { return map.apply(in); }, map.space(),
                              map.direction(), n_contraction_trials, seed);
  rep.unital_residual = map.preservation_residual();
  rep.tp_or_ip = rep.unital_residual <= 1e-10;
  return rep;
}

}  // namespace stitchlab
