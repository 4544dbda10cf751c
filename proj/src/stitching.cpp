#include "stitchlab/stitching.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stitchlab {

InvertibilityCertificate InvertibilityCertificate::trivial_product() {
  InvertibilityCertificate c;
  c.kind_ = Kind::trivial_product;
  return c;
}

InvertibilityCertificate InvertibilityCertificate::circuit(std::vector<Gate> gates,
                                                           std::vector<int> aux_dims,
                                                           std::vector<cxvec> pi_site,
                                                           cxvec omega_prime) {
  InvertibilityCertificate c;
  c.kind_ = Kind::finite_depth_circuit;
  c.gates_ = std::move(gates);
  c.aux_dims_ = std::move(aux_dims);
  c.pi_site_ = std::move(pi_site);
  c.omega_prime_ = std::move(omega_prime);
  return c;
}

int InvertibilityCertificate::depth() const {
  int d = 0;
  for (const auto& g : gates_) d = std::max(d, g.layer + 1);
  return d;
}

int InvertibilityCertificate::max_gate_diameter(const LatticeGraph& graph) const {
  int d = 0;
  for (const auto& g : gates_) d = std::max(d, graph.region_diameter(g.support));
  return d;
}

TimeDependentInteraction InvertibilityCertificate::generator(const SiteSpace& doubled) const {
  TimeDependentInteraction q;
  const int layers = depth();
  for (int layer = 0; layer < layers; ++layer) {
    Interaction inter;
    for (const auto& g : gates_) {
      if (g.layer != layer) continue;
      if (static_cast<std::size_t>(g.unitary.rows()) != doubled.dim_of(g.support))
        throw std::invalid_argument("gate dimension mismatch with doubled support");
      // principal logarithm: U = V e^{i theta} V^dag  ->  A = V theta V^dag
      cxmat gram = g.unitary.adjoint() * g.unitary;
      if ((gram - cxmat::Identity(gram.rows(), gram.cols())).norm() > 1e-9)
        throw std::invalid_argument("certificate gate is not unitary");
      Eigen::ComplexEigenSolver<cxmat> es(g.unitary);
      cxmat vecs = es.eigenvectors();
      // eigenvectors of a unitary may need re-orthonormalization
      Eigen::HouseholderQR<cxmat> qr(vecs);
      cxmat qmat = qr.householderQ();
      cxmat diag = qmat.adjoint() * g.unitary * qmat;
      cxmat a = cxmat::Zero(diag.rows(), diag.cols());
      for (Eigen::Index i = 0; i < diag.rows(); ++i) a(i, i) = std::arg(diag(i, i));
      cxmat herm = qmat * a * qmat.adjoint();
      // verify the log by exponentiating back
      EigenSolveResult hs = hermitian_eigensolve(herm);
      cxvec phase(hs.eigenvalues.size());
      for (Eigen::Index i = 0; i < phase.size(); ++i)
        phase[i] = std::exp(cx(0.0, hs.eigenvalues[i]));
      cxmat back = hs.eigenvectors * phase.asDiagonal() * hs.eigenvectors.adjoint();
      if ((back - g.unitary).norm() > 1e-8 * (1.0 + g.unitary.norm()))
        throw std::runtime_error("gate logarithm failed (defective eigenbasis)");
      inter.add_term(g.support, herm);
    }
    q.add_layer(1.0, std::move(inter));
  }
  return q;
}

AuxSpace AuxSpace::make(const SiteSpace& orig, std::vector<int> aux_dims) {
  AuxSpace out;
  out.orig = orig;
  if (aux_dims.empty()) aux_dims.assign(orig.n_sites(), 1);
  if (static_cast<int>(aux_dims.size()) != orig.n_sites())
    throw std::invalid_argument("aux_dims size mismatch");
  out.aux_dims = aux_dims;
  out.trivial_aux = true;
  std::vector<int> dd(orig.n_sites());
  for (int i = 0; i < orig.n_sites(); ++i) {
    if (aux_dims[i] < 1) throw std::invalid_argument("aux dim must be >= 1");
    if (aux_dims[i] > 1) out.trivial_aux = false;
    dd[i] = orig.local_dim(i) * aux_dims[i];
  }
  out.doubled = SiteSpace(orig.graph_ptr(), orig.sites(), dd,
                          std::max(orig.dim_cap(), std::size_t{1} << 16));

  // doubled index = sum_x (a_x * aux_x + b_x) * stride_x
  const int n = orig.n_sites();
  std::vector<std::size_t> dstrides(n, 1);
  for (int i = n - 2; i >= 0; --i) dstrides[i] = dstrides[i + 1] * static_cast<std::size_t>(dd[i + 1]);
  std::size_t od = orig.dim(), ad = 1;
  for (int i = 0; i < n; ++i) ad *= static_cast<std::size_t>(aux_dims[i]);
  out.orig_offsets.assign(od, 0);
  {
    std::vector<int> digits(n, 0);
    for (std::size_t idx = 0; idx < od; ++idx) {
      std::size_t off = 0;
      for (int i = 0; i < n; ++i)
        off += static_cast<std::size_t>(digits[i]) * static_cast<std::size_t>(aux_dims[i]) *
               dstrides[i];
      out.orig_offsets[idx] = off;
      for (int i = n - 1; i >= 0; --i) {
        if (++digits[i] < orig.local_dim(i)) break;
        digits[i] = 0;
      }
    }
  }
  out.aux_offsets.assign(ad, 0);
  {
    std::vector<int> digits(n, 0);
    for (std::size_t idx = 0; idx < ad; ++idx) {
      std::size_t off = 0;
      for (int i = 0; i < n; ++i) off += static_cast<std::size_t>(digits[i]) * dstrides[i];
      out.aux_offsets[idx] = off;
      for (int i = n - 1; i >= 0; --i) {
        if (++digits[i] < aux_dims[i]) break;
        digits[i] = 0;
      }
    }
  }
  return out;
}

cxmat AuxSpace::lift_local(const LocalOperator& op) const {
  SiteSpace sub = orig.restrict_to(op.support);
  std::vector<int> sub_aux;
  for (int s : sub.sites()) sub_aux.push_back(aux_dims[orig.position_of(s)]);
  AuxSpace local = AuxSpace::make(sub, sub_aux);
  std::size_t od = local.orig_offsets.size(), ad = local.aux_offsets.size();
  cxmat out = cxmat::Zero(od * ad, od * ad);
  for (std::size_t a = 0; a < od; ++a)
    for (std::size_t a2 = 0; a2 < od; ++a2) {
      cx v = op.matrix(a, a2);
      if (v == cx(0.0, 0.0)) continue;
      for (std::size_t b = 0; b < ad; ++b)
        out(local.orig_offsets[a] + local.aux_offsets[b],
            local.orig_offsets[a2] + local.aux_offsets[b]) = v;
    }
  return out;
}

cxvec AuxSpace::lift_state(const cxvec& orig_amps, const cxvec& aux_amps) const {
  cxvec out = cxvec::Zero(doubled.dim());
  for (std::size_t a = 0; a < orig_offsets.size(); ++a) {
    if (orig_amps[static_cast<Eigen::Index>(a)] == cx(0.0, 0.0)) continue;
    for (std::size_t b = 0; b < aux_offsets.size(); ++b)
      out[static_cast<Eigen::Index>(orig_offsets[a] + aux_offsets[b])] =
          orig_amps[static_cast<Eigen::Index>(a)] * aux_amps[static_cast<Eigen::Index>(b)];
  }
  return out;
}

cxmat AuxSpace::lift_rho(const cxmat& rho, const cxmat& mu_aux) const {
  const std::size_t od = orig_offsets.size(), ad = aux_offsets.size();
  cxmat out = cxmat::Zero(doubled.dim(), doubled.dim());
  for (std::size_t a = 0; a < od; ++a)
    for (std::size_t a2 = 0; a2 < od; ++a2) {
      cx v = rho(a, a2);
      if (v == cx(0.0, 0.0)) continue;
      for (std::size_t b = 0; b < ad; ++b)
        for (std::size_t b2 = 0; b2 < ad; ++b2)
          out(orig_offsets[a] + aux_offsets[b], orig_offsets[a2] + aux_offsets[b2]) =
              v * mu_aux(b, b2);
    }
  return out;
}

cxmat AuxSpace::trace_aux(const cxmat& doubled_full) const {
  const std::size_t od = orig_offsets.size(), ad = aux_offsets.size();
  cxmat out = cxmat::Zero(od, od);
  for (std::size_t a = 0; a < od; ++a)
    for (std::size_t a2 = 0; a2 < od; ++a2) {
      cx acc(0.0, 0.0);
      for (std::size_t b = 0; b < ad; ++b)
        acc += doubled_full(orig_offsets[a] + aux_offsets[b], orig_offsets[a2] + aux_offsets[b]);
      out(a, a2) = acc;
    }
  return out;
}

const cxmat& StitchingMap::v() const {
  if (!v_) throw std::runtime_error("trivial stitching map has no unitary V");
  return *v_;
}

DensityMatrix StitchingMap::kappa() const {
  if (trivial()) return DensityMatrix::dense(space_.restrict_to(z_), mu_z_local_);
  return DensityMatrix::dense(aux_->doubled.restrict_to(z_), kappa_local_);
}

cxmat StitchingMap::apply_dense(const cxmat& rho) const {
  if (trivial()) {
    cxmat rho_zc = partial_trace_matrix(rho, space_, z_.complement().intersect(space_.site_region()));
    return kron_regions(space_, z_, mu_z_local_, rho_zc);
  }
  const AuxSpace& aux = *aux_;
  cxmat lifted = aux.lift_rho(rho, mu_aux_);
  cxmat moved = (*v_) * lifted * v_->adjoint();
  Region zc = z_.complement().intersect(space_.site_region());
  cxmat part_zc = partial_trace_matrix(moved, aux.doubled, zc);
  cxmat recombined = kron_regions(aux.doubled, z_, kappa_local_, part_zc);
  cxmat back = v_->adjoint() * recombined * (*v_);
  return aux.trace_aux(back);
}

DensityMatrix StitchingMap::apply(const DensityMatrix& rho) const {
  return DensityMatrix::dense(space_, apply_dense(rho.matrix()));
}

double StitchingMap::mu_fixed_point_distance() const {
  cxmat mu = ground_->matrix();
  cxmat delta = apply_dense(mu) - mu;
  // cheap certificate first: ||.||_1 <= sqrt(dim) ||.||_F
  double bound = std::sqrt(static_cast<double>(delta.rows())) * delta.norm();
  if (bound <= 1e-9) return bound;
  return trace_norm(delta);
}

double StitchingMap::trace_residual(int probes, std::uint64_t seed) const {
  auto rng = derived_rng(seed, "stitch-trace");
  double worst = 0.0;
  for (int i = 0; i < probes; ++i) {
    cxmat rho = random_density(static_cast<Eigen::Index>(space_.dim()), rng);
    worst = std::max(worst, std::abs(apply_dense(rho).trace().real() - 1.0));
  }
  return worst;
}

double StitchingMap::compressed_choi_min_eig(int k, std::uint64_t seed) const {
  if (k > 64) throw ResourceCapError("compressed Choi restricted to k <= 64");
  const auto dim = static_cast<Eigen::Index>(space_.dim());
  k = std::min<int>(k, static_cast<int>(dim));
  auto rng = derived_rng(seed, "stitch-choi");
  cxmat w(dim, k);
  for (int c = 0; c < k; ++c) w.col(c) = random_unit_vector(dim, rng);
  Eigen::HouseholderQR<cxmat> qr(w);
  cxmat q = qr.householderQ() * cxmat::Identity(dim, k);
  cxmat choi = cxmat::Zero(k * k, k * k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) {
      cxmat e = q.col(a) * q.col(b).adjoint();
      cxmat img = q.adjoint() * apply_dense(e) * q;
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) choi(a * k + i, b * k + j) = img(i, j) / double(k);
    }
  Eigen::SelfAdjointEigenSolver<cxmat> es((choi + choi.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

StitchingMap build_stitching_map(const HamiltonianModel& model,
                                 const InvertibilityCertificate& cert, const Region& z) {
  if (!model.ground_vector) throw std::runtime_error("stitching map needs a verified ground state");
  StitchingMap map;
  map.z_ = z;
  map.space_ = model.space;
  map.ground_ = model.ground_density();

  if (cert.kind() == InvertibilityCertificate::Kind::trivial_product) {
    map.mu_z_local_ = map.ground_->reduced(z).matrix();
    // the trivial certificate asserts a product ground state; verify across
    // the (Z, Z^c) cut
    cxmat mu = map.ground_->matrix();
    cxmat comp = map.apply_dense(mu);
    double residual = (comp - mu).norm();
    if (residual > 1e-9 * (1.0 + mu.norm()))
      throw std::runtime_error("trivial certificate invalid: ground state not a product across Z");
    map.light_cone_ = 0;
    return map;
  }

  AuxSpace aux = AuxSpace::make(model.space, cert.aux_dims());
  TimeDependentInteraction q = cert.generator(aux.doubled);
  // Pi as a full product vector on the doubled space
  cxvec pi = cxvec::Ones(1);
  if (static_cast<int>(cert.pi_site().size()) != aux.doubled.n_sites())
    throw std::invalid_argument("certificate Pi must specify every site");
  for (int i = 0; i < aux.doubled.n_sites(); ++i) {
    const cxvec& local = cert.pi_site()[i];
    if (local.size() != aux.doubled.local_dim(i))
      throw std::invalid_argument("certificate Pi local dimension mismatch");
    cxvec next(pi.size() * local.size());
    for (Eigen::Index a = 0; a < pi.size(); ++a)
      for (Eigen::Index b = 0; b < local.size(); ++b) next[a * local.size() + b] = pi[a] * local[b];
    pi = std::move(next);
  }
  cxvec omega_prime = cert.omega_prime().size() ? cert.omega_prime() : cxvec::Ones(1);
  std::size_t aux_dim_total = aux.aux_offsets.size();
  if (static_cast<std::size_t>(omega_prime.size()) != aux_dim_total)
    throw std::invalid_argument("omega_prime dimension mismatch");

  Propagator u_full = propagate(q, 0.0, q.total_time(), aux.doubled);
  cxvec target = aux.lift_state(model.ground_vector->amplitudes(), omega_prime);
  cx overlap = target.dot(u_full.u * pi);
  if (std::norm(overlap) < 1.0 - 1e-9)
    throw std::runtime_error("certificate invalid: circuit does not reproduce the ground state, fidelity=" +
                             std::to_string(std::norm(overlap)));

  TimeDependentInteraction qhat;
  for (const auto& layer : q.layers())
    qhat.add_layer(layer.duration, truncate_across(layer.interaction, z));
  Propagator uhat_full = propagate(qhat, 0.0, qhat.total_time(), aux.doubled);
  map.v_ = uhat_full.u * u_full.u.adjoint();
  map.aux_ = aux;
  map.mu_aux_ = omega_prime * omega_prime.adjoint();

  cxmat mu_lift = aux.lift_rho(map.ground_->matrix(), map.mu_aux_);
  cxmat moved = (*map.v_) * mu_lift * map.v_->adjoint();
  map.kappa_local_ = partial_trace_matrix(moved, aux.doubled, z);

  // spatial split: V (Omega (x) Omega') must be a product across (Z, Z^c)
  cxvec split_state = (*map.v_) * target;
  auto sp = aux.doubled.split(z);
  cxmat reshaped(sp.keep_dim(), sp.rest_dim());
  for (std::size_t a = 0; a < sp.keep_dim(); ++a)
    for (std::size_t b = 0; b < sp.rest_dim(); ++b)
      reshaped(a, b) = split_state[static_cast<Eigen::Index>(sp.keep_offsets[a] + sp.rest_offsets[b])];
  Eigen::BDCSVD<cxmat> svd(reshaped);
  map.split_residual_ = svd.singularValues().size() > 1 ? svd.singularValues()(1) : 0.0;
  if (map.split_residual_ > 1e-9)
    throw std::runtime_error("spatial split violated: second Schmidt value " +
                             std::to_string(map.split_residual_));

  map.light_cone_ = cert.depth() * std::max(1, cert.max_gate_diameter(model.space.graph()));
  map.mu_z_local_ = map.ground_->reduced(z).matrix();
  return map;
}

DefinitionReport verify_definition(const StitchingMap& map, const HamiltonianModel& model,
                                   const std::vector<DensityMatrix>& probes,
                                   const std::vector<Region>& x_regions,
                                   const std::vector<int>& r_grid, double exact_tol) {
  if (!model.ground_vector) throw std::runtime_error("verify_definition needs the ground state");
  const LatticeGraph& graph = model.space.graph();
  const Region& z = map.z_region();
  Region bz = graph.boundary(z);
  DefinitionReport rep;
  rep.pass = true;
  cxmat mu_z = DensityMatrix::pure(*model.ground_vector).reduced(z).matrix();

  std::vector<cxmat> sigma;
  for (const auto& p : probes) sigma.push_back(map.apply_dense(p.matrix()));

  for (size_t pi = 0; pi < probes.size(); ++pi) {
    cxmat rho_zc =
        partial_trace_matrix(probes[pi].matrix(), model.space, z.complement().intersect(model.space.site_region()));
    cxmat comparison = kron_regions(model.space, z, mu_z, rho_zc);
    for (const Region& x : x_regions) {
      DefinitionReport::P1Row row;
      row.x = x;
      row.dist_to_boundary = bz.is_empty() ? graph.diameter() : graph.region_distance(x, bz);
      cxmat diff = sigma[pi] - comparison;
      row.lhs = trace_norm(partial_trace_matrix(diff, model.space, x));
      // conjugating by V on both sides spreads supports by twice the circuit radius
      row.beyond_light_cone = row.dist_to_boundary >= std::max(1, 2 * map.light_cone_radius());
      if (row.beyond_light_cone && row.lhs > exact_tol) rep.pass = false;
      rep.property1.push_back(row);
    }
  }

  for (size_t pi = 0; pi + 1 < probes.size(); pi += 2) {
    cxmat d_sigma = sigma[pi] - sigma[pi + 1];
    for (const Region& x : x_regions) {
      for (int r : r_grid) {
        DefinitionReport::P2Row row;
        row.x = x;
        row.r = r;
        row.lhs = trace_norm(partial_trace_matrix(d_sigma, model.space, x));
        Region xr = graph.fatten(x, r);
        row.rho_omega_dist = local_trace_distance(probes[pi], probes[pi + 1], xr);
        row.excess = row.lhs - row.rho_omega_dist;
        row.beyond_light_cone = r >= std::max(1, 2 * map.light_cone_radius());
        if (row.beyond_light_cone && row.excess > exact_tol) rep.pass = false;
        rep.property2.push_back(row);
      }
    }
  }

  rep.property3_distance = map.mu_fixed_point_distance();
  if (rep.property3_distance > 1e-9) rep.pass = false;
  return rep;
}

namespace {

// Pbar expectation through the local kernel projector of the OBC ball.
double pbar_expectation(const HamiltonianModel& model, const Region& ball, const cxmat& rho_ball) {
  SiteSpace sub = model.space.restrict_to(ball);
  Interaction hz = obc_restrict(model.interaction, ball);
  cxmat h = cxmat::Zero(sub.dim(), sub.dim());
  for (const auto& [support, op] : hz.terms()) h += embed(op, sub);
  cxmat p = kernel_projector(h, model.kernel_tol);
  return 1.0 - (rho_ball * p).trace().real();
}

}  // namespace

std::vector<SeamRow> verify_seamlessness(const StitchingMap& map, const HamiltonianModel& model,
                                         const DensityMatrix& sigma, int x,
                                         const std::vector<int>& r_grid,
                                         const std::vector<int>& k_grid) {
  if (!sigma.is_pure()) throw std::invalid_argument("seamlessness proposition needs a pure state");
  const LatticeGraph& graph = model.space.graph();
  cxmat moved = map.apply_dense(sigma.matrix());
  DensityMatrix sigma_moved = DensityMatrix::dense(model.space, moved);
  std::vector<SeamRow> rows;
  for (int r : r_grid) {
    Region ball = graph.ball(x, r);
    double rhs = pbar_expectation(model, ball, sigma.reduced(ball).matrix());
    for (int k : k_grid) {
      if (k > r) continue;
      Region inner = graph.ball(x, r - k);
      double lhs = pbar_expectation(model, inner, sigma_moved.reduced(inner).matrix());
      rows.push_back({r, k, lhs, rhs, std::max(0.0, lhs - 3.0 * rhs)});
    }
  }
  return rows;
}

StinespringReport stinespring_inequality_check(const cxmat& projector, const CPMap& map,
                                               int trials, std::uint64_t seed) {
  StinespringReport rep;
  rep.trials = trials;
  auto rng = derived_rng(seed, "stinespring");
  const auto dim = static_cast<Eigen::Index>(map.space().dim());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int t = 0; t < trials; ++t) {
    cxvec a = random_unit_vector(dim, rng);
    cxvec b = random_unit_vector(dim, rng);
    if (t % 3 == 1) a *= unif(rng);  // exercise strictly sub-normalized vectors
    if (t % 4 == 2) b *= unif(rng);
    double lhs = std::abs((projector * map.apply(a * b.adjoint())).trace());
    double paa = std::max(0.0, (projector * map.apply(a * a.adjoint())).trace().real());
    double pbb = std::max(0.0, (projector * map.apply(b * b.adjoint())).trace().real());
    double pair_excess = lhs - std::sqrt(paa * pbb);
    double single_excess = lhs - std::sqrt(paa);
    rep.worst_pair_excess = std::max(rep.worst_pair_excess, pair_excess);
    rep.worst_single_excess = std::max(rep.worst_single_excess, single_excess);
    if (pair_excess > 1e-11 || single_excess > 1e-11) ++rep.violations;
  }
  return rep;
}

StitchAudit energy_audit(const StitchingMap& map, const HamiltonianModel& model,
                         const DensityMatrix& sigma, int r, const ModelExponents& exps) {
  if (!sigma.is_pure()) throw std::invalid_argument("energy audit needs a pure state");
  const LatticeGraph& graph = model.space.graph();
  const Region& z = map.z_region();
  Region bz = graph.boundary(z);
  Region half = bz.is_empty() ? bz : graph.fatten(bz, r / 2);
  Region full = bz.is_empty() ? bz : graph.fatten(bz, r);

  StitchAudit audit;
  audit.z = z;
  audit.r = r;
  audit.rhs_boundary_term = bz.size();

  DensityMatrix sigma_moved = DensityMatrix::dense(model.space, map.apply_dense(sigma.matrix()));
  Region interior = z.minus(full);
  for (const auto& [support, op] : model.interaction.terms()) {
    double delta = sigma_moved.expectation(op) - sigma.expectation(op);
    audit.total_all_terms += delta;
    bool in_z = support.subset_of(z);
    bool in_zc = !support.intersects(z);
    bool touches_half = support.intersects(half);
    int diam = graph.region_diameter(support);
    if (in_z && !touches_half)
      audit.class_a += delta;
    else if (in_zc && !touches_half)
      audit.class_b += delta;
    else if (touches_half && 4 * diam < r)
      audit.class_c += delta;
    else if (touches_half)
      audit.class_d += delta;
    else
      audit.class_e += delta;
    if (!support.subset_of(interior)) audit.lhs_total += delta;
  }
  Interaction h_stitch = obc_restrict(model.interaction, full);
  for (const auto& [support, op] : h_stitch.terms())
    audit.rhs_energy_term += sigma.expectation(op);
  double scale = std::pow(std::max(1.0, double(r)), exps.d + exps.d_gamma);
  audit.empirical_c =
      audit.rhs_energy_term > 1e-14 ? std::max(0.0, audit.lhs_total) / (scale * audit.rhs_energy_term) : 0.0;
  return audit;
}

std::pair<double, int> j_insensitivity(const StitchingMap& map, const HamiltonianModel& model,
                                       const DensityMatrix& sigma, const Interaction& j) {
  if (!j.anchor()) throw std::invalid_argument("perturbation must be anchored");
  const LatticeGraph& graph = model.space.graph();
  int dist = graph.region_distance(map.z_region(), *j.anchor());
  if (dist < 1) throw std::invalid_argument("anchors overlapping Z rejected");
  DensityMatrix sigma_moved = DensityMatrix::dense(model.space, map.apply_dense(sigma.matrix()));
  double lhs = 0.0;
  for (const auto& [support, op] : j.terms())
    lhs += sigma_moved.expectation(op) - sigma.expectation(op);
  return {std::abs(lhs), dist};
}

void require_ground_state(const HamiltonianModel& model, const Interaction& j,
                          const StateVector& phi, double tol) {
  Interaction total = model.interaction;
  total.add_scaled(j, 1.0);
  LinearOp op = assemble_op(total, model.space);
  cxvec out(phi.amplitudes().size());
  op.apply(phi.amplitudes(), out);
  double energy = phi.amplitudes().dot(out).real();
  double residual = (out - energy * phi.amplitudes()).norm();
  if (residual > tol)
    throw std::runtime_error("state is not an eigenstate of H+J: residual " +
                             std::to_string(residual));
}

IsoperimetrySeries isoperimetry_series(const HamiltonianModel& model, const Interaction& j,
                                       const StateVector& phi, int x, int r,
                                       const ModelExponents& exps) {
  if (r < 1) throw std::invalid_argument("isoperimetry needs r >= 1");
  require_ground_state(model, j, phi);
  const LatticeGraph& graph = model.space.graph();
  if (!j.anchor()) throw std::invalid_argument("perturbation must be anchored");
  int big_r = graph.dist_to_region(x, *j.anchor());
  int i_star = (big_r - 1) / (2 * r);  // largest integer strictly below R/(2r)
  if (i_star < 2) throw std::runtime_error("geometry too tight for i* >= 2");

  DensityMatrix sigma = DensityMatrix::pure(phi);
  IsoperimetrySeries series;
  series.center = x;
  series.r = r;
  auto region_energy = [&](const Region& region) {
    double e = 0.0;
    Interaction restricted = obc_restrict(model.interaction, region);
    for (const auto& [support, op] : restricted.terms()) e += sigma.expectation(op);
    return e;
  };
  for (int i = 1; i <= i_star; ++i) {
    int ri = (2 * i - 1) * r;
    Region ball = graph.ball(x, ri);
    Region shell = graph.fatten(graph.boundary(graph.ball(x, ri + r)), r - 1);
    series.rows.push_back({i, ri, region_energy(ball), region_energy(shell)});
  }
  series.exact_e1 = series.rows.front().e;

  // empirical Gronwall replay: pick the smallest constant making
  // E_i <= C r^{d+dg} delta_i over the rows, then b_i := max(0, a E_i - E_{i+1})
  double c_hat = 0.0;
  bool have = false;
  for (const auto& row : series.rows)
    if (row.delta > 1e-14) {
      c_hat = std::max(c_hat, row.e / (std::pow(double(r), exps.d + exps.d_gamma) * row.delta));
      have = true;
    }
  double a = have && c_hat > 0.0
                 ? 1.0 + 1.0 / (c_hat * std::pow(double(r), exps.d + exps.d_gamma))
                 : 1.0;
  series.gronwall_a = a;
  for (size_t i = 0; i + 1 < series.rows.size(); ++i)
    series.gronwall_b.push_back(std::max(0.0, a * series.rows[i].e - series.rows[i + 1].e));
  double bsum = 0.0;
  for (size_t i = 0; i < series.rows.size(); ++i) {
    series.replayed_lower.push_back(series.exact_e1 - bsum);
    if (i < series.gronwall_b.size()) bsum += series.gronwall_b[i] * std::pow(a, -double(i + 1));
  }
  int istar = static_cast<int>(series.rows.size());
  series.implied_e1_bound =
      series.rows.back().e * std::pow(a, -double(istar) + 1.0) + bsum;
  return series;
}

DecayReport decay_profile(const HamiltonianModel& model, const Interaction& j,
                          const StateVector& phi, int x, const std::vector<int>& radii,
                          const ModelExponents& exps) {
  require_ground_state(model, j, phi);
  if (!model.ground_vector) throw std::runtime_error("decay profile needs the unperturbed ground state");
  const LatticeGraph& graph = model.space.graph();
  DecayReport rep;
  rep.center = x;
  rep.big_r = j.anchor() ? graph.dist_to_region(x, *j.anchor()) : graph.diameter();
  rep.theorem_p = 1.0 / (exps.d + exps.d_gamma + 2.0);
  DensityMatrix sigma = DensityMatrix::pure(phi);
  DensityMatrix mu = model.ground_density();
  for (int r : radii) {
    DecayReport::Row row;
    row.r = r;
    Region ball = graph.ball(x, r);
    row.distance = local_trace_distance(sigma, mu, ball);
    SiteSpace sub = model.space.restrict_to(ball);
    cxmat h = cxmat::Zero(sub.dim(), sub.dim());
    Interaction h_ball = obc_restrict(model.interaction, ball);
    for (const auto& [support, op] : h_ball.terms()) h += embed(op, sub);
    cxmat p = kernel_projector(h, model.kernel_tol);
    row.pbar = 1.0 - (sigma.reduced(ball).matrix() * p).trace().real();
    // Theta = P Phi / ||P Phi||
    cxvec pphi(phi.amplitudes().size());
    apply_local(LocalOperator(ball, p), model.space, phi.amplitudes(), pphi, false);
    double nrm = pphi.norm();
    if (nrm < 1e-12) {
      row.p_phi_zero = true;
    } else {
      StateVector theta(model.space, pphi / nrm);
      DensityMatrix rho_theta = DensityMatrix::pure(theta);
      Region window = graph.ball(x, r - r / 2);
      row.theta_distance = local_trace_distance(sigma, rho_theta, window);
      row.theta_mu_distance = local_trace_distance(rho_theta, mu, window);
    }
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace stitchlab
