#include "stitchlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stitchlab {

void TimeDependentInteraction::add_layer(double duration, Interaction interaction) {
  if (!(duration > 0.0)) throw std::invalid_argument("layer duration must be positive");
  layers_.push_back({duration, std::move(interaction)});
  total_ += duration;
}

const Interaction& TimeDependentInteraction::at_time(double s) const {
  if (layers_.empty()) throw std::runtime_error("time-dependent interaction has no layers");
  if (s < -1e-12 || s > total_ + 1e-12)
    throw std::out_of_range("time outside [0, total]");
  double t0 = 0.0;
  for (const auto& layer : layers_) {
    if (s < t0 + layer.duration) return layer.interaction;
    t0 += layer.duration;
  }
  return layers_.back().interaction;
}

double TimeDependentInteraction::norm_f(const DecayFunction& f, const LatticeGraph& graph) const {
  double sup = 0.0;
  for (const auto& layer : layers_)
    sup = std::max(sup, interaction_norm_f(layer.interaction, f, graph));
  return sup;
}

namespace {

// Cached layer eigendecompositions; propagators are ordered products of
// exact layer exponentials.
class Engine {
 public:
  Engine(const TimeDependentInteraction& z, const SiteSpace& space) : dim_(space.dim()) {
    if (dim_ > (std::size_t{1} << 12))
      throw ResourceCapError("dense propagation above 2^12");
    double t0 = 0.0;
    for (const auto& layer : z.layers()) {
      cxmat h = cxmat::Zero(dim_, dim_);
      for (const auto& [support, op] : layer.interaction.terms()) h += embed(op, space);
      entries_.push_back({t0, t0 + layer.duration, hermitian_eigensolve(h)});
      t0 += layer.duration;
    }
    total_ = t0;
  }

  double total() const { return total_; }

  cxmat u(double s, double t) const {
    if (s > t) throw std::invalid_argument("propagation needs s <= t");
    if (s < -1e-12 || t > total_ + 1e-12)
      throw std::out_of_range("interval outside [0, total]");
    cxmat out = cxmat::Identity(dim_, dim_);
    for (const auto& e : entries_) {
      double a = std::max(s, e.t0), b = std::min(t, e.t1);
      if (b - a <= 1e-15) continue;
      cxvec phase(e.es.eigenvalues.size());
      for (Eigen::Index i = 0; i < phase.size(); ++i)
        phase[i] = std::exp(cx(0.0, (b - a) * e.es.eigenvalues[i]));
      out = e.es.eigenvectors * phase.asDiagonal() * e.es.eigenvectors.adjoint() * out;
    }
    return out;
  }

 private:
  struct Entry {
    double t0, t1;
    EigenSolveResult es;
  };
  std::vector<Entry> entries_;
  std::size_t dim_;
  double total_ = 0.0;
};

}  // namespace

Propagator propagate(const TimeDependentInteraction& z, double s, double t,
                     const SiteSpace& space) {
  Engine engine(z, space);
  Propagator p{engine.u(s, t), s, t};
  cxmat gram = p.u.adjoint() * p.u;
  if ((gram - cxmat::Identity(gram.rows(), gram.cols())).norm() > 1e-9 * gram.rows())
    throw std::runtime_error("propagator lost unitarity");
  return p;
}

cxmat heisenberg(const TimeDependentInteraction& z, double t, double s, const LocalOperator& a,
                 const SiteSpace& space) {
  Engine engine(z, space);
  cxmat u = engine.u(s, t);
  cxmat full = embed(a, space);
  return u.adjoint() * full * u;
}

namespace {

std::vector<LocalOperator> lr_probe_set(const Region& region, const SiteSpace& space, int n_random,
                                        std::mt19937_64& rng) {
  std::vector<LocalOperator> probes;
  SiteSpace local = space.restrict_to(region);
  // single-site Pauli sweep on qubit sites
  for (int site : local.sites()) {
    int pos = local.position_of(site);
    if (local.local_dim(pos) != 2) continue;
    for (const char* name : {"pauli_x", "pauli_y", "pauli_z"}) {
      LocalOperator p(Region::single(site, space.graph().size()), preset_matrix(name));
      probes.emplace_back(p);
    }
  }
  for (int i = 0; i < n_random; ++i) {
    cxmat h = random_unit_hermitian(static_cast<Eigen::Index>(local.dim()), rng);
    probes.emplace_back(region, std::move(h));
  }
  return probes;
}

}  // namespace

namespace {

// embed(op) * m without materializing the embedding
cxmat local_left_mult(const LocalOperator& op, const SiteSpace& space, const cxmat& m) {
  auto sp = space.split(op.support.intersect(space.site_region()));
  const std::size_t dk = sp.keep_dim(), dr = sp.rest_dim();
  cxmat out = cxmat::Zero(m.rows(), m.cols());
  for (std::size_t b = 0; b < dr; ++b) {
    const std::size_t ob = sp.rest_offsets[b];
    for (std::size_t i = 0; i < dk; ++i)
      for (std::size_t j = 0; j < dk; ++j) {
        cx v = op.matrix(i, j);
        if (v != cx(0.0, 0.0)) out.row(sp.keep_offsets[i] + ob) += v * m.row(sp.keep_offsets[j] + ob);
      }
  }
  return out;
}

// Largest |eigenvalue| of a Hermitian matrix by power iteration; ample for
// bound comparisons with huge slack.
double hermitian_norm_estimate(const cxmat& m, std::mt19937_64& rng) {
  if (m.norm() < 1e-300) return 0.0;
  cxvec v = random_unit_vector(m.rows(), rng);
  double lam = 0.0;
  for (int it = 0; it < 120; ++it) {
    cxvec w = m * v;
    double n = w.norm();
    if (n < 1e-300) return 0.0;
    w /= n;
    double next = std::abs(w.dot(m * w).real());
    if (it > 12 && std::abs(next - lam) < 1e-9 * std::max(1.0, next)) return next;
    lam = next;
    v = std::move(w);
  }
  return lam;
}

}  // namespace

LRMeasurement measure_lr(const TimeDependentInteraction& z,
                         const std::vector<std::pair<Region, Region>>& pairs,
                         const std::vector<double>& times, const DecayFunction& f,
                         const SiteSpace& space, const LRConfig& cfg) {
  const LatticeGraph& graph = space.graph();
  LRMeasurement out;
  out.c_f = check_f_function(f, graph).c_f;
  out.interaction_norm = z.norm_f(f, graph);
  if (!std::isfinite(out.interaction_norm))
    throw std::invalid_argument("interaction has infinite F-norm");
  Engine engine(z, space);
  auto rng = derived_rng(cfg.seed, "lr-probes");
  for (const auto& [xa, xb] : pairs) {
    if (xa.intersects(xb)) throw std::invalid_argument("overlapping regions rejected");
    double pair_sum = 0.0;
    for (int x : xa.sites())
      for (int y : xb.sites()) pair_sum += f.at(graph.distance(x, y));
    auto probes_a = lr_probe_set(xa, space, cfg.n_random, rng);
    auto probes_b = lr_probe_set(xb, space, cfg.n_random, rng);
    for (double t : times) {
      cxmat u = engine.u(0.0, t);
      double measured = 0.0;
      for (const auto& a : probes_a) {
        cxmat evolved = u.adjoint() * local_left_mult(a, space, u);
        for (const auto& b : probes_b) {
          // i [alpha(A), B] is Hermitian; B applied locally from both sides
          cxmat comm = cx(0.0, 1.0) *
                       (local_left_mult(b, space, evolved.adjoint()).adjoint() -
                        local_left_mult(b, space, evolved));
          measured = std::max(measured, hermitian_norm_estimate(comm, rng));
        }
      }
      double bound = std::exp(out.c_f * t * out.interaction_norm) * pair_sum / out.c_f;
      out.rows.push_back({xa, xb, t, measured, bound});
    }
  }
  return out;
}

Interaction evolve_interaction(const TimeDependentInteraction& z, double t, double s,
                               const Interaction& g, const SiteSpace& space) {
  Engine engine(z, space);
  cxmat u = engine.u(s, t);
  Interaction out(g.anchor(), g.label());
  for (const auto& [support, op] : g.terms()) {
    cxmat evolved = u.adjoint() * embed(op, space) * u;
    for (auto& term : delta_decomposition(evolved, support, space)) {
      if (term.matrix.norm() < 1e-300) continue;
      // hermitize away roundoff so the interaction invariant holds exactly
      cxmat h = (term.matrix + term.matrix.adjoint()) / 2.0;
      out.add_term(term.support, h);
    }
  }
  return out;
}

TimeDependentInteraction inverse_generator(const TimeDependentInteraction& z) {
  TimeDependentInteraction out;
  const auto& layers = z.layers();
  for (auto it = layers.rbegin(); it != layers.rend(); ++it)
    out.add_layer(it->duration, it->interaction.scaled(-1.0));
  return out;
}

StitchingGenerator stitching_generator(const TimeDependentInteraction& q, const Region& z_region,
                                       const SiteSpace& space, double identity_tol,
                                       int max_substeps) {
  const LatticeGraph& graph = space.graph();
  StitchingGenerator out;
  if (q.empty()) {
    out.v_family.push_back({cxmat::Identity(space.dim(), space.dim()), 0.0, 0.0});
    TimeDependentInteraction l;
    l.add_layer(1.0, Interaction{});
    out.l = l;
    out.substeps = 1;
    return out;
  }

  TimeDependentInteraction qhat, qtilde;
  bool any_crossing = false;
  int max_diam = 0;
  for (const auto& layer : q.layers()) {
    qhat.add_layer(layer.duration, truncate_across(layer.interaction, z_region));
    Interaction rem = crossing_remainder(layer.interaction, z_region, graph);
    any_crossing = any_crossing || !rem.empty();
    for (const auto& [support, op] : layer.interaction.terms())
      max_diam = std::max(max_diam, graph.region_diameter(support));
    qtilde.add_layer(layer.duration, std::move(rem));
  }

  Engine eng_q(q, space), eng_hat(qhat, space);
  double t0 = 0.0;
  for (const auto& layer : q.layers()) {
    t0 += layer.duration;
    out.v_family.push_back({eng_hat.u(0.0, t0) * eng_q.u(0.0, t0).adjoint(), 0.0, t0});
  }

  if (!any_crossing) {
    TimeDependentInteraction l;
    l.add_layer(q.total_time(), Interaction{});
    out.l = l;
    out.substeps = 1;
    return out;
  }

  // support pad for the anchored decomposition of H_qhat - V^dag H_qhat V;
  // correctness does not depend on it, only term keying does
  Region boundary = graph.boundary(z_region);
  int depth = static_cast<int>(q.layers().size());
  Region anchor_region = graph.fatten(boundary, 1 + 2 * depth * std::max(1, max_diam));

  const cxmat v_final = out.v_family.back().u;
  for (int n = 16; n <= max_substeps; n *= 2) {
    TimeDependentInteraction l;
    double layer_start = 0.0;
    for (const auto& layer : q.layers()) {
      int steps = std::max(1, static_cast<int>(std::lround(n * layer.duration / q.total_time())));
      double dt = layer.duration / steps;
      for (int i = 0; i < steps; ++i) {
        double u_mid = layer_start + (i + 0.5) * dt;
        cxmat v = eng_hat.u(0.0, u_mid) * eng_q.u(0.0, u_mid).adjoint();
        cxmat hhat = cxmat::Zero(space.dim(), space.dim());
        for (const auto& [support, op] : qhat.at_time(u_mid).terms())
          hhat += embed(op, space);
        cxmat d_full = hhat - v.adjoint() * hhat * v;
        Interaction li(boundary, "l");
        li.add_scaled(qtilde.at_time(u_mid), 1.0);
        for (auto& term : delta_decomposition(d_full, anchor_region, space)) {
          cxmat h = (term.matrix + term.matrix.adjoint()) / 2.0;
          if (h.norm() < 1e-14) continue;
          li.add_term(term.support, h);
        }
        l.add_layer(dt, std::move(li));
      }
      layer_start += layer.duration;
    }
    Engine eng_l(l, space);
    // alpha_l is generated by U_l = V^dagger (the conjugation direction of the
    // identity V O V* = alpha_l[O])
    double res = (eng_l.u(0.0, l.total_time()) - v_final.adjoint()).norm();
    out.l = std::move(l);
    out.substeps = n;
    if (res <= identity_tol) break;
  }
  return out;
}

}  // namespace stitchlab
