#pragma once

#include "stitchlab/model.hpp"

#include <utility>
#include <vector>

namespace stitchlab {

// Piecewise-constant time-dependent interaction: ordered layers of
// (duration, interaction). Propagators of such families are exact ordered
// products of matrix exponentials.
class TimeDependentInteraction {
 public:
  struct Layer {
    double duration;
    Interaction interaction;
  };

  TimeDependentInteraction() = default;
  void add_layer(double duration, Interaction interaction);
  const std::vector<Layer>& layers() const { return layers_; }
  double total_time() const { return total_; }
  bool empty() const { return layers_.empty(); }
  // Layer active at time s; the right endpoint belongs to the last layer.
  const Interaction& at_time(double s) const;
  // Max over layers of the F-norm (the sup over s of ||| z(s) |||_F).
  double norm_f(const DecayFunction& f, const LatticeGraph& graph) const;

 private:
  std::vector<Layer> layers_;
  double total_ = 0.0;
};

struct Propagator {
  cxmat u;
  double s = 0.0;
  double t = 0.0;
};

// U(t,s) with dU/dt = i H(t) U, U(s,s) = 1; exact for layered generators.
Propagator propagate(const TimeDependentInteraction& z, double s, double t,
                     const SiteSpace& space);

// Heisenberg evolution alpha_z(t,s)[A] = U(t,s)^dagger A_embedded U(t,s).
cxmat heisenberg(const TimeDependentInteraction& z, double t, double s, const LocalOperator& a,
                 const SiteSpace& space);

struct LRRow {
  Region x_a, x_b;
  double t = 0.0;
  double measured = 0.0;  // max commutator norm over the probe set
  double bound = 0.0;     // Lieb-Robinson right-hand side with measured C_F
};

struct LRMeasurement {
  std::vector<LRRow> rows;
  double c_f = 0.0;
  double interaction_norm = 0.0;
};

struct LRConfig {
  int n_random = 3;  // random Hermitian probes per side, plus a Pauli sweep
  std::uint64_t seed = 4242;
};

LRMeasurement measure_lr(const TimeDependentInteraction& z,
                         const std::vector<std::pair<Region, Region>>& pairs,
                         const std::vector<double>& times, const DecayFunction& f,
                         const SiteSpace& space, const LRConfig& cfg = {});

// alpha_z(t,s)[g] re-keyed through the telescoping locality decomposition;
// the assembled operator is preserved exactly and anchoring is inherited.
Interaction evolve_interaction(const TimeDependentInteraction& z, double t, double s,
                               const Interaction& g, const SiteSpace& space);

// Exact inverse of the layered propagator: layers reversed and negated. The
// composition propagate(inverse) * propagate(z) is the identity at t = total.
TimeDependentInteraction inverse_generator(const TimeDependentInteraction& z);

struct StitchingGenerator {
  std::vector<Propagator> v_family;  // V(s) at layer boundaries, last entry V(1)
  TimeDependentInteraction l;        // V(s) O V*(s) = alpha_l(s)[O]
  int substeps = 0;                  // substeps per unit time used for l
};

// V(s) = Uhat(s) U*(s) from the truncated generator, plus the boundary-anchored
// interaction l generating its conjugation action.
StitchingGenerator stitching_generator(const TimeDependentInteraction& q, const Region& z_region,
                                       const SiteSpace& space, double identity_tol = 5e-8,
                                       int max_substeps = 4096);

}  // namespace stitchlab
