#pragma once

#include "stitchlab/dynamics.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace stitchlab {

// Certificate that the ground state is invertible: either the state is a
// product outright, or a finite-depth circuit (with optional per-site
// auxiliary factors) connects it to the product state Pi.
class InvertibilityCertificate {
 public:
  enum class Kind { trivial_product, finite_depth_circuit };

  struct Gate {
    Region support;
    cxmat unitary;  // on the doubled local dims of the support
    int layer = 0;
  };

  static InvertibilityCertificate trivial_product();
  // pi_site: per-site local state on the doubled dims (the product state Pi);
  // omega_prime: amplitudes of the auxiliary inverse state (size = aux dim).
  static InvertibilityCertificate circuit(std::vector<Gate> gates, std::vector<int> aux_dims,
                                          std::vector<cxvec> pi_site, cxvec omega_prime);

  Kind kind() const { return kind_; }
  const std::vector<Gate>& gates() const { return gates_; }
  const std::vector<int>& aux_dims() const { return aux_dims_; }
  const std::vector<cxvec>& pi_site() const { return pi_site_; }
  const cxvec& omega_prime() const { return omega_prime_; }
  int depth() const;
  int max_gate_diameter(const LatticeGraph& graph) const;
  // Layered generator with gate logarithms; one layer per circuit layer.
  TimeDependentInteraction generator(const SiteSpace& doubled_space) const;

  // Decay budget metadata (Assumption 4's m_I, C_I); informational.
  std::optional<DecayFunction> m_i;
  double c_i = 0.0;

 private:
  Kind kind_ = Kind::trivial_product;
  std::vector<Gate> gates_;
  std::vector<int> aux_dims_;
  std::vector<cxvec> pi_site_;
  cxvec omega_prime_;
};

// Site-interleaved auxiliary doubling H_x -> H_x (x) H'_x on the same graph.
struct AuxSpace {
  SiteSpace orig;
  SiteSpace doubled;
  std::vector<int> aux_dims;
  std::vector<std::size_t> orig_offsets;  // indexed by original basis index
  std::vector<std::size_t> aux_offsets;   // indexed by auxiliary basis index
  bool trivial_aux = true;

  static AuxSpace make(const SiteSpace& orig, std::vector<int> aux_dims);
  cxmat lift_local(const LocalOperator& op) const;  // A (x) 1_aux on the support
  cxvec lift_state(const cxvec& orig_amps, const cxvec& aux_amps) const;
  cxmat lift_rho(const cxmat& rho, const cxmat& mu_aux) const;
  cxmat trace_aux(const cxmat& doubled_full) const;
};

// Trace-preserving CP map replacing states by the ground state deep inside Z
// while acting as the identity far outside.
class StitchingMap {
 public:
  const Region& z_region() const { return z_; }
  const SiteSpace& space() const { return space_; }
  bool trivial() const { return !v_.has_value(); }
  int light_cone_radius() const { return light_cone_; }
  const cxmat& v() const;
  DensityMatrix kappa() const;
  double spatial_split_second_schmidt() const { return split_residual_; }

  cxmat apply_dense(const cxmat& rho) const;
  DensityMatrix apply(const DensityMatrix& rho) const;

  // |Sigma(mu) - mu| in global trace distance (Definition property 3).
  double mu_fixed_point_distance() const;
  // Trace preservation residual measured on random probes.
  double trace_residual(int probes = 20, std::uint64_t seed = 31) const;
  // Min eigenvalue of the Choi matrix of the map compressed to a random
  // k-dimensional subspace (k <= 2^6).
  double compressed_choi_min_eig(int k = 16, std::uint64_t seed = 17) const;

  friend StitchingMap build_stitching_map(const HamiltonianModel& model,
                                          const InvertibilityCertificate& cert, const Region& z);

 private:
  StitchingMap() = default;
  Region z_;
  SiteSpace space_;
  std::optional<DensityMatrix> ground_;
  cxmat mu_z_local_;  // trivial path: ground state reduced to Z
  // circuit path
  std::optional<cxmat> v_;
  std::optional<AuxSpace> aux_;
  cxmat kappa_local_;   // on the doubled Z factor
  cxmat mu_aux_;        // auxiliary inverse state density
  int light_cone_ = 0;
  double split_residual_ = 0.0;
};

StitchingMap build_stitching_map(const HamiltonianModel& model,
                                 const InvertibilityCertificate& cert, const Region& z);

struct DefinitionReport {
  struct P1Row {
    Region x;
    int dist_to_boundary = 0;
    double lhs = 0.0;
    bool beyond_light_cone = false;
  };
  struct P2Row {
    Region x;
    int r = 0;
    double lhs = 0.0;
    double rho_omega_dist = 0.0;  // |rho-omega|_{(X)_r}
    double excess = 0.0;
    bool beyond_light_cone = false;
  };
  std::vector<P1Row> property1;
  std::vector<P2Row> property2;
  double property3_distance = 0.0;
  bool pass = false;
};

DefinitionReport verify_definition(const StitchingMap& map, const HamiltonianModel& model,
                                   const std::vector<DensityMatrix>& probes,
                                   const std::vector<Region>& x_regions,
                                   const std::vector<int>& r_grid, double exact_tol = 1e-8);

struct SeamRow {
  int r = 0;
  int k = 0;
  double lhs = 0.0;         // <Pbar_{B_{r-k}}>_{Sigma(sigma)}
  double rhs_energy = 0.0;  // <Pbar_{B_r}>_sigma
  double residue = 0.0;     // max(0, lhs - 3 rhs)
};

std::vector<SeamRow> verify_seamlessness(const StitchingMap& map, const HamiltonianModel& model,
                                         const DensityMatrix& sigma, int x,
                                         const std::vector<int>& r_grid,
                                         const std::vector<int>& k_grid);

struct StinespringReport {
  int trials = 0;
  int violations = 0;
  double worst_pair_excess = 0.0;    // |tr P G(ab)| - sqrt(products)
  double worst_single_excess = 0.0;  // |tr P G(ab)| - sqrt(tr P G(aa))
};

StinespringReport stinespring_inequality_check(const cxmat& projector, const CPMap& map,
                                               int trials, std::uint64_t seed = 5150);

// Structural exponents entering r^{d+d_gamma} factors of the audits.
struct ModelExponents {
  double d = 1.0;
  double d_gamma = 0.0;
};

struct StitchAudit {
  Region z;
  int r = 0;
  // classes a..e of the interaction terms around the stitch
  double class_a = 0.0, class_b = 0.0, class_c = 0.0, class_d = 0.0, class_e = 0.0;
  double total_all_terms = 0.0;  // sum over every X of the energy delta
  double lhs_total = 0.0;        // sum over X not inside Z minus the fattened stitch
  double rhs_energy_term = 0.0;  // <H_{(dZ)_r}>_sigma
  double rhs_boundary_term = 0.0;  // |dZ|
  double empirical_c = 0.0;        // smallest C with lhs <= C r^{d+dg} rhs
};

StitchAudit energy_audit(const StitchingMap& map, const HamiltonianModel& model,
                         const DensityMatrix& sigma, int r, const ModelExponents& exps = {});

// |<J>_{Sigma(sigma)} - <J>_sigma| and dist(Z, Gamma_j).
std::pair<double, int> j_insensitivity(const StitchingMap& map, const HamiltonianModel& model,
                                       const DensityMatrix& sigma, const Interaction& j);

struct IsoperimetrySeries {
  int center = 0;
  int r = 0;
  struct Row {
    int i = 0;
    int big_r = 0;     // R_i = (2i-1) r
    double e = 0.0;    // <H_{B_{R_i}}>_sigma
    double delta = 0.0;
  };
  std::vector<Row> rows;
  double gronwall_a = 1.0;
  std::vector<double> gronwall_b;
  std::vector<double> replayed_lower;  // per i: E_1 - sum_{j<i} b_j a^-j (to compare with E_i a^{1-i})
  double implied_e1_bound = 0.0;
  double exact_e1 = 0.0;
};

IsoperimetrySeries isoperimetry_series(const HamiltonianModel& model, const Interaction& j,
                                       const StateVector& phi, int x, int r,
                                       const ModelExponents& exps = {});

struct DecayReport {
  int center = 0;
  int big_r = 0;  // dist(x, Gamma_j)
  struct Row {
    int r = 0;
    double distance = 0.0;  // |rho_Phi - mu|_{B_r(x)}
    double pbar = 0.0;      // <Pbar_{B_r}>_sigma
    bool p_phi_zero = false;
    double theta_distance = 0.0;     // |sigma - rho_Theta|_{B_{r-k}}, k = r/2
    double theta_mu_distance = 0.0;  // |rho_Theta - mu|_{B_{r-k}}
  };
  std::vector<Row> rows;
  double theorem_p = 0.0;  // 1/(d + d_gamma + 2)
};

DecayReport decay_profile(const HamiltonianModel& model, const Interaction& j,
                          const StateVector& phi, int x, const std::vector<int>& radii,
                          const ModelExponents& exps = {});

// Ground-state residual guard shared by the perturbed-state pipelines.
void require_ground_state(const HamiltonianModel& model, const Interaction& j,
                          const StateVector& phi, double tol = 1e-8);

}  // namespace stitchlab
