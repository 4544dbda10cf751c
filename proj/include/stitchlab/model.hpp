#pragma once

#include "stitchlab/decay.hpp"
#include "stitchlab/tensorops.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace stitchlab {

// Collection of Hermitian local terms keyed by their support. An anchored
// interaction rejects terms disjoint from the anchor at insertion.
class Interaction {
 public:
  Interaction() = default;
  explicit Interaction(std::optional<Region> anchor, std::string label = "");

  void add_term(const Region& support, const cxmat& matrix);
  void add_scaled(const Interaction& other, double coeff);
  Interaction scaled(double coeff) const;

  const std::map<Region, LocalOperator>& terms() const { return terms_; }
  const std::optional<Region>& anchor() const { return anchor_; }
  const std::string& label() const { return label_; }
  bool empty() const { return terms_.empty(); }

 private:
  std::map<Region, LocalOperator> terms_;
  std::optional<Region> anchor_;
  std::string label_;
};

// Keeps exactly the terms with support inside z.
Interaction obc_restrict(const Interaction& q, const Region& z);
// Keeps terms inside z or inside the complement; drops the crossing ones.
Interaction truncate_across(const Interaction& q, const Region& z);
// The dropped remainder q - truncate_across(q, z), anchored in boundary(z).
Interaction crossing_remainder(const Interaction& q, const Region& z, const LatticeGraph& graph);

// sup_x sum_{X ni x} ||q_X|| / m(1 + diam X); +inf sentinel when m vanishes
// against a nonzero term.
double interaction_norm_m(const Interaction& q, const DecayFunction& m, const LatticeGraph& graph);
// sup over ordered site pairs (x,y), including x = y, of
// sum_{S containing both} ||q_S|| / F(dist(x,y)).
double interaction_norm_f(const Interaction& q, const DecayFunction& f, const LatticeGraph& graph);

// (i[z1,z2])_S = sum over overlapping support pairs with union S.
Interaction interaction_commutator(const Interaction& z1, const Interaction& z2,
                                   const SiteSpace& space);

cxmat assemble(const Interaction& q, const SiteSpace& space);
LinearOp assemble_op(const Interaction& q, const SiteSpace& space);

struct HamiltonianModel {
  SiteSpace space;
  Interaction interaction;
  std::optional<StateVector> ground_vector;
  double kernel_tol = 1e-8;

  DensityMatrix ground_density() const;
};

struct FrustrationFreeReport {
  bool pass = false;
  double worst_term_min_eig = 0.0;       // most negative local eigenvalue
  double worst_term_residual = 0.0;      // max ||h_X Omega||
  double hamiltonian_residual = 0.0;     // ||H Omega||
  std::string worst_offender;
};

FrustrationFreeReport check_frustration_free(const HamiltonianModel& model, double tol = 1e-10);

struct LtqoRow {
  int r = 0;
  int k = 0;
  double measured_sup = 0.0;  // lower bound on the true sup (basis + random combos)
};

struct LtqoProfile {
  int center = 0;
  std::vector<LtqoRow> rows;
  double fitted_d_o = 0.0;
  std::vector<int> k_grid;
  std::vector<double> m_o;  // per k in k_grid
  bool decaying = false;    // pass flag of the LTQO check
};

struct LtqoConfig {
  int n_random = 64;
  std::uint64_t seed = 99;
  std::vector<double> d_o_candidates = {0.0, 1.0, 2.0};
  double pass_abs = 1e-8;    // m_o tail below this always passes
  double pass_ratio = 0.25;  // else tail must fall below ratio * head
};

LtqoProfile measure_ltqo(const HamiltonianModel& model, int x, const std::vector<int>& r_grid,
                         const std::vector<int>& k_grid, const LtqoConfig& cfg = {});

struct GapRow {
  int r = 0;
  double gamma = 0.0;
  int kernel_dim = 0;
};

struct GapProfile {
  int center = 0;
  std::vector<GapRow> rows;
  double fitted_c_gamma = 0.0;
  double fitted_d_gamma = 0.0;
};

GapProfile measure_gap(const HamiltonianModel& model, int x, const std::vector<int>& r_grid,
                       const std::vector<double>& d_gamma_candidates = {0.0, 1.0, 2.0});

// Shared preset table for config files and scenario builders.
cxmat preset_matrix(const std::string& name);

}  // namespace stitchlab
