#pragma once

#include "stitchlab/stitching.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace stitchlab {

struct PlanSpec {
  bool check_assumptions = true;
  std::vector<int> decay_centers;
  int decay_radius = 1;
  int iso_center = -1;  // <0: skip isoperimetry
  int iso_r = 1;
  std::vector<int> lr_times_mask;  // unused placeholder for config round trips
  std::optional<bool> expect_ff, expect_gap, expect_ltqo, expect_invertibility;
};

// A fully specified experiment: model, perturbation, certificate, and plan.
struct Scenario {
  std::string name;
  std::shared_ptr<const LatticeGraph> graph;
  std::size_t dim_cap = std::size_t{1} << 14;
  Interaction hamiltonian;
  std::optional<Interaction> perturbation;
  InvertibilityCertificate certificate = InvertibilityCertificate::trivial_product();
  ModelExponents exponents;
  PlanSpec plan;
  double kernel_tol = 1e-8;
  enum class GroundKind { all_down, circuit, solve } ground_kind = GroundKind::all_down;

  SiteSpace space() const;
  // Model with the distinguished ground vector attached.
  HamiltonianModel model() const;
  // All ground states of H+J within the kernel tolerance of the bottom
  // eigenvalue, plus the gap to the next level.
  struct PerturbedGround {
    std::vector<StateVector> states;
    double energy = 0.0;
    double gap_above = 0.0;
  };
  PerturbedGround perturbed_ground() const;
};

std::vector<std::string> builtin_scenario_names();
Scenario builtin_scenario(const std::string& name,
                          const std::map<std::string, double>& overrides = {});

// Parses the sectioned key-value scenario format ([graph] [hamiltonian]
// [perturbation] [certificate] [plan] [exponents]).
Scenario load_scenario_file(const std::string& path, std::size_t dim_cap = std::size_t{1} << 14);
Scenario parse_scenario_text(const std::string& text, const std::string& origin,
                             std::size_t dim_cap = std::size_t{1} << 14);

// Resolves a CLI target: existing file path or builtin name.
Scenario resolve_scenario(const std::string& name_or_path,
                          const std::map<std::string, double>& overrides,
                          std::size_t dim_cap);

}  // namespace stitchlab
