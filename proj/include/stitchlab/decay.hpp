#pragma once

#include "stitchlab/lattice.hpp"

#include <string>
#include <vector>

namespace stitchlab {

enum class DecayKind { m_function, f_function };

// Tabulated nonnegative decay function. m-functions live on 1..r_max,
// F-functions on 0..r_max. Values beyond r_max are not defined; callers must
// tabulate far enough (graph diameter + 2 covers every use here).
class DecayFunction {
 public:
  // Raw tabulation; nonnegativity enforced, monotonicity checked by
  // check_class_m so that its diagnostic can fire.
  static DecayFunction m_tabulated(std::vector<double> values);
  static DecayFunction f_tabulated(std::vector<double> values);

  static DecayFunction exponential(double a, int r_max, DecayKind kind = DecayKind::m_function);
  static DecayFunction stretched(double a, double alpha, int r_max,
                                 DecayKind kind = DecayKind::m_function);
  static DecayFunction power(double p, int r_max, DecayKind kind = DecayKind::m_function);
  static DecayFunction zero(int r_max, DecayKind kind = DecayKind::m_function);

  DecayKind kind() const { return kind_; }
  int r_min() const { return kind_ == DecayKind::m_function ? 1 : 0; }
  int r_max() const { return r_min() + static_cast<int>(values_.size()) - 1; }
  double at(int r) const;
  const std::vector<double>& values() const { return values_; }
  bool non_increasing() const;

 private:
  DecayFunction(DecayKind kind, std::vector<double> values);
  DecayKind kind_;
  std::vector<double> values_;  // index 0 corresponds to r = r_min()
};

struct ClassMReport {
  std::vector<double> alpha_grid;
  std::vector<double> c_alpha;  // smallest C with f(r) <= C e^{-r^alpha}, c_alpha = 1
  bool quasi_exponential = true;  // false when some C_alpha exceeds the threshold
};

// Verifies monotonicity and tabulates the class-M constants per alpha.
ClassMReport check_class_m(const DecayFunction& f, const std::vector<double>& alpha_grid,
                           double poly_threshold = 1e6);

inline std::vector<double> default_alpha_grid() {
  return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
}

struct FFunctionReport {
  double c_f = 0.0;        // convolution constant
  double c_f_prime = 0.0;  // summability constant
};

// Smallest constants validating the F-function convolution and summability
// properties exhaustively on the given graph.
FFunctionReport check_f_function(const DecayFunction& f, const LatticeGraph& graph);

// S(f)(r) = max over compositions r = r_1+..+r_l of prod f(r_i), by DP.
DecayFunction superadditive_envelope(const DecayFunction& f);

// F-function dominating m(r+1), via the S-transform of c0 (1+r^{d+2}) m(r+1).
DecayFunction f_from_m(const DecayFunction& m, const DimensionFit& fit);

// Non-increasing rectification of C0 (1+(r-1)^2)(1+C_Gamma (r-1)^d)^2 F(r-1).
DecayFunction m_from_f(const DecayFunction& f, const DimensionFit& fit);

}  // namespace stitchlab
