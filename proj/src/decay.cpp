#include "stitchlab/decay.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stitchlab {

DecayFunction::DecayFunction(DecayKind kind, std::vector<double> values)
    : kind_(kind), values_(std::move(values)) {
  if (values_.empty()) throw std::invalid_argument("decay function needs at least one value");
  for (double v : values_)
    if (!(v >= 0.0)) throw std::invalid_argument("decay function values must be nonnegative");
}

DecayFunction DecayFunction::m_tabulated(std::vector<double> values) {
  return DecayFunction(DecayKind::m_function, std::move(values));
}

DecayFunction DecayFunction::f_tabulated(std::vector<double> values) {
  return DecayFunction(DecayKind::f_function, std::move(values));
}

DecayFunction DecayFunction::exponential(double a, int r_max, DecayKind kind) {
  std::vector<double> v;
  int r0 = kind == DecayKind::m_function ? 1 : 0;
  for (int r = r0; r <= r_max; ++r) v.push_back(std::exp(-a * r));
  return DecayFunction(kind, std::move(v));
}

DecayFunction DecayFunction::stretched(double a, double alpha, int r_max, DecayKind kind) {
  std::vector<double> v;
  int r0 = kind == DecayKind::m_function ? 1 : 0;
  for (int r = r0; r <= r_max; ++r) v.push_back(std::exp(-a * std::pow(r, alpha)));
  return DecayFunction(kind, std::move(v));
}

DecayFunction DecayFunction::power(double p, int r_max, DecayKind kind) {
  std::vector<double> v;
  int r0 = kind == DecayKind::m_function ? 1 : 0;
  for (int r = r0; r <= r_max; ++r) v.push_back(1.0 / std::pow(1.0 + r, p));
  return DecayFunction(kind, std::move(v));
}

DecayFunction DecayFunction::zero(int r_max, DecayKind kind) {
  int r0 = kind == DecayKind::m_function ? 1 : 0;
  return DecayFunction(kind, std::vector<double>(r_max - r0 + 1, 0.0));
}

double DecayFunction::at(int r) const {
  if (r < r_min() || r > r_max())
    throw std::out_of_range("decay function not tabulated at r=" + std::to_string(r));
  return values_[static_cast<size_t>(r - r_min())];
}

bool DecayFunction::non_increasing() const {
  for (size_t i = 1; i < values_.size(); ++i)
    if (values_[i] > values_[i - 1]) return false;
  return true;
}

ClassMReport check_class_m(const DecayFunction& f, const std::vector<double>& alpha_grid,
                           double poly_threshold) {
  for (int r = f.r_min() + 1; r <= f.r_max(); ++r)
    if (f.at(r) > f.at(r - 1))
      throw std::runtime_error("not in class M: monotonicity fails at r=" + std::to_string(r));
  ClassMReport rep;
  rep.alpha_grid = alpha_grid;
  for (double alpha : alpha_grid) {
    double c = 0.0;
    for (int r = std::max(1, f.r_min()); r <= f.r_max(); ++r)
      c = std::max(c, f.at(r) * std::exp(std::pow(static_cast<double>(r), alpha)));
    rep.c_alpha.push_back(c);
    if (c > poly_threshold) rep.quasi_exponential = false;
  }
  return rep;
}

FFunctionReport check_f_function(const DecayFunction& f, const LatticeGraph& graph) {
  if (f.kind() != DecayKind::f_function)
    throw std::invalid_argument("check_f_function expects an F-function (domain from 0)");
  if (f.r_max() < graph.diameter())
    throw std::invalid_argument("F-function not tabulated up to the graph diameter");
  FFunctionReport rep;
  const int n = graph.size();
  for (int x = 0; x < n; ++x) {
    double row_sum = 0.0;
    for (int y = 0; y < n; ++y) {
      row_sum += f.at(graph.distance(x, y));
      double conv = 0.0;
      for (int z = 0; z < n; ++z) conv += f.at(graph.distance(x, z)) * f.at(graph.distance(z, y));
      double denom = f.at(graph.distance(x, y));
      if (denom == 0.0) {
        if (conv > 0.0) throw std::runtime_error("convolution property unattainable: F vanishes");
        continue;
      }
      rep.c_f = std::max(rep.c_f, conv / denom);
    }
    rep.c_f_prime = std::max(rep.c_f_prime, row_sum);
  }
  return rep;
}

DecayFunction superadditive_envelope(const DecayFunction& f) {
  const int r0 = f.r_min();
  if (r0 != 1)
    throw std::invalid_argument("superadditive envelope is defined for functions on 1..r_max");
  const int rmax = f.r_max();
  std::vector<double> t(rmax + 1, 0.0);
  for (int r = 1; r <= rmax; ++r) {
    double best = f.at(r);
    for (int k = 1; k < r; ++k) best = std::max(best, t[k] * f.at(r - k));
    t[r] = best;
  }
  return DecayFunction::m_tabulated(std::vector<double>(t.begin() + 1, t.end()));
}

DecayFunction f_from_m(const DecayFunction& m, const DimensionFit& fit) {
  check_class_m(m, default_alpha_grid());  // propagates monotonicity failures
  const int rmax = m.r_max() - 1;          // needs m(r+1)
  if (rmax < 1) throw std::invalid_argument("m must be tabulated at least to r=2");
  auto weight = [&](int r) { return 1.0 + std::pow(static_cast<double>(r), fit.d + 2.0); };
  std::vector<double> fprime_unscaled(rmax + 1, 0.0);
  double peak = 0.0;
  for (int r = 1; r <= rmax; ++r) {
    fprime_unscaled[r] = weight(r) * m.at(r + 1);
    peak = std::max(peak, fprime_unscaled[r]);
  }
  const double c0 = peak >= 1.0 ? 0.99 / peak : 1.0;
  std::vector<double> fprime(fprime_unscaled.begin() + 1, fprime_unscaled.end());
  for (double& v : fprime) v *= c0;
  DecayFunction s = superadditive_envelope(DecayFunction::m_tabulated(fprime));
  std::vector<double> out(rmax + 1, 0.0);
  for (int r = 1; r <= rmax; ++r) out[r] = s.at(r) / (c0 * weight(r));
  // F(0) must dominate m(1) so that ||| . |||_F <= || . ||_m holds including
  // the diagonal x = y pairs; see the decisions ledger on the r = 0 shift.
  out[0] = std::max(out[1], m.at(1));
  // Rectify to non-increasing from the right; raising values keeps F >= m(r+1).
  for (int r = static_cast<int>(out.size()) - 2; r >= 0; --r) out[r] = std::max(out[r], out[r + 1]);
  return DecayFunction::f_tabulated(std::move(out));
}

DecayFunction m_from_f(const DecayFunction& f, const DimensionFit& fit) {
  if (f.kind() != DecayKind::f_function)
    throw std::invalid_argument("m_from_f expects an F-function");
  const int rmax = f.r_max() + 1;  // g(r) uses F(r-1)
  double c0 = 0.0;
  for (int k = 0; k <= f.r_max(); ++k) c0 += 1.0 / (1.0 + static_cast<double>(k) * k);
  std::vector<double> g(rmax + 1, 0.0);
  for (int r = 1; r <= rmax; ++r) {
    double rr = static_cast<double>(r - 1);
    double balls = 1.0 + fit.c_gamma_cap * std::pow(rr, fit.d);
    g[r] = c0 * (1.0 + rr * rr) * balls * balls * f.at(r - 1);
  }
  std::vector<double> m(rmax + 1, 0.0);
  double running = 0.0;
  for (int r = rmax; r >= 1; --r) {
    running = std::max(running, g[r]);
    m[r] = running;
  }
  return DecayFunction::m_tabulated(std::vector<double>(m.begin() + 1, m.end()));
}

}  // namespace stitchlab
