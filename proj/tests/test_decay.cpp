#include <doctest.h>

#include "stitchlab/decay.hpp"

#include <cmath>
#include <random>

using namespace stitchlab;

namespace {

// brute force over all 2^{r-1} compositions of r
double envelope_brute(const DecayFunction& f, int r) {
  if (r == 1) return f.at(1);
  double best = f.at(r);
  for (int first = 1; first < r; ++first) best = std::max(best, f.at(first) * envelope_brute(f, r - first));
  return best;
}

DecayFunction random_m(std::mt19937_64& rng, int r_max) {
  std::uniform_real_distribution<double> unif(0.05, 0.95);
  std::vector<double> vals(r_max);
  double cur = unif(rng);
  for (auto& v : vals) {
    v = cur;
    cur *= unif(rng);
  }
  return DecayFunction::m_tabulated(vals);
}

}  // namespace

TEST_CASE("check_class_m on presets") {
  DecayFunction f = DecayFunction::exponential(1.0, 20);
  ClassMReport rep = check_class_m(f, {0.5});
  // max over integer r of e^{sqrt(r) - r} sits at r = 1
  CHECK(rep.c_alpha[0] == doctest::Approx(1.0));
  CHECK(rep.c_alpha[0] <= std::exp(0.25) + 1e-12);
  CHECK(rep.quasi_exponential);

  DecayFunction zero = DecayFunction::zero(10);
  for (double c : check_class_m(zero, default_alpha_grid()).c_alpha) CHECK(c == 0.0);

  DecayFunction poly = DecayFunction::power(1.0, 400);
  ClassMReport prep = check_class_m(poly, {0.9}, 1e6);
  CHECK(!prep.quasi_exponential);  // flagged: polynomial, not quasi-exponential

  CHECK_THROWS_WITH(check_class_m(DecayFunction::m_tabulated({0.1, 0.5}), {0.5}),
                    "not in class M: monotonicity fails at r=2");
}

TEST_CASE("check_f_function") {
  LatticeGraph chain = LatticeGraph::chain(12);
  std::vector<double> vals;
  for (int r = 0; r <= chain.diameter(); ++r) vals.push_back(std::exp(-r) / ((1.0 + r) * (1.0 + r)));
  FFunctionReport rep = check_f_function(DecayFunction::f_tabulated(vals), chain);
  // frozen from the independent python oracle on the 12-chain
  CHECK(rep.c_f == doctest::Approx(3.4977541066369855).epsilon(1e-12));
  CHECK(rep.c_f_prime == doctest::Approx(1.2221277797966705).epsilon(1e-12));

  LatticeGraph k5 = LatticeGraph::complete(5);
  FFunctionReport flat = check_f_function(DecayFunction::f_tabulated({1.0, 1.0}), k5);
  CHECK(flat.c_f == doctest::Approx(5.0));
  CHECK(flat.c_f_prime == doctest::Approx(5.0));

  LatticeGraph single = LatticeGraph::chain(1);
  FFunctionReport one = check_f_function(DecayFunction::f_tabulated({0.7}), single);
  CHECK(one.c_f == doctest::Approx(0.7));
  CHECK(one.c_f_prime == doctest::Approx(0.7));
}

TEST_CASE("superadditive envelope examples") {
  DecayFunction exp1 = DecayFunction::exponential(1.0, 15);
  DecayFunction s = superadditive_envelope(exp1);
  for (int r = 1; r <= 15; ++r) CHECK(s.at(r) == doctest::Approx(exp1.at(r)).epsilon(1e-14));

  DecayFunction two = DecayFunction::m_tabulated({0.9, 0.5});
  CHECK(superadditive_envelope(two).at(2) == doctest::Approx(0.81));

  DecayFunction stretched = DecayFunction::stretched(1.0, 0.5, 15);
  DecayFunction ss = superadditive_envelope(stretched);
  for (int r = 1; r <= 15; ++r) CHECK(ss.at(r) == doctest::Approx(stretched.at(r)).epsilon(1e-14));
}

TEST_CASE("superadditive envelope equals brute force over compositions") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    DecayFunction f = random_m(rng, 12);
    DecayFunction s = superadditive_envelope(f);
    for (int r = 1; r <= 12; ++r) {
      double brute = envelope_brute(f, r);
      CHECK(std::abs(s.at(r) - brute) <= 1e-12 * std::max(1.0, brute));
    }
  }
}

TEST_CASE("envelope transform properties") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    DecayFunction f = random_m(rng, 14);
    DecayFunction s = superadditive_envelope(f);
    DecayFunction ss = superadditive_envelope(s);
    for (int r = 1; r <= 14; ++r) {
      CHECK(ss.at(r) == doctest::Approx(s.at(r)).epsilon(1e-13));  // idempotent
      CHECK(s.at(r) >= f.at(r) - 1e-15);                           // dominating
    }
    for (int r1 = 1; r1 <= 14; ++r1)
      for (int r2 = 1; r1 + r2 <= 14; ++r2)
        CHECK(s.at(r1) * s.at(r2) <= s.at(r1 + r2) * (1.0 + 1e-12));

    // monotone in the argument function
    std::uniform_real_distribution<double> unif(0.3, 1.0);
    std::vector<double> smaller;
    for (int r = 1; r <= 14; ++r) smaller.push_back(f.at(r) * unif(rng));
    // keep it non-increasing
    for (size_t i = 1; i < smaller.size(); ++i) smaller[i] = std::min(smaller[i], smaller[i - 1]);
    DecayFunction g = DecayFunction::m_tabulated(smaller);
    DecayFunction sg = superadditive_envelope(g);
    for (int r = 1; r <= 14; ++r) CHECK(sg.at(r) <= s.at(r) + 1e-15);
  }
}

TEST_CASE("f_from_m dominates the shifted m") {
  DimensionFit fit{1.0, 2.0};
  DecayFunction m = DecayFunction::exponential(1.0, 16);
  DecayFunction f = f_from_m(m, fit);
  CHECK(f.kind() == DecayKind::f_function);
  CHECK(f.non_increasing());
  for (int r = 1; r < f.r_max(); ++r) CHECK(f.at(r) >= std::exp(-(r + 1.0)) - 1e-15);
  CHECK(f.at(0) >= m.at(1) - 1e-15);

  DecayFunction zero = DecayFunction::zero(10);
  DecayFunction fz = f_from_m(zero, fit);
  for (int r = 0; r <= fz.r_max(); ++r) CHECK(fz.at(r) == 0.0);
}

TEST_CASE("m_from_f matches the defining sup formula") {
  DimensionFit fit{1.0, 2.0};
  int fr_max = 14;
  DecayFunction f = DecayFunction::exponential(1.0, fr_max, DecayKind::f_function);
  DecayFunction m = m_from_f(f, fit);
  CHECK(m.non_increasing());
  double c0 = 0.0;
  for (int k = 0; k <= fr_max; ++k) c0 += 1.0 / (1.0 + double(k) * k);
  for (int r = 1; r <= m.r_max(); ++r) {
    double sup = 0.0;
    for (int rp = r; rp <= m.r_max(); ++rp) {
      double rr = rp - 1.0;
      double g = c0 * (1.0 + rr * rr) * std::pow(1.0 + 2.0 * rr, 2.0) * std::exp(-rr);
      sup = std::max(sup, g);
    }
    CHECK(m.at(r) == doctest::Approx(sup).epsilon(1e-12));
  }

  DecayFunction fz = DecayFunction::zero(10, DecayKind::f_function);
  DecayFunction mz = m_from_f(fz, fit);
  for (int r = 1; r <= mz.r_max(); ++r) CHECK(mz.at(r) == 0.0);
}

TEST_CASE("decay function domain handling") {
  DecayFunction m = DecayFunction::exponential(1.0, 5);
  CHECK(m.r_min() == 1);
  CHECK(m.r_max() == 5);
  CHECK_THROWS(m.at(0));
  CHECK_THROWS(m.at(6));
  DecayFunction f = DecayFunction::exponential(1.0, 5, DecayKind::f_function);
  CHECK(f.r_min() == 0);
  CHECK(f.at(0) == 1.0);
  CHECK_THROWS(DecayFunction::m_tabulated({0.5, -0.1}));
}
