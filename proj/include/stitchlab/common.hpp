#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace stitchlab {

using cx = std::complex<double>;
using cxmat = Eigen::MatrixXcd;
using cxvec = Eigen::VectorXcd;
using realvec = Eigen::VectorXd;

// Config-file parse failure, carries the offending location for CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& msg, int line = 0, int col = 0)
      : std::runtime_error(loc_msg(msg, line, col)), line_(line), col_(col) {}
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  static std::string loc_msg(const std::string& msg, int line, int col) {
    if (line <= 0) return msg;
    return msg + " (line " + std::to_string(line) + ", col " + std::to_string(col) + ")";
  }
  int line_ = 0, col_ = 0;
};

// Hilbert-space dimension cap exceeded, CLI exit code 3.
class ResourceCapError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Deterministic per-task stream: the root seed plus a textual key (scenario,
// axes, op name) fully determine the stream, independent of scheduling.
inline std::mt19937_64 derived_rng(std::uint64_t root_seed, const std::string& key) {
  std::uint64_t h = fnv1a(key);
  std::seed_seq seq{static_cast<std::uint32_t>(root_seed), static_cast<std::uint32_t>(root_seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return std::mt19937_64(seq);
}

inline cxvec random_unit_vector(Eigen::Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  cxvec v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = cx(g(rng), g(rng));
  v.normalize();
  return v;
}

inline cxmat random_hermitian(Eigen::Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  cxmat a(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) a(i, j) = cx(g(rng), g(rng));
  cxmat h = (a + a.adjoint()) / 2.0;
  return h;
}

// Hermitian matrix scaled to unit operator norm.
cxmat random_unit_hermitian(Eigen::Index dim, std::mt19937_64& rng);

// Random density matrix (mixed, full rank almost surely).
cxmat random_density(Eigen::Index dim, std::mt19937_64& rng);

double operator_norm(const cxmat& m);
double trace_norm(const cxmat& m);

}  // namespace stitchlab
