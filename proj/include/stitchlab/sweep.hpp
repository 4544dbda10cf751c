#pragma once

#include "stitchlab/scenario.hpp"

#include <map>
#include <string>
#include <vector>

namespace stitchlab {

struct ResultRow {
  std::string scenario;
  std::map<std::string, std::string> axes;
  std::string metric;
  double value = 0.0;
  std::string flag;  // "", "pass", "fail", "info"
  double seconds = 0.0;

  std::string key() const;  // scenario|axes|metric, axes in sorted order
};

// Append-only result set keyed by (scenario, axes, metric).
class ResultStore {
 public:
  void insert(ResultRow row);  // throws on conflicting duplicate keys
  bool contains(const std::string& key) const { return index_.count(key) > 0; }
  const std::vector<ResultRow>& rows() const { return rows_; }
  std::vector<ResultRow> sorted_rows() const;

  void write_jsonl(const std::string& path) const;
  void write_csv(const std::string& path) const;
  // Plain-text summary table.
  std::string summary() const;
  // Gnuplot-style data blocks for decay profiles (one per scenario/axes).
  void write_decay_dat(const std::string& path) const;
  static ResultStore load_jsonl(const std::string& path);

 private:
  std::vector<ResultRow> rows_;
  std::map<std::string, double> index_;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::size_t max_dim = std::size_t{1} << 14;
};

// Runs the scenario's plan (assumption checkers, stitching contract, decay
// and isoperimetry rows) and appends metric rows. Returns false when a
// measured assumption flag contradicts the scenario's expectation.
bool run_scenario(const Scenario& scenario, const RunConfig& cfg, ResultStore& store,
                  const std::map<std::string, std::string>& axes = {});

struct SweepSpec {
  std::string scenario;  // builtin name or config path
  std::map<std::string, std::vector<double>> axes;
  int jobs = 1;
  std::uint64_t seed = 1;
  std::size_t max_dim = std::size_t{1} << 14;
  std::size_t max_cells = 4096;
};

// Deterministic sweep over the cartesian axes; resumable against an existing
// store; result identical for any parallelism at fixed seed.
ResultStore run_sweep(const SweepSpec& spec, const ResultStore* existing = nullptr);

struct DecayFit {
  double beta = 0.0;
  double log_amplitude = 0.0;
  double residual = 0.0;
  int n_points = 0;
  bool valid = false;
  std::string note;
  double theorem_p = 0.0;
};

// Least-squares fit of log(distance) = log A - R^beta over a beta grid.
DecayFit fit_decay(const std::vector<std::pair<double, double>>& r_distance_rows,
                   double theorem_p = 0.0, const std::vector<double>& beta_grid = {});

// Collects (R, distance) pairs from decay_distance rows of a result set.
DecayFit fit_decay_rows(const ResultStore& store, const std::string& scenario,
                        double theorem_p = 0.0);

}  // namespace stitchlab
