#include "stitchlab/sweep.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace stitchlab {

using nlohmann::json;

namespace {

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

std::string ResultRow::key() const {
  std::string k = scenario + "|";
  for (const auto& [a, v] : axes) k += a + "=" + v + ";";
  return k + "|" + metric;
}

void ResultStore::insert(ResultRow row) {
  std::string k = row.key();
  auto it = index_.find(k);
  if (it != index_.end()) {
    if (it->second != row.value)
      throw std::runtime_error("result store inconsistent: key '" + k + "' has value " +
                               format_value(it->second) + " vs " + format_value(row.value));
    return;  // identical duplicate, resumed run
  }
  index_[k] = row.value;
  rows_.push_back(std::move(row));
}

std::vector<ResultRow> ResultStore::sorted_rows() const {
  std::vector<ResultRow> out = rows_;
  std::sort(out.begin(), out.end(),
            [](const ResultRow& a, const ResultRow& b) { return a.key() < b.key(); });
  return out;
}

void ResultStore::write_jsonl(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("unwritable output path: " + path);
  for (const auto& row : sorted_rows()) {
    json j;
    j["scenario"] = row.scenario;
    j["axes"] = row.axes;
    j["metric"] = row.metric;
    j["value"] = row.value;
    j["flag"] = row.flag;
    j["seconds"] = row.seconds;
    out << j.dump() << "\n";
  }
}

void ResultStore::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("unwritable output path: " + path);
  std::set<std::string> axis_names;
  for (const auto& row : rows_)
    for (const auto& [a, v] : row.axes) axis_names.insert(a);
  out << "scenario";
  for (const auto& a : axis_names) out << "," << a;
  out << ",metric,value,flag,seconds\n";
  for (const auto& row : sorted_rows()) {
    out << row.scenario;
    for (const auto& a : axis_names) {
      auto it = row.axes.find(a);
      out << "," << (it == row.axes.end() ? "" : it->second);
    }
    out << "," << row.metric << "," << format_value(row.value) << "," << row.flag << ","
        << format_value(row.seconds) << "\n";
  }
}

std::string ResultStore::summary() const {
  std::ostringstream out;
  out << "result rows: " << rows_.size() << "\n";
  size_t fails = 0;
  for (const auto& row : sorted_rows()) {
    out << "  " << row.scenario << " ";
    for (const auto& [a, v] : row.axes) out << a << "=" << v << " ";
    out << row.metric << " = " << format_value(row.value);
    if (!row.flag.empty()) out << " [" << row.flag << "]";
    out << "\n";
    if (row.flag == "fail") ++fails;
  }
  out << (fails ? "FAIL (" + std::to_string(fails) + " failing rows)" : "OK") << "\n";
  return out.str();
}

void ResultStore::write_decay_dat(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("unwritable output path: " + path);
  out << "# R  distance  (per scenario/axes block)\n";
  std::string last_block;
  for (const auto& row : sorted_rows()) {
    if (row.metric != "decay_distance") continue;
    std::string block = row.scenario;
    for (const auto& [a, v] : row.axes)
      if (a != "x" && a != "R") block += " " + a + "=" + v;
    if (block != last_block) {
      out << "\n# " << block << "\n";
      last_block = block;
    }
    auto it = row.axes.find("R");
    out << (it == row.axes.end() ? "0" : it->second) << " " << format_value(row.value) << "\n";
  }
}

ResultStore ResultStore::load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open result file: " + path);
  ResultStore store;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    ResultRow row;
    row.scenario = j.at("scenario").get<std::string>();
    row.axes = j.at("axes").get<std::map<std::string, std::string>>();
    row.metric = j.at("metric").get<std::string>();
    row.value = j.at("value").get<double>();
    row.flag = j.value("flag", "");
    row.seconds = j.value("seconds", 0.0);
    store.insert(std::move(row));
  }
  return store;
}

namespace {

struct RowSink {
  const Scenario& scenario;
  const std::map<std::string, std::string>& axes;
  std::vector<ResultRow>& rows;

  void add(const std::string& metric, double value, const std::string& flag = "",
           double seconds = 0.0, const std::map<std::string, std::string>& extra = {}) {
    ResultRow row;
    row.scenario = scenario.name;
    row.axes = axes;
    for (const auto& [k, v] : extra) row.axes[k] = v;
    row.metric = metric;
    row.value = value;
    row.flag = flag;
    row.seconds = seconds;
    rows.push_back(std::move(row));
  }
};

}  // namespace

bool run_scenario(const Scenario& scenario, const RunConfig& cfg, ResultStore& store,
                  const std::map<std::string, std::string>& axes) {
  std::vector<ResultRow> rows;
  RowSink sink{scenario, axes, rows};
  bool expectations_met = true;
  std::string axes_key;
  for (const auto& [a, v] : axes) axes_key += a + "=" + v + ";";
  const std::uint64_t cell_seed = cfg.seed ^ fnv1a(scenario.name + "|" + axes_key);

  Scenario scn = scenario;
  scn.dim_cap = cfg.max_dim;
  if (scn.space().dim() > cfg.max_dim)
    throw ResourceCapError("scenario exceeds the Hilbert dimension cap");

  double t0 = now_seconds();
  HamiltonianModel model = scn.model();
  const LatticeGraph& graph = model.space.graph();
  const int n = graph.size();
  const int center = n / 2;

  auto check_expect = [&](const char* metric, std::optional<bool> expect, bool measured) {
    bool ok = !expect || *expect == measured;
    sink.add(metric, measured ? 1.0 : 0.0, ok ? "pass" : "fail", now_seconds() - t0);
    if (!ok) expectations_met = false;
  };

  if (scn.plan.check_assumptions) {
    t0 = now_seconds();
    FrustrationFreeReport ff = check_frustration_free(model);
    sink.add("ff_worst_residual", ff.worst_term_residual, ff.pass ? "pass" : "fail",
             now_seconds() - t0);
    check_expect("ff_pass", scn.plan.expect_ff, ff.pass);

    t0 = now_seconds();
    std::vector<int> r_grid;
    for (int r = 1; r <= 4; ++r)
      if (model.space.dim_of(graph.ball(center, r)) <= 2048) r_grid.push_back(r);
    GapProfile gap = measure_gap(model, center, r_grid);
    bool gap_ok = true;
    for (const auto& row : gap.rows) {
      sink.add("gamma", row.gamma, row.gamma > model.kernel_tol ? "pass" : "fail", 0.0,
               {{"r", std::to_string(row.r)}});
      gap_ok = gap_ok && row.gamma > model.kernel_tol;
    }
    sink.add("gap_c_gamma", gap.fitted_c_gamma, "", now_seconds() - t0);
    check_expect("gap_pass", scn.plan.expect_gap, gap_ok);

    t0 = now_seconds();
    std::vector<int> k_grid;
    for (int k = 0; k <= 4; ++k) k_grid.push_back(k);
    LtqoConfig ltqo_cfg;
    ltqo_cfg.seed = cell_seed;
    LtqoProfile ltqo = measure_ltqo(model, center, r_grid, k_grid, ltqo_cfg);
    for (const auto& row : ltqo.rows)
      sink.add("ltqo_sup", row.measured_sup, "", 0.0,
               {{"r", std::to_string(row.r)}, {"k", std::to_string(row.k)}});
    sink.add("ltqo_decaying", ltqo.decaying ? 1.0 : 0.0, ltqo.decaying ? "pass" : "fail",
             now_seconds() - t0);
    check_expect("ltqo_pass", scn.plan.expect_ltqo, ltqo.decaying);

    t0 = now_seconds();
    bool invertible = false;
    double mu_dist = 0.0;
    try {
      Region z = graph.ball(center, std::max(1, n / 4));
      StitchingMap map = build_stitching_map(model, scn.certificate, z);
      mu_dist = map.mu_fixed_point_distance();
      invertible = mu_dist <= 1e-9;
    } catch (const std::exception&) {
      invertible = false;
    }
    sink.add("stitch_mu_distance", mu_dist, invertible ? "pass" : "fail", now_seconds() - t0);
    check_expect("invertibility_pass", scn.plan.expect_invertibility, invertible);
  }

  if (scn.perturbation && !scn.plan.decay_centers.empty()) {
    t0 = now_seconds();
    Scenario::PerturbedGround pg = scn.perturbed_ground();
    sink.add("perturbed_energy", pg.energy, "", now_seconds() - t0);
    sink.add("perturbed_ground_degeneracy", static_cast<double>(pg.states.size()), "info");
    std::vector<std::pair<double, double>> fit_rows;
    for (int x : scn.plan.decay_centers) {
      double worst = 0.0;
      int big_r = 0;
      for (const auto& phi : pg.states) {
        DecayReport rep = decay_profile(model, *scn.perturbation, phi, x,
                                        {scn.plan.decay_radius}, scn.exponents);
        big_r = rep.big_r;
        for (const auto& row : rep.rows) worst = std::max(worst, row.distance);
      }
      sink.add("decay_distance", worst, "", 0.0,
               {{"x", std::to_string(x)}, {"R", std::to_string(big_r)}});
      fit_rows.push_back({static_cast<double>(big_r), worst});
    }
    DecayFit fit = fit_decay(fit_rows, 1.0 / (scn.exponents.d + scn.exponents.d_gamma + 2.0));
    if (fit.valid) {
      sink.add("decay_fit_beta", fit.beta, "info");
      sink.add("decay_fit_residual", fit.residual, "info");
    }
    sink.add("theorem_p", 1.0 / (scn.exponents.d + scn.exponents.d_gamma + 2.0), "info");

    if (scn.plan.iso_center >= 0) {
      try {
        IsoperimetrySeries iso = isoperimetry_series(model, *scn.perturbation, pg.states.front(),
                                                     scn.plan.iso_center, scn.plan.iso_r,
                                                     scn.exponents);
        double worst_slack = 0.0;
        for (size_t i = 0; i + 1 < iso.rows.size(); ++i)
          worst_slack = std::min(worst_slack, iso.rows[i + 1].e - iso.rows[i].e - iso.rows[i].delta);
        sink.add("iso_superadditivity_slack", worst_slack, worst_slack >= -1e-10 ? "pass" : "fail");
        sink.add("iso_implied_e1_minus_exact", iso.implied_e1_bound - iso.exact_e1,
                 iso.implied_e1_bound >= iso.exact_e1 - 1e-12 ? "pass" : "fail");
      } catch (const std::exception& e) {
        sink.add("iso_skipped", 0.0, "info");
      }
    }
  }

  for (auto& row : rows) store.insert(std::move(row));
  return expectations_met;
}

ResultStore run_sweep(const SweepSpec& spec, const ResultStore* existing) {
  // cartesian cells in lexicographic axis order
  std::vector<std::string> axis_names;
  for (const auto& [name, values] : spec.axes) axis_names.push_back(name);
  std::vector<std::map<std::string, double>> cells{{}};
  for (const auto& name : axis_names) {
    std::vector<std::map<std::string, double>> next;
    for (const auto& cell : cells)
      for (double v : spec.axes.at(name)) {
        auto c = cell;
        c[name] = v;
        next.push_back(std::move(c));
      }
    cells = std::move(next);
  }
  if (cells.size() > spec.max_cells) throw ResourceCapError("sweep exceeds the cell cap");

  ResultStore store;
  if (existing)
    for (const auto& row : existing->rows()) store.insert(row);

  std::vector<std::vector<ResultRow>> per_cell(cells.size());
  std::vector<std::string> errors(cells.size());
  std::atomic<size_t> next_cell{0};
  int jobs = std::max(1, spec.jobs);

  auto worker = [&]() {
    while (true) {
      size_t i = next_cell.fetch_add(1);
      if (i >= cells.size()) return;
      std::map<std::string, std::string> axes;
      for (const auto& [a, v] : cells[i]) axes[a] = format_value(v);
      ResultRow sentinel;
      sentinel.scenario = spec.scenario;
      sentinel.axes = axes;
      sentinel.metric = "_cell_done";
      sentinel.value = 1.0;
      if (existing && existing->contains(sentinel.key())) continue;  // resumable
      try {
        Scenario scn = resolve_scenario(spec.scenario, cells[i], spec.max_dim);
        ResultStore local;
        RunConfig cfg;
        cfg.seed = spec.seed;
        cfg.max_dim = spec.max_dim;
        bool ok = run_scenario(scn, cfg, local, axes);
        per_cell[i] = local.rows();
        sentinel.flag = ok ? "pass" : "fail";
        sentinel.value = ok ? 1.0 : 0.0;
        per_cell[i].push_back(sentinel);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  for (size_t i = 0; i < cells.size(); ++i) {
    if (!errors[i].empty()) throw std::runtime_error("sweep cell failed: " + errors[i]);
    for (auto& row : per_cell[i]) {
      row.seconds = 0.0;  // persisted sweep rows carry no wall time: bit-identical outputs
      store.insert(std::move(row));
    }
  }
  return store;
}

DecayFit fit_decay(const std::vector<std::pair<double, double>>& r_distance_rows,
                   double theorem_p, const std::vector<double>& beta_grid) {
  DecayFit fit;
  fit.theorem_p = theorem_p;
  std::vector<std::pair<double, double>> rows;
  for (const auto& [r, d] : r_distance_rows)
    if (d > 0.0) rows.push_back({r, std::log(d)});
  fit.n_points = static_cast<int>(rows.size());
  if (rows.size() < 4) {
    fit.note = "nothing to fit";
    return fit;
  }
  std::vector<double> grid = beta_grid;
  if (grid.empty())
    for (double b = 0.10; b <= 1.0 + 1e-9; b += 0.05) grid.push_back(b);
  double best = std::numeric_limits<double>::infinity();
  for (double beta : grid) {
    // log d = log A - R^beta  =>  log A = mean(log d + R^beta)
    double loga = 0.0;
    for (const auto& [r, logd] : rows) loga += logd + std::pow(r, beta);
    loga /= rows.size();
    double res = 0.0;
    for (const auto& [r, logd] : rows) {
      double e = logd - (loga - std::pow(r, beta));
      res += e * e;
    }
    if (res < best) {
      best = res;
      fit.beta = beta;
      fit.log_amplitude = loga;
      fit.residual = res;
    }
  }
  fit.valid = true;
  return fit;
}

DecayFit fit_decay_rows(const ResultStore& store, const std::string& scenario, double theorem_p) {
  std::vector<std::pair<double, double>> rows;
  for (const auto& row : store.rows()) {
    if (row.scenario != scenario || row.metric != "decay_distance") continue;
    auto it = row.axes.find("R");
    if (it == row.axes.end()) continue;
    rows.push_back({std::stod(it->second), row.value});
  }
  return fit_decay(rows, theorem_p);
}

}  // namespace stitchlab
