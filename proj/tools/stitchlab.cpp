#include <CLI11.hpp>

#include "stitchlab/sweep.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>

using namespace stitchlab;

namespace {

int default_jobs() {
  if (const char* env = std::getenv("STITCHLAB_JOBS")) {
    int j = std::atoi(env);
    if (j > 0) return j;
  }
  return 1;
}

void emit(const ResultStore& store, const std::string& out_dir, const std::string& format) {
  std::filesystem::create_directories(out_dir);
  if (format == "csv" || format == "both") store.write_csv(out_dir + "/results.csv");
  if (format == "jsonl" || format == "both") store.write_jsonl(out_dir + "/results.jsonl");
  store.write_decay_dat(out_dir + "/decay.dat");
}

std::map<std::string, double> parse_overrides(const std::vector<std::string>& sets) {
  std::map<std::string, double> out;
  for (const auto& s : sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value: " + s);
    out[s.substr(0, eq)] = std::stod(s.substr(eq + 1));
  }
  return out;
}

int run_selftest(std::uint64_t seed);

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stitchlab: local-stability machinery for frustration-free spin systems"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, scenario_name = "bell-impurity";
  std::string out_dir = "out", format = "both";
  std::uint64_t seed = 1;
  int jobs = default_jobs();
  std::size_t max_dim = std::size_t{1} << 14;
  std::vector<std::string> sets, axis_specs;
  int iso_center = -1, iso_r = 1;
  std::string report_in;

  app.add_option("--seed", seed, "root random seed");
  app.add_option("--jobs", jobs, "worker count (env STITCHLAB_JOBS)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--max-dim", max_dim, "Hilbert space dimension cap");
  app.add_option("--format", format, "csv|jsonl|both")
      ->check(CLI::IsMember({"csv", "jsonl", "both"}));

  auto add_target = [&](CLI::App* cmd) {
    cmd->add_option("scenario", scenario_name, "builtin scenario name or config path");
    cmd->add_option("--config", config_path, "scenario config file");
    cmd->add_option("--set", sets, "override scenario parameter key=value");
  };

  auto* cmd_check = app.add_subcommand("check", "run the assumption checkers");
  add_target(cmd_check);
  auto* cmd_decay = app.add_subcommand("decay", "measure the perturbed-ground-state decay profile");
  add_target(cmd_decay);
  auto* cmd_iso = app.add_subcommand("iso", "isoperimetry series on the perturbed ground state");
  add_target(cmd_iso);
  cmd_iso->add_option("--center", iso_center, "ball center (default: scenario plan)");
  cmd_iso->add_option("--r", iso_r, "shell width r");
  auto* cmd_lr = app.add_subcommand("lr", "Lieb-Robinson commutator measurement");
  add_target(cmd_lr);
  auto* cmd_sweep = app.add_subcommand("sweep", "run a deterministic scenario sweep");
  add_target(cmd_sweep);
  cmd_sweep->add_option("--axis", axis_specs, "axis spec name=v1,v2,... (repeatable)");
  auto* cmd_report = app.add_subcommand("report", "re-emit reports from a result file");
  cmd_report->add_option("--in", report_in, "input results.jsonl")->required();
  auto* cmd_selftest = app.add_subcommand("selftest", "run the built-in invariant suite");

  CLI11_PARSE(app, argc, argv);

  try {
    const std::string target = config_path.empty() ? scenario_name : config_path;
    if (cmd_check->parsed() || cmd_decay->parsed()) {
      Scenario scn = resolve_scenario(target, parse_overrides(sets), max_dim);
      if (cmd_check->parsed()) scn.plan.decay_centers.clear();
      if (cmd_decay->parsed()) scn.plan.check_assumptions = false;
      ResultStore store;
      RunConfig cfg{seed, max_dim};
      bool ok = run_scenario(scn, cfg, store);
      emit(store, out_dir, format);
      std::cout << store.summary();
      return ok ? 0 : 1;
    }
    if (cmd_iso->parsed()) {
      Scenario scn = resolve_scenario(target, parse_overrides(sets), max_dim);
      if (!scn.perturbation) throw ConfigError("scenario has no perturbation for iso");
      HamiltonianModel model = scn.model();
      auto pg = scn.perturbed_ground();
      int center = iso_center >= 0 ? iso_center : scn.plan.iso_center;
      if (center < 0) center = scn.graph->size() / 2;
      IsoperimetrySeries series = isoperimetry_series(model, *scn.perturbation, pg.states.front(),
                                                      center, iso_r, scn.exponents);
      std::cout << "i  R_i  E_i  delta_i\n";
      for (const auto& row : series.rows)
        std::cout << row.i << "  " << row.big_r << "  " << row.e << "  " << row.delta << "\n";
      std::cout << "gronwall a = " << series.gronwall_a
                << ", implied E1 bound = " << series.implied_e1_bound
                << ", exact E1 = " << series.exact_e1 << "\n";
      return series.implied_e1_bound >= series.exact_e1 - 1e-12 ? 0 : 1;
    }
    if (cmd_lr->parsed()) {
      const bool explicit_target = cmd_lr->count("scenario") > 0 || !config_path.empty();
      Scenario scn = resolve_scenario(explicit_target ? target : "lr-chain",
                                      parse_overrides(sets), max_dim);
      SiteSpace space = scn.space();
      const int n = scn.graph->size();
      TimeDependentInteraction z;
      z.add_layer(2.0, scn.hamiltonian);
      DecayFunction f = DecayFunction::f_tabulated([&] {
        std::vector<double> v;
        for (int r = 0; r <= scn.graph->diameter() + 2; ++r)
          v.push_back(std::exp(-r) / ((1.0 + r) * (1.0 + r)));
        return v;
      }());
      std::vector<std::pair<Region, Region>> pairs = {
          {Region::single(0, n), Region::single(n - 1, n)},
          {Region::single(0, n), Region::single(n / 2, n)},
          {Region({0, 1}, n), Region({n - 2, n - 1}, n)},
      };
      LRMeasurement lr = measure_lr(z, pairs, {0.5, 1.0, 2.0}, f, space, {2, seed});
      bool ok = true;
      std::cout << "A  B  t  measured  bound\n";
      for (const auto& row : lr.rows) {
        std::cout << row.x_a.to_string() << "  " << row.x_b.to_string() << "  " << row.t << "  "
                  << row.measured << "  " << row.bound << "\n";
        ok = ok && row.measured <= row.bound + 1e-9;
      }
      return ok ? 0 : 1;
    }
    if (cmd_sweep->parsed()) {
      SweepSpec spec;
      spec.scenario = target;
      spec.jobs = jobs;
      spec.seed = seed;
      spec.max_dim = max_dim;
      for (const auto& a : axis_specs) {
        auto eq = a.find('=');
        if (eq == std::string::npos) throw ConfigError("--axis expects name=v1,v2,...: " + a);
        std::vector<double> values;
        std::string list = a.substr(eq + 1);
        size_t pos = 0;
        while (pos != std::string::npos) {
          size_t comma = list.find(',', pos);
          values.push_back(std::stod(list.substr(pos, comma - pos)));
          pos = comma == std::string::npos ? comma : comma + 1;
        }
        spec.axes[a.substr(0, eq)] = values;
      }
      ResultStore existing;
      const ResultStore* prev = nullptr;
      std::string jsonl = out_dir + "/results.jsonl";
      if (std::filesystem::exists(jsonl)) {
        existing = ResultStore::load_jsonl(jsonl);
        prev = &existing;
      }
      ResultStore store = run_sweep(spec, prev);
      emit(store, out_dir, format);
      std::cout << store.summary();
      for (const auto& row : store.rows())
        if (row.flag == "fail") return 1;
      return 0;
    }
    if (cmd_report->parsed()) {
      ResultStore store = ResultStore::load_jsonl(report_in);
      emit(store, out_dir, format);
      std::cout << store.summary();
      return 0;
    }
    if (cmd_selftest->parsed()) return run_selftest(seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ResourceCapError& e) {
    std::cerr << "resource cap: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

namespace {

int run_selftest(std::uint64_t seed) {
  int failures = 0;
  auto check = [&](const char* name, bool ok) {
    std::cout << (ok ? "[ ok ] " : "[FAIL] ") << name << "\n";
    if (!ok) ++failures;
  };

  // superadditive envelope properties
  {
    auto rng = derived_rng(seed, "selftest-envelope");
    std::uniform_real_distribution<double> unif(0.05, 1.0);
    bool ok = true;
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> vals(10);
      double cur = unif(rng);
      for (auto& v : vals) {
        v = cur;
        cur *= unif(rng);
      }
      DecayFunction f = DecayFunction::m_tabulated(vals);
      DecayFunction s = superadditive_envelope(f);
      DecayFunction ss = superadditive_envelope(s);
      for (int r = 1; r <= s.r_max(); ++r) {
        ok = ok && std::abs(s.at(r) - ss.at(r)) <= 1e-12 * std::max(1.0, s.at(r));
        ok = ok && s.at(r) >= f.at(r) - 1e-15;
      }
      for (int r1 = 1; r1 <= s.r_max(); ++r1)
        for (int r2 = 1; r1 + r2 <= s.r_max(); ++r2)
          ok = ok && s.at(r1) * s.at(r2) <= s.at(r1 + r2) * (1.0 + 1e-12);
    }
    check("superadditive envelope: idempotent, dominating, log-superadditive", ok);
  }

  // stitching contract on the bundled scenarios
  for (const char* name : {"bell-impurity", "ising-ltqo-fail", "circuit-chain"}) {
    try {
      std::map<std::string, double> ov;
      if (std::string(name) == "bell-impurity") ov["L"] = 8;
      if (std::string(name) == "circuit-chain") ov["L"] = 6;
      Scenario scn = builtin_scenario(name, ov);
      HamiltonianModel model = scn.model();
      Region z = scn.graph->ball(scn.graph->size() / 2, 1);
      StitchingMap map = build_stitching_map(model, scn.certificate, z);
      bool ok = map.mu_fixed_point_distance() <= 1e-9 && map.trace_residual(5, seed) <= 1e-10 &&
                map.compressed_choi_min_eig(8, seed) >= -1e-10;
      check((std::string("stitching contract: ") + name).c_str(), ok);
    } catch (const std::exception& e) {
      std::cout << "[FAIL] stitching contract: " << name << " (" << e.what() << ")\n";
      ++failures;
    }
  }

  // norm comparison round trip on a short chain
  {
    auto graph = std::make_shared<LatticeGraph>(LatticeGraph::chain(8));
    SiteSpace space = SiteSpace::qubits(graph);
    DimensionFit fit = fit_dimension(*graph, {1.0});
    DecayFunction m = DecayFunction::exponential(1.0, graph->diameter() + 3);
    DecayFunction f = f_from_m(m, fit);
    auto rng = derived_rng(seed, "selftest-norms");
    bool ok = true;
    for (int trial = 0; trial < 5; ++trial) {
      Interaction q;
      std::uniform_int_distribution<int> site(0, 6);
      for (int t = 0; t < 5; ++t) {
        int a = site(rng);
        q.add_term(Region({a, a + 1}, 8), random_hermitian(4, rng));
        q.add_term(Region::single(site(rng), 8), random_hermitian(2, rng));
      }
      double nm = interaction_norm_m(q, m, *graph);
      double nf = interaction_norm_f(q, f, *graph);
      ok = ok && nf <= nm * (1.0 + 1e-12);
      DecayFunction m2 = m_from_f(f, fit);
      ok = ok && interaction_norm_m(q, m2, *graph) <= nf * (1.0 + 1e-12);
    }
    check("norm comparison round trips", ok);
  }

  std::cout << (failures ? "selftest FAILED\n" : "selftest OK\n");
  return failures ? 1 : 0;
}

}  // namespace
