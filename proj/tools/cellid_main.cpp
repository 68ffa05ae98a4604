// cellid: simulate a single-particle lithium-ion cell, generate benchmark
// datasets, and identify the 11 grouped cell parameters with bounded least
// squares, particle swarm or a genetic algorithm.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cellid/config_io.hpp"
#include "cellid/harness.hpp"
#include "cellid/objective.hpp"
#include "cellid/optimizers.hpp"
#include "cellid/protocols.hpp"
#include "cellid/spm.hpp"

namespace {

using nlohmann::json;
using namespace cellid;

constexpr int exit_ok = 0;
constexpr int exit_config_error = 2;
constexpr int exit_runtime_error = 3;

std::filesystem::path resolve_config_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("CELLID_CONFIG_DIR"); env && *env) return env;
  return "config";
}

CurrentProfile profile_from_spec(const std::string& spec_text, const ConfigBundle& cfg,
                                 int dst_reps) {
  if (spec_text == "dst") {
    const int reps = dst_reps > 0 ? dst_reps : cfg.suite.dst_repetitions;
    return make_dst(cfg.cell, cfg.suite.dst, reps, cfg.suite.dt);
  }
  if (spec_text.rfind("cc:", 0) == 0) {
    double rate = 0;
    try {
      rate = std::stod(spec_text.substr(3));
    } catch (const std::exception&) {
      throw ValidationError("--profile: cannot parse C-rate in \"" + spec_text + "\"");
    }
    if (!(rate > 0.0)) throw ValidationError("--profile: c_rate must be positive");
    return make_cc_discharge(rate, cfg.cell, cfg.suite.window_margin / rate, cfg.suite.dt);
  }
  throw ValidationError("--profile: expected cc:<rate> or dst, got \"" + spec_text + "\"");
}

SuiteObjective make_suite_objective(DatasetSuite suite, const ConfigBundle& cfg) {
  SuiteObjective obj;
  obj.suite = std::move(suite);
  obj.fixed = cfg.cell.fixed;
  obj.ocp_n = cfg.cell.ocp_n;
  obj.ocp_p = cfg.cell.ocp_p;
  obj.penalty_voltage = cfg.optimizer.penalty_voltage;
  obj.pooling = cfg.optimizer.pooling;
  return obj;
}

json estimands_json(const EstimandVector& e) {
  json j;
  const Vector11d v = e.to_vector();
  for (int i = 0; i < EstimandVector::size; ++i) j[EstimandVector::names()[i]] = v[i];
  return j;
}

int cmd_simulate(const std::string& config_dir, const std::string& profile_spec,
                 const std::string& out_path, int dst_reps) {
  const ConfigBundle cfg = load_config_dir(resolve_config_dir(config_dir));
  const CurrentProfile profile = profile_from_spec(profile_spec, cfg, dst_reps);
  const Trace trace = simulate_profile(cfg.cell, profile);
  write_trace(trace, out_path);
  std::cout << "wrote " << out_path << " (" << trace.size() << " rows, termination "
            << to_string(trace.termination) << ")\n";
  return exit_ok;
}

int cmd_generate(const std::string& config_dir, const std::string& out_dir) {
  const ConfigBundle cfg = load_config_dir(resolve_config_dir(config_dir));
  const DatasetSuite suite = build_suite(cfg.cell, cfg.suite);
  write_suite(suite, out_dir);
  std::cout << "wrote " << (1 + suite.validation.size()) << " traces to " << out_dir
            << '\n';
  return exit_ok;
}

int cmd_fit(const std::string& config_dir, const std::string& method_name,
            const std::string& suite_dir, const std::string& out_path,
            std::uint64_t seed, int init_index) {
  const ConfigBundle cfg = load_config_dir(resolve_config_dir(config_dir));
  const Method method = method_from_string(method_name);
  if (init_index < 0) throw ValidationError("--init-index: must be >= 0");

  const SuiteObjective objective = make_suite_objective(read_suite(suite_dir), cfg);
  const ObjectiveSpec fitting = objective.fitting_spec();
  const Bounds bounds =
      make_bounds(cfg.cell.estimands, cfg.optimizer.lo_factor, cfg.optimizer.hi_factor);

  OptResult result;
  switch (method) {
    case Method::ls: {
      const auto inits = sample_uniform(bounds, init_index + 1, seed);
      result = fit_ls(inits.back(), bounds, fitting, cfg.optimizer.ls);
      result.seed = seed;
      break;
    }
    case Method::pso: {
      PsoConfig c = cfg.optimizer.pso;
      c.seed = seed;
      result = fit_pso(bounds, fitting, c);
      break;
    }
    case Method::ga: {
      GaConfig c = cfg.optimizer.ga;
      c.seed = seed;
      result = fit_ga(bounds, fitting, c);
      break;
    }
  }
  const SuiteRmse rmse = rmse_over_suite(result.best, objective);

  json out;
  out["method"] = to_string(method);
  out["seed"] = result.seed;
  if (method == Method::ls) out["init_index"] = init_index;
  out["best"] = estimands_json(result.best);
  out["best_cost"] = result.best_cost;
  out["evaluations"] = result.evaluations;
  out["iterations"] = result.iterations;
  out["wall_time_s"] = result.wall_time_s;
  out["converged_by"] = to_string(result.converged_by);
  out["fitting_rmse_mv"] = rmse.fitting_mv;
  out["validation_rmse_mv"] = rmse.validation_mv;

  std::ofstream f(out_path);
  if (!f) throw IoError("cannot open for writing: " + out_path);
  f << out.dump(2) << '\n';
  if (!f.good()) throw IoError("write failed: " + out_path);
  std::cout << "fit " << to_string(method) << ": fitting rmse " << rmse.fitting_mv
            << " mV, validation rmse " << rmse.validation_mv << " mV\n";
  return exit_ok;
}

int cmd_bench(const std::string& config_dir, const std::string& method_name,
              const std::string& suite_dir, const std::string& out_dir, int reps,
              std::uint64_t seed, int workers, double bin_mv) {
  const ConfigBundle cfg = load_config_dir(resolve_config_dir(config_dir));

  ExperimentPlan plan;
  plan.method = method_from_string(method_name);
  plan.repetitions = reps;
  plan.base_seed = seed;
  plan.workers = workers;
  plan.hist_bin_mv = bin_mv;
  plan.objective = make_suite_objective(read_suite(suite_dir), cfg);
  plan.bounds =
      make_bounds(cfg.cell.estimands, cfg.optimizer.lo_factor, cfg.optimizer.hi_factor);
  plan.ls = cfg.optimizer.ls;
  plan.pso = cfg.optimizer.pso;
  plan.ga = cfg.optimizer.ga;
  plan.validate();

  const BenchReport report = run_experiment(plan);
  emit_report(report, out_dir);
  std::cout << "bench " << to_string(plan.method) << ": " << report.repetitions
            << " runs, fitting rmse mean " << report.fitting_rmse_mv.mean
            << " mV, validation rmse mean " << report.validation_rmse_mv.mean << " mV\n";
  return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"single-particle battery model parameter identification benchmark"};
  app.require_subcommand(1);

  std::string config_dir;
  app.add_option("--config", config_dir,
                 "config directory (default: $CELLID_CONFIG_DIR or ./config)");

  auto* simulate = app.add_subcommand("simulate", "simulate one current profile");
  std::string profile_spec, sim_out;
  int dst_reps = 0;
  simulate->add_option("--profile", profile_spec, "cc:<rate> or dst")->required();
  simulate->add_option("--out", sim_out, "output trace CSV path")->required();
  simulate->add_option("--dst-reps", dst_reps, "override stress-test repetitions");

  auto* generate = app.add_subcommand("generate", "generate the fitting/validation suite");
  std::string gen_out;
  generate->add_option("--out", gen_out, "output suite directory")->required();

  auto* fit = app.add_subcommand("fit", "run one parameter identification");
  std::string fit_method, fit_suite, fit_out = "fit_result.json";
  std::uint64_t fit_seed = 0;
  int init_index = 0;
  fit->add_option("--method", fit_method, "ls, pso or ga")->required();
  fit->add_option("--suite", fit_suite, "suite directory from `generate`")->required();
  fit->add_option("--out", fit_out, "output result JSON path");
  fit->add_option("--seed", fit_seed, "random seed");
  fit->add_option("--init-index", init_index,
                  "ls only: index into the uniformly sampled starts (default 0)");

  auto* bench = app.add_subcommand("bench", "repeated runs with aggregate statistics");
  std::string bench_method, bench_suite, bench_out;
  int bench_reps = 0, workers = 1;
  std::uint64_t bench_seed = 0;
  double bin_mv = 0;
  bench->add_option("--method", bench_method, "ls, pso or ga")->required();
  bench->add_option("--suite", bench_suite, "suite directory from `generate`")->required();
  bench->add_option("--out", bench_out, "output report directory")->required();
  bench->add_option("--reps", bench_reps, "repetitions (default: ls 100, pso/ga 20)");
  bench->add_option("--seed", bench_seed, "base seed; run k uses seed+k");
  bench->add_option("--workers", workers, "parallel runs");
  bench->add_option("--bin-mv", bin_mv, "histogram bin width (default: ls 10, pso/ga 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_config_error;
  }

  try {
    if (simulate->parsed())
      return cmd_simulate(config_dir, profile_spec, sim_out, dst_reps);
    if (generate->parsed()) return cmd_generate(config_dir, gen_out);
    if (fit->parsed())
      return cmd_fit(config_dir, fit_method, fit_suite, fit_out, fit_seed, init_index);
    if (bench->parsed())
      return cmd_bench(config_dir, bench_method, bench_suite, bench_out, bench_reps,
                       bench_seed, workers, bin_mv);
  } catch (const ValidationError& ex) {
    std::cerr << "config/validation error: " << ex.what() << '\n';
    return exit_config_error;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return exit_runtime_error;
  }
  return exit_config_error;
}
