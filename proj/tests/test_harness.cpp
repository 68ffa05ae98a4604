#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "cellid/harness.hpp"
#include "cellid/protocols.hpp"
#include "cellid/rng.hpp"
#include "cellid/spm.hpp"
#include "support/fixtures.hpp"

using namespace cellid;
using cellid::testing::reference_cell;

namespace {

// A miniature but complete plan: short traces and small optimizer budgets.
ExperimentPlan mini_plan(Method method) {
  const CellParameters& p = reference_cell();
  ExperimentPlan plan;
  plan.method = method;
  plan.repetitions = 3;
  plan.base_seed = 7;
  plan.objective.suite.fitting = simulate_profile(p, make_cc_discharge(0.5, p, 0.1));
  plan.objective.suite.validation.push_back(
      simulate_profile(p, make_cc_discharge(0.2, p, 0.1)));
  plan.objective.suite.validation.push_back(
      simulate_profile(p, make_dst(p, default_dst_template(), 1)));
  plan.objective.fixed = p.fixed;
  plan.objective.ocp_n = p.ocp_n;
  plan.objective.ocp_p = p.ocp_p;
  plan.bounds = make_bounds(p.estimands, 0.5, 1.5);
  plan.ls.max_iterations = 12;
  plan.pso.swarm_size = 8;
  plan.pso.max_iterations = 6;
  plan.ga.population = 8;
  plan.ga.generations = 6;
  plan.ga.parents_mating = 3;
  return plan;
}

} // namespace

TEST_CASE("histogram bins follow the floor rule") {
  const Histogram h = make_histogram({5.0, 15.0, 25.0}, 10.0);
  REQUIRE(h.bins.size() == 3);
  CHECK(h.bins[0].lower_edge_mv == 0.0);
  CHECK(h.bins[0].count == 1);
  CHECK(h.bins[1].lower_edge_mv == 10.0);
  CHECK(h.bins[1].count == 1);
  CHECK(h.bins[2].lower_edge_mv == 20.0);
  CHECK(h.bins[2].count == 1);
}

TEST_CASE("a value on a bin edge lands in the upper bin") {
  const Histogram h = make_histogram({10.0}, 10.0);
  REQUIRE(h.bins.size() == 1);
  CHECK(h.bins[0].lower_edge_mv == 10.0);
  CHECK(h.bins[0].count == 1);
}

TEST_CASE("histogram conserves counts against a naive counter") {
  Rng rng(31);
  std::vector<double> values;
  for (int i = 0; i < 1000; ++i) values.push_back(rng.uniform(0.0, 250.0));
  const Histogram h = make_histogram(values, 1.0);
  CHECK(h.total_count() == 1000);

  std::map<long, long> naive;
  for (double v : values) ++naive[static_cast<long>(std::floor(v / 1.0))];
  for (const auto& bin : h.bins) {
    const auto it = naive.find(static_cast<long>(std::floor(bin.lower_edge_mv)));
    const long expect = it == naive.end() ? 0 : it->second;
    CHECK(bin.count == expect);
  }

  // Permutation invariance.
  std::vector<double> shuffled(values.rbegin(), values.rend());
  const Histogram h2 = make_histogram(shuffled, 1.0);
  REQUIRE(h2.bins.size() == h.bins.size());
  for (std::size_t i = 0; i < h.bins.size(); ++i) CHECK(h2.bins[i].count == h.bins[i].count);
}

TEST_CASE("empty histogram input produces zero bins") {
  const Histogram h = make_histogram({}, 10.0);
  CHECK(h.bins.empty());
  CHECK(h.total_count() == 0);
  CHECK_THROWS_AS(make_histogram({1.0}, 0.0), ValidationError);
}

TEST_CASE("aggregate matches hand-computed statistics for three runs") {
  const Aggregate a = aggregate({2.0, 5.0, 11.0});
  CHECK(a.mean == doctest::Approx(6.0));
  CHECK(a.min == 2.0);
  CHECK(a.max == 11.0);
  // Sample variance: ((4)^2? ) -> ((2-6)^2 + (5-6)^2 + (11-6)^2) / 2 = 21.
  CHECK(a.sd == doctest::Approx(std::sqrt(21.0)));

  const Aggregate single = aggregate({3.5});
  CHECK(single.sd == 0.0);
  CHECK(single.mean == 3.5);
}

TEST_CASE("a single-run experiment produces one finite record") {
  ExperimentPlan plan = mini_plan(Method::pso);
  plan.repetitions = 1;
  const BenchReport report = run_experiment(plan);
  REQUIRE(report.runs.size() == 1);
  CHECK(std::isfinite(report.runs[0].fitting_rmse_mv));
  CHECK(std::isfinite(report.runs[0].validation_rmse_mv));
  CHECK(report.runs[0].seed == plan.base_seed);
  CHECK(report.fitting_rmse_mv.mean == report.runs[0].fitting_rmse_mv);
  CHECK(report.hist_fitting.total_count() == 1);
}

TEST_CASE("aggregates are recomputable from per-run records") {
  const BenchReport report = run_experiment(mini_plan(Method::ga));
  REQUIRE(report.runs.size() == 3);
  double mean = 0;
  for (const auto& r : report.runs) mean += r.fitting_rmse_mv;
  mean /= 3.0;
  CHECK(report.fitting_rmse_mv.mean == doctest::Approx(mean).epsilon(1e-12));
  CHECK(report.hist_fitting.total_count() == 3);
  CHECK(report.hist_validation.total_count() == 3);
}

TEST_CASE("experiments are reproducible and worker-count independent") {
  ExperimentPlan plan = mini_plan(Method::pso);
  const BenchReport serial = run_experiment(plan);
  plan.workers = 2;
  const BenchReport parallel = run_experiment(plan);
  REQUIRE(serial.runs.size() == parallel.runs.size());
  for (std::size_t i = 0; i < serial.runs.size(); ++i) {
    CHECK(serial.runs[i].fitting_rmse_mv == parallel.runs[i].fitting_rmse_mv);
    CHECK(serial.runs[i].validation_rmse_mv == parallel.runs[i].validation_rmse_mv);
    CHECK(serial.runs[i].best.to_vector() == parallel.runs[i].best.to_vector());
    CHECK(serial.runs[i].seed == parallel.runs[i].seed);
  }
}

TEST_CASE("ls runs consume the pre-sampled initial vectors in order") {
  ExperimentPlan plan = mini_plan(Method::ls);
  plan.ls.max_iterations = 1;
  plan.ls.gradient_tolerance = 1e30; // stop immediately: best == init
  const BenchReport report = run_experiment(plan);
  const auto inits = sample_uniform(plan.bounds, 3, plan.base_seed);
  REQUIRE(report.runs.size() == 3);
  for (int k = 0; k < 3; ++k)
    CHECK(report.runs[static_cast<std::size_t>(k)].best.to_vector() ==
          inits[static_cast<std::size_t>(k)].to_vector());
}

TEST_CASE("default repetitions and histogram bins follow the method") {
  ExperimentPlan plan;
  plan.method = Method::ls;
  CHECK(plan.effective_repetitions() == 100);
  CHECK(plan.effective_hist_bin_mv() == 10.0);
  plan.method = Method::pso;
  CHECK(plan.effective_repetitions() == 20);
  CHECK(plan.effective_hist_bin_mv() == 1.0);
  plan.repetitions = 5;
  plan.hist_bin_mv = 2.5;
  CHECK(plan.effective_repetitions() == 5);
  CHECK(plan.effective_hist_bin_mv() == 2.5);
}

TEST_CASE("a failing run is recorded at the penalty ceiling without aborting") {
  ExperimentPlan plan = mini_plan(Method::pso);
  plan.repetitions = 2;
  Trace broken;
  broken.profile_name = "broken";
  plan.objective.suite.validation.push_back(broken); // empty: rmse_over_suite throws
  const BenchReport report = run_experiment(plan);
  REQUIRE(report.runs.size() == 2);
  for (const auto& r : report.runs)
    CHECK(r.fitting_rmse_mv == 1000.0 * plan.objective.penalty_voltage);
}

TEST_CASE("emit_report writes parseable, consistent files") {
  const BenchReport report = run_experiment(mini_plan(Method::pso));
  const auto dir = std::filesystem::temp_directory_path() / "cellid_harness_report";
  std::filesystem::remove_all(dir);
  emit_report(report, dir);

  // summary.json mirrors the in-memory aggregates.
  nlohmann::json summary;
  std::ifstream(dir / "summary.json") >> summary;
  CHECK(summary.at("method").get<std::string>() == "pso");
  CHECK(summary.at("repetitions").get<int>() == 3);
  CHECK(summary.at("fitting_rmse_mv").at("mean").get<double>() ==
        report.fitting_rmse_mv.mean);
  CHECK(summary.at("fitting_rmse_mv").at("sd").get<double>() == report.fitting_rmse_mv.sd);
  CHECK(summary.at("validation_rmse_mv").at("mean").get<double>() ==
        report.validation_rmse_mv.mean);
  CHECK(summary.at("runtime_s").contains("min"));
  CHECK(summary.at("runtime_s").contains("max"));

  // runs.csv: header plus one row per run; aggregates re-derivable.
  std::ifstream runs(dir / "runs.csv");
  std::string header;
  std::getline(runs, header);
  CHECK(header ==
        "run,seed,wall_time_s,fitting_rmse_mv,validation_rmse_mv,c_n0,c_p0,r_eff_n,"
        "r_eff_p,eps_n,eps_p,d_n,d_p,r0,c_max_n,c_max_p");
  std::vector<double> fitting;
  std::string line;
  while (std::getline(runs, line)) {
    std::stringstream ss(line);
    std::string field;
    for (int i = 0; i < 4; ++i) std::getline(ss, field, ',');
    fitting.push_back(std::stod(field));
  }
  REQUIRE(fitting.size() == 3);
  const Aggregate rederived = aggregate(fitting);
  CHECK(rederived.mean == doctest::Approx(report.fitting_rmse_mv.mean).epsilon(1e-12));
  CHECK(rederived.sd == doctest::Approx(report.fitting_rmse_mv.sd).epsilon(1e-12));

  // Histogram CSVs conserve the run count.
  std::ifstream hist(dir / "hist_fitting.csv");
  std::getline(hist, header);
  CHECK(header == "lower_edge_mv,count");
  long total = 0;
  while (std::getline(hist, line)) {
    const auto comma = line.find(',');
    total += std::stol(line.substr(comma + 1));
  }
  CHECK(total == 3);
}
