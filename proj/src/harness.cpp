#include "cellid/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <thread>

#include <json.hpp>

namespace cellid {

using nlohmann::json;

const char* to_string(Method m) {
  switch (m) {
    case Method::ls: return "ls";
    case Method::pso: return "pso";
    case Method::ga: return "ga";
  }
  return "pso";
}

Method method_from_string(const std::string& s) {
  if (s == "ls") return Method::ls;
  if (s == "pso") return Method::pso;
  if (s == "ga") return Method::ga;
  throw ValidationError("unknown method: " + s + " (expected ls, pso or ga)");
}

int ExperimentPlan::effective_repetitions() const {
  if (repetitions > 0) return repetitions;
  return method == Method::ls ? 100 : 20;
}

double ExperimentPlan::effective_hist_bin_mv() const {
  if (hist_bin_mv > 0.0) return hist_bin_mv;
  return method == Method::ls ? 10.0 : 1.0;
}

void ExperimentPlan::validate() const {
  if (repetitions < 0) throw ValidationError("plan.repetitions: must be >= 1");
  if (workers < 1) throw ValidationError("plan.workers: must be >= 1");
  if (hist_bin_mv < 0.0) throw ValidationError("plan.hist_bin_mv: must be > 0");
  bounds.validate();
  objective.fitting_spec().validate();
  if (objective.suite.validation.empty())
    throw ValidationError("plan: suite has no validation traces");
  ls.validate();
  pso.validate();
  ga.validate();
}

Aggregate aggregate(const std::vector<double>& values) {
  Aggregate a;
  if (values.empty()) return a;
  const auto n = static_cast<double>(values.size());
  a.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  a.min = *std::min_element(values.begin(), values.end());
  a.max = *std::max_element(values.begin(), values.end());
  if (values.size() > 1) {
    double ss = 0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.sd = std::sqrt(ss / (n - 1.0));
  }
  return a;
}

long Histogram::total_count() const {
  long total = 0;
  for (const auto& b : bins) total += b.count;
  return total;
}

Histogram make_histogram(const std::vector<double>& values_mv, double bin_width_mv) {
  if (!(bin_width_mv > 0.0)) throw ValidationError("histogram: bin width must be > 0");
  Histogram h;
  h.bin_width_mv = bin_width_mv;
  if (values_mv.empty()) return h;

  auto bin_of = [&](double v) {
    return static_cast<long>(std::floor(v / bin_width_mv));
  };
  long lo = bin_of(values_mv.front());
  long hi = lo;
  for (double v : values_mv) {
    lo = std::min(lo, bin_of(v));
    hi = std::max(hi, bin_of(v));
  }
  h.bins.resize(static_cast<std::size_t>(hi - lo + 1));
  for (std::size_t i = 0; i < h.bins.size(); ++i) {
    h.bins[i].lower_edge_mv = static_cast<double>(lo + static_cast<long>(i)) * bin_width_mv;
    h.bins[i].count = 0;
  }
  for (double v : values_mv) ++h.bins[static_cast<std::size_t>(bin_of(v) - lo)].count;
  return h;
}

BenchReport summarize(Method method, std::vector<RunRecord> runs, double hist_bin_mv) {
  BenchReport report;
  report.method = method;
  report.repetitions = static_cast<int>(runs.size());
  std::sort(runs.begin(), runs.end(),
            [](const RunRecord& a, const RunRecord& b) { return a.run < b.run; });
  report.runs = std::move(runs);

  std::vector<double> wall, fit, val;
  for (const auto& r : report.runs) {
    wall.push_back(r.wall_time_s);
    fit.push_back(r.fitting_rmse_mv);
    val.push_back(r.validation_rmse_mv);
  }
  report.runtime_s = aggregate(wall);
  report.fitting_rmse_mv = aggregate(fit);
  report.validation_rmse_mv = aggregate(val);
  report.hist_fitting = make_histogram(fit, hist_bin_mv);
  report.hist_validation = make_histogram(val, hist_bin_mv);
  return report;
}

BenchReport run_experiment(const ExperimentPlan& plan) {
  plan.validate();
  const int reps = plan.effective_repetitions();
  const ObjectiveSpec fitting = plan.objective.fitting_spec();

  // LS consumes pre-sampled starts; one per repetition, in sample order.
  std::vector<EstimandVector> ls_inits;
  if (plan.method == Method::ls)
    ls_inits = sample_uniform(plan.bounds, reps, plan.base_seed);

  std::vector<RunRecord> records(static_cast<std::size_t>(reps));

  auto run_one = [&](int k) {
    const std::uint64_t seed = plan.base_seed + static_cast<std::uint64_t>(k);
    OptResult result;
    switch (plan.method) {
      case Method::ls:
        result = fit_ls(ls_inits[static_cast<std::size_t>(k)], plan.bounds, fitting, plan.ls);
        result.seed = seed;
        break;
      case Method::pso: {
        PsoConfig cfg = plan.pso;
        cfg.seed = seed;
        result = fit_pso(plan.bounds, fitting, cfg);
        break;
      }
      case Method::ga: {
        GaConfig cfg = plan.ga;
        cfg.seed = seed;
        result = fit_ga(plan.bounds, fitting, cfg);
        break;
      }
    }
    const SuiteRmse rmse = rmse_over_suite(result.best, plan.objective);
    RunRecord rec;
    rec.run = k;
    rec.seed = seed;
    rec.wall_time_s = result.wall_time_s;
    rec.fitting_rmse_mv = rmse.fitting_mv;
    rec.validation_rmse_mv = rmse.validation_mv;
    rec.best = result.best;
    records[static_cast<std::size_t>(k)] = rec;
  };

  auto run_guarded = [&](int k) {
    try {
      run_one(k);
    } catch (const std::exception& ex) {
      // A failed run is recorded at the penalty ceiling rather than aborting
      // the batch.
      std::cerr << "run " << k << " failed: " << ex.what() << '\n';
      RunRecord rec;
      rec.run = k;
      rec.seed = plan.base_seed + static_cast<std::uint64_t>(k);
      rec.fitting_rmse_mv = rec.validation_rmse_mv = 1000.0 * plan.objective.penalty_voltage;
      rec.best = EstimandVector::from_vector(
          ((plan.bounds.lower + plan.bounds.upper) / 2.0).eval());
      records[static_cast<std::size_t>(k)] = rec;
    }
  };

  if (plan.workers <= 1) {
    for (int k = 0; k < reps; ++k) run_guarded(k);
  } else {
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int k = next.fetch_add(1); k < reps; k = next.fetch_add(1)) run_guarded(k);
    };
    std::vector<std::thread> pool;
    const int n_threads = std::min(plan.workers, reps);
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  return summarize(plan.method, std::move(records), plan.effective_hist_bin_mv());
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_histogram_csv(const Histogram& h, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "lower_edge_mv,count\n";
  for (const auto& b : h.bins) out << fmt(b.lower_edge_mv) << ',' << b.count << '\n';
  if (!out.good()) throw IoError("write failed: " + path.string());
}

json aggregate_json(const Aggregate& a, bool with_extrema) {
  json j{{"mean", a.mean}, {"sd", a.sd}};
  if (with_extrema) {
    j["min"] = a.min;
    j["max"] = a.max;
  }
  return j;
}

} // namespace

void emit_report(const BenchReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());

  const auto runs_path = dir / "runs.csv";
  std::ofstream runs(runs_path);
  if (!runs) throw IoError("cannot open for writing: " + runs_path.string());
  runs << "run,seed,wall_time_s,fitting_rmse_mv,validation_rmse_mv";
  for (const char* name : EstimandVector::names()) runs << ',' << name;
  runs << '\n';
  for (const auto& r : report.runs) {
    runs << r.run << ',' << r.seed << ',' << fmt(r.wall_time_s) << ','
         << fmt(r.fitting_rmse_mv) << ',' << fmt(r.validation_rmse_mv);
    const Vector11d best = r.best.to_vector();
    for (int i = 0; i < EstimandVector::size; ++i) runs << ',' << fmt(best[i]);
    runs << '\n';
  }
  if (!runs.good()) throw IoError("write failed: " + runs_path.string());
  runs.close();

  json summary;
  summary["method"] = to_string(report.method);
  summary["repetitions"] = report.repetitions;
  summary["runtime_s"] = aggregate_json(report.runtime_s, true);
  summary["fitting_rmse_mv"] = aggregate_json(report.fitting_rmse_mv, false);
  summary["validation_rmse_mv"] = aggregate_json(report.validation_rmse_mv, false);
  const auto summary_path = dir / "summary.json";
  std::ofstream sf(summary_path);
  if (!sf) throw IoError("cannot open for writing: " + summary_path.string());
  sf << summary.dump(2) << '\n';
  if (!sf.good()) throw IoError("write failed: " + summary_path.string());

  write_histogram_csv(report.hist_fitting, dir / "hist_fitting.csv");
  write_histogram_csv(report.hist_validation, dir / "hist_validation.csv");
}

} // namespace cellid
