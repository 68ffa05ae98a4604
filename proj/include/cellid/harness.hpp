#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cellid/objective.hpp"
#include "cellid/optimizers.hpp"

namespace cellid {

enum class Method { ls, pso, ga };

const char* to_string(Method m);
Method method_from_string(const std::string& s);

/// A batch of repeated optimizer runs. Run k uses seed base_seed + k; LS run k
/// starts from the k-th vector pre-sampled uniformly with base_seed.
struct ExperimentPlan {
  Method method = Method::pso;
  int repetitions = 0;     // 0 picks the method default (ls: 100, pso/ga: 20)
  std::uint64_t base_seed = 0;
  int workers = 1;
  double hist_bin_mv = 0;  // 0 picks the method default (ls: 10, pso/ga: 1)
  SuiteObjective objective;
  Bounds bounds;
  LsConfig ls;
  PsoConfig pso;
  GaConfig ga;

  int effective_repetitions() const;
  double effective_hist_bin_mv() const;
  void validate() const;
};

struct RunRecord {
  int run = 0;
  std::uint64_t seed = 0;
  double wall_time_s = 0;
  double fitting_rmse_mv = 0;
  double validation_rmse_mv = 0;
  EstimandVector best;
};

struct Aggregate {
  double mean = 0;
  double sd = 0; // sample standard deviation (n-1)
  double min = 0;
  double max = 0;
};

Aggregate aggregate(const std::vector<double>& values);

struct Histogram {
  struct Bin {
    double lower_edge_mv = 0;
    long count = 0;
  };
  double bin_width_mv = 1.0;
  std::vector<Bin> bins;

  long total_count() const;
};

/// Left-closed, right-open bins at integer multiples of the width, contiguous
/// from the smallest to the largest occupied bin. Empty input: zero bins.
Histogram make_histogram(const std::vector<double>& values_mv, double bin_width_mv);

struct BenchReport {
  Method method = Method::pso;
  int repetitions = 0;
  std::vector<RunRecord> runs;
  Aggregate runtime_s;
  Aggregate fitting_rmse_mv;
  Aggregate validation_rmse_mv;
  Histogram hist_fitting;
  Histogram hist_validation;
};

/// Aggregates and histograms recomputed from per-run records.
BenchReport summarize(Method method, std::vector<RunRecord> runs, double hist_bin_mv);

BenchReport run_experiment(const ExperimentPlan& plan);

/// Writes runs.csv, summary.json, hist_fitting.csv, hist_validation.csv.
void emit_report(const BenchReport& report, const std::filesystem::path& dir);

} // namespace cellid
