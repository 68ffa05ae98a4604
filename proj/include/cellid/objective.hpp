#pragma once

#include <Eigen/Core>

#include "cellid/protocols.hpp"
#include "cellid/trace.hpp"
#include "cellid/types.hpp"

namespace cellid {

/// Everything a trial evaluation needs besides the trial itself. The dataset
/// current column is replayed through the model end to end (trial scoring
/// ignores the voltage cutoffs; those only shape generated data). Failures
/// never surface as exceptions: from the first invalid sample onward the
/// residuals are penalty_voltage, so population optimizers always receive a
/// finite score and degenerate trials cannot shed samples.
struct ObjectiveSpec {
  Trace dataset;
  FixedCellConfig fixed;
  OcpCurve ocp_n;
  OcpCurve ocp_p;
  double penalty_voltage = 10.0; // [V] per missing/invalid sample

  void validate() const;
};

struct EvalOutcome {
  double rmse_mv = 0;          // 1000 * sqrt(mean(residuals^2))
  Eigen::VectorXd residuals;   // [V], dataset length; penalty-filled past n_compared
  bool valid = true;           // false when any sample was penalty-filled
  Eigen::Index n_compared = 0; // samples actually simulated
};

/// Simulated-minus-data voltage residuals of a trial on the dataset.
EvalOutcome residuals(const EstimandVector& trial, const ObjectiveSpec& spec);

/// Sum of squared residuals without materializing the residual vector.
double objective_cost(const EstimandVector& trial, const ObjectiveSpec& spec);

double rmse_mv_from_cost(double cost, Eigen::Index n);

/// How per-trace validation errors combine into one number.
enum class ValidationPooling {
  pooled,        // sqrt of sample-weighted mean of squared residuals
  per_trace_mean // arithmetic mean of per-trace RMSEs
};

struct SuiteObjective {
  DatasetSuite suite;
  FixedCellConfig fixed;
  OcpCurve ocp_n;
  OcpCurve ocp_p;
  double penalty_voltage = 10.0;
  ValidationPooling pooling = ValidationPooling::pooled;

  ObjectiveSpec fitting_spec() const;
};

struct SuiteRmse {
  double fitting_mv = 0;
  double validation_mv = 0;
};

/// Fitting RMSE on the fitting trace plus pooled validation RMSE over the
/// held-out traces.
SuiteRmse rmse_over_suite(const EstimandVector& trial, const SuiteObjective& ctx);

} // namespace cellid
