#include "cellid/objective.hpp"

#include <cmath>

#include "cellid/spm.hpp"

namespace cellid {

void ObjectiveSpec::validate() const {
  if (dataset.size() == 0) throw ValidationError("objective.dataset: must be non-empty");
  if (!(dataset.dt > 0.0)) throw ValidationError("objective.dataset: dt must be > 0");
  if (!(penalty_voltage > 0.0))
    throw ValidationError("objective.penalty_voltage: must be > 0");
  fixed.validate();
}

double rmse_mv_from_cost(double cost, Eigen::Index n) {
  if (n <= 0) return 0.0;
  return 1000.0 * std::sqrt(cost / static_cast<double>(n));
}

namespace {

// Shared evaluation loop. `on_residual(k, r)` sees every residual, including
// the penalty fill. Returns the number of simulated (non-penalty) samples.
template <class F>
Eigen::Index evaluate(const EstimandVector& trial, const ObjectiveSpec& spec,
                      F&& on_residual) {
  const Eigen::Index n = spec.dataset.size();

  CellParameters params;
  params.estimands = trial;
  params.fixed = spec.fixed;
  params.ocp_n = spec.ocp_n;
  params.ocp_p = spec.ocp_p;

  Eigen::Index simulated = 0;
  bool stable = true;
  try {
    check_stability(params, spec.dataset.dt);
  } catch (const ValidationError&) {
    stable = false;
  }

  if (trial.is_physical() && stable) {
    // Replay the dataset's full current record: the voltage cutoffs only
    // decide where generated data stops, never how a trial is scored. The
    // penalty enters at the first physically invalid sample.
    const CellDerived d = derive_cell(params);
    SimState state;
    state.cbar_n = trial.c_n0;
    state.cbar_p = trial.c_p0;
    PointOutputs out;
    while (simulated < n) {
      const double amps = spec.dataset.current[simulated];
      state = step_with(d, state, amps, spec.dataset.dt);
      if (!state.is_valid(trial) || !evaluate_point(params, d, state, amps, out)) break;
      on_residual(simulated, out.voltage - spec.dataset.voltage[simulated]);
      ++simulated;
    }
  }
  for (Eigen::Index k = simulated; k < n; ++k) on_residual(k, spec.penalty_voltage);
  return simulated;
}

} // namespace

EvalOutcome residuals(const EstimandVector& trial, const ObjectiveSpec& spec) {
  spec.validate();
  const Eigen::Index n = spec.dataset.size();

  EvalOutcome out;
  out.residuals.resize(n);
  double cost = 0;
  out.n_compared = evaluate(trial, spec, [&](Eigen::Index k, double r) {
    out.residuals[k] = r;
    cost += r * r;
  });
  out.valid = out.n_compared == n;
  out.rmse_mv = rmse_mv_from_cost(cost, n);
  return out;
}

double objective_cost(const EstimandVector& trial, const ObjectiveSpec& spec) {
  double cost = 0;
  evaluate(trial, spec, [&](Eigen::Index, double r) { cost += r * r; });
  return cost;
}

ObjectiveSpec SuiteObjective::fitting_spec() const {
  ObjectiveSpec spec;
  spec.dataset = suite.fitting;
  spec.fixed = fixed;
  spec.ocp_n = ocp_n;
  spec.ocp_p = ocp_p;
  spec.penalty_voltage = penalty_voltage;
  return spec;
}

SuiteRmse rmse_over_suite(const EstimandVector& trial, const SuiteObjective& ctx) {
  SuiteRmse out;

  ObjectiveSpec spec = ctx.fitting_spec();
  spec.validate();
  out.fitting_mv = rmse_mv_from_cost(objective_cost(trial, spec), ctx.suite.fitting.size());

  double pooled_cost = 0;
  Eigen::Index pooled_n = 0;
  double mean_rmse_mv = 0;
  for (const Trace& trace : ctx.suite.validation) {
    spec.dataset = trace;
    spec.validate();
    const double cost = objective_cost(trial, spec);
    pooled_cost += cost;
    pooled_n += trace.size();
    mean_rmse_mv += rmse_mv_from_cost(cost, trace.size());
  }
  if (ctx.suite.validation.empty()) {
    out.validation_mv = 0;
  } else if (ctx.pooling == ValidationPooling::pooled) {
    out.validation_mv = rmse_mv_from_cost(pooled_cost, pooled_n);
  } else {
    out.validation_mv = mean_rmse_mv / static_cast<double>(ctx.suite.validation.size());
  }
  return out;
}

} // namespace cellid
