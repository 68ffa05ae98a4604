#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "cellid/objective.hpp"
#include "cellid/types.hpp"

namespace cellid {

/// Componentwise box for the 11 estimands.
struct Bounds {
  Vector11d lower;
  Vector11d upper;

  void validate() const;
  bool contains(const Eigen::Ref<const Vector11d>& x) const;
};

/// lower = lo_factor * reference, upper = hi_factor * reference.
Bounds make_bounds(const EstimandVector& reference, double lo_factor, double hi_factor);

/// n independent componentwise-uniform draws in the box. Draws are
/// prefix-stable: the k-th vector is the same for any n > k under one seed.
std::vector<EstimandVector> sample_uniform(const Bounds& bounds, int n,
                                           std::uint64_t seed);

struct LsConfig {
  int max_iterations = 200;
  double cost_tolerance = 1e-8;
  double step_tolerance = 1e-8;
  double gradient_tolerance = 1e-8;
  double fd_rel_step = 1e-6;

  void validate() const;
};

struct PsoConfig {
  int swarm_size = 40;
  int max_iterations = 100;
  double min_func_tolerance = 1e-8;
  double inertia = 0.72984;   // Clerc constriction values
  double cognitive = 1.49618;
  double social = 1.49618;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GaConfig {
  int generations = 300;
  int parents_mating = 4;
  int population = 50;
  int genes = 11;
  double mutation_rate = 0.1; // per-gene uniform reset probability
  int elitism = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class ConvergedBy { max_iter, tolerance };

const char* to_string(ConvergedBy c);

struct OptResult {
  EstimandVector best;
  double best_cost = 0; // sum of squared residuals, re-evaluated at return
  long evaluations = 0;
  int iterations = 0;
  double wall_time_s = 0;
  std::uint64_t seed = 0;
  ConvergedBy converged_by = ConvergedBy::max_iter;
};

OptResult fit_ls(const EstimandVector& init, const Bounds& bounds,
                 const ObjectiveSpec& spec, const LsConfig& cfg);
OptResult fit_pso(const Bounds& bounds, const ObjectiveSpec& spec, const PsoConfig& cfg);
OptResult fit_ga(const Bounds& bounds, const ObjectiveSpec& spec, const GaConfig& cfg);

// ---------------------------------------------------------------------------
// Generic engines over arbitrary objectives on a box. All three search in
// normalized [0,1]^d coordinates internally; callables receive physical
// coordinates. Exposed so the searchers can be exercised on synthetic
// objectives independently of the battery model.

using ScalarObjective = std::function<double(const Eigen::VectorXd&)>;
using ResidualObjective = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct SearchResult {
  Eigen::VectorXd best;
  double best_cost = 0;
  long evaluations = 0;
  int iterations = 0;
  ConvergedBy converged_by = ConvergedBy::max_iter;
  std::vector<double> cost_history; // accepted/global best after each iteration
};

SearchResult pso_minimize(const ScalarObjective& f, const Eigen::VectorXd& lower,
                          const Eigen::VectorXd& upper, const PsoConfig& cfg);

/// `initial_population` (physical coordinates, clamped to the box) seeds the
/// first generation; missing individuals are drawn uniformly.
SearchResult ga_minimize(const ScalarObjective& f, const Eigen::VectorXd& lower,
                         const Eigen::VectorXd& upper, const GaConfig& cfg,
                         const std::vector<Eigen::VectorXd>& initial_population = {});

/// Bounded nonlinear least squares: damped Gauss-Newton steps with
/// Levenberg-Marquardt scaling and reflection at the box faces, on
/// bound-normalized parameters. Minimizes ||f(x)||^2.
SearchResult ls_minimize(const ResidualObjective& f, const Eigen::VectorXd& init,
                         const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                         const LsConfig& cfg);

/// Finite-difference Jacobian of f at x with per-component step
/// rel_step * max(|x_j|, 1). Forward differences by default, central when
/// `central` is set.
Eigen::MatrixXd finite_difference_jacobian(const ResidualObjective& f,
                                           const Eigen::VectorXd& x, double rel_step,
                                           bool central = false);

} // namespace cellid
