#include "cellid/optimizers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>

#include "cellid/rng.hpp"

namespace cellid {

const char* to_string(ConvergedBy c) {
  return c == ConvergedBy::max_iter ? "max_iter" : "tolerance";
}

void Bounds::validate() const {
  for (int i = 0; i < EstimandVector::size; ++i) {
    if (!(lower[i] > 0.0))
      throw ValidationError("bounds.lower must be strictly positive");
    if (!(lower[i] < upper[i]))
      throw ValidationError("bounds: lower must be componentwise below upper");
  }
}

bool Bounds::contains(const Eigen::Ref<const Vector11d>& x) const {
  return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
}

Bounds make_bounds(const EstimandVector& reference, double lo_factor, double hi_factor) {
  if (!(lo_factor > 0.0) || !(lo_factor < hi_factor))
    throw ValidationError("bounds factors: need 0 < lo_factor < hi_factor");
  const Vector11d ref = reference.to_vector();
  for (int i = 0; i < EstimandVector::size; ++i)
    if (!(ref[i] > 0.0))
      throw ValidationError(std::string("reference estimand ") +
                            EstimandVector::names()[i] + " must be > 0");
  Bounds b;
  b.lower = lo_factor * ref;
  b.upper = hi_factor * ref;
  b.validate();
  return b;
}

std::vector<EstimandVector> sample_uniform(const Bounds& bounds, int n,
                                           std::uint64_t seed) {
  if (n < 1) throw ValidationError("sample_uniform: n must be >= 1");
  bounds.validate();
  Rng rng(seed);
  std::vector<EstimandVector> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    Vector11d x;
    for (int i = 0; i < EstimandVector::size; ++i)
      x[i] = rng.uniform(bounds.lower[i], bounds.upper[i]);
    out.push_back(EstimandVector::from_vector(x));
  }
  return out;
}

void LsConfig::validate() const {
  if (max_iterations < 1) throw ValidationError("ls.max_iterations: must be >= 1");
  if (!(cost_tolerance > 0.0) || !(step_tolerance > 0.0) || !(gradient_tolerance > 0.0))
    throw ValidationError("ls tolerances: must be > 0");
  if (!(fd_rel_step > 0.0)) throw ValidationError("ls.fd_rel_step: must be > 0");
}

void PsoConfig::validate() const {
  if (swarm_size < 2) throw ValidationError("pso.swarm_size: must be >= 2");
  if (max_iterations < 1) throw ValidationError("pso.max_iterations: must be >= 1");
  if (!(min_func_tolerance > 0.0)) throw ValidationError("pso.min_func_tolerance: must be > 0");
  if (!(inertia > 0.0) || !(cognitive > 0.0) || !(social > 0.0))
    throw ValidationError("pso coefficients: must be > 0");
}

void GaConfig::validate() const {
  if (generations < 1) throw ValidationError("ga.generations: must be >= 1");
  if (population < 2) throw ValidationError("ga.population: must be >= 2");
  if (parents_mating < 1 || parents_mating > population)
    throw ValidationError("ga.parents_mating: must be in [1, population]");
  if (genes != EstimandVector::size)
    throw ValidationError("ga.genes: must be 11");
  if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0))
    throw ValidationError("ga.mutation_rate: must be in [0, 1]");
  if (elitism < 0 || elitism >= population)
    throw ValidationError("ga.elitism: must be in [0, population)");
}

namespace {

// Normalized <-> physical coordinate maps for one box.
struct BoxMap {
  Eigen::VectorXd lower, span;

  BoxMap(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi)
      : lower(lo), span(hi - lo) {
    if (lo.size() != hi.size()) throw ValidationError("bounds: dimension mismatch");
    for (Eigen::Index i = 0; i < lo.size(); ++i)
      if (!(span[i] > 0.0))
        throw ValidationError("bounds: lower must be componentwise below upper");
  }

  Eigen::Index dim() const { return lower.size(); }
  Eigen::VectorXd to_physical(const Eigen::VectorXd& z) const {
    return lower.array() + z.array() * span.array();
  }
  Eigen::VectorXd to_normalized(const Eigen::VectorXd& x) const {
    return (x - lower).array() / span.array();
  }
};

// Reflect a step target back into [0,1]; one pass handles |overshoot| <= 1.
double reflect_unit(double z) {
  for (int guard = 0; guard < 8 && (z < 0.0 || z > 1.0); ++guard) {
    if (z < 0.0) z = -z;
    if (z > 1.0) z = 2.0 - z;
  }
  return std::clamp(z, 0.0, 1.0);
}

} // namespace

SearchResult pso_minimize(const ScalarObjective& f, const Eigen::VectorXd& lower,
                          const Eigen::VectorXd& upper, const PsoConfig& cfg) {
  cfg.validate();
  const BoxMap box(lower, upper);
  const auto dim = box.dim();
  const int n = cfg.swarm_size;
  Rng rng(cfg.seed);

  SearchResult res;
  std::vector<Eigen::VectorXd> pos(n), vel(n), pbest(n);
  std::vector<double> pcost(n);
  Eigen::VectorXd gbest;
  double gcost = std::numeric_limits<double>::infinity();

  for (int i = 0; i < n; ++i) {
    pos[i].resize(dim);
    vel[i] = Eigen::VectorXd::Zero(dim); // particles start at rest
    for (Eigen::Index j = 0; j < dim; ++j) pos[i][j] = rng.uniform();
    pcost[i] = f(box.to_physical(pos[i]));
    ++res.evaluations;
    pbest[i] = pos[i];
    if (pcost[i] < gcost) {
      gcost = pcost[i];
      gbest = pos[i];
    }
  }
  res.cost_history.push_back(gcost);

  res.converged_by = ConvergedBy::max_iter;
  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    res.iterations = iter;
    double prev_gcost = gcost;
    for (int i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < dim; ++j) {
        const double r1 = rng.uniform();
        const double r2 = rng.uniform();
        double v = cfg.inertia * vel[i][j] + cfg.cognitive * r1 * (pbest[i][j] - pos[i][j]) +
                   cfg.social * r2 * (gbest[j] - pos[i][j]);
        v = std::clamp(v, -1.0, 1.0);
        double x = pos[i][j] + v;
        // Land on the face when the step leaves the box and bounce the
        // velocity back inside, so no coordinate can freeze on a bound.
        if (x < 0.0 || x > 1.0) {
          x = std::clamp(x, 0.0, 1.0);
          v = -0.5 * v;
        }
        vel[i][j] = v;
        pos[i][j] = x;
      }
      const double c = f(box.to_physical(pos[i]));
      ++res.evaluations;
      if (c < pcost[i]) {
        pcost[i] = c;
        pbest[i] = pos[i];
      }
      if (c < gcost) {
        gcost = c;
        gbest = pos[i]; // later particles in this sweep see the new best
      }
    }
    res.cost_history.push_back(gcost);
    // Stop once an improving iteration no longer moves the best cost by at
    // least the function tolerance.
    if (gcost < prev_gcost && prev_gcost - gcost < cfg.min_func_tolerance) {
      res.converged_by = ConvergedBy::tolerance;
      break;
    }
  }

  res.best = box.to_physical(gbest);
  res.best_cost = gcost;
  return res;
}

SearchResult ga_minimize(const ScalarObjective& f, const Eigen::VectorXd& lower,
                         const Eigen::VectorXd& upper, const GaConfig& cfg,
                         const std::vector<Eigen::VectorXd>& initial_population) {
  cfg.validate();
  const BoxMap box(lower, upper);
  const auto dim = box.dim();
  const int pop_size = cfg.population;
  Rng rng(cfg.seed);

  SearchResult res;
  std::vector<Eigen::VectorXd> pop(pop_size);
  std::vector<double> cost(pop_size);
  for (int i = 0; i < pop_size; ++i) {
    if (i < static_cast<int>(initial_population.size())) {
      pop[i] = box.to_normalized(initial_population[static_cast<std::size_t>(i)]);
      for (Eigen::Index j = 0; j < dim; ++j) pop[i][j] = std::clamp(pop[i][j], 0.0, 1.0);
    } else {
      pop[i].resize(dim);
      for (Eigen::Index j = 0; j < dim; ++j) pop[i][j] = rng.uniform();
    }
    cost[i] = f(box.to_physical(pop[i]));
    ++res.evaluations;
  }

  std::vector<int> order(pop_size);
  std::vector<Eigen::VectorXd> next(pop_size);
  std::vector<double> next_cost(pop_size);

  auto best_index = [&] {
    return static_cast<int>(std::min_element(cost.begin(), cost.end()) - cost.begin());
  };
  res.cost_history.push_back(cost[best_index()]);

  for (int gen = 1; gen <= cfg.generations; ++gen) {
    res.iterations = gen;
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return cost[a] < cost[b]; });

    int filled = 0;
    for (; filled < cfg.elitism; ++filled) {
      next[filled] = pop[order[filled]];
      next_cost[filled] = cost[order[filled]];
    }
    for (int c = filled; c < pop_size; ++c) {
      const int k = c - filled;
      const Eigen::VectorXd& pa = pop[order[k % cfg.parents_mating]];
      const Eigen::VectorXd& pb = pop[order[(k + 1) % cfg.parents_mating]];
      const int point = dim > 1 ? 1 + rng.uniform_int(static_cast<int>(dim) - 1) : 1;
      Eigen::VectorXd child(dim);
      for (Eigen::Index j = 0; j < dim; ++j) child[j] = j < point ? pa[j] : pb[j];
      for (Eigen::Index j = 0; j < dim; ++j)
        if (rng.uniform() < cfg.mutation_rate) child[j] = rng.uniform();
      next_cost[c] = f(box.to_physical(child));
      ++res.evaluations;
      next[c] = std::move(child);
    }
    pop.swap(next);
    cost.swap(next_cost);
    res.cost_history.push_back(cost[best_index()]);
  }

  const int bi = best_index();
  res.best = box.to_physical(pop[bi]);
  res.best_cost = cost[bi];
  res.converged_by = ConvergedBy::max_iter;
  return res;
}

Eigen::MatrixXd finite_difference_jacobian(const ResidualObjective& f,
                                           const Eigen::VectorXd& x, double rel_step,
                                           bool central) {
  const Eigen::VectorXd r0 = f(x);
  Eigen::MatrixXd jac(r0.size(), x.size());
  Eigen::VectorXd xs = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = rel_step * std::max(std::abs(x[j]), 1.0);
    xs[j] = x[j] + h;
    const Eigen::VectorXd rp = f(xs);
    if (central) {
      xs[j] = x[j] - h;
      jac.col(j) = (rp - f(xs)) / (2.0 * h);
    } else {
      jac.col(j) = (rp - r0) / h;
    }
    xs[j] = x[j];
  }
  return jac;
}

SearchResult ls_minimize(const ResidualObjective& f, const Eigen::VectorXd& init,
                         const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                         const LsConfig& cfg) {
  cfg.validate();
  const BoxMap box(lower, upper);
  const auto dim = box.dim();
  for (Eigen::Index j = 0; j < dim; ++j)
    if (!(init[j] > lower[j] && init[j] < upper[j]))
      throw ValidationError("ls init: must lie strictly inside the bounds");

  SearchResult res;
  auto eval = [&](const Eigen::VectorXd& z) {
    ++res.evaluations;
    return f(box.to_physical(z));
  };

  Eigen::VectorXd z = box.to_normalized(init);
  Eigen::VectorXd r = eval(z);
  double cost = r.squaredNorm();
  res.cost_history.push_back(cost);

  double lambda = 1e-3;
  res.converged_by = ConvergedBy::max_iter;

  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    res.iterations = iter;

    // Forward-difference Jacobian in normalized coordinates; step away from
    // the nearest face so trial points stay inside the box.
    Eigen::MatrixXd jac(r.size(), dim);
    Eigen::VectorXd zs = z;
    for (Eigen::Index j = 0; j < dim; ++j) {
      double h = cfg.fd_rel_step * std::max(std::abs(z[j]), 1.0);
      if (z[j] + h > 1.0) h = -h;
      zs[j] = z[j] + h;
      jac.col(j) = (eval(zs) - r) / h;
      zs[j] = z[j];
    }

    const Eigen::VectorXd gradient = jac.transpose() * r;
    if (gradient.lpNorm<Eigen::Infinity>() <= cfg.gradient_tolerance) {
      res.converged_by = ConvergedBy::tolerance;
      break;
    }

    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::VectorXd damping = jtj.diagonal().cwiseMax(1e-12);

    bool accepted = false;
    Eigen::VectorXd step;
    while (!accepted && lambda < 1e14) {
      Eigen::MatrixXd a = jtj;
      a.diagonal() += lambda * damping;
      step = a.ldlt().solve(-gradient);
      // Cap the step at one box length per component.
      for (Eigen::Index j = 0; j < dim; ++j) step[j] = std::clamp(step[j], -1.0, 1.0);

      Eigen::VectorXd z_new = z + step;
      for (Eigen::Index j = 0; j < dim; ++j) z_new[j] = reflect_unit(z_new[j]);

      const Eigen::VectorXd r_new = eval(z_new);
      const double cost_new = r_new.squaredNorm();
      if (cost_new < cost) {
        const double drop = cost - cost_new;
        z = z_new;
        r = r_new;
        cost = cost_new;
        res.cost_history.push_back(cost);
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (drop <= cfg.cost_tolerance * std::max(cost, 1e-300)) {
          res.converged_by = ConvergedBy::tolerance;
        }
      } else {
        lambda *= 4.0;
      }
    }

    if (!accepted) {
      // Damping exhausted without descent: stalled (flat or non-smooth here).
      res.converged_by = ConvergedBy::tolerance;
      break;
    }
    if (res.converged_by == ConvergedBy::tolerance) break;
    if (step.norm() <= cfg.step_tolerance * (z.norm() + cfg.step_tolerance)) {
      res.converged_by = ConvergedBy::tolerance;
      break;
    }
    if (iter == cfg.max_iterations) res.converged_by = ConvergedBy::max_iter;
  }

  res.best = box.to_physical(z);
  res.best_cost = cost;
  return res;
}

namespace {

using Clock = std::chrono::steady_clock;

OptResult package(const SearchResult& run, const ObjectiveSpec& spec,
                  std::uint64_t seed, Clock::time_point start) {
  OptResult out;
  out.best = EstimandVector::from_vector(run.best);
  out.best_cost = objective_cost(out.best, spec); // fresh evaluation, no stale cost
  out.evaluations = run.evaluations;
  out.iterations = run.iterations;
  out.seed = seed;
  out.converged_by = run.converged_by;
  out.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
  return out;
}

} // namespace

OptResult fit_ls(const EstimandVector& init, const Bounds& bounds,
                 const ObjectiveSpec& spec, const LsConfig& cfg) {
  spec.validate();
  bounds.validate();
  const auto start = Clock::now();
  ResidualObjective fn = [&](const Eigen::VectorXd& x) {
    return residuals(EstimandVector::from_vector(x), spec).residuals;
  };
  const auto run = ls_minimize(fn, init.to_vector(), bounds.lower, bounds.upper, cfg);
  return package(run, spec, 0, start);
}

OptResult fit_pso(const Bounds& bounds, const ObjectiveSpec& spec, const PsoConfig& cfg) {
  spec.validate();
  bounds.validate();
  const auto start = Clock::now();
  ScalarObjective fn = [&](const Eigen::VectorXd& x) {
    return objective_cost(EstimandVector::from_vector(x), spec);
  };
  const auto run = pso_minimize(fn, bounds.lower, bounds.upper, cfg);
  return package(run, spec, cfg.seed, start);
}

OptResult fit_ga(const Bounds& bounds, const ObjectiveSpec& spec, const GaConfig& cfg) {
  spec.validate();
  bounds.validate();
  const auto start = Clock::now();
  ScalarObjective fn = [&](const Eigen::VectorXd& x) {
    return objective_cost(EstimandVector::from_vector(x), spec);
  };
  const auto run = ga_minimize(fn, bounds.lower, bounds.upper, cfg);
  return package(run, spec, cfg.seed, start);
}

} // namespace cellid
