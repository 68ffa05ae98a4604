#pragma once

#include <cmath>
#include <utility>

#include <Eigen/Core>

#include "cellid/trace.hpp"
#include "cellid/types.hpp"

namespace cellid {

/// State at rest: average concentrations at their initial values, fluxes zero.
SimState init_state(const CellParameters& params);

/// One discrete state update with current held for dt seconds.
/// Positive current charges (lithiates the negative electrode).
/// Throws ValidationError if dt violates the stability bound
/// 30*D_i*dt/R_s_i^2 < 1 on either electrode.
SimState step_state(const SimState& state, double current, double dt,
                    const CellParameters& params);

struct SurfaceConcentrations {
  double neg = 0; // [mol/m^3]
  double pos = 0; // [mol/m^3]
};

/// Solid-phase surface concentrations for the current applied over the
/// step that produced `state`.
SurfaceConcentrations surface_concentrations(const SimState& state, double current,
                                             const CellParameters& params);

/// Exchange current density j0 = r_eff * sqrt(c_e * c_ss * (c_max - c_ss)).
/// Throws SimulationError if c_ss lies outside [0, c_max].
double exchange_current(double c_ss, double c_max, double c_e, double r_eff);

/// Butler-Volmer overpotential (2RT/F) * asinh(x / (2*S*j0)), where x is the
/// electrode-resolved current argument (-I for the negative electrode, +I for
/// the positive one). Throws SimulationError if j0 <= 0.
double overpotential(double current_arg, double j0, double surface_scale,
                     double temperature);

/// Terminal voltage ocp_p - ocp_n + eta_p - eta_n + I*R0.
/// Throws SimulationError when either surface stoichiometry leaves (0, 1).
double cell_voltage(const SimState& state, double current, const CellParameters& params);

/// Full-trace simulation. Stops early when the voltage crosses v_min while
/// discharging or v_max while charging, or on an invalid surface state.
/// Throws ValidationError for invalid parameters or profiles.
Trace simulate_profile(const CellParameters& params, const CurrentProfile& profile);

// ---------------------------------------------------------------------------
// Stepping internals, shared by simulate_profile and the objective. These are
// plain precomputed coefficients of the state update and output equations.

struct CellDerived {
  double inv_cap_n = 0;  // 1/(F a_n L_n eps_n) [mol/m^3 per C]
  double inv_cap_p = 0;
  double decay_n = 0;    // 30 D_n / R_s_n^2 [1/s]
  double decay_p = 0;
  double flux_in_n = 0;  // 15/(2 F R_s_n a_n L_n eps_n)
  double flux_in_p = 0;
  double surf_flux_n = 0; // 8 R_s_n / 35
  double surf_flux_p = 0;
  double surf_cur_n = 0;  // R_s_n^2/(105 D_n F a_n L_n eps_n)
  double surf_cur_p = 0;
  double s_n = 0;        // 3 a_n L_n eps_n / R_s_n [m^2]
  double s_p = 0;
  double re_n = 0;       // r_eff_n * sqrt(c_e)
  double re_p = 0;
  double two_rt_over_f = 0;
  double c_max_n = 0;
  double c_max_p = 0;
  double r0 = 0;
  double v_min = 0;
  double v_max = 0;
};

CellDerived derive_cell(const CellParameters& params);

/// Throws ValidationError if 30*D_i*dt/R_s_i^2 >= 1 for either electrode.
void check_stability(const CellParameters& params, double dt);

inline SimState step_with(const CellDerived& d, const SimState& s, double current,
                          double dt) noexcept {
  SimState out;
  out.cbar_n = s.cbar_n + dt * d.inv_cap_n * current;
  out.cbar_p = s.cbar_p - dt * d.inv_cap_p * current;
  out.cfbar_n = (1.0 - d.decay_n * dt) * s.cfbar_n + dt * d.flux_in_n * current;
  out.cfbar_p = (1.0 - d.decay_p * dt) * s.cfbar_p - dt * d.flux_in_p * current;
  return out;
}

struct PointOutputs {
  double css_n = 0;
  double css_p = 0;
  double voltage = 0;
};

/// Surface concentrations and terminal voltage for `state` under `current`.
/// Returns false (outputs untouched past css) when a surface stoichiometry
/// leaves (0, 1).
inline bool evaluate_point(const CellParameters& p, const CellDerived& d,
                           const SimState& s, double current, PointOutputs& out) noexcept {
  out.css_n = s.cbar_n + d.surf_flux_n * s.cfbar_n + d.surf_cur_n * current;
  out.css_p = s.cbar_p + d.surf_flux_p * s.cfbar_p - d.surf_cur_p * current;
  const double theta_n = out.css_n / d.c_max_n;
  const double theta_p = out.css_p / d.c_max_p;
  if (!(theta_n > 0.0 && theta_n < 1.0 && theta_p > 0.0 && theta_p < 1.0)) return false;
  const double j0_n = d.re_n * std::sqrt(out.css_n * (d.c_max_n - out.css_n));
  const double j0_p = d.re_p * std::sqrt(out.css_p * (d.c_max_p - out.css_p));
  if (!(j0_n > 0.0 && j0_p > 0.0)) return false;
  const double eta_n = d.two_rt_over_f * std::asinh(-current / (2.0 * d.s_n * j0_n));
  const double eta_p = d.two_rt_over_f * std::asinh(current / (2.0 * d.s_p * j0_p));
  out.voltage = p.ocp_p(theta_p) - p.ocp_n(theta_n) + eta_p - eta_n + current * d.r0;
  return std::isfinite(out.voltage);
}

/// Steps the state through `current`, invoking visit(k, I_k, outputs) for
/// every recorded sample. Returns the termination reason and the number of
/// samples recorded. `state` is left at the last computed state.
template <class Visitor>
std::pair<Termination, Eigen::Index> simulate_core(const CellParameters& p,
                                                   const CellDerived& d, double dt,
                                                   const Eigen::Ref<const Eigen::VectorXd>& current,
                                                   SimState& state, Visitor&& visit) {
  PointOutputs out;
  const Eigen::Index n = current.size();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double amps = current[k];
    state = step_with(d, state, amps, dt);
    if (!state.is_valid(p.estimands) || !evaluate_point(p, d, state, amps, out))
      return {Termination::invalid, k};
    visit(k, amps, out);
    if (amps < 0.0 && out.voltage <= d.v_min) return {Termination::v_min, k + 1};
    if (amps > 0.0 && out.voltage >= d.v_max) return {Termination::v_max, k + 1};
  }
  return {Termination::profile_end, n};
}

} // namespace cellid
