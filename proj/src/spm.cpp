#include "cellid/spm.hpp"

#include <cmath>
#include <sstream>

namespace cellid {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::profile_end: return "profile_end";
    case Termination::v_min: return "v_min";
    case Termination::v_max: return "v_max";
    case Termination::invalid: return "invalid";
  }
  return "invalid";
}

Termination termination_from_string(const std::string& s) {
  if (s == "profile_end") return Termination::profile_end;
  if (s == "v_min") return Termination::v_min;
  if (s == "v_max") return Termination::v_max;
  if (s == "invalid") return Termination::invalid;
  throw ValidationError("unknown termination reason: " + s);
}

SimState init_state(const CellParameters& params) {
  params.estimands.validate();
  SimState s;
  s.cbar_n = params.estimands.c_n0;
  s.cbar_p = params.estimands.c_p0;
  s.cfbar_n = 0.0;
  s.cfbar_p = 0.0;
  return s;
}

CellDerived derive_cell(const CellParameters& params) {
  const auto& e = params.estimands;
  const auto& f = params.fixed;
  constexpr double faraday = PhysicalConstants::faraday;
  constexpr double gas_constant = PhysicalConstants::gas_constant;

  CellDerived d;
  d.inv_cap_n = 1.0 / (faraday * f.a_n * f.l_n * e.eps_n);
  d.inv_cap_p = 1.0 / (faraday * f.a_p * f.l_p * e.eps_p);
  d.decay_n = 30.0 * e.d_n / (f.r_s_n * f.r_s_n);
  d.decay_p = 30.0 * e.d_p / (f.r_s_p * f.r_s_p);
  d.flux_in_n = 15.0 * d.inv_cap_n / (2.0 * f.r_s_n);
  d.flux_in_p = 15.0 * d.inv_cap_p / (2.0 * f.r_s_p);
  d.surf_flux_n = 8.0 * f.r_s_n / 35.0;
  d.surf_flux_p = 8.0 * f.r_s_p / 35.0;
  d.surf_cur_n = f.r_s_n * f.r_s_n * d.inv_cap_n / (105.0 * e.d_n);
  d.surf_cur_p = f.r_s_p * f.r_s_p * d.inv_cap_p / (105.0 * e.d_p);
  d.s_n = 3.0 * f.a_n * f.l_n * e.eps_n / f.r_s_n;
  d.s_p = 3.0 * f.a_p * f.l_p * e.eps_p / f.r_s_p;
  d.re_n = e.r_eff_n * std::sqrt(f.c_e);
  d.re_p = e.r_eff_p * std::sqrt(f.c_e);
  d.two_rt_over_f = 2.0 * gas_constant * f.temperature / faraday;
  d.c_max_n = e.c_max_n;
  d.c_max_p = e.c_max_p;
  d.r0 = e.r0;
  d.v_min = f.v_min;
  d.v_max = f.v_max;
  return d;
}

void check_stability(const CellParameters& params, double dt) {
  if (!(dt > 0.0)) throw ValidationError("dt: must be > 0");
  const auto& e = params.estimands;
  const auto& f = params.fixed;
  const double rate_n = 30.0 * e.d_n * dt / (f.r_s_n * f.r_s_n);
  const double rate_p = 30.0 * e.d_p * dt / (f.r_s_p * f.r_s_p);
  if (rate_n >= 1.0 || rate_p >= 1.0) {
    std::ostringstream os;
    os << "dt = " << dt << " violates the stability bound 30*D*dt/R_s^2 < 1 "
       << "(negative electrode: " << rate_n << ", positive electrode: " << rate_p << ")";
    throw ValidationError(os.str());
  }
}

SimState step_state(const SimState& state, double current, double dt,
                    const CellParameters& params) {
  check_stability(params, dt);
  return step_with(derive_cell(params), state, current, dt);
}

SurfaceConcentrations surface_concentrations(const SimState& state, double current,
                                             const CellParameters& params) {
  const CellDerived d = derive_cell(params);
  SurfaceConcentrations c;
  c.neg = state.cbar_n + d.surf_flux_n * state.cfbar_n + d.surf_cur_n * current;
  c.pos = state.cbar_p + d.surf_flux_p * state.cfbar_p - d.surf_cur_p * current;
  return c;
}

double exchange_current(double c_ss, double c_max, double c_e, double r_eff) {
  if (!(c_ss >= 0.0 && c_ss <= c_max)) {
    std::ostringstream os;
    os << "surface concentration " << c_ss << " outside [0, " << c_max << "]";
    throw SimulationError(os.str());
  }
  return r_eff * std::sqrt(c_e * c_ss * (c_max - c_ss));
}

double overpotential(double current_arg, double j0, double surface_scale,
                     double temperature) {
  if (!(surface_scale > 0.0)) throw ValidationError("overpotential: S must be > 0");
  if (!(j0 > 0.0)) throw SimulationError("overpotential: degenerate surface state, j0 <= 0");
  return 2.0 * PhysicalConstants::gas_constant * temperature / PhysicalConstants::faraday *
         std::asinh(current_arg / (2.0 * surface_scale * j0));
}

double cell_voltage(const SimState& state, double current, const CellParameters& params) {
  const CellDerived d = derive_cell(params);
  PointOutputs out;
  if (!evaluate_point(params, d, state, current, out)) {
    std::ostringstream os;
    os << "invalid surface state: css_n = " << out.css_n << " of c_max_n = " << d.c_max_n
       << ", css_p = " << out.css_p << " of c_max_p = " << d.c_max_p;
    throw SimulationError(os.str());
  }
  return out.voltage;
}

Trace simulate_profile(const CellParameters& params, const CurrentProfile& profile) {
  params.validate();
  profile.validate();
  check_stability(params, profile.dt);

  const CellDerived d = derive_cell(params);
  const Eigen::Index n = profile.size();

  Trace trace;
  trace.profile_name = profile.name;
  trace.dt = profile.dt;
  trace.time.resize(n);
  trace.current.resize(n);
  trace.voltage.resize(n);

  SimState state = init_state(params);
  auto [termination, recorded] = simulate_core(
      params, d, profile.dt, profile.current, state,
      [&](Eigen::Index k, double amps, const PointOutputs& out) {
        trace.time[k] = static_cast<double>(k) * profile.dt;
        trace.current[k] = amps;
        trace.voltage[k] = out.voltage;
      });

  trace.termination = termination;
  trace.time.conservativeResize(recorded);
  trace.current.conservativeResize(recorded);
  trace.voltage.conservativeResize(recorded);
  return trace;
}

} // namespace cellid
