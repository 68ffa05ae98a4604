#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace cellid {

using Vector11d = Eigen::Matrix<double, 11, 1>;

/// Thrown when a configuration value or a function precondition is violated.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a simulation reaches a physically invalid state.
class SimulationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Thrown on file-format or filesystem failures, with path context.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct PhysicalConstants {
  static constexpr double faraday = 96485.33212;      // [C/mol]
  static constexpr double gas_constant = 8.314462618; // [J/(mol K)]
};

/// The 11 identifiable cell parameters, in canonical order:
/// c_n0, c_p0, r_eff_n, r_eff_p, eps_n, eps_p, d_n, d_p, r0, c_max_n, c_max_p.
struct EstimandVector {
  double c_n0 = 0;    // initial concentration, negative electrode [mol/m^3]
  double c_p0 = 0;    // initial concentration, positive electrode [mol/m^3]
  double r_eff_n = 0; // reaction-rate coefficient, negative electrode
  double r_eff_p = 0; // reaction-rate coefficient, positive electrode
  double eps_n = 0;   // active-material volume fraction, negative electrode [-]
  double eps_p = 0;   // active-material volume fraction, positive electrode [-]
  double d_n = 0;     // solid diffusivity, negative electrode [m^2/s]
  double d_p = 0;     // solid diffusivity, positive electrode [m^2/s]
  double r0 = 0;      // ohmic resistance [ohm]
  double c_max_n = 0; // maximum concentration, negative electrode [mol/m^3]
  double c_max_p = 0; // maximum concentration, positive electrode [mol/m^3]

  static constexpr int size = 11;
  static const std::array<const char*, 11>& names();

  Vector11d to_vector() const;
  static EstimandVector from_vector(const Eigen::Ref<const Vector11d>& v);

  /// True iff all hard physical invariants hold (positivity, eps in (0,1),
  /// initial below maximum concentration).
  bool is_physical() const noexcept;

  /// Throws ValidationError naming the offending field.
  void validate() const;
};

/// Grouped-out geometry and operating constants that are never estimated.
struct FixedCellConfig {
  double r_s_n = 0;  // particle radius, negative electrode [m]
  double r_s_p = 0;  // particle radius, positive electrode [m]
  double a_n = 0;    // electrode sheet area, negative [m^2]
  double a_p = 0;    // electrode sheet area, positive [m^2]
  double l_n = 0;    // electrode thickness, negative [m]
  double l_p = 0;    // electrode thickness, positive [m]
  double c_e = 0;    // electrolyte concentration [mol/m^3]
  double temperature = 0;         // [K]
  double nominal_capacity_ah = 0; // [Ah]
  double v_min = 0;  // lower voltage cutoff [V]
  double v_max = 0;  // upper voltage cutoff [V]

  void validate() const;
};

/// Open-circuit potential of one electrode as a function of stoichiometry.
///
/// Two representations: a fixed analytic family
///   U(theta) = c0 + c1*exp(-c2*theta) + c3*tanh((theta - c4)/c5)
///            + c6*exp(-c7*(1 - theta)) + c8*(1 - theta)
/// or a sample table with strictly increasing theta covering [0, 1],
/// evaluated by linear interpolation.
class OcpCurve {
public:
  static constexpr int analytic_coeff_count = 9;

  OcpCurve() = default;

  static OcpCurve analytic(const std::array<double, analytic_coeff_count>& coeffs);
  static OcpCurve table(std::vector<double> theta, std::vector<double> potential);

  double operator()(double theta) const;

  bool is_analytic() const noexcept { return kind_ == Kind::analytic; }
  const std::array<double, analytic_coeff_count>& coeffs() const { return coeffs_; }
  const std::vector<double>& table_theta() const { return theta_; }
  const std::vector<double>& table_potential() const { return potential_; }

private:
  enum class Kind { analytic, table };
  Kind kind_ = Kind::analytic;
  std::array<double, analytic_coeff_count> coeffs_{};
  std::vector<double> theta_;
  std::vector<double> potential_;
};

/// Everything needed to simulate the cell.
struct CellParameters {
  EstimandVector estimands;
  FixedCellConfig fixed;
  OcpCurve ocp_n;
  OcpCurve ocp_p;
  PhysicalConstants constants;

  void validate() const;

  /// Copy with the estimand block replaced (used for trial evaluation).
  CellParameters with_estimands(const EstimandVector& e) const;
};

/// Two volume-average concentrations and two average concentration fluxes.
struct SimState {
  double cbar_n = 0;  // [mol/m^3]
  double cbar_p = 0;  // [mol/m^3]
  double cfbar_n = 0; // [mol/m^4]
  double cfbar_p = 0; // [mol/m^4]

  bool is_valid(const EstimandVector& e) const noexcept {
    return cbar_n >= 0.0 && cbar_n <= e.c_max_n && cbar_p >= 0.0 && cbar_p <= e.c_max_p;
  }
};

} // namespace cellid
