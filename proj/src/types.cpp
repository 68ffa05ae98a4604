#include "cellid/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cellid {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

} // namespace

const std::array<const char*, 11>& EstimandVector::names() {
  static const std::array<const char*, 11> n = {
      "c_n0", "c_p0", "r_eff_n", "r_eff_p", "eps_n", "eps_p",
      "d_n",  "d_p",  "r0",      "c_max_n", "c_max_p"};
  return n;
}

Vector11d EstimandVector::to_vector() const {
  Vector11d v;
  v << c_n0, c_p0, r_eff_n, r_eff_p, eps_n, eps_p, d_n, d_p, r0, c_max_n, c_max_p;
  return v;
}

EstimandVector EstimandVector::from_vector(const Eigen::Ref<const Vector11d>& v) {
  EstimandVector e;
  e.c_n0 = v[0];
  e.c_p0 = v[1];
  e.r_eff_n = v[2];
  e.r_eff_p = v[3];
  e.eps_n = v[4];
  e.eps_p = v[5];
  e.d_n = v[6];
  e.d_p = v[7];
  e.r0 = v[8];
  e.c_max_n = v[9];
  e.c_max_p = v[10];
  return e;
}

bool EstimandVector::is_physical() const noexcept {
  const Vector11d v = to_vector();
  for (int i = 0; i < size; ++i)
    if (!finite_positive(v[i])) return false;
  if (eps_n >= 1.0 || eps_p >= 1.0) return false;
  if (c_n0 >= c_max_n || c_p0 >= c_max_p) return false;
  return true;
}

void EstimandVector::validate() const {
  const Vector11d v = to_vector();
  for (int i = 0; i < size; ++i) {
    if (!finite_positive(v[i])) {
      std::ostringstream os;
      os << "estimands." << names()[i] << ": must be finite and > 0, got " << v[i];
      throw ValidationError(os.str());
    }
  }
  require(eps_n < 1.0, "estimands.eps_n: must be < 1");
  require(eps_p < 1.0, "estimands.eps_p: must be < 1");
  require(c_n0 < c_max_n, "estimands.c_n0: must be below c_max_n");
  require(c_p0 < c_max_p, "estimands.c_p0: must be below c_max_p");
}

void FixedCellConfig::validate() const {
  struct Field {
    const char* name;
    double value;
  };
  const Field geometric[] = {
      {"fixed.r_s_n", r_s_n}, {"fixed.r_s_p", r_s_p}, {"fixed.a_n", a_n},
      {"fixed.a_p", a_p},     {"fixed.l_n", l_n},     {"fixed.l_p", l_p},
      {"fixed.c_e", c_e},     {"fixed.temperature", temperature},
      {"fixed.nominal_capacity_ah", nominal_capacity_ah}};
  for (const auto& f : geometric) {
    if (!finite_positive(f.value)) {
      std::ostringstream os;
      os << f.name << ": must be finite and > 0, got " << f.value;
      throw ValidationError(os.str());
    }
  }
  require(std::isfinite(v_min) && std::isfinite(v_max), "fixed.v_min/v_max: must be finite");
  require(v_min < v_max, "fixed.v_min: must be below v_max");
}

OcpCurve OcpCurve::analytic(const std::array<double, analytic_coeff_count>& coeffs) {
  for (double c : coeffs)
    if (!std::isfinite(c)) throw ValidationError("ocp: analytic coefficients must be finite");
  if (coeffs[3] != 0.0 && coeffs[5] == 0.0)
    throw ValidationError("ocp: tanh width coefficient c5 must be nonzero when c3 != 0");
  OcpCurve u;
  u.kind_ = Kind::analytic;
  u.coeffs_ = coeffs;
  return u;
}

OcpCurve OcpCurve::table(std::vector<double> theta, std::vector<double> potential) {
  require(theta.size() == potential.size(), "ocp: theta and potential lengths differ");
  require(theta.size() >= 2, "ocp: table needs at least two samples");
  for (std::size_t i = 0; i < theta.size(); ++i) {
    require(std::isfinite(theta[i]) && std::isfinite(potential[i]),
            "ocp: table entries must be finite");
    if (i > 0) require(theta[i] > theta[i - 1], "ocp: theta samples must be strictly increasing");
  }
  require(theta.front() <= 0.0 && theta.back() >= 1.0, "ocp: table must cover theta in [0, 1]");
  OcpCurve u;
  u.kind_ = Kind::table;
  u.theta_ = std::move(theta);
  u.potential_ = std::move(potential);
  return u;
}

double OcpCurve::operator()(double theta) const {
  if (kind_ == Kind::analytic) {
    const auto& c = coeffs_;
    double u = c[0] + c[8] * (1.0 - theta);
    if (c[1] != 0.0) u += c[1] * std::exp(-c[2] * theta);
    if (c[3] != 0.0) u += c[3] * std::tanh((theta - c[4]) / c[5]);
    if (c[6] != 0.0) u += c[6] * std::exp(-c[7] * (1.0 - theta));
    return u;
  }
  const double t = std::clamp(theta, theta_.front(), theta_.back());
  const auto hi = std::upper_bound(theta_.begin(), theta_.end(), t);
  const std::size_t i1 = std::min<std::size_t>(
      theta_.size() - 1, static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, hi - theta_.begin())));
  const std::size_t i0 = i1 - 1;
  const double w = (t - theta_[i0]) / (theta_[i1] - theta_[i0]);
  return potential_[i0] + w * (potential_[i1] - potential_[i0]);
}

void CellParameters::validate() const {
  estimands.validate();
  fixed.validate();
  // Probe the OCP curves across [0, 1]; they must be finite everywhere.
  for (int i = 0; i <= 100; ++i) {
    const double theta = static_cast<double>(i) / 100.0;
    if (!std::isfinite(ocp_n(theta)))
      throw ValidationError("ocp_n: not finite at theta = " + std::to_string(theta));
    if (!std::isfinite(ocp_p(theta)))
      throw ValidationError("ocp_p: not finite at theta = " + std::to_string(theta));
  }
}

CellParameters CellParameters::with_estimands(const EstimandVector& e) const {
  CellParameters out = *this;
  out.estimands = e;
  return out;
}

} // namespace cellid
