#include "cellid/protocols.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cellid/spm.hpp"

namespace cellid {

using nlohmann::json;

double DstTemplate::period_s() const {
  double total = 0;
  for (const auto& s : steps) total += s.duration_s;
  return total;
}

void DstTemplate::validate() const {
  if (steps.empty()) throw ValidationError("dst template: must have at least one step");
  double peak = 0;
  double net = 0;
  for (const auto& s : steps) {
    if (!(s.duration_s > 0.0))
      throw ValidationError("dst template: step durations must be > 0");
    if (!std::isfinite(s.c_rate_fraction))
      throw ValidationError("dst template: step fractions must be finite");
    peak = std::max(peak, std::abs(s.c_rate_fraction));
    net += s.duration_s * s.c_rate_fraction;
  }
  if (!(peak > 0.0)) throw ValidationError("dst template: all steps are zero current");
  if (!(net < 0.0)) throw ValidationError("dst template: must be net discharge");
}

const DstTemplate& default_dst_template() {
  static const DstTemplate tpl = {{
      {16, 0.0},    {28, -0.125}, {12, -0.25},  {8, 0.125},  {16, 0.0},
      {24, -0.125}, {12, -0.25},  {8, 0.125},   {16, 0.0},   {24, -0.125},
      {12, -0.25},  {8, 0.125},   {16, 0.0},    {36, -0.125}, {8, -0.5},
      {24, -0.625}, {8, 0.25},    {32, -0.25},  {8, -1.0},   {44, 0.0},
  }};
  return tpl;
}

CurrentProfile make_cc_discharge(double c_rate, const CellParameters& params,
                                 double max_hours, double dt) {
  if (!(c_rate > 0.0)) throw ValidationError("c_rate: must be > 0");
  if (!(max_hours > 0.0)) throw ValidationError("max_hours: must be > 0");
  if (!(dt > 0.0)) throw ValidationError("dt: must be > 0");

  const double amps = -c_rate * params.fixed.nominal_capacity_ah;
  const auto n = static_cast<Eigen::Index>(std::llround(max_hours * 3600.0 / dt));
  if (n < 1) throw ValidationError("profile window shorter than one sample");

  CurrentProfile p;
  std::ostringstream name;
  name << "cc_" << c_rate << "C";
  p.name = name.str();
  p.dt = dt;
  p.current = Eigen::VectorXd::Constant(n, amps);
  return p;
}

CurrentProfile make_dst(const CellParameters& params, const DstTemplate& tpl,
                        int repetitions, double dt) {
  if (repetitions < 1) throw ValidationError("dst repetitions: must be >= 1");
  if (!(dt > 0.0)) throw ValidationError("dt: must be > 0");
  tpl.validate();

  const double one_c = params.fixed.nominal_capacity_ah;
  double peak = 0;
  for (const auto& s : tpl.steps) peak = std::max(peak, std::abs(s.c_rate_fraction));
  const double scale = one_c / peak; // largest pulse = 1C-equivalent current

  const double period = tpl.period_s();
  const auto n = static_cast<Eigen::Index>(std::llround(period * repetitions / dt));

  CurrentProfile p;
  p.name = "dst";
  p.dt = dt;
  p.current.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    double phase = std::fmod(static_cast<double>(k) * dt, period);
    double amps = 0;
    for (const auto& s : tpl.steps) {
      if (phase < s.duration_s) {
        amps = s.c_rate_fraction * scale;
        break;
      }
      phase -= s.duration_s;
    }
    p.current[k] = amps;
  }
  return p;
}

void SuiteSpec::validate() const {
  if (!(dt > 0.0)) throw ValidationError("suite.dt: must be > 0");
  if (!(window_margin >= 1.0)) throw ValidationError("suite.window_margin: must be >= 1");
  if (dst_repetitions < 1) throw ValidationError("suite.dst_repetitions: must be >= 1");
  if (c_rates.empty()) throw ValidationError("suite.c_rates: must be non-empty");
  bool has_fitting = false;
  for (double r : c_rates) {
    if (!(r > 0.0)) throw ValidationError("suite.c_rates: rates must be > 0");
    if (r == fitting_c_rate) has_fitting = true;
  }
  if (!has_fitting)
    throw ValidationError("suite.fitting_c_rate: must be one of suite.c_rates");
  dst.validate();
}

DatasetSuite build_suite(const CellParameters& params, const SuiteSpec& spec) {
  spec.validate();
  params.validate();

  DatasetSuite suite;
  for (double rate : spec.c_rates) {
    const auto profile =
        make_cc_discharge(rate, params, spec.window_margin / rate, spec.dt);
    Trace trace = simulate_profile(params, profile);
    if (rate == spec.fitting_c_rate)
      suite.fitting = std::move(trace);
    else
      suite.validation.push_back(std::move(trace));
  }
  const auto dst = make_dst(params, spec.dst, spec.dst_repetitions, spec.dt);
  suite.validation.push_back(simulate_profile(params, dst));
  return suite;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  p.replace_extension(".meta.json");
  return p;
}

namespace {

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Parses "cc_<rate>C" profile names back to a rate.
bool c_rate_from_name(const std::string& name, double& rate) {
  if (name.rfind("cc_", 0) != 0 || name.empty() || name.back() != 'C') return false;
  try {
    std::size_t used = 0;
    rate = std::stod(name.substr(3), &used);
    return used == name.size() - 4;
  } catch (const std::exception&) {
    return false;
  }
}

} // namespace

void write_trace(const Trace& trace, const std::filesystem::path& csv_path) {
  if (trace.size() == 0) throw ValidationError("empty dataset");
  if (!(trace.dt > 0.0)) throw ValidationError("trace.dt: must be > 0");

  std::ofstream csv(csv_path);
  if (!csv) throw IoError("cannot open for writing: " + csv_path.string());
  csv << "t_s,current_a,voltage_v\n";
  for (Eigen::Index k = 0; k < trace.size(); ++k) {
    csv << format_value(trace.time[k]) << ',' << format_value(trace.current[k]) << ','
        << format_value(trace.voltage[k]) << '\n';
  }
  if (!csv.good()) throw IoError("write failed: " + csv_path.string());
  csv.close();

  json meta;
  meta["profile_name"] = trace.profile_name;
  meta["dt_s"] = trace.dt;
  meta["termination"] = to_string(trace.termination);
  double rate = 0;
  if (c_rate_from_name(trace.profile_name, rate)) meta["c_rate"] = rate;

  const auto meta_path = sidecar_path(csv_path);
  std::ofstream mf(meta_path);
  if (!mf) throw IoError("cannot open for writing: " + meta_path.string());
  mf << meta.dump(2) << '\n';
  if (!mf.good()) throw IoError("write failed: " + meta_path.string());
}

Trace read_trace(const std::filesystem::path& csv_path) {
  std::ifstream csv(csv_path);
  if (!csv) throw IoError("cannot open: " + csv_path.string());

  std::string line;
  if (!std::getline(csv, line)) throw IoError("empty dataset: " + csv_path.string());
  if (line == "t_s,current_a,voltage_v\r") line.pop_back();
  if (line != "t_s,current_a,voltage_v")
    throw IoError("malformed header in " + csv_path.string() + ": " + line);

  std::vector<double> t, i, v;
  std::size_t row = 1;
  while (std::getline(csv, line)) {
    ++row;
    if (line.empty()) continue;
    double fields[3];
    const char* p = line.c_str();
    for (int f = 0; f < 3; ++f) {
      char* end = nullptr;
      fields[f] = std::strtod(p, &end);
      const bool last = f == 2;
      if (end == p || (!last && *end != ',') || (last && *end != '\0' && *end != '\r')) {
        std::ostringstream os;
        os << "unparseable number at " << csv_path.string() << ":" << row;
        throw IoError(os.str());
      }
      p = last ? end : end + 1;
    }
    t.push_back(fields[0]);
    i.push_back(fields[1]);
    v.push_back(fields[2]);
  }
  if (t.empty()) throw IoError("empty dataset: " + csv_path.string());

  const auto meta_path = sidecar_path(csv_path);
  std::ifstream mf(meta_path);
  if (!mf) throw IoError("missing sidecar: " + meta_path.string());
  json meta;
  try {
    mf >> meta;
  } catch (const json::exception& ex) {
    throw IoError("malformed sidecar " + meta_path.string() + ": " + ex.what());
  }

  Trace trace;
  try {
    trace.profile_name = meta.at("profile_name").get<std::string>();
    trace.dt = meta.at("dt_s").get<double>();
    trace.termination = termination_from_string(meta.at("termination").get<std::string>());
  } catch (const json::exception& ex) {
    throw IoError("sidecar schema error in " + meta_path.string() + ": " + ex.what());
  }
  if (!(trace.dt > 0.0)) throw IoError("sidecar dt_s must be > 0: " + meta_path.string());

  const auto n = static_cast<Eigen::Index>(t.size());
  trace.time = Eigen::Map<const Eigen::VectorXd>(t.data(), n);
  trace.current = Eigen::Map<const Eigen::VectorXd>(i.data(), n);
  trace.voltage = Eigen::Map<const Eigen::VectorXd>(v.data(), n);

  const double tol = 1e-6 * trace.dt;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (std::abs(trace.time[k] - (trace.time[0] + static_cast<double>(k) * trace.dt)) > tol) {
      std::ostringstream os;
      os << "non-uniform timestamps in " << csv_path.string() << " at row " << (k + 2);
      throw IoError(os.str());
    }
    if (!std::isfinite(trace.voltage[k]))
      throw IoError("non-finite voltage in " + csv_path.string());
  }
  return trace;
}

} // namespace cellid
