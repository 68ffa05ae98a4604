#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cellid/trace.hpp"
#include "cellid/types.hpp"

namespace cellid {

/// One constant-current segment of the dynamic stress profile, as a fraction
/// of the 1C current. Negative fractions discharge.
struct DstStep {
  double duration_s = 0;
  double c_rate_fraction = 0;
};

struct DstTemplate {
  std::vector<DstStep> steps;

  double period_s() const;
  void validate() const;
};

/// The built-in 20-step, 360 s stress template (net discharge with
/// regenerative pulses), also shipped as config/dst_template.json.
const DstTemplate& default_dst_template();

/// Constant-current discharge at `c_rate`, I = -c_rate * nominal capacity,
/// spanning `max_hours` (the simulation cuts at v_min before the window ends).
CurrentProfile make_cc_discharge(double c_rate, const CellParameters& params,
                                 double max_hours, double dt = 1.0);

/// Tiles the stress template, scaled so the largest pulse equals the 1C
/// current, `repetitions` times.
CurrentProfile make_dst(const CellParameters& params, const DstTemplate& tpl,
                        int repetitions, double dt = 1.0);

struct DatasetSuite {
  Trace fitting;
  std::vector<Trace> validation;
};

/// Which profiles the suite contains and how they are sampled.
struct SuiteSpec {
  std::vector<double> c_rates = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  double fitting_c_rate = 0.5;
  double dt = 1.0;
  double window_margin = 1.3; // CC window = margin / c_rate hours
  int dst_repetitions = 90;
  DstTemplate dst = default_dst_template();

  void validate() const;
};

/// Simulates every profile of the protocol: the fitting trace at the
/// fitting C-rate plus the remaining C-rates and the stress test as
/// validation traces.
DatasetSuite build_suite(const CellParameters& params, const SuiteSpec& spec = {});

/// CSV with header t_s,current_a,voltage_v plus a <stem>.meta.json sidecar
/// holding profile_name, dt_s, termination and (when parseable) c_rate.
void write_trace(const Trace& trace, const std::filesystem::path& csv_path);
Trace read_trace(const std::filesystem::path& csv_path);

/// Path of the metadata sidecar for a trace CSV.
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

} // namespace cellid
