#pragma once

#include <filesystem>

#include "cellid/harness.hpp"
#include "cellid/objective.hpp"
#include "cellid/optimizers.hpp"
#include "cellid/protocols.hpp"
#include "cellid/types.hpp"

namespace cellid {

/// Bounds factors, penalty and per-method settings from optimizers.json.
struct OptimizerSettings {
  double lo_factor = 0.5;
  double hi_factor = 1.5;
  double penalty_voltage = 10.0;
  ValidationPooling pooling = ValidationPooling::pooled;
  LsConfig ls;
  PsoConfig pso;
  GaConfig ga;
};

CellParameters load_cell_parameters(const std::filesystem::path& path);
DstTemplate load_dst_template(const std::filesystem::path& path);

/// protocol.json; a "dst_template" filename is resolved against the protocol
/// file's directory.
SuiteSpec load_suite_spec(const std::filesystem::path& path);

OptimizerSettings load_optimizer_settings(const std::filesystem::path& path);

/// The three standard files (reference_cell.json, protocol.json,
/// optimizers.json) loaded from one directory.
struct ConfigBundle {
  CellParameters cell;
  SuiteSpec suite;
  OptimizerSettings optimizer;
};

ConfigBundle load_config_dir(const std::filesystem::path& dir);

/// Suite directory layout: one CSV + sidecar per trace plus manifest.json
/// marking exactly one trace role=fitting.
void write_suite(const DatasetSuite& suite, const std::filesystem::path& dir);
DatasetSuite read_suite(const std::filesystem::path& dir);

} // namespace cellid
