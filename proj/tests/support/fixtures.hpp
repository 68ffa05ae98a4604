#pragma once

#include "cellid/config_io.hpp"

namespace cellid::testing {

inline const ConfigBundle& config_bundle() {
  static const ConfigBundle bundle = load_config_dir(CELLID_CONFIG_DIR);
  return bundle;
}

inline const CellParameters& reference_cell() { return config_bundle().cell; }

} // namespace cellid::testing
