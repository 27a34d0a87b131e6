#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "omtk/error.hpp"

namespace omtk {

/// Uniform time grid t_n = n * T / K on [0, T], n = 0..K.
struct Grid {
  double horizon = 1.0;
  std::size_t steps = 1;

  /// Requires T / dt to be an integer within 1e-9.
  static Grid uniform(double horizon, double dt) {
    if (!(dt > 0.0) || !(horizon > 0.0) || !std::isfinite(horizon / dt)) {
      throw InputError("grid needs positive finite horizon and step");
    }
    const double ratio = horizon / dt;
    const double k = std::round(ratio);
    if (std::abs(ratio - k) > 1e-9 * std::max(1.0, k) || k < 1.0) {
      throw InputError("horizon " + std::to_string(horizon) +
                       " is not an integer multiple of step " + std::to_string(dt));
    }
    return Grid{horizon, static_cast<std::size_t>(k)};
  }

  static Grid with_steps(double horizon, std::size_t steps) {
    if (!(horizon > 0.0) || steps == 0) throw InputError("grid needs T > 0 and K >= 1");
    return Grid{horizon, steps};
  }

  double dt() const { return horizon / static_cast<double>(steps); }
  std::size_t nodes() const { return steps + 1; }
  double time(std::size_t n) const {
    return horizon * static_cast<double>(n) / static_cast<double>(steps);
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.steps == b.steps && a.horizon == b.horizon;
  }
};

}  // namespace omtk
