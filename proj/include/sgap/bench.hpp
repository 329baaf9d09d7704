#pragma once

#include <cstddef>
#include <vector>

#include "sgap/architecture.hpp"
#include "sgap/dataset.hpp"

namespace sgap {

struct ScalingRow {
  std::size_t workers = 1;
  double seconds = 0.0;
  double speedup = 1.0;     // time at the first entry / time here
  bool identical = true;    // bitwise equal to the first entry's stack
};

/// Times the pre-processing propagation of `arch` for each worker count.
/// Timings are informational; `identical` is the determinism check.
std::vector<ScalingRow> bench_scaling(const Dataset& data, const ArchitectureConfig& arch,
                                      const std::vector<std::size_t>& workers, std::size_t repeats = 3);

}  // namespace sgap
