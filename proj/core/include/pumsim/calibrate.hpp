#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pumsim/config.hpp"

namespace pumsim {

struct CalibrationCheck {
  std::string name;
  double target = 0;
  double tolerance = 0;  // relative (0.05 == 5%) or absolute for *_pp checks
  double achieved = 0;
  bool percentage = false;  // tolerance is in percentage points
  bool pass = false;
};

struct CalibrationReport {
  CycleModel model;
  SupervisorCosts costs;
  uint32_t demand_overhead_cycles = 0;
  std::vector<CalibrationCheck> checks;
  bool within_tolerance = false;

  // key=value lines loadable back through SimConfig::set
  std::string constants_text() const;
  std::string summary() const;
};

// Fits the cycle-model constants against the published end-to-end anchors:
// the per-word copy cost from the 8 KiB bare-metal speedup and the 58-cycle
// handshake, the store cost at half of it, then syscall/page-walk costs
// against the large no-flush points, and finally the workload-level budgets
// (compile work, fork index cost). Every fit is verified by running the
// real benchmarks at reduced repetitions; Errc::calibration_infeasible if
// no constants land inside the stated tolerances.
CalibrationReport calibrate(const SimConfig& base, uint64_t seed = 42,
                            uint32_t verify_reps = 3);

}  // namespace pumsim
