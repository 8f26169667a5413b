#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "pumsim/cache.hpp"
#include "pumsim/cycle_model.hpp"
#include "pumsim/dram_device.hpp"
#include "pumsim/mem_controller.hpp"
#include "pumsim/poc.hpp"
#include "pumsim/pumolib.hpp"
#include "pumsim/supervisor.hpp"

namespace pumsim {

// Whole-system configuration, loadable from a flat key=value file.
// Unknown keys are rejected; '#' starts a comment.
struct SimConfig {
  DeviceConfig device;
  ControllerConfig controller;
  CacheConfig cache;
  Poc::Config poc;
  Pumolib::Costs pumolib;
  SupervisorCosts supervisor;
  CycleModel cycle_model;

  // CRF programming applied at system construction
  double violated_tras_ns = 10.0;
  double violated_trp_ns = 10.0;
  double violated_trcd_ns = 5.0;
  double trng_period_ns = 220.0;  // 0 disables the periodic engine

  void validate() const;

  static SimConfig from_file(const std::string& path);
  static SimConfig from_text(const std::string& text);
  // Applies one "key=value" assignment; raises Errc::config_error on
  // unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);

  std::string to_text() const;
};

std::ostream& operator<<(std::ostream& os, const SimConfig& cfg);

}  // namespace pumsim
