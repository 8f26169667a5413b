#pragma once

#include <memory>

#include "pumsim/cache.hpp"
#include "pumsim/clock.hpp"
#include "pumsim/config.hpp"
#include "pumsim/dram_device.hpp"
#include "pumsim/mem_controller.hpp"
#include "pumsim/poc.hpp"
#include "pumsim/pumolib.hpp"
#include "pumsim/supervisor.hpp"
#include "pumsim/trace.hpp"

namespace pumsim {

// Fully wired simulated machine: CPU clock + ledger, cache in front of the
// memory controller, the command interface mapped at its MMIO window, the
// runtime library on top and the supervisor owning the alignment tables.
// The CRF is programmed from the config at construction.
class System {
 public:
  explicit System(SimConfig cfg, TraceSink* sink = nullptr);

  SimClock& clock() { return clock_; }
  const SimClock& clock() const { return clock_; }
  CycleLedger& ledger() { return ledger_; }
  const CycleLedger& ledger() const { return ledger_; }
  CycleMeter& meter() { return meter_; }
  DramDevice& device() { return *device_; }
  MemController& controller() { return *ctrl_; }
  Poc& poc() { return *poc_; }
  Cache& cache() { return *cache_; }
  Pumolib& pumolib() { return *pumolib_; }
  Supervisor& supervisor() { return *supervisor_; }
  const SimConfig& config() const { return cfg_; }

  // Burns pure CPU cycles (ALU work between memory accesses).
  void compute(uint64_t cycles) { meter_.spend(CycleCat::compute, cycles); }

 private:
  SimConfig cfg_;
  SimClock clock_;
  CycleLedger ledger_;
  CycleMeter meter_;
  std::unique_ptr<DramDevice> device_;
  std::unique_ptr<MemController> ctrl_;
  std::unique_ptr<Poc> poc_;
  std::unique_ptr<Cache> cache_;
  std::unique_ptr<Pumolib> pumolib_;
  std::unique_ptr<Supervisor> supervisor_;
};

}  // namespace pumsim
