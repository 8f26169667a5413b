#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pumsim/address_map.hpp"
#include "pumsim/crf.hpp"
#include "pumsim/dram_device.hpp"
#include "pumsim/pum_instr.hpp"
#include "pumsim/random_buffer.hpp"
#include "pumsim/trace.hpp"

namespace pumsim {

enum class AccessKind { read, write };

struct ControllerConfig {
  TimingParams timing{};   // nominal command timings
  double tcl_ns = 13.75;   // column access latency
  double tburst_ns = 10.0; // one 64 B burst over an 8 B bus at 800 MT/s
  double trefi_ns = 7800.0;
  double trfc_ns = 160.0;
  double cpu_period_ns = 20.0;  // 50 MHz core
  double dram_period_ns = 5.0;  // 200 MHz command clock (4:1)
  // Fixed per-request controller/bus round trip charged on top of the DRAM
  // command sequence. Calibrated; dominates the cache miss penalty.
  uint32_t demand_overhead_cycles = 18;
  // Synchronization delay for POC flag/data updates crossing from the DRAM
  // command clock domain back to the MMIO register file. Sized so that a
  // back-to-back ack poll and finish poll observe the two flags on
  // consecutive reads (the 58-cycle handshake composition).
  double flag_sync_ns = 60.0;
  bool refresh_enabled = true;
  uint32_t random_buffer_bits = 8192;
};

struct AccessResult {
  uint64_t cycles = 0;
};

struct PumReport {
  PumEffect effect = PumEffect::none;
  double accept_ns = 0;  // instruction accepted (ack observable)
  double finish_ns = 0;  // sequence complete (finish + data observable)
  std::vector<uint8_t> data;  // reduced-latency read payload, else empty
};

struct PeriodicStats {
  uint64_t refreshes = 0;
  uint64_t trng_accesses = 0;
  uint64_t trng_bits_produced = 0;
  uint64_t trng_skipped_full = 0;
};

// Command scheduler and the home of the runtime-programmable operation
// machinery: CRF, the periodic refresh/TRNG engines and the random-bit FIFO.
// Demand traffic runs under nominal timings with an open-bank policy; the
// two in-memory operation sequences are the only places violated timings are
// ever issued. Periodic work preempts demand traffic at command boundaries
// (a demand request arriving during a refresh or TRNG access stalls); an
// in-flight multi-command sequence is never torn.
class MemController {
 public:
  MemController(DramDevice& dev, const ControllerConfig& cfg, TraceSink* sink = nullptr);

  const DramAddressLayout& layout() const { return layout_; }
  DramAddress phys_to_dram(PhysAddr addr) const { return layout_.decompose(addr); }
  PhysAddr dram_to_phys(const DramAddress& a) const { return layout_.compose(a); }

  // One burst-granular demand access at absolute time `now_ns`. Catches up
  // periodic work first; the returned cycle count covers any stall behind it
  // plus the nominal command sequence, rounded up to CPU cycles, plus the
  // fixed controller overhead.
  AccessResult demand_access(AccessKind kind, PhysAddr addr, double now_ns,
                             std::span<const uint8_t> wdata = {},
                             std::span<uint8_t> rdata = {});

  // Whole-row helpers for privileged software (characterization, loaders).
  // Timed like a stream of demand accesses; returns total cycles.
  uint64_t write_row(PhysAddr row_base, std::span<const uint8_t> bytes, double now_ns);
  uint64_t read_row(PhysAddr row_base, std::span<uint8_t> bytes, double now_ns);

  // Posted line write used by clflush: the transfer rides the fixed flush
  // cost already charged to the CPU, so it occupies the DRAM timeline but
  // returns no cycles.
  void posted_write(PhysAddr addr, std::span<const uint8_t> wdata, double now_ns);

  // Content-only store that bypasses the timeline entirely; simulation
  // scaffolding (cache snapshots), never an architectural path.
  void poke(PhysAddr addr, std::span<const uint8_t> bytes);

  // Decodes and executes one operation word. RowClone: ACT(src) -> PRE ->
  // ACT(dst) under the CRF's violated tRAS/tRP, then a nominal close.
  // ReducedLatencyRead: ACT under violated tRCD + RD + nominal close.
  PumReport execute_pum(const PocInstruction& instr, double now_ns);

  // Runs the refresh and TRNG engines up to `now_ns`.
  void advance_to(double now_ns);

  Crf& crf() { return crf_; }
  const Crf& crf() const { return crf_; }

  size_t random_word_count(double now_ns);
  uint32_t read_random_word(double now_ns);  // Errc::buffer_underflow when empty
  const RandomBuffer& random_buffer() const { return rng_buffer_; }
  const PeriodicStats& periodic_stats() const { return pstats_; }

  const ControllerConfig& config() const { return cfg_; }
  DramDevice& device() { return dev_; }

  // Harness plumbing between measured phases: close every open bank with a
  // properly timed precharge, free of CPU charge.
  void reset_bank_state(double now_ns);

 private:
  struct BankFront {
    std::optional<uint32_t> open_row;
    double act_ns = -1.0e18;  // last ACT issue time
    double free_ns = 0;       // bank unavailable before this time
  };

  void commit_crf(double now_ns);
  TimingParams violated_timing() const;  // CRF-programmed values + nominals
  bool trng_configured() const;  // period set, four distinct in-range bits
  void do_refresh(double at_ns);
  void do_trng_access(double at_ns);
  void emit_event(const ScheduleEvent& e);
  CommandResult issue(DramCommandKind kind, uint32_t bank, uint32_t row, uint32_t column,
                      double at_ns, const TimingParams& t,
                      std::span<const uint8_t> wdata = {}, std::span<uint8_t> rdata = {});
  uint64_t to_cpu_cycles(double ns) const;

  DramDevice& dev_;
  ControllerConfig cfg_;
  DramAddressLayout layout_;
  TraceSink* sink_;
  std::vector<BankFront> banks_;
  Crf crf_;
  RandomBuffer rng_buffer_;
  PeriodicStats pstats_;
  double next_refresh_ns_;
  double next_trng_ns_ = 0;  // recomputed against the active period
  double periodic_done_ns_ = 0;  // periodic engines caught up to here
};

}  // namespace pumsim
