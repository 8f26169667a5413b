#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pumsim/config.hpp"
#include "pumsim/system.hpp"

namespace pumsim {

// Which path the measured side takes:
//   bare    - raw row-copy handshakes, physical addresses, no OS costs
//   noflush - rcc/rci system calls without cache maintenance
//   flush   - rcc/rci with full flush/invalidate of the operand lines
enum class BenchMode { bare, noflush, flush };

const char* name(BenchMode mode);
BenchMode bench_mode_from(const std::string& text);  // Errc::config_error

struct RunOptions {
  uint64_t seed = 42;
  uint32_t reps = 1000;  // measured repetitions; reported cycles are sums
  std::vector<uint64_t> sizes;            // bytes; empty -> 8 KiB..8 MiB x2
  double dirty_fraction = 0.0;            // flush-mode surcharge in sweeps
  std::vector<double> dirty_fractions;    // flush sweep; empty -> 0,0.1..1.0
  uint64_t flush_sweep_bytes = 8ull << 20;
  std::vector<uint32_t> fork_pages;       // empty -> 8..2048 powers of two
  double trng_period_lo_ns = 220.0;
  double trng_period_hi_ns = 1000.0;
  double trng_period_step_ns = 10.0;
  double trng_sim_ms = 5.0;               // simulated time per period point
  uint64_t trng_test_bits = 1ull << 20;   // extra capture for randomness tests

  void fill_defaults();
};

struct SweepRow {
  uint64_t size_bytes = 0;
  uint64_t baseline_cycles = 0;  // summed over reps
  uint64_t pum_cycles = 0;       // summed over reps, modeled surcharge included
  double speedup() const { return double(baseline_cycles) / double(pum_cycles); }
};

struct FlushRow {
  std::string workload;  // rcc | rci
  uint64_t size_bytes = 0;
  double dirty_fraction = 0.0;
  uint64_t baseline_cycles = 0;
  uint64_t pum_cycles = 0;
  double speedup() const { return double(baseline_cycles) / double(pum_cycles); }
};

struct ForkRow {
  uint32_t pages = 0;
  uint64_t bytes = 0;
  uint64_t baseline_cycles = 0;
  uint64_t pum_cycles = 0;
  double memcpy_fraction_pct = 0.0;  // copy share of the baseline
  double improvement_pct() const {
    return 100.0 * (1.0 - double(pum_cycles) / double(baseline_cycles));
  }
};

struct CompileResult {
  uint32_t chunks = 0;
  uint64_t chunk_bytes = 8192;
  uint64_t baseline_cycles = 0;
  uint64_t pum_cycles = 0;
  double improvement_pct() const {
    return 100.0 * (1.0 - double(pum_cycles) / double(baseline_cycles));
  }
};

struct TrngRow {
  double period_ns = 0;
  uint64_t bits_consumed = 0;
  double sim_ns = 0;
  double throughput_mbps = 0;  // consumed bits over simulated time
};

struct TrngResult {
  std::vector<TrngRow> rows;
  double endpoint_ratio = 0;  // first-period over last-period throughput
  uint64_t tested_bits = 0;
  double monobit_p = 0;
  double runs_p = 0;
};

// Benchmark harness. Characterizes one donor system up front; every sweep
// point runs on a fresh system that adopts the donor's tables, so points
// are independent and deterministic under the run seed. After each measured
// phase the ledger is audited against the clock (Errc::internal_bug on any
// unaccounted cycle).
class Bench {
 public:
  Bench(const SimConfig& cfg, const RunOptions& opts);

  std::vector<SweepRow> copy_sweep(BenchMode mode);
  std::vector<SweepRow> init_sweep(BenchMode mode);
  std::vector<FlushRow> flush_sweep();
  std::vector<ForkRow> forkbench();
  CompileResult compile_bench();
  TrngResult trng_sweep();

  const Supervisor& donor_supervisor() const { return donor_->supervisor(); }
  const RunOptions& options() const { return opts_; }

  static void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);
  static void write_flush_csv(const std::string& path, const std::vector<FlushRow>& rows);
  static void write_fork_csv(const std::string& path, const std::vector<ForkRow>& rows);
  static void write_compile_csv(const std::string& path, const CompileResult& r);
  static void write_trng_csv(const std::string& path, const std::vector<TrngRow>& rows);
  // Gnuplot companion for a CSV written by one of the writers above.
  static void write_plot_script(const std::string& csv_path, const std::string& kind);

 private:
  struct Arrays {  // one sweep point's operands
    uint64_t src_va = 0;
    uint64_t dst_va = 0;
    std::vector<PhysAddr> src_rows;  // row-base physical addresses
    std::vector<PhysAddr> dst_rows;
  };

  std::unique_ptr<System> fresh_system(bool trng_enabled) const;
  Arrays alloc_arrays(System& sys, uint64_t bytes, bool with_source) const;
  uint64_t baseline_copy(System& sys, const Arrays& a, uint64_t bytes) const;
  uint64_t baseline_init(System& sys, const Arrays& a, uint64_t bytes) const;
  uint64_t pum_copy(System& sys, const Arrays& a, uint64_t bytes, BenchMode mode,
                    double dirty_fraction) const;
  uint64_t pum_init(System& sys, const Arrays& a, uint64_t bytes, BenchMode mode,
                    double dirty_fraction) const;
  uint64_t fork_random_phase(System& sys, const Arrays& a, uint64_t bytes,
                             uint64_t phase_seed) const;
  static void audit(const System& sys);

  SimConfig cfg_;
  RunOptions opts_;
  std::unique_ptr<System> donor_;
};

}  // namespace pumsim
