#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pumsim/cache.hpp"
#include "pumsim/clock.hpp"
#include "pumsim/mem_controller.hpp"
#include "pumsim/pumolib.hpp"
#include "pumsim/tables.hpp"

namespace pumsim {

enum class FlushMode { none, full };

struct CharacterizeOptions {
  // randomized copy verifications applied to each sampled pair of a
  // discovered group, on top of the single-trial grouping scan
  uint32_t trials = 1000;
  uint32_t sampled_pairs_per_group = 1;
  uint32_t window_rows = 1024;  // max probe distance while grouping
  uint64_t data_seed = 0xda7a;
};

// Software-side costs, calibrated against the end-to-end targets.
struct SupervisorCosts {
  uint64_t syscall_entry = 195;
  uint64_t page_walk = 7;
  uint64_t table_lookup = 70;  // SAMT/IRT access
};

// The privileged runtime: characterizes the device through the regular
// operation path (never by peeking at the model), owns the SAMT/AIT/IRT
// tables and the page table, and exposes the two in-memory system calls.
class Supervisor {
 public:
  Supervisor(MemController& ctrl, Cache& cache, Pumolib& pum, CycleMeter meter,
             SupervisorCosts costs = {});

  // Discovers which rows can row-copy to which by trying it: a scan of
  // windowed row pairs with randomized data, verified by direct reads. Marks
  // the highest row of each group as that group's zero initializer (excluded
  // from allocation), zero-fills it, and builds the SAMT.
  void characterize_subarrays(const CharacterizeOptions& opts = {});

  // Measures per-bit flip rates of `block` over `trials` reduced-latency
  // reads against known data; cells inside [lo, hi] qualify. Programs the
  // CRF with the block and the first four qualifying bit positions and
  // returns all of them. Errc::no_trng_cells if fewer than four qualify.
  std::vector<uint32_t> characterize_trng_cells(PhysAddr block, uint32_t trials = 10000,
                                                double lo = 0.40, double hi = 0.60);

  // Allocates `bytes` (multiple of 8 KiB) of virtual memory laid out for
  // row-granular copy: 4 KiB blocks i and i + bytes/8192 are the two halves
  // of one DRAM row; consecutive block indices stripe across banks; each
  // bank serves one subarray per allocation ID (bound on first use).
  uint64_t alloc_align(uint64_t bytes, uint32_t id);

  // Row-granular copy / zero-init system calls. Return cycles spent,
  // including syscall entry, page walks, optional flushes and handshakes.
  uint64_t rcc(uint64_t dst_va, uint64_t src_va, uint64_t bytes, FlushMode mode);
  uint64_t rci(uint64_t dst_va, uint64_t bytes, FlushMode mode);

  // Process-level memory access: translate + cache. 8-byte granular spans.
  void cpu_store(uint64_t va, std::span<const uint8_t> bytes);
  void cpu_load(uint64_t va, std::span<uint8_t> bytes);

  bool characterized() const { return !samt_.empty(); }
  const Samt& samt() const { return samt_; }
  const Ait& ait() const { return ait_; }
  const Irt& irt() const { return irt_; }
  const PageTable& page_table() const { return pages_; }
  const SupervisorCosts& costs() const { return costs_; }

  // Characterization results are reusable across runs of one device
  // configuration; the key ties a dump to (geometry, weak_cell_seed).
  std::string table_key() const;
  void save_tables(std::ostream& out) const;
  bool load_tables(std::istream& in);  // false on key mismatch
  void adopt_tables(const Supervisor& donor);

 private:
  struct RowRef {
    uint32_t bank = 0;
    uint32_t row = 0;
    PhysAddr col0 = 0;   // first-half block
    PhysAddr half = 0;   // second-half block
  };

  bool verify_copy_pair(uint32_t bank, uint32_t src_row, uint32_t dst_row);
  PhysAddr row_phys(uint32_t bank, uint32_t row) const;
  PhysAddr initializer_of(uint32_t bank, uint32_t subarray) const;
  // Walks `bytes` of one operand, pairing half-rows; charges page walks.
  std::vector<RowRef> resolve_rows(uint64_t va, uint64_t bytes);
  void flush_row_lines(const RowRef& r);

  MemController& ctrl_;
  Cache& cache_;
  Pumolib& pum_;
  CycleMeter meter_;
  SupervisorCosts costs_;

  Samt samt_;
  Ait ait_;
  Irt irt_;
  PageTable pages_;
  std::vector<std::vector<PhysAddr>> initializers_;  // [bank][subarray] row base
  uint64_t va_bump_ = 0x10000000;
  std::mt19937_64 data_rng_{0xda7a};
};

}  // namespace pumsim
