#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "pumsim/clock.hpp"
#include "pumsim/mem_controller.hpp"

namespace pumsim {

struct CacheConfig {
  uint32_t capacity_bytes = 16384;
  uint32_t ways = 4;
  uint32_t line_bytes = 64;
  uint64_t replacement_seed = 0x51ab;
  uint32_t hit_cycles = 1;
  // clflush: measured end-to-end costs of the flush instruction. A dirty
  // line is written back and invalidated; clean and absent lines cost the
  // same (the lookup dominates).
  uint32_t clflush_dirty_cycles = 45;
  uint32_t clflush_clean_cycles = 6;
};

struct CacheStats {
  uint64_t hits = 0;
  uint64_t misses = 0;
  uint64_t evictions = 0;
  uint64_t dirty_writebacks = 0;  // evictions that wrote a line to memory
  uint64_t flushes = 0;
  uint64_t flush_writebacks = 0;  // dirty clflushes
};

// Physically-addressed write-back write-allocate cache, random replacement
// (seeded). Lines hold real data: stores land here and reach DRAM only on
// eviction or explicit clflush, so the stale-memory hazard that in-memory
// copy creates for unflushed data is reproduced, not approximated.
class Cache {
 public:
  Cache(const CacheConfig& cfg, MemController& ctrl, CycleMeter meter);

  // word-granular CPU access (8 bytes, naturally aligned); returns cycles
  uint64_t load(PhysAddr addr, std::span<uint8_t> out);
  uint64_t store(PhysAddr addr, std::span<const uint8_t> in);

  // Benchmark fast path: `words` consecutive 8-byte accesses within the one
  // line starting at `line_base`. State- and cost-exact for streaming loops
  // (fill, eviction, dirtying), content-agnostic (no payload moves on
  // store). Returns cycles.
  uint64_t access_line_run(AccessKind kind, PhysAddr line_base, uint32_t words);

  // 45 cycles dirty (write back + invalidate), 6 clean or absent.
  uint64_t clflush(PhysAddr addr);

  // Harness reset between measured runs: write dirty lines back and drop
  // everything, free of charge, optionally reseeding replacement.
  void reset(std::optional<uint64_t> reseed = std::nullopt);

  bool probe(PhysAddr addr, bool* dirty = nullptr) const;
  const CacheStats& stats() const { return stats_; }
  const CacheConfig& config() const { return cfg_; }
  uint32_t sets() const { return sets_; }

 private:
  struct Line {
    uint64_t tag = 0;
    bool valid = false;
    bool dirty = false;
    std::vector<uint8_t> data;
  };

  Line& line_at(uint32_t set, uint32_t way) { return lines_[size_t(set) * cfg_.ways + way]; }
  const Line& line_at(uint32_t set, uint32_t way) const {
    return lines_[size_t(set) * cfg_.ways + way];
  }
  uint32_t set_of(PhysAddr line_addr) const;
  uint64_t tag_of(PhysAddr line_addr) const;
  int find_way(uint32_t set, uint64_t tag) const;
  // Brings the line in (evicting if needed); returns (way, cycles spent).
  // fetch=false leaves the line content-agnostic (no payload held).
  std::pair<int, uint64_t> fill(PhysAddr line_addr, bool fetch);

  CacheConfig cfg_;
  MemController& ctrl_;
  CycleMeter meter_;
  uint32_t sets_;
  std::vector<Line> lines_;
  std::mt19937_64 rng_;
  CacheStats stats_;
};

}  // namespace pumsim
