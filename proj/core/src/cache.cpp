#include "pumsim/cache.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <string>

#include "pumsim/errors.hpp"

namespace pumsim {

namespace {

void check_word(PhysAddr addr, size_t n) {
  bool pow2 = n != 0 && (n & (n - 1)) == 0;
  if (!pow2 || n > 8 || addr % n != 0)
    raise(Errc::granularity_violation,
          "cache access of " + std::to_string(n) + " bytes at 0x" + std::to_string(addr));
}

}  // namespace

Cache::Cache(const CacheConfig& cfg, MemController& ctrl, CycleMeter meter)
    : cfg_(cfg), ctrl_(ctrl), meter_(meter), rng_(cfg.replacement_seed) {
  if (cfg_.ways == 0 || cfg_.line_bytes == 0 || cfg_.capacity_bytes == 0)
    raise(Errc::config_error, "cache sizes must be positive");
  if (!std::has_single_bit(cfg_.line_bytes) || cfg_.line_bytes % 8 != 0)
    raise(Errc::config_error, "line_bytes must be a power of two multiple of 8");
  if (cfg_.capacity_bytes % (uint64_t(cfg_.ways) * cfg_.line_bytes) != 0)
    raise(Errc::config_error, "capacity must divide into ways x line_bytes");
  sets_ = cfg_.capacity_bytes / (cfg_.ways * cfg_.line_bytes);
  if (!std::has_single_bit(sets_)) raise(Errc::config_error, "set count must be a power of two");
  lines_.resize(size_t(sets_) * cfg_.ways);
}

uint32_t Cache::set_of(PhysAddr line_addr) const {
  return uint32_t((line_addr / cfg_.line_bytes) % sets_);
}

uint64_t Cache::tag_of(PhysAddr line_addr) const { return line_addr / cfg_.line_bytes; }

int Cache::find_way(uint32_t set, uint64_t tag) const {
  for (uint32_t w = 0; w < cfg_.ways; ++w) {
    const Line& l = line_at(set, w);
    if (l.valid && l.tag == tag) return int(w);
  }
  return -1;
}

std::pair<int, uint64_t> Cache::fill(PhysAddr line_addr, bool fetch) {
  uint32_t set = set_of(line_addr);
  int victim = -1;
  for (uint32_t w = 0; w < cfg_.ways; ++w) {
    if (!line_at(set, w).valid) {
      victim = int(w);
      break;
    }
  }
  if (victim < 0)
    victim = int(std::uniform_int_distribution<uint32_t>(0, cfg_.ways - 1)(rng_));
  Line& l = line_at(set, victim);
  uint64_t cycles = 0;
  if (l.valid) {
    ++stats_.evictions;
    if (l.dirty) {
      ++stats_.dirty_writebacks;
      PhysAddr va = l.tag * cfg_.line_bytes;
      auto r = ctrl_.demand_access(AccessKind::write, va, meter_.clock.now_ns(), l.data);
      meter_.spend(CycleCat::mem_write, r.cycles);
      cycles += r.cycles;
    }
  }
  ++stats_.misses;
  l.tag = tag_of(line_addr);
  l.valid = true;
  l.dirty = false;
  if (fetch)
    l.data.assign(cfg_.line_bytes, 0);
  else
    l.data.clear();
  auto r = ctrl_.demand_access(AccessKind::read, line_addr, meter_.clock.now_ns(), {},
                               std::span<uint8_t>(l.data));
  meter_.spend(CycleCat::mem_read, r.cycles);
  cycles += r.cycles;
  return {victim, cycles};
}

uint64_t Cache::load(PhysAddr addr, std::span<uint8_t> out) {
  check_word(addr, out.size());
  PhysAddr base = addr & ~PhysAddr(cfg_.line_bytes - 1);
  uint32_t set = set_of(base);
  int way = find_way(set, tag_of(base));
  uint64_t cycles;
  if (way >= 0) {
    ++stats_.hits;
    cycles = cfg_.hit_cycles;
    meter_.spend(CycleCat::cache_hit, cycles);
  } else {
    auto [w, c] = fill(base, true);
    way = w;
    cycles = c;
  }
  Line& l = line_at(set, way);
  if (l.data.empty()) l.data.assign(cfg_.line_bytes, 0);
  std::memcpy(out.data(), l.data.data() + (addr - base), out.size());
  return cycles;
}

uint64_t Cache::store(PhysAddr addr, std::span<const uint8_t> in) {
  check_word(addr, in.size());
  PhysAddr base = addr & ~PhysAddr(cfg_.line_bytes - 1);
  uint32_t set = set_of(base);
  int way = find_way(set, tag_of(base));
  uint64_t cycles;
  if (way >= 0) {
    ++stats_.hits;
    cycles = cfg_.hit_cycles;
    meter_.spend(CycleCat::cache_hit, cycles);
  } else {
    auto [w, c] = fill(base, true);  // write-allocate: read the line first
    way = w;
    cycles = c;
  }
  Line& l = line_at(set, way);
  if (l.data.empty()) l.data.assign(cfg_.line_bytes, 0);
  std::memcpy(l.data.data() + (addr - base), in.data(), in.size());
  l.dirty = true;
  return cycles;
}

uint64_t Cache::access_line_run(AccessKind kind, PhysAddr line_base, uint32_t words) {
  if (line_base % cfg_.line_bytes != 0 || words == 0 || words > cfg_.line_bytes / 8)
    raise(Errc::granularity_violation, "line run must stay within one line");
  uint32_t set = set_of(line_base);
  int way = find_way(set, tag_of(line_base));
  uint64_t cycles = 0;
  uint32_t hit_accesses = words;
  if (way < 0) {
    auto [w, c] = fill(line_base, false);  // content-agnostic: no payload fetched
    way = w;
    cycles = c;
    hit_accesses = words - 1;  // the first access of the run was the miss
  }
  stats_.hits += hit_accesses;
  uint64_t hit_run = uint64_t(cfg_.hit_cycles) * hit_accesses;
  meter_.spend(CycleCat::cache_hit, hit_run);
  cycles += hit_run;
  if (kind == AccessKind::write) line_at(set, way).dirty = true;
  return cycles;
}

uint64_t Cache::clflush(PhysAddr addr) {
  PhysAddr base = addr & ~PhysAddr(cfg_.line_bytes - 1);
  uint32_t set = set_of(base);
  int way = find_way(set, tag_of(base));
  ++stats_.flushes;
  if (way >= 0) {
    Line& l = line_at(set, way);
    if (l.dirty) {
      ++stats_.flush_writebacks;
      ctrl_.posted_write(base, l.data, meter_.clock.now_ns());
      l.valid = false;
      l.dirty = false;
      l.data.clear();
      meter_.spend(CycleCat::flush_dirty, cfg_.clflush_dirty_cycles);
      return cfg_.clflush_dirty_cycles;
    }
    l.valid = false;
    l.data.clear();
  }
  meter_.spend(CycleCat::flush_clean, cfg_.clflush_clean_cycles);
  return cfg_.clflush_clean_cycles;
}

void Cache::reset(std::optional<uint64_t> reseed) {
  for (Line& l : lines_) {
    // keep memory contents coherent, but off the timeline: a snapshot reset
    // must not leave a write burst queued in front of whatever runs next
    if (l.valid && l.dirty) ctrl_.poke(l.tag * cfg_.line_bytes, l.data);
    l = Line{};
  }
  if (reseed) rng_.seed(*reseed);
}

bool Cache::probe(PhysAddr addr, bool* dirty) const {
  PhysAddr base = addr & ~PhysAddr(cfg_.line_bytes - 1);
  int way = find_way(set_of(base), tag_of(base));
  if (way < 0) {
    if (dirty) *dirty = false;
    return false;
  }
  if (dirty) *dirty = line_at(set_of(base), way).dirty;
  return true;
}

}  // namespace pumsim
