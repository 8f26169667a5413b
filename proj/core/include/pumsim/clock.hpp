#pragma once

#include <array>
#include <cstdint>

namespace pumsim {

// One master clock counted in CPU cycles (50 MHz core -> 20 ns per cycle by
// default). The DRAM command clock runs at a fixed integer multiple of it
// (4x: 200 MHz); DRAM-side durations are kept in nanoseconds and rounded up
// to whole CPU cycles where they meet the core.
class SimClock {
 public:
  explicit SimClock(double cpu_period_ns = 20.0) : period_ns_(cpu_period_ns) {}

  uint64_t now() const { return cycles_; }
  double now_ns() const { return double(cycles_) * period_ns_; }
  double cpu_period_ns() const { return period_ns_; }
  void advance(uint64_t cycles) { cycles_ += cycles; }

 private:
  uint64_t cycles_ = 0;
  double period_ns_;
};

// Where the cycles went. Every advance of the master clock is booked under
// exactly one category, so reported totals can be audited against the clock.
// modeled_dirty_writeback is the one category that does NOT advance the
// clock: it carries the analytic dirty-fraction surcharge of the flush
// sweeps (see Bench::flush_sweep).
enum class CycleCat : size_t {
  compute,
  cache_hit,
  mem_read,
  mem_write,
  mmio,
  poll,
  flush_clean,
  flush_dirty,
  syscall,
  page_walk,
  table_lookup,
  modeled_dirty_writeback,
  count
};

const char* name(CycleCat cat);

class CycleLedger {
 public:
  void add(CycleCat cat, uint64_t cycles) { at_[size_t(cat)] += cycles; }
  uint64_t at(CycleCat cat) const { return at_[size_t(cat)]; }
  uint64_t total() const {
    uint64_t t = 0;
    for (auto v : at_) t += v;
    return t;
  }
  // total excluding categories that do not move the clock
  uint64_t clocked_total() const {
    return total() - at(CycleCat::modeled_dirty_writeback);
  }
  void reset() { at_.fill(0); }

 private:
  std::array<uint64_t, size_t(CycleCat::count)> at_{};
};

// Binds clock and ledger so that every costed simulation step stays
// auditable: spend() moves both, book() records modeled costs only.
struct CycleMeter {
  SimClock& clock;
  CycleLedger& ledger;

  void spend(CycleCat cat, uint64_t cycles) {
    clock.advance(cycles);
    ledger.add(cat, cycles);
  }
  void book(CycleCat cat, uint64_t cycles) { ledger.add(cat, cycles); }
};

}  // namespace pumsim
