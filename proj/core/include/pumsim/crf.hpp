#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace pumsim {

// Configuration Register File: 16 user-programmable 32-bit registers that
// parameterize the controller's in-memory operations at run time. Software
// writes are staged; the controller folds them in at its next scheduling
// decision (commit()), never mid-sequence.
//
// Register map (values are raw uint32):
//   0  violated_trcd_cns   tRCD used by reduced-latency reads, centi-ns (1000 == 10 ns)
//   1  violated_tras_cns   tRAS used by the row-copy triple, centi-ns
//   2  violated_trp_cns    tRP  used by the row-copy triple, centi-ns
//   3  trng_period_ns      period of the TRNG engine; 0 disables it
//   4  trng_block_lo       physical address of the TRNG burst, low 32 bits
//   5  trng_block_hi       high bits of the same address
//   6..9  trng_bit0..3     bit positions inside the burst supplying entropy
//   10..15 reserved        read back as written, no effect
class Crf {
 public:
  static constexpr size_t kCount = 16;

  enum Reg : size_t {
    violated_trcd_cns = 0,
    violated_tras_cns = 1,
    violated_trp_cns = 2,
    trng_period_ns = 3,
    trng_block_lo = 4,
    trng_block_hi = 5,
    trng_bit0 = 6,
    trng_bit1 = 7,
    trng_bit2 = 8,
    trng_bit3 = 9,
  };

  void write(size_t idx, uint32_t value);  // staged; Errc::out_of_range on idx
  uint32_t read(size_t idx) const;         // staged view (what software sees)
  uint32_t active(size_t idx) const;       // what the scheduler currently uses

  bool pending() const { return pending_; }
  void commit() {
    active_ = staged_;
    pending_ = false;
  }

  uint64_t active_trng_block() const {
    return (uint64_t(active(trng_block_hi)) << 32) | active(trng_block_lo);
  }

 private:
  std::array<uint32_t, kCount> staged_{};
  std::array<uint32_t, kCount> active_{};
  bool pending_ = false;
};

}  // namespace pumsim
