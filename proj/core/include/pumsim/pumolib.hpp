#pragma once

#include <cstdint>
#include <vector>

#include "pumsim/clock.hpp"
#include "pumsim/poc.hpp"

namespace pumsim {

// Bare-metal library over the MMIO window: encodes operation words, drives
// the start/ack/finish handshake and pulls TRNG words. All costs are CPU
// cycles on the calling core; with the default constants one full row-copy
// call -- two instruction stores, the flag store, one ack poll, one finish
// poll and the software wrapper itself -- comes to exactly 58 cycles.
class Pumolib {
 public:
  struct Costs {
    uint32_t call_overhead = 31;  // prologue, operand marshalling, 128-bit encode
    uint32_t poll_loop_extra = 1; // branch per poll iteration on top of the load
    uint32_t poll_cap = 1024;     // liveness bound on poll iterations
  };

  Pumolib(Poc& poc, CycleMeter meter);  // default costs
  Pumolib(Poc& poc, CycleMeter meter, Costs costs);

  // Copies the 8 KiB row holding `src_row` onto the row holding `dst_row`
  // (both physical). Returns the device-reported effect; rowclone_failed
  // means the operands did not share a subarray and nothing moved.
  PumEffect rowclone(PhysAddr src_row, PhysAddr dst_row);

  // Reduced-tRCD read of one 64-byte burst; weak cells may flip.
  std::vector<uint8_t> rd_rl(PhysAddr burst_addr);

  uint32_t buf_sz();     // random words available; one MMIO load
  uint32_t rand_dram();  // dequeue one word; Errc::buffer_underflow when empty

  const Costs& costs() const { return costs_; }

 private:
  void handshake(const PocInstruction& instr);  // stores + ack/finish polls
  uint64_t poll_until(uint64_t flag_bit);

  Poc& poc_;
  CycleMeter meter_;
  Costs costs_;
};

}  // namespace pumsim
