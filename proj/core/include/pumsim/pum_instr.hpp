#pragma once

#include <cstdint>
#include <utility>

#include "pumsim/address_map.hpp"

namespace pumsim {

inline constexpr uint8_t kOpcodeRowClone = 0x01;
inline constexpr uint8_t kOpcodeReducedLatencyRead = 0x02;

// 128-bit operation word, exposed to software as two 64-bit MMIO registers.
// Layout, bit 127 = MSB:
//   [127:120] opcode        0x01 row copy, 0x02 reduced-latency read
//   [119:90]  operand A     30-bit physical address (source / target burst)
//   [89:60]   operand B     30-bit physical address (destination)
//   [59:0]    reserved      written as zero, ignored on decode
struct PocInstruction {
  uint8_t opcode = 0;
  PhysAddr a = 0;
  PhysAddr b = 0;

  static constexpr uint32_t kOperandBits = 30;

  // (lo, hi) halves; Errc::out_of_range if an operand exceeds 30 bits.
  std::pair<uint64_t, uint64_t> encode() const;
  static PocInstruction decode(uint64_t lo, uint64_t hi);

  bool operator==(const PocInstruction&) const = default;
};

}  // namespace pumsim
