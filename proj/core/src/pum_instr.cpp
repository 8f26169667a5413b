#include "pumsim/pum_instr.hpp"

#include <string>

#include "pumsim/errors.hpp"

namespace pumsim {

// 128-bit word as (lo, hi) = (bits 63:0, bits 127:64):
//   hi[63:56] opcode, hi[55:26] operand A, hi[25:0] | lo[63:60] operand B
//   (operand B bits 29:4 in hi, bits 3:0 at the top of lo), lo[59:0] zero.
std::pair<uint64_t, uint64_t> PocInstruction::encode() const {
  const uint64_t limit = 1ull << kOperandBits;
  if (a >= limit || b >= limit)
    raise(Errc::out_of_range, "operand exceeds " + std::to_string(kOperandBits) + " bits");
  uint64_t hi = (uint64_t(opcode) << 56) | (uint64_t(a) << 26) | (uint64_t(b) >> 4);
  uint64_t lo = (uint64_t(b) & 0xf) << 60;
  return {lo, hi};
}

PocInstruction PocInstruction::decode(uint64_t lo, uint64_t hi) {
  PocInstruction in;
  in.opcode = uint8_t(hi >> 56);
  in.a = (hi >> 26) & ((1ull << kOperandBits) - 1);
  in.b = ((hi & ((1ull << 26) - 1)) << 4) | (lo >> 60);
  return in;
}

}  // namespace pumsim
