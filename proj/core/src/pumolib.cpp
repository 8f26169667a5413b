#include "pumsim/pumolib.hpp"

#include <cstring>

#include "pumsim/errors.hpp"

namespace pumsim {

Pumolib::Pumolib(Poc& poc, CycleMeter meter) : Pumolib(poc, meter, Costs()) {}

Pumolib::Pumolib(Poc& poc, CycleMeter meter, Costs costs)
    : poc_(poc), meter_(meter), costs_(costs) {
  if (costs_.poll_cap == 0) raise(Errc::config_error, "poll_cap must be positive");
}

uint64_t Pumolib::poll_until(uint64_t flag_bit) {
  for (uint32_t i = 0; i < costs_.poll_cap; ++i) {
    auto [flags, cycles] = poc_.mmio_load(Poc::kFlag);
    (void)cycles;
    meter_.spend(CycleCat::poll, costs_.poll_loop_extra);
    if (flags & flag_bit) return flags;
  }
  raise(Errc::protocol_violation, "flag poll exceeded its liveness bound");
}

void Pumolib::handshake(const PocInstruction& instr) {
  meter_.spend(CycleCat::compute, costs_.call_overhead);
  auto [lo, hi] = instr.encode();
  poc_.mmio_store(Poc::kInstrLo, lo);
  poc_.mmio_store(Poc::kInstrHi, hi);
  poc_.mmio_store(Poc::kFlag, Poc::kFlagStart);
  uint64_t flags = poll_until(Poc::kFlagAck);
  if (!(flags & Poc::kFlagFinish)) poll_until(Poc::kFlagFinish);
}

PumEffect Pumolib::rowclone(PhysAddr src_row, PhysAddr dst_row) {
  PocInstruction instr{kOpcodeRowClone, src_row, dst_row};
  handshake(instr);
  return poc_.last_report().effect;
}

std::vector<uint8_t> Pumolib::rd_rl(PhysAddr burst_addr) {
  PocInstruction instr{kOpcodeReducedLatencyRead, burst_addr, 0};
  handshake(instr);
  std::vector<uint8_t> out((Poc::kFlag - Poc::kData));
  for (uint32_t i = 0; i < out.size() / 8; ++i) {
    auto [word, cycles] = poc_.mmio_load(Poc::kData + 8 * i);
    (void)cycles;
    std::memcpy(out.data() + 8 * i, &word, 8);
  }
  return out;
}

uint32_t Pumolib::buf_sz() {
  auto [count, cycles] = poc_.mmio_load(Poc::kRngCount);
  (void)cycles;
  return uint32_t(count);
}

uint32_t Pumolib::rand_dram() {
  auto [word, cycles] = poc_.mmio_load(Poc::kRngWord);
  (void)cycles;
  return uint32_t(word);
}

}  // namespace pumsim
