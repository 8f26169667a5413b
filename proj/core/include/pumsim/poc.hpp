#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "pumsim/clock.hpp"
#include "pumsim/mem_controller.hpp"
#include "pumsim/pum_instr.hpp"

namespace pumsim {

enum class HandshakeState { idle, started, acked, finished };

const char* name(HandshakeState s);

// Memory-mapped operations controller: the software-visible front end of the
// in-memory operation machinery. It holds a 128-bit instruction register, a
// 512-bit data register and a 3-bit flag register, mapped into an
// uncacheable window above DRAM. Every access costs a fixed uncached-MMIO
// latency and bypasses the cache.
//
// Handshake: software writes the instruction halves, then sets flag.start.
// The controller raises flag.ack when it accepts the instruction and
// flag.finish when the command sequence completes; a flag read that observes
// finish clears the register back to idle (read-to-clear), so the protocol
// per operation is exactly start -> ack -> finish.
class Poc {
 public:
  struct Config {
    PhysAddr window_base = 0x40000000;  // directly above a 1 GiB device
    uint32_t mmio_cycles = 5;           // per 64-bit uncached access
  };

  // 64-bit register offsets within the window
  static constexpr uint32_t kInstrLo = 0x00;
  static constexpr uint32_t kInstrHi = 0x08;
  static constexpr uint32_t kData = 0x10;      // 0x10..0x48: 8 x 64-bit
  static constexpr uint32_t kFlag = 0x50;      // bit0 start, bit1 ack, bit2 finish
  static constexpr uint32_t kRngCount = 0x58;  // random words available (read)
  static constexpr uint32_t kRngWord = 0x60;   // dequeue one 32-bit word (read)
  static constexpr uint32_t kWindowBytes = 0x68;

  static constexpr uint64_t kFlagStart = 1u << 0;
  static constexpr uint64_t kFlagAck = 1u << 1;
  static constexpr uint64_t kFlagFinish = 1u << 2;

  Poc(MemController& ctrl, CycleMeter meter);  // default config
  Poc(MemController& ctrl, CycleMeter meter, Config cfg);

  uint64_t mmio_store(uint32_t offset, uint64_t value);      // -> cycles
  std::pair<uint64_t, uint64_t> mmio_load(uint32_t offset);  // -> {value, cycles}

  HandshakeState state() const;  // as of the current clock
  const PumReport& last_report() const { return report_; }
  const std::vector<HandshakeState>& transitions() const { return transitions_; }
  const Config& config() const { return cfg_; }

 private:
  void check_offset(uint32_t offset) const;
  HandshakeState hardware_state() const;  // from timestamps, ignores read-to-clear
  void log_up_to(HandshakeState s);

  MemController& ctrl_;
  CycleMeter meter_;
  Config cfg_;

  uint64_t instr_lo_ = 0, instr_hi_ = 0;
  std::array<uint64_t, 8> data_{};       // current data register
  std::array<uint64_t, 8> data_prev_{};  // contents before the in-flight op
  bool in_flight_ = false;               // start accepted, finish not yet observed
  PumReport report_;
  std::vector<HandshakeState> transitions_{HandshakeState::idle};
};

}  // namespace pumsim
