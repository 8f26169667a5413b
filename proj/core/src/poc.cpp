#include "pumsim/poc.hpp"

#include <cstring>
#include <string>

#include "pumsim/errors.hpp"

namespace pumsim {

namespace {
constexpr double kTimeEps = 1e-9;
}

const char* name(HandshakeState s) {
  switch (s) {
    case HandshakeState::idle: return "idle";
    case HandshakeState::started: return "started";
    case HandshakeState::acked: return "acked";
    case HandshakeState::finished: return "finished";
  }
  return "?";
}

Poc::Poc(MemController& ctrl, CycleMeter meter) : Poc(ctrl, meter, Config()) {}

Poc::Poc(MemController& ctrl, CycleMeter meter, Config cfg)
    : ctrl_(ctrl), meter_(meter), cfg_(cfg) {
  if (cfg_.mmio_cycles == 0) raise(Errc::config_error, "mmio_cycles must be positive");
}

void Poc::check_offset(uint32_t offset) const {
  if (offset % 8 != 0 || offset >= kWindowBytes)
    raise(Errc::unmapped_offset, "offset 0x" + std::to_string(offset));
}

HandshakeState Poc::hardware_state() const {
  if (!in_flight_) return HandshakeState::idle;
  double now = meter_.clock.now_ns();
  if (now < report_.accept_ns - kTimeEps) return HandshakeState::started;
  if (now < report_.finish_ns - kTimeEps) return HandshakeState::acked;
  return HandshakeState::finished;
}

HandshakeState Poc::state() const { return hardware_state(); }

void Poc::log_up_to(HandshakeState s) {
  for (int r = int(transitions_.back()) + 1; r <= int(s); ++r)
    transitions_.push_back(HandshakeState(r));
}

uint64_t Poc::mmio_store(uint32_t offset, uint64_t value) {
  check_offset(offset);
  meter_.spend(CycleCat::mmio, cfg_.mmio_cycles);
  double now = meter_.clock.now_ns();
  if (offset == kInstrLo) {
    instr_lo_ = value;
  } else if (offset == kInstrHi) {
    instr_hi_ = value;
  } else if (offset >= kData && offset < kFlag) {
    data_[(offset - kData) / 8] = value;
  } else if (offset == kFlag) {
    if (value & kFlagStart) {
      if (in_flight_)
        raise(Errc::protocol_violation, "start while the previous operation is outstanding");
      PocInstruction instr = PocInstruction::decode(instr_lo_, instr_hi_);
      data_prev_ = data_;
      report_ = ctrl_.execute_pum(instr, now);
      in_flight_ = true;
      log_up_to(HandshakeState::started);
    }
    // ack/finish are controller-owned; software writes to them are ignored
  } else {
    raise(Errc::protocol_violation,
          "store to read-only register at offset 0x" + std::to_string(offset));
  }
  return cfg_.mmio_cycles;
}

std::pair<uint64_t, uint64_t> Poc::mmio_load(uint32_t offset) {
  check_offset(offset);
  meter_.spend(CycleCat::mmio, cfg_.mmio_cycles);
  double now = meter_.clock.now_ns();
  uint64_t value = 0;
  if (offset == kInstrLo) {
    value = instr_lo_;
  } else if (offset == kInstrHi) {
    value = instr_hi_;
  } else if (offset >= kData && offset < kFlag) {
    size_t i = (offset - kData) / 8;
    if (in_flight_ && now >= report_.finish_ns - kTimeEps && !report_.data.empty()) {
      uint64_t w = 0;
      std::memcpy(&w, report_.data.data() + i * 8, 8);
      value = w;
    } else if (in_flight_) {
      value = data_prev_[i];
    } else {
      value = data_[i];
    }
  } else if (offset == kFlag) {
    HandshakeState s = hardware_state();
    switch (s) {
      case HandshakeState::idle: value = 0; break;
      case HandshakeState::started: value = kFlagStart; break;
      case HandshakeState::acked:
        value = kFlagStart | kFlagAck;
        log_up_to(HandshakeState::acked);
        break;
      case HandshakeState::finished:
        value = kFlagStart | kFlagAck | kFlagFinish;
        log_up_to(HandshakeState::finished);
        // read-to-clear: fold controller data into the register file and
        // return to idle, completing one start -> ack -> finish round
        if (!report_.data.empty())
          for (size_t i = 0; i < data_.size(); ++i)
            std::memcpy(&data_[i], report_.data.data() + i * 8, 8);
        in_flight_ = false;
        transitions_.push_back(HandshakeState::idle);
        break;
    }
  } else if (offset == kRngCount) {
    value = ctrl_.random_word_count(now);
  } else if (offset == kRngWord) {
    value = ctrl_.read_random_word(now);
  }
  return {value, cfg_.mmio_cycles};
}

}  // namespace pumsim
