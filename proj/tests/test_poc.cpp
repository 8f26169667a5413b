#include <cstring>
#include <utility>
#include <vector>

#include "doctest.h"
#include "pumsim/errors.hpp"
#include "pumsim/poc.hpp"

using namespace pumsim;

namespace {

DeviceConfig test_device() {
  DeviceConfig cfg;
  cfg.geometry.banks = 2;
  cfg.geometry.rows_per_bank = 128;
  cfg.geometry.rows_per_subarray = 32;
  cfg.weak_cell_density = 0.0;
  cfg.trng_row = 100;
  cfg.trng_column = 7;
  return cfg;
}

struct PocRig {
  DramDevice dev;
  SimClock clock;
  CycleLedger ledger;
  MemController ctrl;
  Poc poc;

  explicit PocRig(uint32_t mmio_cycles = 5)
      : dev(test_device()),
        ctrl(dev,
             [] {
               ControllerConfig c;
               c.refresh_enabled = false;
               return c;
             }()),
        poc(ctrl, CycleMeter{clock, ledger}, Poc::Config{0x40000000, mmio_cycles}) {
    ctrl.crf().write(Crf::violated_tras_cns, 1000);
    ctrl.crf().write(Crf::violated_trp_cns, 1000);
    ctrl.crf().write(Crf::violated_trcd_cns, 500);
  }

  PhysAddr row_pa(uint32_t bank, uint32_t row) const {
    DramAddress a;
    a.bank = bank;
    a.row = row;
    return ctrl.layout().compose(a);
  }

  void push_instr(const PocInstruction& instr) {
    auto [lo, hi] = instr.encode();
    poc.mmio_store(Poc::kInstrLo, lo);
    poc.mmio_store(Poc::kInstrHi, hi);
  }

  // Polls the flag register until the finish bit reads back; returns polls.
  int start_and_poll(const PocInstruction& instr) {
    push_instr(instr);
    poc.mmio_store(Poc::kFlag, Poc::kFlagStart);
    int polls = 0;
    while (true) {
      ++polls;
      REQUIRE(polls < 64);
      auto [flags, cycles] = poc.mmio_load(Poc::kFlag);
      (void)cycles;
      if (flags & Poc::kFlagFinish) return polls;
    }
  }
};

}  // namespace

TEST_SUITE("poc") {

TEST_CASE("operation words pack into the documented register halves") {
  PocInstruction in{kOpcodeRowClone, 1, 2};
  auto [lo, hi] = in.encode();
  CHECK(hi == ((uint64_t(0x01) << 56) | (uint64_t(1) << 26)));
  CHECK(lo == (uint64_t(2 & 0xf) << 60));
  CHECK(PocInstruction::decode(lo, hi) == in);

  PocInstruction wide{kOpcodeReducedLatencyRead, 0x3fffffff, 0x2aaaaaaa};
  auto [wlo, whi] = wide.encode();
  CHECK(PocInstruction::decode(wlo, whi) == wide);

  CHECK_THROWS_AS((PocInstruction{1, uint64_t(1) << 30, 0}.encode()), SimError);
  CHECK_THROWS_AS((PocInstruction{1, 0, uint64_t(1) << 30}.encode()), SimError);
}

TEST_CASE("two copy rounds walk the full handshake, ack before finish") {
  PocRig rig;
  std::vector<uint8_t> row_a(8192, 0x5a), row_b(8192, 0xc3);
  rig.dev.poke(0, 3, 0, row_a);
  rig.dev.poke(0, 10, 0, row_b);

  // 100 ns per MMIO access: the first poll lands between ack (t0+60) and
  // finish (t0+128.75), the second observes finish
  CHECK(rig.start_and_poll({kOpcodeRowClone, rig.row_pa(0, 3), rig.row_pa(0, 4)}) == 2);
  CHECK(rig.dev.peek(0, 4, 0, 8192) == row_a);
  CHECK(rig.start_and_poll({kOpcodeRowClone, rig.row_pa(0, 10), rig.row_pa(0, 11)}) == 2);
  CHECK(rig.dev.peek(0, 11, 0, 8192) == row_b);

  using S = HandshakeState;
  std::vector<S> want{S::idle,  S::started, S::acked, S::finished,
                      S::idle,  S::started, S::acked, S::finished,
                      S::idle};
  CHECK(rig.poc.transitions() == want);

  // every spent cycle is booked: 5 MMIO accesses per round
  CHECK(rig.ledger.at(CycleCat::mmio) == 2 * 5 * 5);
  CHECK(rig.ledger.clocked_total() == rig.clock.now());
}

TEST_CASE("starting a second operation while one is outstanding is rejected") {
  PocRig rig;
  rig.push_instr({kOpcodeRowClone, rig.row_pa(0, 3), rig.row_pa(0, 4)});
  rig.poc.mmio_store(Poc::kFlag, Poc::kFlagStart);
  try {
    rig.poc.mmio_store(Poc::kFlag, Poc::kFlagStart);
    FAIL("unreachable");
  } catch (const SimError& e) {
    CHECK(e.code() == Errc::protocol_violation);
  }
  // the outstanding operation still completes normally
  while (!(rig.poc.mmio_load(Poc::kFlag).first & Poc::kFlagFinish)) {}
  CHECK(rig.poc.state() == HandshakeState::idle);
}

TEST_CASE("fine-grained polling observes every state in order") {
  PocRig rig(1);  // 20 ns per access
  rig.push_instr({kOpcodeRowClone, rig.row_pa(0, 3), rig.row_pa(0, 4)});
  rig.poc.mmio_store(Poc::kFlag, Poc::kFlagStart);  // t0 = 60 ns
  CHECK(rig.poc.state() == HandshakeState::started);
  CHECK(rig.poc.mmio_load(Poc::kFlag).first == Poc::kFlagStart);  // t0+20
  CHECK(rig.poc.mmio_load(Poc::kFlag).first == Poc::kFlagStart);  // t0+40
  CHECK(rig.poc.mmio_load(Poc::kFlag).first ==
        (Poc::kFlagStart | Poc::kFlagAck));  // t0+60: accepted
  CHECK(rig.poc.state() == HandshakeState::acked);
  // finish at t0+128.75 -> first visible on the poll at t0+140
  CHECK(rig.poc.mmio_load(Poc::kFlag).first == (Poc::kFlagStart | Poc::kFlagAck));
  CHECK(rig.poc.mmio_load(Poc::kFlag).first == (Poc::kFlagStart | Poc::kFlagAck));
  CHECK(rig.poc.mmio_load(Poc::kFlag).first == (Poc::kFlagStart | Poc::kFlagAck));
  CHECK(rig.poc.mmio_load(Poc::kFlag).first ==
        (Poc::kFlagStart | Poc::kFlagAck | Poc::kFlagFinish));
  CHECK(rig.poc.state() == HandshakeState::idle);  // read-to-clear
  CHECK(rig.poc.mmio_load(Poc::kFlag).first == 0);
}

TEST_CASE("data registers hold their old contents until finish") {
  PocRig rig(1);
  std::vector<uint8_t> burst(64);
  for (int i = 0; i < 64; ++i) burst[i] = uint8_t(0x80 + i);
  rig.dev.poke(0, 6, 5 * 64, burst);
  uint64_t want[8];
  std::memcpy(want, burst.data(), 64);

  for (uint32_t i = 0; i < 8; ++i)
    rig.poc.mmio_store(Poc::kData + 8 * i, 0xa0 + i);
  rig.push_instr({kOpcodeReducedLatencyRead, rig.row_pa(0, 6) + 5 * 64, 0});
  rig.poc.mmio_store(Poc::kFlag, Poc::kFlagStart);  // finish at t0+88.75

  CHECK(rig.poc.mmio_load(Poc::kData).first == 0xa0);       // t0+20: in flight
  CHECK(rig.poc.mmio_load(Poc::kData + 8).first == 0xa1);   // t0+40
  CHECK(rig.poc.mmio_load(Poc::kData + 16).first == 0xa2);  // t0+60
  CHECK(rig.poc.mmio_load(Poc::kData + 24).first == 0xa3);  // t0+80
  // t0+100: past finish, the payload is visible even before the flag read
  CHECK(rig.poc.mmio_load(Poc::kData).first == want[0]);
  CHECK(rig.poc.mmio_load(Poc::kFlag).first ==
        (Poc::kFlagStart | Poc::kFlagAck | Poc::kFlagFinish));
  // read-to-clear folded the payload into the register file
  for (uint32_t i = 0; i < 8; ++i)
    CHECK(rig.poc.mmio_load(Poc::kData + 8 * i).first == want[i]);
}

TEST_CASE("unmapped and read-only offsets are rejected") {
  PocRig rig;
  auto store_code = [&](uint32_t off) {
    try {
      rig.poc.mmio_store(off, 0);
      return Errc::internal_bug;
    } catch (const SimError& e) {
      return e.code();
    }
  };
  auto load_code = [&](uint32_t off) {
    try {
      rig.poc.mmio_load(off);
      return Errc::internal_bug;
    } catch (const SimError& e) {
      return e.code();
    }
  };
  CHECK(store_code(0x04) == Errc::unmapped_offset);
  CHECK(store_code(Poc::kWindowBytes) == Errc::unmapped_offset);
  CHECK(load_code(Poc::kWindowBytes + 8) == Errc::unmapped_offset);
  CHECK(store_code(Poc::kRngCount) == Errc::protocol_violation);
  CHECK(store_code(Poc::kRngWord) == Errc::protocol_violation);
  // ack/finish bits are controller-owned: writing them is a harmless no-op
  rig.poc.mmio_store(Poc::kFlag, Poc::kFlagAck | Poc::kFlagFinish);
  CHECK(rig.poc.state() == HandshakeState::idle);
}

TEST_CASE("random words surface through the MMIO window") {
  PocRig rig;
  const TrngBlockInfo& blk = rig.dev.trng_blocks()[0];
  DramAddress a;
  a.bank = blk.bank;
  a.row = blk.row;
  a.column = blk.column;
  PhysAddr pa = rig.ctrl.layout().compose(a);
  rig.ctrl.crf().write(Crf::trng_period_ns, 220);
  rig.ctrl.crf().write(Crf::trng_block_lo, uint32_t(pa));
  rig.ctrl.crf().write(Crf::trng_block_hi, uint32_t(pa >> 32));
  for (size_t i = 0; i < 4; ++i) rig.ctrl.crf().write(Crf::trng_bit0 + i, blk.bits[i]);

  CHECK(rig.poc.mmio_load(Poc::kRngCount).first == 0);  // commits, arms the engine
  rig.clock.advance(500);                               // 10 000 ns of ticks
  CHECK(rig.poc.mmio_load(Poc::kRngCount).first == 5);
  rig.poc.mmio_load(Poc::kRngWord);
  CHECK(rig.poc.mmio_load(Poc::kRngCount).first == 4);
}

TEST_CASE("dequeueing from an idle generator underflows") {
  PocRig rig;
  try {
    rig.poc.mmio_load(Poc::kRngWord);
    FAIL("unreachable");
  } catch (const SimError& e) {
    CHECK(e.code() == Errc::buffer_underflow);
  }
}

}  // TEST_SUITE
