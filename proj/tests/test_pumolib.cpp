#include <vector>

#include "doctest.h"
#include "pumsim/errors.hpp"
#include "pumsim/pumolib.hpp"

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

struct LibRig {
  DramDevice dev;
  SimClock clock;
  CycleLedger ledger;
  MemController ctrl;
  Poc poc;
  Pumolib lib;

  explicit LibRig(uint32_t mmio_cycles = 5, Pumolib::Costs costs = Pumolib::Costs())
      : dev(test_device()),
        ctrl(dev,
             [] {
               ControllerConfig c;
               c.refresh_enabled = false;
               return c;
             }()),
        poc(ctrl, CycleMeter{clock, ledger}, Poc::Config{0x40000000, mmio_cycles}),
        lib(poc, CycleMeter{clock, ledger}, costs) {
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

  void program_trng(uint32_t period_ns) {
    const TrngBlockInfo& blk = dev.trng_blocks()[0];
    DramAddress a;
    a.bank = blk.bank;
    a.row = blk.row;
    a.column = blk.column;
    PhysAddr pa = ctrl.layout().compose(a);
    ctrl.crf().write(Crf::trng_period_ns, period_ns);
    ctrl.crf().write(Crf::trng_block_lo, uint32_t(pa));
    ctrl.crf().write(Crf::trng_block_hi, uint32_t(pa >> 32));
    for (size_t i = 0; i < 4; ++i) ctrl.crf().write(Crf::trng_bit0 + i, blk.bits[i]);
  }
};

}  // namespace

TEST_SUITE("pumolib") {

TEST_CASE("one row-copy call costs exactly 58 cycles, every time") {
  LibRig rig;
  std::vector<uint8_t> row(8192);
  for (size_t i = 0; i < row.size(); ++i) row[i] = uint8_t(i * 7);
  rig.dev.poke(0, 3, 0, row);

  uint64_t c0 = rig.clock.now();
  CHECK(rig.lib.rowclone(rig.row_pa(0, 3), rig.row_pa(0, 4)) == PumEffect::rowclone_ok);
  CHECK(rig.clock.now() - c0 == 58);
  CHECK(rig.dev.peek(0, 4, 0, 8192) == row);

  // steady state: the bank is long free when the next call arrives
  c0 = rig.clock.now();
  CHECK(rig.lib.rowclone(rig.row_pa(0, 4), rig.row_pa(0, 5)) == PumEffect::rowclone_ok);
  CHECK(rig.clock.now() - c0 == 58);

  // 31 wrapper + 25 MMIO + 2 poll-loop cycles per call, all booked
  CHECK(rig.ledger.at(CycleCat::compute) == 62);
  CHECK(rig.ledger.at(CycleCat::mmio) == 50);
  CHECK(rig.ledger.at(CycleCat::poll) == 4);
  CHECK(rig.ledger.clocked_total() == rig.clock.now());
}

TEST_CASE("a cross-subarray copy reports failure at the same cost") {
  LibRig rig;
  std::vector<uint8_t> keep(8192, 0x99);
  rig.dev.poke(0, 40, 0, keep);  // subarray 1
  uint64_t c0 = rig.clock.now();
  CHECK(rig.lib.rowclone(rig.row_pa(0, 3), rig.row_pa(0, 40)) == PumEffect::rowclone_failed);
  CHECK(rig.clock.now() - c0 == 58);
  CHECK(rig.dev.peek(0, 40, 0, 8192) == keep);
}

TEST_CASE("a reduced-latency read costs 92 cycles and returns the burst") {
  LibRig rig;
  std::vector<uint8_t> burst(64);
  for (int i = 0; i < 64; ++i) burst[i] = uint8_t(0x30 + i);
  rig.dev.poke(1, 6, 9 * 64, burst);

  uint64_t c0 = rig.clock.now();
  std::vector<uint8_t> got = rig.lib.rd_rl(rig.row_pa(1, 6) + 9 * 64);
  // the early finish is already visible on the ack poll, so the finish poll
  // is skipped: 31 + 15 + 6 for the handshake, then eight data loads
  CHECK(rig.clock.now() - c0 == 92);
  CHECK(got == burst);
}

TEST_CASE("the poll liveness bound trips on an over-tight cap") {
  LibRig rig(1, Pumolib::Costs{31, 1, 1});  // 20 ns MMIO: ack not yet up
  try {
    rig.lib.rowclone(rig.row_pa(0, 3), rig.row_pa(0, 4));
    FAIL("unreachable");
  } catch (const SimError& e) {
    CHECK(e.code() == Errc::protocol_violation);
  }
}

TEST_CASE("a zero poll cap is rejected at construction") {
  try {
    LibRig rig(5, Pumolib::Costs{31, 1, 0});
    (void)rig;
    FAIL("unreachable");
  } catch (const SimError& e) {
    CHECK(e.code() == Errc::config_error);
  }
}

TEST_CASE("random words: one MMIO load per query or dequeue") {
  LibRig rig;
  rig.program_trng(220);
  uint64_t c0 = rig.clock.now();
  CHECK(rig.lib.buf_sz() == 0);  // commits the CRF, arms the engine
  CHECK(rig.clock.now() - c0 == 5);
  rig.clock.advance(500);
  CHECK(rig.lib.buf_sz() == 5);
  c0 = rig.clock.now();
  rig.lib.rand_dram();
  CHECK(rig.clock.now() - c0 == 5);
  CHECK(rig.lib.buf_sz() == 4);
}

TEST_CASE("dequeueing with the generator idle underflows") {
  LibRig rig;
  try {
    rig.lib.rand_dram();
    FAIL("unreachable");
  } catch (const SimError& e) {
    CHECK(e.code() == Errc::buffer_underflow);
  }
}

}  // TEST_SUITE
