#include <cmath>
#include <vector>

#include "doctest.h"
#include "pumsim/errors.hpp"
#include "pumsim/mem_controller.hpp"

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

ControllerConfig quiet_controller() {
  ControllerConfig cfg;
  cfg.refresh_enabled = false;
  return cfg;
}

struct Rig {
  DramDevice dev;
  MemController ctrl;
  explicit Rig(TraceSink* sink = nullptr,
               ControllerConfig ccfg = quiet_controller(),
               DeviceConfig dcfg = test_device())
      : dev(dcfg), ctrl(dev, ccfg, sink) {}

  PhysAddr row_pa(uint32_t bank, uint32_t row) const {
    DramAddress a;
    a.bank = bank;
    a.row = row;
    return ctrl.layout().compose(a);
  }

  void program_rowclone_crf() {
    ctrl.crf().write(Crf::violated_tras_cns, 1000);  // 10 ns
    ctrl.crf().write(Crf::violated_trp_cns, 1000);
    ctrl.crf().write(Crf::violated_trcd_cns, 500);  // 5 ns
  }

  void program_trng_crf(uint32_t period_ns) {
    const TrngBlockInfo& blk = dev.trng_blocks()[0];
    PhysAddr pa = row_pa(blk.bank, blk.row) + PhysAddr(blk.column) * 64;
    ctrl.crf().write(Crf::trng_period_ns, period_ns);
    ctrl.crf().write(Crf::trng_block_lo, uint32_t(pa));
    ctrl.crf().write(Crf::trng_block_hi, uint32_t(pa >> 32));
    for (size_t i = 0; i < 4; ++i) ctrl.crf().write(Crf::trng_bit0 + i, blk.bits[i]);
  }

  PumReport rowclone(uint32_t bank, uint32_t src, uint32_t dst, double now) {
    return ctrl.execute_pum({kOpcodeRowClone, row_pa(bank, src), row_pa(bank, dst)}, now);
  }
};

}  // namespace

TEST_SUITE("mem-controller") {

TEST_CASE("demand access costs: closed 20, row hit 20, row conflict 21") {
  Rig rig;
  CHECK(rig.ctrl.demand_access(AccessKind::read, rig.row_pa(0, 0), 0.0).cycles == 20);
  // same row, next burst: open-row hit
  CHECK(rig.ctrl.demand_access(AccessKind::read, rig.row_pa(0, 0) + 64, 400.0).cycles == 20);
  // different row, same bank: precharge first
  CHECK(rig.ctrl.demand_access(AccessKind::read, rig.row_pa(0, 1), 800.0).cycles == 21);
  // other bank is unaffected
  CHECK(rig.ctrl.demand_access(AccessKind::read, rig.row_pa(1, 0), 1220.0).cycles == 20);
}

TEST_CASE("demand write data round-trips") {
  Rig rig;
  std::vector<uint8_t> wr(64), rd(64);
  for (int i = 0; i < 64; ++i) wr[i] = uint8_t(3 * i + 1);
  rig.ctrl.demand_access(AccessKind::write, rig.row_pa(0, 9) + 128, 0.0, wr);
  rig.ctrl.demand_access(AccessKind::read, rig.row_pa(0, 9) + 128, 400.0, {},
                         std::span<uint8_t>(rd));
  CHECK(rd == wr);
}

TEST_CASE("whole-row helpers move a full row at demand-stream cost") {
  Rig rig;
  std::vector<uint8_t> row(8192), back(8192);
  for (size_t i = 0; i < row.size(); ++i) row[i] = uint8_t(i / 64 + i);
  uint64_t wr = rig.ctrl.write_row(rig.row_pa(1, 5), row, 0.0);
  CHECK(wr == 128 * 20);  // one closed-bank access, then 127 row hits
  uint64_t rd = rig.ctrl.read_row(rig.row_pa(1, 5), back, double(wr) * 20.0);
  CHECK(rd == 128 * 20);
  CHECK(back == row);
  CHECK_THROWS_AS(rig.ctrl.write_row(rig.row_pa(1, 5) + 64, row, 0.0), SimError);
}

TEST_CASE("posted writes occupy the DRAM timeline without CPU charge") {
  Rig rig;
  std::vector<uint8_t> data(64, 0x77);
  rig.ctrl.posted_write(rig.row_pa(0, 2), data, 1000.0);
  // the posted transfer holds the bank: a demand hit right behind it waits
  std::vector<uint8_t> rd(64);
  auto r = rig.ctrl.demand_access(AccessKind::read, rig.row_pa(0, 2), 1000.0, {},
                                  std::span<uint8_t>(rd));
  CHECK(r.cycles == 22);  // 18 + ceil(61.25 / 20): queued behind the posted write
  CHECK(rd == data);
}

TEST_CASE("poke bypasses the timeline entirely") {
  Rig rig;
  std::vector<uint8_t> data(64, 0x3c), rd(64);
  rig.ctrl.poke(rig.row_pa(0, 2) + 192, data);
  auto r = rig.ctrl.demand_access(AccessKind::read, rig.row_pa(0, 2) + 192, 0.0, {},
                                  std::span<uint8_t>(rd));
  CHECK(r.cycles == 20);  // cold-bank cost: nothing was queued
  CHECK(rd == data);
}

TEST_CASE("reset_bank_state closes open rows free of CPU charge") {
  Rig rig;
  rig.ctrl.demand_access(AccessKind::read, rig.row_pa(0, 0), 0.0);
  rig.ctrl.reset_bank_state(400.0);
  // a different row now pays the closed-bank 20, not the conflict 21
  CHECK(rig.ctrl.demand_access(AccessKind::read, rig.row_pa(0, 1), 800.0).cycles == 20);
}

TEST_CASE("refresh stalls demand traffic and closes rows") {
  ControllerConfig ccfg;  // refresh on
  Rig rig(nullptr, ccfg);
  CHECK(rig.ctrl.demand_access(AccessKind::read, rig.row_pa(0, 0), 0.0).cycles == 20);
  // tREFI 7800: the next request arrives behind the 160 ns tRFC
  auto r = rig.ctrl.demand_access(AccessKind::read, rig.row_pa(0, 0), 7900.0);
  CHECK(rig.ctrl.periodic_stats().refreshes == 1);
  CHECK(r.cycles == 24);  // row was closed for refresh and reopened
}

TEST_CASE("row-copy command schedule: ACT, PRE+10, ACT+20, restore PRE+55") {
  VectorTraceSink sink;
  Rig rig(&sink);
  rig.program_rowclone_crf();
  std::vector<uint8_t> src_row(8192, 0xab);
  rig.dev.poke(0, 3, 0, src_row);

  PumReport rep = rig.rowclone(0, 3, 4, 100.0);
  CHECK(rep.effect == PumEffect::rowclone_ok);
  CHECK(rep.accept_ns == doctest::Approx(160.0));   // t0 + flag sync
  CHECK(rep.finish_ns == doctest::Approx(228.75));  // t0 + 68.75 + flag sync
  CHECK(rig.dev.peek(0, 4, 0, 8192) == src_row);

  REQUIRE(sink.commands.size() == 4);
  auto& c = sink.commands;
  CHECK(c[0].cmd.kind == DramCommandKind::act);
  CHECK(c[0].cmd.row == 3);
  CHECK(c[0].time_ns == doctest::Approx(100.0));
  CHECK(c[1].cmd.kind == DramCommandKind::pre);
  CHECK(c[1].time_ns == doctest::Approx(110.0));
  CHECK(c[2].cmd.kind == DramCommandKind::act);
  CHECK(c[2].cmd.row == 4);
  CHECK(c[2].time_ns == doctest::Approx(120.0));
  CHECK(c[3].cmd.kind == DramCommandKind::pre);
  CHECK(c[3].time_ns == doctest::Approx(155.0));
  REQUIRE(sink.events.size() == 1);
  CHECK(sink.events[0].kind == EventKind::pum_op);
}

TEST_CASE("row copies across subarrays report failure and move nothing") {
  Rig rig;
  rig.program_rowclone_crf();
  std::vector<uint8_t> src_row(8192, 0x11), dst_row(8192, 0x22);
  rig.dev.poke(0, 3, 0, src_row);
  rig.dev.poke(0, 40, 0, dst_row);  // subarray 1
  PumReport rep = rig.rowclone(0, 3, 40, 100.0);
  CHECK(rep.effect == PumEffect::rowclone_failed);
  CHECK(rig.dev.peek(0, 40, 0, 8192) == dst_row);
}

TEST_CASE("an unprogrammed register file leaves the triple inert") {
  Rig rig;  // CRF all zeros: nominal gaps, no violation
  std::vector<uint8_t> dst_row(8192, 0x22);
  rig.dev.poke(0, 4, 0, dst_row);
  rig.dev.poke(0, 3, 0, std::vector<uint8_t>(8192, 0x11));
  PumReport rep = rig.rowclone(0, 3, 4, 100.0);
  CHECK(rep.effect == PumEffect::none);
  CHECK(rig.dev.peek(0, 4, 0, 8192) == dst_row);
}

TEST_CASE("staged register writes take effect at the next operation") {
  Rig rig;
  rig.program_rowclone_crf();  // staged, not yet committed
  CHECK(rig.ctrl.crf().pending());
  rig.dev.poke(0, 3, 0, std::vector<uint8_t>(8192, 0x33));
  PumReport rep = rig.rowclone(0, 3, 4, 100.0);  // the op commits on entry
  CHECK(rep.effect == PumEffect::rowclone_ok);
  CHECK_FALSE(rig.ctrl.crf().pending());
}

TEST_CASE("reduced-latency read: violated tRCD, burst payload, early finish") {
  Rig rig;
  rig.program_rowclone_crf();
  std::vector<uint8_t> data(64);
  for (int i = 0; i < 64; ++i) data[i] = uint8_t(i);
  rig.dev.poke(0, 6, 5 * 64, data);
  PumReport rep = rig.ctrl.execute_pum(
      {kOpcodeReducedLatencyRead, rig.row_pa(0, 6) + 5 * 64, 0}, 100.0);
  CHECK(rep.effect == PumEffect::none);
  REQUIRE(rep.data.size() == 64);
  CHECK(rep.data == data);  // no weak cells on this burst
  CHECK(rep.accept_ns == doctest::Approx(160.0));
  CHECK(rep.finish_ns == doctest::Approx(100.0 + 5.0 + 13.75 + 10.0 + 60.0));
}

TEST_CASE("malformed operation words are rejected") {
  Rig rig;
  rig.program_rowclone_crf();
  auto code_of = [&](const PocInstruction& in) {
    try {
      rig.ctrl.execute_pum(in, 100.0);
      return Errc::internal_bug;
    } catch (const SimError& e) {
      return e.code();
    }
  };
  CHECK(code_of({kOpcodeRowClone, rig.row_pa(0, 0), rig.row_pa(1, 0)}) ==
        Errc::operand_bank_mismatch);
  CHECK(code_of({kOpcodeRowClone, rig.row_pa(0, 0) + 64, rig.row_pa(0, 1)}) ==
        Errc::malformed_instruction);
  CHECK(code_of({0x7f, 0, 0}) == Errc::malformed_instruction);
}

TEST_CASE("the TRNG engine produces exactly four bits per period") {
  Rig rig;
  rig.program_trng_crf(220);
  rig.ctrl.advance_to(0.0);  // commit; the first tick lands one period later
  CHECK(rig.ctrl.random_word_count(2205.0) == 1);
  CHECK(rig.ctrl.periodic_stats().trng_accesses == 10);  // 220, 440, ... 2200
  CHECK(rig.ctrl.periodic_stats().trng_bits_produced == 40);
  CHECK(rig.ctrl.random_buffer().size_bits() == 40);
  uint32_t w = rig.ctrl.read_random_word(2205.0);
  (void)w;
  CHECK(rig.ctrl.random_buffer().size_bits() == 8);
}

TEST_CASE("a full buffer halts generation until software drains it") {
  ControllerConfig ccfg = quiet_controller();
  ccfg.random_buffer_bits = 64;
  Rig rig(nullptr, ccfg);
  rig.program_trng_crf(220);
  rig.ctrl.advance_to(0.0);
  rig.ctrl.advance_to(100000.0);  // plenty of periods past the 16 filling ones
  const RandomBuffer& buf = rig.ctrl.random_buffer();
  CHECK(buf.full());
  CHECK(buf.produced_bits() == 64);  // halted, never overwritten
  CHECK(rig.ctrl.periodic_stats().trng_skipped_full > 0);
  CHECK(buf.produced_bits() - buf.consumed_bits() == buf.size_bits());

  rig.ctrl.read_random_word(100000.0);  // make room
  rig.ctrl.advance_to(110000.0);        // generation resumes
  CHECK(buf.produced_bits() > 64);
  CHECK(buf.produced_bits() - buf.consumed_bits() == buf.size_bits());
}

TEST_CASE("TRNG stays idle until fully configured") {
  Rig rig;
  SUBCASE("no period") {}
  SUBCASE("duplicate bit positions") {
    rig.program_trng_crf(220);
    rig.ctrl.crf().write(Crf::trng_bit1, rig.ctrl.crf().read(Crf::trng_bit0));
  }
  SUBCASE("bit position past the burst") {
    rig.program_trng_crf(220);
    rig.ctrl.crf().write(Crf::trng_bit3, 512);
  }
  SUBCASE("block past capacity") {
    rig.program_trng_crf(220);
    rig.ctrl.crf().write(Crf::trng_block_hi, 0x10);
  }
  rig.ctrl.advance_to(0.0);
  CHECK(rig.ctrl.random_word_count(50000.0) == 0);
  CHECK(rig.ctrl.periodic_stats().trng_accesses == 0);
}

TEST_CASE("reading an empty random buffer underflows") {
  Rig rig;
  try {
    rig.ctrl.read_random_word(100.0);
    FAIL("unreachable");
  } catch (const SimError& e) {
    CHECK(e.code() == Errc::buffer_underflow);
  }
}

TEST_CASE("a periodic tick never tears an in-flight operation sequence") {
  VectorTraceSink sink;
  ControllerConfig ccfg;  // refresh enabled, tREFI 7800
  Rig rig(&sink, ccfg);
  rig.program_rowclone_crf();
  rig.rowclone(0, 3, 4, 7790.0);  // spans the 7800 refresh due time
  rig.ctrl.advance_to(8200.0);    // now let the refresh happen
  REQUIRE(rig.ctrl.periodic_stats().refreshes == 1);
  // all four copy commands precede the REF
  size_t ref_at = 0;
  for (size_t i = 0; i < sink.commands.size(); ++i)
    if (sink.commands[i].cmd.kind == DramCommandKind::ref) ref_at = i;
  CHECK(ref_at == 4);
  for (size_t i = 0; i + 1 < sink.commands.size(); ++i)
    CHECK(sink.commands[i].time_ns <= sink.commands[i + 1].time_ns);
}

}  // TEST_SUITE
