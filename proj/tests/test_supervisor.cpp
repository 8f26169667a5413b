#include <cstring>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "pumsim/errors.hpp"
#include "pumsim/system.hpp"

using namespace pumsim;

namespace {

SimConfig small_system() {
  SimConfig cfg;
  cfg.device.geometry.banks = 8;
  cfg.device.geometry.rows_per_bank = 128;
  cfg.device.geometry.rows_per_subarray = 32;
  cfg.device.weak_cell_density = 0.0;
  cfg.device.trng_row = 100;
  cfg.device.trng_column = 7;
  cfg.controller.refresh_enabled = false;
  return cfg;
}

CharacterizeOptions quick_opts() {
  CharacterizeOptions opts;
  opts.trials = 25;
  return opts;
}

PhysAddr row_pa(System& sys, uint32_t bank, uint32_t row) {
  DramAddress a;
  a.bank = bank;
  a.row = row;
  return sys.controller().dram_to_phys(a);
}

std::vector<uint8_t> random_bytes(size_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<uint8_t> v(n);
  for (auto& x : v) x = uint8_t(rng());
  return v;
}

Errc code_of(void (*fn)(System&), System& sys) {
  try {
    fn(sys);
    return Errc::internal_bug;
  } catch (const SimError& e) {
    return e.code();
  }
}

}  // namespace

TEST_SUITE("supervisor") {

TEST_CASE("characterization discovers the subarray groups by copying") {
  System sys(small_system());
  Supervisor& sup = sys.supervisor();
  CHECK_FALSE(sup.characterized());
  // plant junk where the zero initializer of bank 0, group 0 will live
  sys.device().poke(0, 31, 0, std::vector<uint8_t>(8192, 0xee));

  sup.characterize_subarrays(quick_opts());
  CHECK(sup.characterized());
  const Samt& samt = sup.samt();
  REQUIRE(samt.banks() == 8);
  for (uint32_t b = 0; b < 8; ++b) {
    REQUIRE(samt.subarrays(b) == 4);
    for (uint32_t s = 0; s < 4; ++s) {
      const SamtEntry& e = samt.entry(b, s);
      CHECK(e.first_row == 32 * s);
      CHECK(e.last_row == 32 * s + 31);
      CHECK(e.free_pairs() == 31);  // the last row is the initializer
    }
  }
  CHECK(samt.subarray_of(0, 40) == 1);
  // the initializer row was zero-filled through the demand path
  CHECK(sys.device().peek(0, 31, 0, 8192) == std::vector<uint8_t>(8192, 0));
}

TEST_CASE("the probe window caps group size below the real subarray") {
  System sys(small_system());
  CharacterizeOptions opts = quick_opts();
  opts.window_rows = 16;
  sys.supervisor().characterize_subarrays(opts);
  REQUIRE(sys.supervisor().samt().subarrays(0) == 8);
  CHECK(sys.supervisor().samt().entry(0, 1).first_row == 16);
  CHECK(sys.supervisor().samt().entry(0, 1).last_row == 31);
}

TEST_CASE("characterization rejects impossible setups") {
  SimConfig cfg = small_system();
  cfg.device.geometry.row_bytes = 4096;  // one page per row: allocator can't pair
  System sys(cfg);
  CHECK(code_of([](System& s) { s.supervisor().characterize_subarrays(); }, sys) ==
        Errc::config_error);

  System ok(small_system());
  CHECK(code_of(
            [](System& s) {
              CharacterizeOptions opts;
              opts.window_rows = 0;
              s.supervisor().characterize_subarrays(opts);
            },
            ok) == Errc::config_error);
  CHECK(code_of([](System& s) { s.supervisor().alloc_align(16384, 1); }, ok) ==
        Errc::characterization_failure);
}

TEST_CASE("allocation stripes row pairs across banks, one subarray per id") {
  System sys(small_system());
  Supervisor& sup = sys.supervisor();
  sup.characterize_subarrays(quick_opts());

  uint64_t va = sup.alloc_align(16384, 1);  // two rows: banks 0 and 1
  const PageTable& pt = sup.page_table();
  CHECK(pt.translate(va) == row_pa(sys, 0, 0));
  CHECK(pt.translate(va + 4096) == row_pa(sys, 1, 0));
  // the second half of the span maps to the rows' second 4 KiB blocks
  CHECK(pt.translate(va + 8192) == row_pa(sys, 0, 0) + 4096);
  CHECK(pt.translate(va + 8192 + 4096) == row_pa(sys, 1, 0) + 4096);

  CHECK(sup.ait().lookup(0, 1) == 0);
  CHECK(sup.ait().lookup(1, 1) == 0);
  CHECK_FALSE(sup.ait().lookup(2, 1).has_value());  // bank 2 never needed
  // both pages of the consumed row point at that subarray's initializer
  CHECK(sup.irt().lookup(pt.translate(va).value() / 4096) == row_pa(sys, 0, 31));
  CHECK(sup.irt().lookup(pt.translate(va + 8192).value() / 4096) == row_pa(sys, 0, 31));
  CHECK(sup.samt().entry(0, 0).free_pairs() == 30);

  // the same id keeps drawing from its bound subarray
  uint64_t va2 = sup.alloc_align(16384, 1);
  CHECK(va2 == va + 16384);
  CHECK(pt.translate(va2) == row_pa(sys, 0, 1));
  // a different id binds the next free subarray
  uint64_t va3 = sup.alloc_align(16384, 2);
  CHECK(pt.translate(va3) == row_pa(sys, 0, 32));
}

TEST_CASE("allocation size and capacity limits") {
  SimConfig cfg = small_system();
  cfg.device.geometry.rows_per_bank = 32;  // a single subarray per bank
  System sys(cfg);
  Supervisor& sup = sys.supervisor();
  sup.characterize_subarrays(quick_opts());

  CHECK(code_of([](System& s) { s.supervisor().alloc_align(0, 1); }, sys) ==
        Errc::invalid_size);
  CHECK(code_of([](System& s) { s.supervisor().alloc_align(4096, 1); }, sys) ==
        Errc::invalid_size);
  CHECK(code_of([](System& s) { s.supervisor().alloc_align(8192 + 4096, 1); }, sys) ==
        Errc::invalid_size);

  sup.alloc_align(8192, 1);  // consumes one pair in bank 0
  // id 2 finds no unbound subarray anywhere
  CHECK(code_of([](System& s) { s.supervisor().alloc_align(8192, 2); }, sys) ==
        Errc::out_of_subarray_capacity);
  // id 1 asking for 31 rows of bank 0 exceeds the 30 still free
  CHECK(code_of([](System& s) { s.supervisor().alloc_align(248 * 8192, 1); }, sys) ==
        Errc::out_of_subarray_capacity);
}

TEST_CASE("row copy with flushing is byte-exact through the cache") {
  System sys(small_system());
  Supervisor& sup = sys.supervisor();
  sup.characterize_subarrays(quick_opts());
  uint64_t src = sup.alloc_align(16384, 1);
  uint64_t dst = sup.alloc_align(16384, 1);

  std::vector<uint8_t> pattern = random_bytes(16384, 0xabcd);
  sup.cpu_store(src, pattern);
  std::vector<uint8_t> stale(16384);
  sup.cpu_load(dst, stale);  // warm stale destination lines into the cache
  CHECK(stale == std::vector<uint8_t>(16384, 0));

  sup.rcc(dst, src, 16384, FlushMode::full);
  std::vector<uint8_t> got(16384);
  sup.cpu_load(dst, got);
  CHECK(got == pattern);
}

TEST_CASE("an unflushed copy moves stale memory, not cached stores") {
  System sys(small_system());
  Supervisor& sup = sys.supervisor();
  sup.characterize_subarrays(quick_opts());
  uint64_t src = sup.alloc_align(8192, 1);
  uint64_t dst = sup.alloc_align(8192, 1);

  std::vector<uint8_t> word(8, 0x5b);
  sup.cpu_store(src, word);  // dirty in cache, DRAM still zero
  sup.rcc(dst, src, 8192, FlushMode::none);
  std::vector<uint8_t> got(8);
  sup.cpu_load(dst, got);
  CHECK(got == std::vector<uint8_t>(8, 0));  // the copy never saw the store

  sup.rcc(dst, src, 8192, FlushMode::full);  // flush first, then copy
  sup.cpu_load(dst, got);
  CHECK(got == word);
}

TEST_CASE("zero-init fills rows from the subarray's initializer") {
  System sys(small_system());
  Supervisor& sup = sys.supervisor();
  sup.characterize_subarrays(quick_opts());
  uint64_t va = sup.alloc_align(16384, 1);

  std::vector<uint8_t> junk = random_bytes(16384, 0x11ff);
  sup.cpu_store(va, junk);
  sup.rci(va, 16384, FlushMode::full);
  std::vector<uint8_t> got(16384);
  sup.cpu_load(va, got);
  CHECK(got == std::vector<uint8_t>(16384, 0));
}

TEST_CASE("operands must be row siblings in one subarray") {
  System sys(small_system());
  Supervisor& sup = sys.supervisor();
  sup.characterize_subarrays(quick_opts());
  uint64_t a = sup.alloc_align(16384, 1);  // subarray 0
  uint64_t b = sup.alloc_align(8192, 2);   // subarray 1
  uint64_t c = sup.alloc_align(8192, 1);

  auto rcc_code = [&](uint64_t dst, uint64_t src, uint64_t bytes) {
    try {
      sup.rcc(dst, src, bytes, FlushMode::none);
      return Errc::internal_bug;
    } catch (const SimError& e) {
      return e.code();
    }
  };
  // a+4096 pairs bank 1's first half with bank 0's second half
  CHECK(rcc_code(c, a + 4096, 8192) == Errc::not_colocated);
  // ids 1 and 2 live in different subarrays of bank 0
  CHECK(rcc_code(b, c, 8192) == Errc::not_colocated);
  // granularity and mapping checks fire before any copy
  CHECK(rcc_code(c + 8, c, 8192) == Errc::granularity_violation);
  CHECK(rcc_code(c, a, 4096) == Errc::invalid_size);
  CHECK(rcc_code(c, 0x20000000, 8192) == Errc::unmapped_address);

  std::vector<uint8_t> w(8, 1);
  CHECK_THROWS_AS(sup.cpu_store(a + 4, w), SimError);
  CHECK_THROWS_AS(sup.cpu_store(0x20000000, w), SimError);
  CHECK_THROWS_AS(sup.rci(0x20000000, 8192, FlushMode::none), SimError);
}

TEST_CASE("frozen syscall costs: 351 copy, 337 init, 1887 with flushes") {
  System sys(small_system());
  Supervisor& sup = sys.supervisor();
  sup.characterize_subarrays(quick_opts());
  uint64_t src = sup.alloc_align(8192, 1);
  uint64_t dst = sup.alloc_align(8192, 1);

  sup.rcc(dst, src, 8192, FlushMode::none);  // warm-up: banks idle afterwards
  // entry 195 + 4 page walks + 1 table lookup + 58-cycle handshake
  CHECK(sup.rcc(dst, src, 8192, FlushMode::none) == 351);
  // entry 195 + 2 page walks + 1 lookup + handshake
  CHECK(sup.rci(dst, 8192, FlushMode::none) == 337);
  // + 2 rows x 128 clean flushes x 6 cycles (nothing is cached here)
  CHECK(sup.rcc(dst, src, 8192, FlushMode::full) == 1887);
}

TEST_CASE("TRNG characterization finds the planted cells and programs them") {
  System sys(small_system());
  Supervisor& sup = sys.supervisor();
  const TrngBlockInfo& blk = sys.device().trng_blocks()[0];
  PhysAddr block = row_pa(sys, blk.bank, blk.row) + PhysAddr(blk.column) * 64;

  std::vector<uint32_t> cells = sup.characterize_trng_cells(block, 2000);
  CHECK(cells == blk.bits);
  const Crf& crf = sys.controller().crf();
  CHECK(crf.active_trng_block() == block);
  for (size_t i = 0; i < 4; ++i) CHECK(crf.active(Crf::trng_bit0 + i) == blk.bits[i]);
  // the engine is now fully configured and produces words
  sys.clock().advance(2000);
  CHECK(sys.controller().random_word_count(sys.clock().now_ns()) > 0);

  try {
    sup.characterize_trng_cells(row_pa(sys, 0, 5), 500);  // an ordinary block
    FAIL("unreachable");
  } catch (const SimError& e) {
    CHECK(e.code() == Errc::no_trng_cells);
  }
}

TEST_CASE("table dumps reload only onto an identical device") {
  System a(small_system());
  a.supervisor().characterize_subarrays(quick_opts());
  std::stringstream dump;
  a.supervisor().save_tables(dump);

  System b(small_system());
  CHECK(b.supervisor().load_tables(dump));
  CHECK(b.supervisor().characterized());
  REQUIRE(b.supervisor().samt().subarrays(3) == 4);
  CHECK(b.supervisor().samt().entry(3, 2).first_row == 64);
  uint64_t va = b.supervisor().alloc_align(16384, 1);
  CHECK(b.supervisor().page_table().translate(va) == row_pa(b, 0, 0));

  SimConfig other = small_system();
  other.device.weak_cell_seed += 1;
  System c(other);
  std::stringstream dump2;
  a.supervisor().save_tables(dump2);
  CHECK_FALSE(c.supervisor().load_tables(dump2));
  CHECK_FALSE(c.supervisor().characterized());
}

TEST_CASE("adopting tables resets all allocation state") {
  System a(small_system());
  a.supervisor().characterize_subarrays(quick_opts());
  a.supervisor().alloc_align(16384, 1);
  CHECK(a.supervisor().samt().entry(0, 0).free_pairs() == 30);

  System b(small_system());
  b.supervisor().adopt_tables(a.supervisor());
  CHECK(b.supervisor().characterized());
  CHECK(b.supervisor().samt().entry(0, 0).free_pairs() == 31);
  uint64_t va = b.supervisor().alloc_align(16384, 7);
  CHECK(b.supervisor().page_table().translate(va) == row_pa(b, 0, 0));
}

}  // TEST_SUITE
