#include "pumsim/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "pumsim/errors.hpp"
#include "pumsim/stats.hpp"

namespace pumsim {

const char* name(BenchMode mode) {
  switch (mode) {
    case BenchMode::bare: return "bare";
    case BenchMode::noflush: return "noflush";
    case BenchMode::flush: return "flush";
  }
  return "?";
}

BenchMode bench_mode_from(const std::string& text) {
  if (text == "bare") return BenchMode::bare;
  if (text == "noflush" || text == "no-flush") return BenchMode::noflush;
  if (text == "flush") return BenchMode::flush;
  raise(Errc::config_error, "unknown mode '" + text + "' (bare|noflush|flush)");
}

void RunOptions::fill_defaults() {
  if (reps == 0) reps = 1;
  if (sizes.empty())
    for (uint64_t b = 8192; b <= (8ull << 20); b <<= 1) sizes.push_back(b);
  if (dirty_fractions.empty())
    for (int i = 0; i <= 10; ++i) dirty_fractions.push_back(double(i) / 10.0);
  if (fork_pages.empty())
    for (uint32_t n = 8; n <= 2048; n <<= 1) fork_pages.push_back(n);
}

namespace {

// Caps the repetition count so one measured phase stays near a fixed amount
// of simulated traffic; sums over repetitions keep speedups exact ratios.
uint32_t reps_for(const RunOptions& o, uint64_t bytes) {
  uint64_t cap = std::max<uint64_t>(1, (32ull << 20) / std::max<uint64_t>(bytes, 1));
  return uint32_t(std::min<uint64_t>(o.reps, cap));
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) raise(Errc::config_error, "cannot open output file: " + path);
  return out;
}

}  // namespace

Bench::Bench(const SimConfig& cfg, const RunOptions& opts) : cfg_(cfg), opts_(opts) {
  opts_.fill_defaults();
  cfg_.validate();
  SimConfig donor_cfg = cfg_;
  donor_cfg.trng_period_ns = 0;
  donor_cfg.controller.refresh_enabled = false;
  donor_ = std::make_unique<System>(donor_cfg);
  donor_->supervisor().characterize_subarrays();
}

std::unique_ptr<System> Bench::fresh_system(bool trng_enabled) const {
  SimConfig cfg = cfg_;
  if (!trng_enabled) {
    // CPU-side benches need exact flush additivity and point independence,
    // so the periodic engines stay quiet; they are exercised by the TRNG
    // bench and by the unit suites.
    cfg.trng_period_ns = 0;
    cfg.controller.refresh_enabled = false;
  }
  cfg.cache.replacement_seed = opts_.seed;
  auto sys = std::make_unique<System>(cfg);
  sys->supervisor().adopt_tables(donor_->supervisor());
  return sys;
}

Bench::Arrays Bench::alloc_arrays(System& sys, uint64_t bytes, bool with_source) const {
  Arrays a;
  Supervisor& sup = sys.supervisor();
  if (with_source) a.src_va = sup.alloc_align(bytes, 0);
  a.dst_va = sup.alloc_align(bytes, 0);
  uint64_t rows = bytes / sys.device().geometry().row_bytes;
  const PageTable& pt = sup.page_table();
  for (uint64_t j = 0; j < rows; ++j) {
    if (with_source)
      a.src_rows.push_back(*pt.translate(a.src_va + j * PageTable::kPageBytes));
    a.dst_rows.push_back(*pt.translate(a.dst_va + j * PageTable::kPageBytes));
  }
  return a;
}

void Bench::audit(const System& sys) {
  if (sys.ledger().clocked_total() != sys.clock().now())
    raise(Errc::internal_bug, "cycle ledger does not reconcile with the clock");
}

uint64_t Bench::baseline_copy(System& sys, const Arrays& a, uint64_t bytes) const {
  uint64_t t0 = sys.clock().now();
  const uint32_t line = cfg_.cache.line_bytes;
  const uint32_t wpl = line / 8;
  const uint32_t row_bytes = cfg_.device.geometry.row_bytes;
  const uint32_t lines_per_row = row_bytes / line;
  const uint64_t rows = bytes / row_bytes;
  const uint64_t iter = uint64_t(cfg_.cycle_model.word_copy_iter) * wpl;
  Cache& cache = sys.cache();
  for (uint64_t j = 0; j < rows; ++j)
    for (uint32_t l = 0; l < lines_per_row; ++l) {
      cache.access_line_run(AccessKind::read, a.src_rows[j] + uint64_t(l) * line, wpl);
      cache.access_line_run(AccessKind::write, a.dst_rows[j] + uint64_t(l) * line, wpl);
      sys.compute(iter);
    }
  return sys.clock().now() - t0;
}

uint64_t Bench::baseline_init(System& sys, const Arrays& a, uint64_t bytes) const {
  uint64_t t0 = sys.clock().now();
  const uint32_t line = cfg_.cache.line_bytes;
  const uint32_t wpl = line / 8;
  const uint32_t row_bytes = cfg_.device.geometry.row_bytes;
  const uint32_t lines_per_row = row_bytes / line;
  const uint64_t rows = bytes / row_bytes;
  const uint64_t iter = uint64_t(cfg_.cycle_model.word_store_iter) * wpl;
  Cache& cache = sys.cache();
  for (uint64_t j = 0; j < rows; ++j)
    for (uint32_t l = 0; l < lines_per_row; ++l) {
      cache.access_line_run(AccessKind::write, a.dst_rows[j] + uint64_t(l) * line, wpl);
      sys.compute(iter);
    }
  return sys.clock().now() - t0;
}

uint64_t Bench::pum_copy(System& sys, const Arrays& a, uint64_t bytes, BenchMode mode,
                         double dirty_fraction) const {
  uint64_t clock0 = sys.clock().now();
  uint64_t booked0 = sys.ledger().at(CycleCat::modeled_dirty_writeback);
  Supervisor& sup = sys.supervisor();
  switch (mode) {
    case BenchMode::bare:
      for (size_t j = 0; j < a.dst_rows.size(); ++j)
        if (sys.pumolib().rowclone(a.src_rows[j], a.dst_rows[j]) != PumEffect::rowclone_ok)
          raise(Errc::internal_bug, "bare-metal row copy failed");
      break;
    case BenchMode::noflush:
      sup.rcc(a.dst_va, a.src_va, bytes, FlushMode::none);
      break;
    case BenchMode::flush: {
      sup.rcc(a.dst_va, a.src_va, bytes, FlushMode::full);
      uint64_t flushed = 2 * (bytes / cfg_.cache.line_bytes);  // both operands
      uint64_t extra = cfg_.cache.clflush_dirty_cycles - cfg_.cache.clflush_clean_cycles;
      sys.meter().book(CycleCat::modeled_dirty_writeback,
                       uint64_t(std::llround(dirty_fraction * double(extra) * double(flushed))));
      break;
    }
  }
  return (sys.clock().now() - clock0) +
         (sys.ledger().at(CycleCat::modeled_dirty_writeback) - booked0);
}

uint64_t Bench::pum_init(System& sys, const Arrays& a, uint64_t bytes, BenchMode mode,
                         double dirty_fraction) const {
  uint64_t clock0 = sys.clock().now();
  uint64_t booked0 = sys.ledger().at(CycleCat::modeled_dirty_writeback);
  Supervisor& sup = sys.supervisor();
  switch (mode) {
    case BenchMode::bare:
      for (PhysAddr row : a.dst_rows) {
        auto init = sup.irt().lookup(row / PageTable::kPageBytes);
        if (!init) raise(Errc::missing_initializer, "bare-metal init on an untracked row");
        if (sys.pumolib().rowclone(*init, row) != PumEffect::rowclone_ok)
          raise(Errc::internal_bug, "bare-metal row init failed");
      }
      break;
    case BenchMode::noflush:
      sup.rci(a.dst_va, bytes, FlushMode::none);
      break;
    case BenchMode::flush: {
      sup.rci(a.dst_va, bytes, FlushMode::full);
      uint64_t flushed = bytes / cfg_.cache.line_bytes;
      uint64_t extra = cfg_.cache.clflush_dirty_cycles - cfg_.cache.clflush_clean_cycles;
      sys.meter().book(CycleCat::modeled_dirty_writeback,
                       uint64_t(std::llround(dirty_fraction * double(extra) * double(flushed))));
      break;
    }
  }
  return (sys.clock().now() - clock0) +
         (sys.ledger().at(CycleCat::modeled_dirty_writeback) - booked0);
}

std::vector<SweepRow> Bench::copy_sweep(BenchMode mode) {
  std::vector<SweepRow> rows;
  for (uint64_t bytes : opts_.sizes) {
    auto sys = fresh_system(false);
    Arrays a = alloc_arrays(*sys, bytes, true);
    uint32_t reps = reps_for(opts_, bytes);
    SweepRow row;
    row.size_bytes = bytes;
    for (uint32_t r = 0; r < reps; ++r) {
      sys->cache().reset(opts_.seed ^ (r + 1));
      sys->controller().reset_bank_state(sys->clock().now_ns());
      row.baseline_cycles += baseline_copy(*sys, a, bytes);
    }
    audit(*sys);
    for (uint32_t r = 0; r < reps; ++r) {
      sys->cache().reset(opts_.seed ^ (r + 1));
      sys->controller().reset_bank_state(sys->clock().now_ns());
      row.pum_cycles += pum_copy(*sys, a, bytes, mode, opts_.dirty_fraction);
    }
    audit(*sys);
    rows.push_back(row);
  }
  return rows;
}

std::vector<SweepRow> Bench::init_sweep(BenchMode mode) {
  std::vector<SweepRow> rows;
  for (uint64_t bytes : opts_.sizes) {
    auto sys = fresh_system(false);
    Arrays a = alloc_arrays(*sys, bytes, false);
    uint32_t reps = reps_for(opts_, bytes);
    SweepRow row;
    row.size_bytes = bytes;
    for (uint32_t r = 0; r < reps; ++r) {
      sys->cache().reset(opts_.seed ^ (r + 1));
      sys->controller().reset_bank_state(sys->clock().now_ns());
      row.baseline_cycles += baseline_init(*sys, a, bytes);
    }
    audit(*sys);
    for (uint32_t r = 0; r < reps; ++r) {
      sys->cache().reset(opts_.seed ^ (r + 1));
      sys->controller().reset_bank_state(sys->clock().now_ns());
      row.pum_cycles += pum_init(*sys, a, bytes, mode, opts_.dirty_fraction);
    }
    audit(*sys);
    rows.push_back(row);
  }
  return rows;
}

std::vector<FlushRow> Bench::flush_sweep() {
  std::vector<FlushRow> rows;
  uint64_t bytes = opts_.flush_sweep_bytes;
  for (bool copy : {true, false}) {
    for (double f : opts_.dirty_fractions) {
      auto sys = fresh_system(false);
      Arrays a = alloc_arrays(*sys, bytes, copy);
      uint32_t reps = reps_for(opts_, bytes);
      FlushRow row;
      row.workload = copy ? "rcc" : "rci";
      row.size_bytes = bytes;
      row.dirty_fraction = f;
      for (uint32_t r = 0; r < reps; ++r) {
        sys->cache().reset(opts_.seed ^ (r + 1));
        sys->controller().reset_bank_state(sys->clock().now_ns());
        row.baseline_cycles += copy ? baseline_copy(*sys, a, bytes)
                                    : baseline_init(*sys, a, bytes);
      }
      audit(*sys);
      for (uint32_t r = 0; r < reps; ++r) {
        sys->cache().reset(opts_.seed ^ (r + 1));
        sys->controller().reset_bank_state(sys->clock().now_ns());
        row.pum_cycles += copy ? pum_copy(*sys, a, bytes, BenchMode::flush, f)
                               : pum_init(*sys, a, bytes, BenchMode::flush, f);
      }
      audit(*sys);
      rows.push_back(row);
    }
  }
  return rows;
}

uint64_t Bench::fork_random_phase(System& sys, const Arrays& a, uint64_t bytes,
                                  uint64_t phase_seed) const {
  uint64_t t0 = sys.clock().now();
  const CycleModel& m = cfg_.cycle_model;
  const uint32_t row_bytes = cfg_.device.geometry.row_bytes;
  const uint64_t words = bytes / 8;
  std::mt19937_64 rng(phase_seed);
  std::uniform_int_distribution<uint64_t> pick(0, words - 1);
  Cache& cache = sys.cache();
  for (uint32_t i = 0; i < m.fork_accesses; ++i) {
    uint64_t w = pick(rng);
    PhysAddr pa = a.dst_rows[w / (row_bytes / 8)] + (w % (row_bytes / 8)) * 8;
    cache.access_line_run(AccessKind::read, pa & ~PhysAddr(cfg_.cache.line_bytes - 1), 1);
    sys.compute(m.fork_access_compute_cycles);
  }
  return sys.clock().now() - t0;
}

std::vector<ForkRow> Bench::forkbench() {
  std::vector<ForkRow> rows;
  for (uint32_t pages : opts_.fork_pages) {
    uint64_t bytes = uint64_t(pages) * PageTable::kPageBytes;
    auto sys = fresh_system(false);
    Arrays a = alloc_arrays(*sys, bytes, true);
    uint32_t reps = reps_for(opts_, bytes);
    ForkRow row;
    row.pages = pages;
    row.bytes = bytes;
    uint64_t base_copy = 0;
    for (uint32_t r = 0; r < reps; ++r) {
      sys->cache().reset(opts_.seed ^ (r + 1));
      sys->controller().reset_bank_state(sys->clock().now_ns());
      uint64_t c = baseline_copy(*sys, a, bytes);
      uint64_t rp = fork_random_phase(*sys, a, bytes, opts_.seed ^ (pages * 1000003ull + r));
      base_copy += c;
      row.baseline_cycles += c + rp;
    }
    audit(*sys);
    for (uint32_t r = 0; r < reps; ++r) {
      sys->cache().reset(opts_.seed ^ (r + 1));
      sys->controller().reset_bank_state(sys->clock().now_ns());
      // the fork parent's pages are live, written data: full coherence with
      // every operand line treated dirty
      uint64_t c = pum_copy(*sys, a, bytes, BenchMode::flush, 1.0);
      uint64_t rp = fork_random_phase(*sys, a, bytes, opts_.seed ^ (pages * 1000003ull + r));
      row.pum_cycles += c + rp;
    }
    audit(*sys);
    row.memcpy_fraction_pct = 100.0 * double(base_copy) / double(row.baseline_cycles);
    rows.push_back(row);
  }
  return rows;
}

CompileResult Bench::compile_bench() {
  CompileResult res;
  const CycleModel& m = cfg_.cycle_model;
  res.chunks = m.compile_chunks;
  auto sys = fresh_system(false);
  Arrays a = alloc_arrays(*sys, res.chunk_bytes, false);
  for (uint32_t c = 0; c < res.chunks; ++c) {
    sys->cache().reset(std::nullopt);  // each chunk zero-allocates fresh, cold pages
    sys->controller().reset_bank_state(sys->clock().now_ns());
    uint64_t t0 = sys->clock().now();
    (void)baseline_init(*sys, a, res.chunk_bytes);
    sys->compute(m.compile_work_cycles);
    res.baseline_cycles += sys->clock().now() - t0;
  }
  audit(*sys);
  for (uint32_t c = 0; c < res.chunks; ++c) {
    sys->cache().reset(std::nullopt);
    sys->controller().reset_bank_state(sys->clock().now_ns());
    uint64_t t0 = sys->clock().now();
    sys->supervisor().rci(a.dst_va, res.chunk_bytes, FlushMode::none);
    sys->compute(m.compile_work_cycles);
    res.pum_cycles += sys->clock().now() - t0;
  }
  audit(*sys);
  return res;
}

namespace {

std::unique_ptr<System> make_trng_system(const SimConfig& base, const Supervisor& donor,
                                         double period_ns, uint64_t seed) {
  SimConfig cfg = base;
  cfg.trng_period_ns = period_ns;
  cfg.cache.replacement_seed = seed;
  auto sys = std::make_unique<System>(cfg);
  sys->supervisor().adopt_tables(donor);
  PhysAddr block;
  {
    DramAddress a;
    a.bank = 0;
    a.row = cfg.device.trng_row;
    a.column = cfg.device.trng_column;
    block = sys->controller().dram_to_phys(a);
  }
  sys->supervisor().characterize_trng_cells(block);
  return sys;
}

}  // namespace

TrngResult Bench::trng_sweep() {
  TrngResult res;
  for (double p = opts_.trng_period_lo_ns; p <= opts_.trng_period_hi_ns + 1e-9;
       p += opts_.trng_period_step_ns) {
    auto sys = make_trng_system(cfg_, donor_->supervisor(), p, opts_.seed);
    Pumolib& lib = sys->pumolib();
    uint64_t window_cycles = uint64_t(
        std::ceil(opts_.trng_sim_ms * 1e6 / cfg_.controller.cpu_period_ns));
    uint64_t start = sys->clock().now();
    double start_ns = sys->clock().now_ns();
    uint64_t bits = 0;
    while (sys->clock().now() - start < window_cycles) {
      if (lib.buf_sz() > 0) {
        lib.rand_dram();
        bits += 32;
      }
    }
    TrngRow row;
    row.period_ns = p;
    row.bits_consumed = bits;
    row.sim_ns = sys->clock().now_ns() - start_ns;
    row.throughput_mbps = double(bits) / row.sim_ns * 1000.0;
    res.rows.push_back(row);
    audit(*sys);
  }
  if (res.rows.size() >= 2)
    res.endpoint_ratio = res.rows.front().throughput_mbps / res.rows.back().throughput_mbps;

  auto sys = make_trng_system(cfg_, donor_->supervisor(), opts_.trng_period_lo_ns, opts_.seed);
  Pumolib& lib = sys->pumolib();
  std::vector<uint32_t> words;
  words.reserve(size_t(opts_.trng_test_bits / 32 + 1));
  while (uint64_t(words.size()) * 32 < opts_.trng_test_bits) {
    if (lib.buf_sz() > 0) words.push_back(lib.rand_dram());
  }
  std::vector<uint8_t> bits = unpack_bits(words);
  bits.resize(size_t(opts_.trng_test_bits));
  res.tested_bits = opts_.trng_test_bits;
  res.monobit_p = monobit_pvalue(bits);
  res.runs_p = runs_pvalue(bits);
  audit(*sys);
  return res;
}

void Bench::write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  std::ofstream out = open_out(path);
  out << "size_bytes,baseline_cycles,pum_cycles,speedup\n";
  char buf[160];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%llu,%llu,%llu,%.10g\n",
                  (unsigned long long)r.size_bytes, (unsigned long long)r.baseline_cycles,
                  (unsigned long long)r.pum_cycles, r.speedup());
    out << buf;
  }
}

void Bench::write_flush_csv(const std::string& path, const std::vector<FlushRow>& rows) {
  std::ofstream out = open_out(path);
  out << "workload,size_bytes,dirty_fraction,baseline_cycles,pum_cycles,speedup\n";
  char buf[200];
  for (const FlushRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%llu,%.10g,%llu,%llu,%.10g\n", r.workload.c_str(),
                  (unsigned long long)r.size_bytes, r.dirty_fraction,
                  (unsigned long long)r.baseline_cycles, (unsigned long long)r.pum_cycles,
                  r.speedup());
    out << buf;
  }
}

void Bench::write_fork_csv(const std::string& path, const std::vector<ForkRow>& rows) {
  std::ofstream out = open_out(path);
  out << "pages,bytes,baseline_cycles,pum_cycles,memcpy_fraction_pct,improvement_pct\n";
  char buf[200];
  for (const ForkRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%u,%llu,%llu,%llu,%.10g,%.10g\n", r.pages,
                  (unsigned long long)r.bytes, (unsigned long long)r.baseline_cycles,
                  (unsigned long long)r.pum_cycles, r.memcpy_fraction_pct,
                  r.improvement_pct());
    out << buf;
  }
}

void Bench::write_compile_csv(const std::string& path, const CompileResult& r) {
  std::ofstream out = open_out(path);
  out << "chunks,chunk_bytes,baseline_cycles,pum_cycles,improvement_pct\n";
  char buf[160];
  std::snprintf(buf, sizeof buf, "%u,%llu,%llu,%llu,%.10g\n", r.chunks,
                (unsigned long long)r.chunk_bytes, (unsigned long long)r.baseline_cycles,
                (unsigned long long)r.pum_cycles, r.improvement_pct());
  out << buf;
}

void Bench::write_trng_csv(const std::string& path, const std::vector<TrngRow>& rows) {
  std::ofstream out = open_out(path);
  out << "period_ns,bits_consumed,sim_ns,throughput_mbps\n";
  char buf[160];
  for (const TrngRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.10g,%llu,%.10g,%.10g\n", r.period_ns,
                  (unsigned long long)r.bits_consumed, r.sim_ns, r.throughput_mbps);
    out << buf;
  }
}

void Bench::write_plot_script(const std::string& csv_path, const std::string& kind) {
  std::ofstream out = open_out(csv_path + ".gnuplot");
  out << "set datafile separator \",\"\n";
  out << "set key autotitle columnhead\n";
  out << "set grid\n";
  if (kind == "copy" || kind == "init") {
    out << "set logscale x 2\n";
    out << "set xlabel 'array bytes'\nset ylabel 'speedup'\n";
    out << "plot '" << csv_path << "' using 1:4 with linespoints title 'speedup'\n";
  } else if (kind == "flush") {
    out << "set xlabel 'dirty fraction'\nset ylabel 'speedup'\n";
    out << "plot '" << csv_path << "' using 3:6 with linespoints title 'speedup'\n";
  } else if (kind == "fork") {
    out << "set logscale x 2\n";
    out << "set xlabel 'pages'\nset ylabel 'improvement %'\n";
    out << "plot '" << csv_path << "' using 1:6 with linespoints title 'improvement'\n";
  } else if (kind == "trng") {
    out << "set xlabel 'period ns'\nset ylabel 'Mb/s'\n";
    out << "plot '" << csv_path << "' using 1:4 with linespoints title 'throughput'\n";
  } else {
    out << "plot '" << csv_path << "'\n";
  }
}

}  // namespace pumsim
