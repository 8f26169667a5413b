#include "pumsim/supervisor.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <utility>

#include "pumsim/errors.hpp"

namespace pumsim {

namespace {
constexpr uint64_t kVaBase = 0x10000000;
}

Supervisor::Supervisor(MemController& ctrl, Cache& cache, Pumolib& pum, CycleMeter meter,
                       SupervisorCosts costs)
    : ctrl_(ctrl), cache_(cache), pum_(pum), meter_(meter), costs_(costs) {}

PhysAddr Supervisor::row_phys(uint32_t bank, uint32_t row) const {
  DramAddress a;
  a.bank = bank;
  a.row = row;
  return ctrl_.dram_to_phys(a);
}

PhysAddr Supervisor::initializer_of(uint32_t bank, uint32_t subarray) const {
  return initializers_.at(bank).at(subarray);
}

bool Supervisor::verify_copy_pair(uint32_t bank, uint32_t src_row, uint32_t dst_row) {
  const DeviceGeometry& g = ctrl_.device().geometry();
  std::vector<uint8_t> a(g.burst_bytes), b(g.burst_bytes);
  for (auto& x : a) x = uint8_t(data_rng_());
  for (auto& x : b) x = uint8_t(data_rng_());
  b[0] = uint8_t(a[0] ^ 0xff);  // the two patterns always differ
  PhysAddr src = row_phys(bank, src_row);
  PhysAddr dst = row_phys(bank, dst_row);
  auto w1 = ctrl_.demand_access(AccessKind::write, src, meter_.clock.now_ns(), a);
  meter_.spend(CycleCat::mem_write, w1.cycles);
  auto w2 = ctrl_.demand_access(AccessKind::write, dst, meter_.clock.now_ns(), b);
  meter_.spend(CycleCat::mem_write, w2.cycles);
  pum_.rowclone(src, dst);
  std::vector<uint8_t> got(g.burst_bytes);
  auto r = ctrl_.demand_access(AccessKind::read, dst, meter_.clock.now_ns(), {},
                               std::span<uint8_t>(got));
  meter_.spend(CycleCat::mem_read, r.cycles);
  return got == a;
}

void Supervisor::characterize_subarrays(const CharacterizeOptions& opts) {
  const DeviceGeometry& g = ctrl_.device().geometry();
  if (g.row_bytes != 2 * PageTable::kPageBytes)
    raise(Errc::config_error, "allocator expects rows of exactly two pages");
  if (opts.window_rows == 0 || opts.sampled_pairs_per_group == 0)
    raise(Errc::config_error, "characterization options must be positive");
  data_rng_.seed(opts.data_seed);
  samt_ = Samt(g.banks);
  ait_ = Ait(g.banks);
  irt_ = Irt{};
  pages_ = PageTable{};
  initializers_.assign(g.banks, {});
  va_bump_ = kVaBase;

  std::vector<uint8_t> zero_row(g.row_bytes, 0);
  for (uint32_t bank = 0; bank < g.banks; ++bank) {
    uint32_t first = 0;
    for (uint32_t r = 1; r <= g.rows_per_bank; ++r) {
      bool boundary = r == g.rows_per_bank || r - first >= opts.window_rows ||
                      !verify_copy_pair(bank, r - 1, r);
      if (!boundary) continue;
      uint32_t last = r - 1;
      if (last > first) {
        std::uniform_int_distribution<uint32_t> pick(first, last);
        for (uint32_t s = 0; s < opts.sampled_pairs_per_group; ++s) {
          uint32_t src = pick(data_rng_);
          uint32_t dst = pick(data_rng_);
          if (src == dst) dst = (dst == last) ? first : dst + 1;
          for (uint32_t t = 0; t < opts.trials; ++t)
            if (!verify_copy_pair(bank, src, dst))
              raise(Errc::characterization_failure,
                    "grouped rows failed a randomized copy verification");
        }
      }
      SamtEntry entry;
      entry.first_row = first;
      entry.last_row = last;
      for (uint32_t row = first; row < last; ++row) {
        PhysAddr base = row_phys(bank, row);
        entry.pairs.push_back({row, base, base + g.row_bytes / 2});
      }
      uint32_t sa = samt_.add_group(bank, std::move(entry));
      PhysAddr init = row_phys(bank, last);
      initializers_[bank].push_back(init);
      (void)sa;
      uint64_t cycles = ctrl_.write_row(init, zero_row, meter_.clock.now_ns());
      meter_.spend(CycleCat::mem_write, cycles);
      first = r;
    }
  }
}

std::vector<uint32_t> Supervisor::characterize_trng_cells(PhysAddr block, uint32_t trials,
                                                          double lo, double hi) {
  const DeviceGeometry& g = ctrl_.device().geometry();
  if (trials == 0) raise(Errc::config_error, "trials must be positive");
  std::vector<uint8_t> known(g.burst_bytes);
  for (auto& x : known) x = uint8_t(data_rng_());
  cache_.clflush(block);  // drop any stale copy before writing DRAM directly
  auto w = ctrl_.demand_access(AccessKind::write, block, meter_.clock.now_ns(), known);
  meter_.spend(CycleCat::mem_write, w.cycles);

  std::vector<uint32_t> flips(g.burst_bytes * 8, 0);
  for (uint32_t t = 0; t < trials; ++t) {
    std::vector<uint8_t> got = pum_.rd_rl(block);
    for (uint32_t bit = 0; bit < flips.size(); ++bit) {
      uint8_t a = (got[bit / 8] >> (bit % 8)) & 1;
      uint8_t b = (known[bit / 8] >> (bit % 8)) & 1;
      if (a != b) ++flips[bit];
    }
  }
  std::vector<uint32_t> cells;
  for (uint32_t bit = 0; bit < flips.size(); ++bit) {
    double rate = double(flips[bit]) / trials;
    if (rate >= lo && rate <= hi) cells.push_back(bit);
  }
  if (cells.size() < 4)
    raise(Errc::no_trng_cells, "block holds " + std::to_string(cells.size()) +
                                   " qualifying cells, need 4");
  Crf& crf = ctrl_.crf();
  crf.write(Crf::trng_block_lo, uint32_t(block & 0xffffffffu));
  crf.write(Crf::trng_block_hi, uint32_t(block >> 32));
  for (size_t i = 0; i < 4; ++i) crf.write(Crf::trng_bit0 + i, cells[i]);
  ctrl_.advance_to(meter_.clock.now_ns());  // commit
  return cells;
}

uint64_t Supervisor::alloc_align(uint64_t bytes, uint32_t id) {
  const DeviceGeometry& g = ctrl_.device().geometry();
  if (!characterized())
    raise(Errc::characterization_failure, "allocation requires a characterized device");
  if (bytes == 0 || bytes % g.row_bytes != 0)
    raise(Errc::invalid_size, "allocation must be a positive multiple of the row size");
  uint32_t banks = samt_.banks();
  uint64_t rows = bytes / g.row_bytes;

  std::vector<uint32_t> need(banks, 0);
  for (uint64_t j = 0; j < rows; ++j) ++need[j % banks];
  std::vector<std::pair<uint32_t, uint32_t>> binds;  // (bank, subarray) to bind
  for (uint32_t b = 0; b < banks; ++b) {
    if (!need[b]) continue;
    auto sa = ait_.lookup(b, id);
    if (sa) {
      if (samt_.entry(b, *sa).free_pairs() < need[b])
        raise(Errc::out_of_subarray_capacity,
              "allocation id exhausted its subarray in bank " + std::to_string(b));
      continue;
    }
    bool found = false;
    for (uint32_t s = 0; s < samt_.subarrays(b); ++s) {
      if (ait_.subarray_bound(b, s)) continue;
      if (samt_.entry(b, s).free_pairs() < need[b]) continue;
      binds.emplace_back(b, s);
      found = true;
      break;
    }
    if (!found)
      raise(Errc::out_of_subarray_capacity,
            "no unbound subarray with capacity in bank " + std::to_string(b));
  }
  for (auto [b, s] : binds) ait_.bind(b, id, s);

  uint64_t base = va_bump_;
  uint64_t half_span = bytes / 2;
  for (uint64_t j = 0; j < rows; ++j) {
    uint32_t b = uint32_t(j % banks);
    uint32_t s = *ait_.lookup(b, id);
    SamtEntry& e = samt_.entry(b, s);
    const RowPair& p = e.pairs[e.next++];
    pages_.map(base + j * PageTable::kPageBytes, p.col0);
    pages_.map(base + half_span + j * PageTable::kPageBytes, p.half);
    PhysAddr init = initializer_of(b, s);
    irt_.insert(p.col0 / PageTable::kPageBytes, init);
    irt_.insert(p.half / PageTable::kPageBytes, init);
  }
  va_bump_ += bytes;
  return base;
}

std::vector<Supervisor::RowRef> Supervisor::resolve_rows(uint64_t va, uint64_t bytes) {
  const DeviceGeometry& g = ctrl_.device().geometry();
  if (bytes == 0 || bytes % g.row_bytes != 0)
    raise(Errc::invalid_size, "operand must be a positive multiple of the row size");
  if (va % PageTable::kPageBytes != 0)
    raise(Errc::granularity_violation, "operand must be page aligned");
  uint64_t rows = bytes / g.row_bytes;
  uint64_t half_span = bytes / 2;
  std::vector<RowRef> out;
  out.reserve(rows);
  for (uint64_t j = 0; j < rows; ++j) {
    meter_.spend(CycleCat::page_walk, costs_.page_walk);
    auto pa1 = pages_.translate(va + j * PageTable::kPageBytes);
    meter_.spend(CycleCat::page_walk, costs_.page_walk);
    auto pa2 = pages_.translate(va + half_span + j * PageTable::kPageBytes);
    if (!pa1 || !pa2) raise(Errc::unmapped_address, "operand page is not mapped");
    if (*pa1 % g.row_bytes != 0 || *pa2 != *pa1 + g.row_bytes / 2)
      raise(Errc::not_colocated, "virtual blocks are not row siblings");
    DramAddress a = ctrl_.phys_to_dram(*pa1);
    out.push_back({a.bank, a.row, *pa1, *pa2});
  }
  return out;
}

void Supervisor::flush_row_lines(const RowRef& r) {
  const DeviceGeometry& g = ctrl_.device().geometry();
  uint32_t line = cache_.config().line_bytes;
  for (uint32_t off = 0; off < g.row_bytes; off += line) cache_.clflush(r.col0 + off);
}

uint64_t Supervisor::rcc(uint64_t dst_va, uint64_t src_va, uint64_t bytes, FlushMode mode) {
  uint64_t start = meter_.clock.now();
  meter_.spend(CycleCat::syscall, costs_.syscall_entry);
  std::vector<RowRef> src = resolve_rows(src_va, bytes);
  std::vector<RowRef> dst = resolve_rows(dst_va, bytes);
  for (size_t i = 0; i < src.size(); ++i) {
    meter_.spend(CycleCat::table_lookup, costs_.table_lookup);
    auto sa_s = samt_.subarray_of(src[i].bank, src[i].row);
    auto sa_d = samt_.subarray_of(dst[i].bank, dst[i].row);
    if (src[i].bank != dst[i].bank || !sa_s || !sa_d || *sa_s != *sa_d)
      raise(Errc::not_colocated, "source and destination rows do not share a subarray");
    if (mode == FlushMode::full) {
      flush_row_lines(src[i]);
      flush_row_lines(dst[i]);
    }
    PumEffect e = pum_.rowclone(src[i].col0, dst[i].col0);
    if (e != PumEffect::rowclone_ok)
      raise(Errc::internal_bug, "row copy rejected after the co-location check");
  }
  return meter_.clock.now() - start;
}

uint64_t Supervisor::rci(uint64_t dst_va, uint64_t bytes, FlushMode mode) {
  uint64_t start = meter_.clock.now();
  meter_.spend(CycleCat::syscall, costs_.syscall_entry);
  std::vector<RowRef> dst = resolve_rows(dst_va, bytes);
  for (const RowRef& r : dst) {
    meter_.spend(CycleCat::table_lookup, costs_.table_lookup);
    auto init = irt_.lookup(r.col0 / PageTable::kPageBytes);
    if (!init) raise(Errc::missing_initializer, "destination page has no initializer row");
    if (mode == FlushMode::full) flush_row_lines(r);
    PumEffect e = pum_.rowclone(*init, r.col0);
    if (e != PumEffect::rowclone_ok)
      raise(Errc::internal_bug, "row init rejected after the initializer lookup");
  }
  return meter_.clock.now() - start;
}

void Supervisor::cpu_store(uint64_t va, std::span<const uint8_t> bytes) {
  if (va % 8 != 0 || bytes.size() % 8 != 0)
    raise(Errc::granularity_violation, "process access must be 8-byte granular");
  for (size_t off = 0; off < bytes.size(); off += 8) {
    auto pa = pages_.translate(va + off);
    if (!pa) raise(Errc::unmapped_address, "store to unmapped address");
    cache_.store(*pa, bytes.subspan(off, 8));
  }
}

void Supervisor::cpu_load(uint64_t va, std::span<uint8_t> bytes) {
  if (va % 8 != 0 || bytes.size() % 8 != 0)
    raise(Errc::granularity_violation, "process access must be 8-byte granular");
  for (size_t off = 0; off < bytes.size(); off += 8) {
    auto pa = pages_.translate(va + off);
    if (!pa) raise(Errc::unmapped_address, "load from unmapped address");
    cache_.load(*pa, bytes.subspan(off, 8));
  }
}

std::string Supervisor::table_key() const {
  const DeviceConfig& dc = ctrl_.device().config();
  char buf[192];
  std::snprintf(buf, sizeof buf,
                "pumsim-tables-v1 banks=%u rows=%u row_bytes=%u subarray=%u seed=%llu density=%g",
                dc.geometry.banks, dc.geometry.rows_per_bank, dc.geometry.row_bytes,
                dc.geometry.rows_per_subarray, (unsigned long long)dc.weak_cell_seed,
                dc.weak_cell_density);
  return buf;
}

void Supervisor::save_tables(std::ostream& out) const {
  out << table_key() << '\n';
  samt_.serialize(out);
  out << "initializers " << initializers_.size() << '\n';
  for (const auto& bank : initializers_) {
    out << bank.size();
    for (PhysAddr pa : bank) out << ' ' << pa;
    out << '\n';
  }
}

bool Supervisor::load_tables(std::istream& in) {
  std::string key;
  if (!std::getline(in, key)) return false;
  if (key != table_key()) return false;
  Samt samt = Samt::deserialize(in);
  std::string tag;
  size_t nbanks = 0;
  if (!(in >> tag >> nbanks) || tag != "initializers")
    raise(Errc::config_error, "bad initializer block in table dump");
  std::vector<std::vector<PhysAddr>> inits(nbanks);
  for (auto& bank : inits) {
    size_t n = 0;
    in >> n;
    bank.resize(n);
    for (PhysAddr& pa : bank) in >> pa;
  }
  if (!in) raise(Errc::config_error, "truncated table dump");
  samt_ = std::move(samt);
  initializers_ = std::move(inits);
  // allocation state is per-run: rewind pair consumption, drop bindings
  for (uint32_t b = 0; b < samt_.banks(); ++b)
    for (uint32_t s = 0; s < samt_.subarrays(b); ++s) samt_.entry(b, s).next = 0;
  ait_ = Ait(samt_.banks());
  irt_ = Irt{};
  pages_ = PageTable{};
  va_bump_ = kVaBase;
  return true;
}

void Supervisor::adopt_tables(const Supervisor& donor) {
  samt_ = donor.samt_;
  initializers_ = donor.initializers_;
  for (uint32_t b = 0; b < samt_.banks(); ++b)
    for (uint32_t s = 0; s < samt_.subarrays(b); ++s) samt_.entry(b, s).next = 0;
  ait_ = Ait(samt_.banks());
  irt_ = Irt{};
  pages_ = PageTable{};
  va_bump_ = kVaBase;
}

}  // namespace pumsim
