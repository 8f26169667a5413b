#include "pumsim/dram_device.hpp"

#include <algorithm>
#include <string>
#include <tuple>

#include "pumsim/errors.hpp"

namespace pumsim {

namespace {
constexpr double kTimeEps = 1e-9;

uint64_t block_key(uint32_t bank, uint32_t row, uint32_t column, const DeviceGeometry& g) {
  return (uint64_t(bank) * g.rows_per_bank + row) * g.columns_per_row() + column;
}
}  // namespace

void WeakCellMap::insert(const WeakCell& cell, const DeviceGeometry& g) {
  if (cell.probability < 0.0 || cell.probability > 1.0)
    raise(Errc::config_error, "weak cell probability outside [0,1]");
  auto& vec = blocks_[block_key(cell.bank, cell.row, cell.column, g)];
  vec.push_back(cell);
  std::sort(vec.begin(), vec.end(),
            [](const WeakCell& a, const WeakCell& b) { return a.bit < b.bit; });
  ++count_;
}

const std::vector<WeakCell>* WeakCellMap::block(uint32_t bank, uint32_t row, uint32_t column,
                                                const DeviceGeometry& g) const {
  auto it = blocks_.find(block_key(bank, row, column, g));
  return it == blocks_.end() ? nullptr : &it->second;
}

std::vector<WeakCell> WeakCellMap::all() const {
  std::vector<WeakCell> cells;
  cells.reserve(count_);
  for (const auto& [key, vec] : blocks_) cells.insert(cells.end(), vec.begin(), vec.end());
  std::sort(cells.begin(), cells.end(), [](const WeakCell& a, const WeakCell& b) {
    return std::tie(a.bank, a.row, a.column, a.bit) < std::tie(b.bank, b.row, b.column, b.bit);
  });
  return cells;
}

DramDevice::DramDevice(const DeviceConfig& cfg) : cfg_(cfg), sample_rng_(cfg.sample_seed) {
  cfg_.geometry.validate();
  cfg_.timing.validate();
  const DeviceGeometry& g = cfg_.geometry;
  if (cfg_.trng_row >= g.rows_per_bank || cfg_.trng_column >= g.columns_per_row())
    raise(Errc::config_error, "TRNG block coordinates outside geometry");
  banks_.resize(g.banks);
  for (auto& rows : banks_) rows.resize(g.rows_per_bank);
  state_.resize(g.banks);

  // One designated TRNG block per bank: trng_cells_per_block cells pinned at
  // probability 0.5, positions drawn per bank from the weak-cell seed.
  const uint32_t burst_bits = g.burst_bytes * 8;
  if (cfg_.trng_cells_per_block > burst_bits)
    raise(Errc::config_error, "more TRNG cells than bits in a burst");
  for (uint32_t b = 0; b < g.banks; ++b) {
    std::mt19937_64 gen(cfg_.weak_cell_seed * 0x9e3779b97f4a7c15ull + b + 1);
    std::vector<uint32_t> bits;
    std::uniform_int_distribution<uint32_t> pick(0, burst_bits - 1);
    while (bits.size() < cfg_.trng_cells_per_block) {
      uint32_t bit = pick(gen);
      if (std::find(bits.begin(), bits.end(), bit) == bits.end()) bits.push_back(bit);
    }
    std::sort(bits.begin(), bits.end());
    for (uint32_t bit : bits)
      weak_.insert({b, cfg_.trng_row, cfg_.trng_column, bit, 0.5}, g);
    trng_blocks_.push_back({b, cfg_.trng_row, cfg_.trng_column, bits});
  }

  // Background weak cells: seeded sparse placement at the configured density,
  // kept out of the designated TRNG blocks.
  std::mt19937_64 gen(cfg_.weak_cell_seed ^ 0x5eedc0ffeeull);
  const double expected = cfg_.weak_cell_density * double(g.capacity_bytes()) * 8.0;
  uint64_t count = 0;
  if (expected > 0.0) count = std::poisson_distribution<uint64_t>(expected)(gen);
  std::uniform_int_distribution<uint32_t> pick_bank(0, g.banks - 1);
  std::uniform_int_distribution<uint32_t> pick_row(0, g.rows_per_bank - 1);
  std::uniform_int_distribution<uint32_t> pick_col(0, g.columns_per_row() - 1);
  std::uniform_int_distribution<uint32_t> pick_bit(0, burst_bits - 1);
  std::uniform_real_distribution<double> pick_prob(0.01, 0.99);
  for (uint64_t i = 0; i < count; ++i) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      WeakCell c{pick_bank(gen), pick_row(gen), pick_col(gen), pick_bit(gen), pick_prob(gen)};
      if (c.row == cfg_.trng_row && c.column == cfg_.trng_column) continue;
      const auto* existing = weak_.block(c.bank, c.row, c.column, g);
      if (existing && std::any_of(existing->begin(), existing->end(),
                                  [&](const WeakCell& w) { return w.bit == c.bit; }))
        continue;
      weak_.insert(c, g);
      break;
    }
  }
}

std::vector<uint8_t>& DramDevice::row_data(uint32_t bank, uint32_t row) {
  auto& data = banks_[bank][row];
  if (data.empty()) data.assign(cfg_.geometry.row_bytes, 0);
  return data;
}

const std::vector<uint8_t>* DramDevice::row_data_if_present(uint32_t bank, uint32_t row) const {
  const auto& data = banks_[bank][row];
  return data.empty() ? nullptr : &data;
}

void DramDevice::push_hist(BankState& b, DramCommandKind kind, double at_ns, uint32_t row) {
  if (b.hist_n == 3) {
    b.hist[0] = b.hist[1];
    b.hist[1] = b.hist[2];
    b.hist_n = 2;
  }
  b.hist[b.hist_n++] = {kind, at_ns, row};
}

void DramDevice::check_bounds(const DramCommand& cmd) const {
  const DeviceGeometry& g = cfg_.geometry;
  if (cmd.bank >= g.banks)
    raise(Errc::out_of_range, "bank " + std::to_string(cmd.bank));
  if ((cmd.kind == DramCommandKind::act || cmd.kind == DramCommandKind::rd ||
       cmd.kind == DramCommandKind::wr) &&
      cmd.row >= g.rows_per_bank)
    raise(Errc::out_of_range, "row " + std::to_string(cmd.row));
  if ((cmd.kind == DramCommandKind::rd || cmd.kind == DramCommandKind::wr) &&
      cmd.column >= g.columns_per_row())
    raise(Errc::out_of_range, "column " + std::to_string(cmd.column));
}

CommandResult DramDevice::on_activate(uint32_t bank, uint32_t row, double at_ns,
                                      const TimingParams& timing) {
  BankState& b = state_[bank];
  CommandResult res;
  // ACT -> PRE -> ACT with both gaps below nominal: the charge of the first
  // row is still on the bitlines when the second row is opened, so the open
  // amplifiers drive the second row to the first row's contents -- provided
  // both rows hang off the same local amplifiers (same subarray).
  if (b.hist_n >= 2) {
    const Past& prev_act = b.hist[b.hist_n - 2];
    const Past& prev_pre = b.hist[b.hist_n - 1];
    if (prev_act.kind == DramCommandKind::act && prev_pre.kind == DramCommandKind::pre &&
        (prev_pre.at_ns - prev_act.at_ns) < timing.nominal_tras - kTimeEps &&
        (at_ns - prev_pre.at_ns) < timing.nominal_trp - kTimeEps) {
      uint32_t src = prev_act.row;
      res.src_row = src;
      res.dst_row = row;
      if (cfg_.geometry.subarray_of_row(src) == cfg_.geometry.subarray_of_row(row)) {
        if (src != row) {
          const auto* src_data = row_data_if_present(bank, src);
          if (src_data)
            row_data(bank, row) = *src_data;
          else if (row_data_if_present(bank, row))
            row_data(bank, row).assign(cfg_.geometry.row_bytes, 0);
        }
        res.pum_effect = PumEffect::rowclone_ok;
      } else {
        res.pum_effect = PumEffect::rowclone_failed;
      }
    }
  }
  b.open_row = row;
  b.act_ns = at_ns;
  return res;
}

void DramDevice::apply_weak_cells(uint32_t bank, uint32_t row, uint32_t column,
                                  std::span<uint8_t> burst) {
  const auto* cells = weak_.block(bank, row, column, cfg_.geometry);
  if (!cells) return;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const WeakCell& c : *cells)
    if (u(sample_rng_) < c.probability) burst[c.bit / 8] ^= uint8_t(1u << (c.bit % 8));
}

CommandResult DramDevice::issue(const DramCommand& cmd, double at_ns,
                                const TimingParams& timing, std::span<const uint8_t> wdata,
                                std::span<uint8_t> rdata) {
  check_bounds(cmd);
  const DeviceGeometry& g = cfg_.geometry;
  BankState& b = state_[cmd.bank];
  if (b.hist_n > 0 && at_ns <= b.hist[b.hist_n - 1].at_ns - kTimeEps)
    raise(Errc::internal_bug, "bank command time went backwards");

  CommandResult res;
  switch (cmd.kind) {
    case DramCommandKind::act:
      if (b.open_row)
        raise(Errc::illegal_command, "ACT on bank " + std::to_string(cmd.bank) +
                                         " with row " + std::to_string(*b.open_row) + " open");
      res = on_activate(cmd.bank, cmd.row, at_ns, timing);
      push_hist(b, cmd.kind, at_ns, cmd.row);
      break;
    case DramCommandKind::pre:
      b.open_row.reset();
      push_hist(b, cmd.kind, at_ns, 0);
      break;
    case DramCommandKind::rd: {
      if (!b.open_row) raise(Errc::illegal_command, "RD with no open row");
      if (!rdata.empty()) {
        if (rdata.size() != g.burst_bytes) raise(Errc::internal_bug, "RD burst size");
        const auto* data = row_data_if_present(cmd.bank, *b.open_row);
        uint64_t off = uint64_t(cmd.column) * g.burst_bytes;
        if (data)
          std::copy_n(data->begin() + off, g.burst_bytes, rdata.begin());
        else
          std::fill(rdata.begin(), rdata.end(), uint8_t(0));
        if ((at_ns - b.act_ns) < timing.nominal_trcd - kTimeEps)
          apply_weak_cells(cmd.bank, *b.open_row, cmd.column, rdata);
      }
      push_hist(b, cmd.kind, at_ns, *b.open_row);
      break;
    }
    case DramCommandKind::wr: {
      if (!b.open_row) raise(Errc::illegal_command, "WR with no open row");
      if (!wdata.empty()) {  // empty payload: cost/state-only write
        if (wdata.size() != g.burst_bytes) raise(Errc::internal_bug, "WR burst size");
        auto& data = row_data(cmd.bank, *b.open_row);
        std::copy(wdata.begin(), wdata.end(),
                  data.begin() + uint64_t(cmd.column) * g.burst_bytes);
      }
      push_hist(b, cmd.kind, at_ns, *b.open_row);
      break;
    }
    case DramCommandKind::ref:
      for (uint32_t bank = 0; bank < g.banks; ++bank) {
        if (state_[bank].open_row)
          raise(Errc::illegal_command, "REF with bank " + std::to_string(bank) + " open");
        push_hist(state_[bank], DramCommandKind::ref, at_ns, 0);
      }
      break;
  }
  return res;
}

std::vector<uint8_t> DramDevice::reduced_trcd_read(uint32_t bank, uint32_t row,
                                                   uint32_t column,
                                                   const TimingParams& timing, double at_ns) {
  std::vector<uint8_t> burst(cfg_.geometry.burst_bytes);
  issue({DramCommandKind::act, bank, row, 0}, at_ns, timing);
  issue({DramCommandKind::rd, bank, row, column}, at_ns + timing.trcd, timing, {}, burst);
  issue({DramCommandKind::pre, bank, 0, 0}, at_ns + timing.nominal_tras, timing);
  return burst;
}

void DramDevice::poke(uint32_t bank, uint32_t row, uint32_t byte_offset,
                      std::span<const uint8_t> bytes) {
  const DeviceGeometry& g = cfg_.geometry;
  if (bank >= g.banks || row >= g.rows_per_bank ||
      uint64_t(byte_offset) + bytes.size() > g.row_bytes)
    raise(Errc::out_of_range, "poke outside device");
  auto& data = row_data(bank, row);
  std::copy(bytes.begin(), bytes.end(), data.begin() + byte_offset);
}

std::vector<uint8_t> DramDevice::peek(uint32_t bank, uint32_t row, uint32_t byte_offset,
                                      uint32_t len) const {
  const DeviceGeometry& g = cfg_.geometry;
  if (bank >= g.banks || row >= g.rows_per_bank || uint64_t(byte_offset) + len > g.row_bytes)
    raise(Errc::out_of_range, "peek outside device");
  std::vector<uint8_t> out(len, 0);
  const auto* data = row_data_if_present(bank, row);
  if (data) std::copy_n(data->begin() + byte_offset, len, out.begin());
  return out;
}

}  // namespace pumsim
