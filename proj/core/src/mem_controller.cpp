#include "pumsim/mem_controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pumsim/errors.hpp"

namespace pumsim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTimeEps = 1e-9;
}  // namespace

MemController::MemController(DramDevice& dev, const ControllerConfig& cfg, TraceSink* sink)
    : dev_(dev),
      cfg_(cfg),
      layout_(DramAddressLayout::for_geometry(dev.geometry())),
      sink_(sink),
      banks_(dev.geometry().banks),
      rng_buffer_(cfg.random_buffer_bits),
      next_refresh_ns_(cfg.trefi_ns) {
  cfg_.timing.validate();
  if (cfg_.cpu_period_ns <= 0 || cfg_.dram_period_ns <= 0 || cfg_.tcl_ns <= 0 ||
      cfg_.tburst_ns <= 0 || cfg_.trefi_ns <= 0 || cfg_.trfc_ns <= 0)
    raise(Errc::config_error, "controller timings must be positive");
}

uint64_t MemController::to_cpu_cycles(double ns) const {
  if (ns <= 0) return 0;
  return uint64_t(std::ceil(ns / cfg_.cpu_period_ns - kTimeEps));
}

void MemController::emit_event(const ScheduleEvent& e) {
  if (sink_) sink_->on_event(e);
}

CommandResult MemController::issue(DramCommandKind kind, uint32_t bank, uint32_t row,
                                   uint32_t column, double at_ns, const TimingParams& t,
                                   std::span<const uint8_t> wdata, std::span<uint8_t> rdata) {
  DramCommand cmd{kind, bank, row, column};
  CommandResult res = dev_.issue(cmd, at_ns, t, wdata, rdata);
  if (sink_) sink_->on_command(at_ns, cmd);
  return res;
}

void MemController::commit_crf(double now_ns) {
  if (!crf_.pending()) return;
  uint32_t old_period = crf_.active(Crf::trng_period_ns);
  bool was_configured = trng_configured();
  crf_.commit();
  uint32_t new_period = crf_.active(Crf::trng_period_ns);
  // Rearm on a period change and whenever the engine first becomes fully
  // configured; otherwise a stale next-tick time would make the engine "catch
  // up" on a span it was never armed for.
  if (new_period != old_period || (!was_configured && trng_configured()))
    next_trng_ns_ = now_ns + double(new_period);
}

TimingParams MemController::violated_timing() const {
  TimingParams t = cfg_.timing;
  // Unprogrammed (zero) registers leave the nominal value in place, i.e.
  // no violation and no in-memory effect.
  if (uint32_t v = crf_.active(Crf::violated_trcd_cns)) t.trcd = double(v) / 100.0;
  if (uint32_t v = crf_.active(Crf::violated_tras_cns)) t.tras = double(v) / 100.0;
  if (uint32_t v = crf_.active(Crf::violated_trp_cns)) t.trp = double(v) / 100.0;
  return t;
}

bool MemController::trng_configured() const {
  if (crf_.active(Crf::trng_period_ns) == 0) return false;
  uint32_t b0 = crf_.active(Crf::trng_bit0), b1 = crf_.active(Crf::trng_bit1);
  uint32_t b2 = crf_.active(Crf::trng_bit2), b3 = crf_.active(Crf::trng_bit3);
  if (b0 == b1 || b0 == b2 || b0 == b3 || b1 == b2 || b1 == b3 || b2 == b3) return false;
  uint32_t burst_bits = dev_.geometry().burst_bytes * 8;
  if (b0 >= burst_bits || b1 >= burst_bits || b2 >= burst_bits || b3 >= burst_bits)
    return false;
  return crf_.active_trng_block() < layout_.capacity_bytes();
}

void MemController::do_refresh(double at_ns) {
  const TimingParams& t = cfg_.timing;
  double start = at_ns;
  for (const BankFront& f : banks_) start = std::max(start, f.free_ns);
  emit_event({start, EventKind::refresh, 0, 0, 0, 0});
  bool any_open = false;
  for (uint32_t b = 0; b < banks_.size(); ++b) {
    BankFront& f = banks_[b];
    if (f.open_row) {
      double pre_at = std::max(start, f.act_ns + t.nominal_tras);
      issue(DramCommandKind::pre, b, 0, 0, pre_at, t);
      f.open_row.reset();
      any_open = true;
    }
  }
  double ref_at = any_open ? start + t.nominal_trp : start;
  issue(DramCommandKind::ref, 0, 0, 0, ref_at, t);
  for (BankFront& f : banks_) f.free_ns = ref_at + cfg_.trfc_ns;
  ++pstats_.refreshes;
}

void MemController::do_trng_access(double at_ns) {
  uint32_t nbits = 4;
  if (!rng_buffer_.can_push(nbits)) {
    ++pstats_.trng_skipped_full;
    return;
  }
  DramAddress a = layout_.decompose(crf_.active_trng_block());
  TimingParams v = violated_timing();
  BankFront& f = banks_[a.bank];
  double t0 = std::max(at_ns, f.free_ns);
  emit_event({t0, EventKind::trng_access, a.bank, a.row, a.column, 0});
  if (f.open_row) {
    double pre_at = std::max(t0, f.act_ns + cfg_.timing.nominal_tras);
    issue(DramCommandKind::pre, a.bank, 0, 0, pre_at, cfg_.timing);
    t0 = pre_at + cfg_.timing.nominal_trp;
    f.open_row.reset();
  }
  std::vector<uint8_t> burst(dev_.geometry().burst_bytes);
  issue(DramCommandKind::act, a.bank, a.row, 0, t0, v);
  issue(DramCommandKind::rd, a.bank, a.row, a.column, t0 + v.trcd, v, {}, burst);
  issue(DramCommandKind::pre, a.bank, 0, 0, t0 + cfg_.timing.nominal_tras, cfg_.timing);
  f.act_ns = t0;
  f.free_ns = t0 + cfg_.timing.nominal_tras + cfg_.timing.nominal_trp;

  uint32_t nibble = 0;
  const uint32_t pos[4] = {crf_.active(Crf::trng_bit0), crf_.active(Crf::trng_bit1),
                           crf_.active(Crf::trng_bit2), crf_.active(Crf::trng_bit3)};
  for (uint32_t i = 0; i < nbits; ++i)
    nibble |= uint32_t((burst[pos[i] / 8] >> (pos[i] % 8)) & 1u) << i;
  rng_buffer_.push_bits(nibble, nbits);
  ++pstats_.trng_accesses;
  pstats_.trng_bits_produced += nbits;
}

void MemController::advance_to(double now_ns) {
  commit_crf(std::max(now_ns, periodic_done_ns_));
  if (now_ns <= periodic_done_ns_) return;
  while (true) {
    double next_r = cfg_.refresh_enabled ? next_refresh_ns_ : kInf;
    bool trng_on = trng_configured();
    double period = double(crf_.active(Crf::trng_period_ns));
    double next_t = trng_on ? next_trng_ns_ : kInf;
    double next = std::min(next_r, next_t);
    if (next > now_ns) break;
    if (next_r <= next_t) {
      do_refresh(next_refresh_ns_);
      next_refresh_ns_ += cfg_.trefi_ns;
    } else {
      // A full buffer halts generation; the skipped ticks up to now_ns (or
      // the next refresh) are all identical no-ops, so take them in one step.
      if (!rng_buffer_.can_push(4)) {
        double until = std::min(now_ns, next_r);
        uint64_t skipped = uint64_t((until - next_trng_ns_) / period) + 1;
        pstats_.trng_skipped_full += skipped;
        next_trng_ns_ += double(skipped) * period;
        continue;
      }
      do_trng_access(next_trng_ns_);
      next_trng_ns_ += period;
    }
  }
  periodic_done_ns_ = now_ns;
}

AccessResult MemController::demand_access(AccessKind kind, PhysAddr addr, double now_ns,
                                          std::span<const uint8_t> wdata,
                                          std::span<uint8_t> rdata) {
  advance_to(now_ns);
  DramAddress a = layout_.decompose(addr);
  const TimingParams& t = cfg_.timing;
  BankFront& f = banks_[a.bank];
  double start = std::max(now_ns, f.free_ns);
  double col_at;
  if (f.open_row && *f.open_row == a.row) {
    col_at = start;
  } else if (f.open_row) {
    double pre_at = std::max(start, f.act_ns + t.nominal_tras);
    issue(DramCommandKind::pre, a.bank, 0, 0, pre_at, t);
    double act_at = pre_at + t.nominal_trp;
    issue(DramCommandKind::act, a.bank, a.row, 0, act_at, t);
    f.act_ns = act_at;
    col_at = act_at + t.nominal_trcd;
  } else {
    issue(DramCommandKind::act, a.bank, a.row, 0, start, t);
    f.act_ns = start;
    col_at = start + t.nominal_trcd;
  }
  if (kind == AccessKind::read)
    issue(DramCommandKind::rd, a.bank, a.row, a.column, col_at, t, {}, rdata);
  else
    issue(DramCommandKind::wr, a.bank, a.row, a.column, col_at, t, wdata, {});
  double done = col_at + cfg_.tcl_ns + cfg_.tburst_ns;
  f.open_row = a.row;
  f.free_ns = done;

  uint64_t cycles = cfg_.demand_overhead_cycles + to_cpu_cycles(done - now_ns);
  emit_event({start, kind == AccessKind::read ? EventKind::demand_read : EventKind::demand_write,
              a.bank, a.row, a.column, cycles});
  return {cycles};
}

uint64_t MemController::write_row(PhysAddr row_base, std::span<const uint8_t> bytes,
                                  double now_ns) {
  const DeviceGeometry& g = dev_.geometry();
  DramAddress a = layout_.decompose(row_base);
  if (a.column != 0 || a.byte_offset != 0 || bytes.size() != g.row_bytes)
    raise(Errc::internal_bug, "write_row wants a row-aligned full row");
  uint64_t cycles = 0;
  for (uint32_t col = 0; col < g.columns_per_row(); ++col) {
    auto burst = bytes.subspan(size_t(col) * g.burst_bytes, g.burst_bytes);
    cycles += demand_access(AccessKind::write, row_base + uint64_t(col) * g.burst_bytes,
                            now_ns + double(cycles) * cfg_.cpu_period_ns, burst, {})
                  .cycles;
  }
  return cycles;
}

uint64_t MemController::read_row(PhysAddr row_base, std::span<uint8_t> bytes, double now_ns) {
  const DeviceGeometry& g = dev_.geometry();
  DramAddress a = layout_.decompose(row_base);
  if (a.column != 0 || a.byte_offset != 0 || bytes.size() != g.row_bytes)
    raise(Errc::internal_bug, "read_row wants a row-aligned full row");
  uint64_t cycles = 0;
  for (uint32_t col = 0; col < g.columns_per_row(); ++col) {
    auto burst = bytes.subspan(size_t(col) * g.burst_bytes, g.burst_bytes);
    cycles += demand_access(AccessKind::read, row_base + uint64_t(col) * g.burst_bytes,
                            now_ns + double(cycles) * cfg_.cpu_period_ns, {}, burst)
                  .cycles;
  }
  return cycles;
}

void MemController::posted_write(PhysAddr addr, std::span<const uint8_t> wdata,
                                 double now_ns) {
  advance_to(now_ns);
  DramAddress a = layout_.decompose(addr);
  const TimingParams& t = cfg_.timing;
  BankFront& f = banks_[a.bank];
  double start = std::max(now_ns, f.free_ns);
  double col_at;
  if (f.open_row && *f.open_row == a.row) {
    col_at = start;
  } else if (f.open_row) {
    double pre_at = std::max(start, f.act_ns + t.nominal_tras);
    issue(DramCommandKind::pre, a.bank, 0, 0, pre_at, t);
    double act_at = pre_at + t.nominal_trp;
    issue(DramCommandKind::act, a.bank, a.row, 0, act_at, t);
    f.act_ns = act_at;
    col_at = act_at + t.nominal_trcd;
  } else {
    issue(DramCommandKind::act, a.bank, a.row, 0, start, t);
    f.act_ns = start;
    col_at = start + t.nominal_trcd;
  }
  issue(DramCommandKind::wr, a.bank, a.row, a.column, col_at, t, wdata, {});
  f.open_row = a.row;
  f.free_ns = col_at + cfg_.tcl_ns + cfg_.tburst_ns;
  emit_event({start, EventKind::demand_write, a.bank, a.row, a.column, 0});
}

void MemController::poke(PhysAddr addr, std::span<const uint8_t> bytes) {
  DramAddress a = layout_.decompose(addr);
  dev_.poke(a.bank, a.row, a.column * dev_.geometry().burst_bytes + a.byte_offset, bytes);
}

PumReport MemController::execute_pum(const PocInstruction& instr, double now_ns) {
  advance_to(now_ns);
  PumReport report;
  if (instr.opcode == kOpcodeRowClone) {
    DramAddress src = layout_.decompose(instr.a);
    DramAddress dst = layout_.decompose(instr.b);
    if (src.column != 0 || src.byte_offset != 0 || dst.column != 0 || dst.byte_offset != 0)
      raise(Errc::malformed_instruction, "row-copy operands must be row-aligned");
    if (src.bank != dst.bank)
      raise(Errc::operand_bank_mismatch,
            "row-copy operands in banks " + std::to_string(src.bank) + " and " +
                std::to_string(dst.bank));
    const TimingParams& t = cfg_.timing;
    TimingParams v = violated_timing();
    BankFront& f = banks_[src.bank];
    double t0 = std::max(now_ns, f.free_ns);
    if (f.open_row) {
      double pre_at = std::max(t0, f.act_ns + t.nominal_tras);
      issue(DramCommandKind::pre, src.bank, 0, 0, pre_at, t);
      f.open_row.reset();
      t0 = pre_at + t.nominal_trp;
    }
    emit_event({t0, EventKind::pum_op, src.bank, src.row, 0, 0});
    issue(DramCommandKind::act, src.bank, src.row, 0, t0, t);
    issue(DramCommandKind::pre, src.bank, 0, 0, t0 + v.tras, t);
    CommandResult r =
        issue(DramCommandKind::act, src.bank, dst.row, 0, t0 + v.tras + v.trp, t);
    double restore_pre = t0 + v.tras + v.trp + t.nominal_tras;
    issue(DramCommandKind::pre, src.bank, 0, 0, restore_pre, t);
    f.open_row.reset();
    f.act_ns = t0 + v.tras + v.trp;
    f.free_ns = restore_pre + t.nominal_trp;
    report.effect = r.pum_effect;
    report.accept_ns = t0 + cfg_.flag_sync_ns;
    report.finish_ns = f.free_ns + cfg_.flag_sync_ns;
  } else if (instr.opcode == kOpcodeReducedLatencyRead) {
    DramAddress a = layout_.decompose(instr.a);
    const TimingParams& t = cfg_.timing;
    TimingParams v = violated_timing();
    BankFront& f = banks_[a.bank];
    double t0 = std::max(now_ns, f.free_ns);
    if (f.open_row) {
      double pre_at = std::max(t0, f.act_ns + t.nominal_tras);
      issue(DramCommandKind::pre, a.bank, 0, 0, pre_at, t);
      f.open_row.reset();
      t0 = pre_at + t.nominal_trp;
    }
    emit_event({t0, EventKind::pum_op, a.bank, a.row, a.column, 0});
    report.data.resize(dev_.geometry().burst_bytes);
    issue(DramCommandKind::act, a.bank, a.row, 0, t0, v);
    issue(DramCommandKind::rd, a.bank, a.row, a.column, t0 + v.trcd, v, {}, report.data);
    issue(DramCommandKind::pre, a.bank, 0, 0, t0 + t.nominal_tras, t);
    f.open_row.reset();
    f.act_ns = t0;
    f.free_ns = t0 + t.nominal_tras + t.nominal_trp;
    report.effect = PumEffect::none;
    report.accept_ns = t0 + cfg_.flag_sync_ns;
    report.finish_ns = t0 + v.trcd + cfg_.tcl_ns + cfg_.tburst_ns + cfg_.flag_sync_ns;
  } else {
    raise(Errc::malformed_instruction,
          "opcode 0x" + std::to_string(unsigned(instr.opcode)));
  }
  return report;
}

size_t MemController::random_word_count(double now_ns) {
  advance_to(now_ns);
  return rng_buffer_.word_count();
}

uint32_t MemController::read_random_word(double now_ns) {
  advance_to(now_ns);
  return rng_buffer_.pop_word();
}

void MemController::reset_bank_state(double now_ns) {
  advance_to(now_ns);
  const TimingParams& t = cfg_.timing;
  for (uint32_t b = 0; b < banks_.size(); ++b) {
    BankFront& f = banks_[b];
    if (f.open_row) {
      double pre_at = std::max({now_ns, f.free_ns, f.act_ns + t.nominal_tras});
      issue(DramCommandKind::pre, b, 0, 0, pre_at, t);
      f.open_row.reset();
      f.free_ns = pre_at + t.nominal_trp;
    }
  }
}

}  // namespace pumsim
