#include "pumsim/trace.hpp"

#include <cstdio>

#include "pumsim/clock.hpp"
#include "pumsim/errors.hpp"

namespace pumsim {

const char* name(DramCommandKind kind) {
  switch (kind) {
    case DramCommandKind::act: return "ACT";
    case DramCommandKind::pre: return "PRE";
    case DramCommandKind::rd: return "RD";
    case DramCommandKind::wr: return "WR";
    case DramCommandKind::ref: return "REF";
  }
  return "?";
}

const char* name(EventKind kind) {
  switch (kind) {
    case EventKind::demand_read: return "demand_read";
    case EventKind::demand_write: return "demand_write";
    case EventKind::pum_op: return "pum_op";
    case EventKind::refresh: return "refresh";
    case EventKind::trng_access: return "trng_access";
  }
  return "?";
}

const char* name(CycleCat cat) {
  switch (cat) {
    case CycleCat::compute: return "compute";
    case CycleCat::cache_hit: return "cache_hit";
    case CycleCat::mem_read: return "mem_read";
    case CycleCat::mem_write: return "mem_write";
    case CycleCat::mmio: return "mmio";
    case CycleCat::poll: return "poll";
    case CycleCat::flush_clean: return "flush_clean";
    case CycleCat::flush_dirty: return "flush_dirty";
    case CycleCat::syscall: return "syscall";
    case CycleCat::page_walk: return "page_walk";
    case CycleCat::table_lookup: return "table_lookup";
    case CycleCat::modeled_dirty_writeback: return "modeled_dirty_writeback";
    case CycleCat::count: break;
  }
  return "?";
}

CsvTraceSink::CsvTraceSink(const std::string& path) : out_(path) {
  if (!out_) raise(Errc::config_error, "cannot open trace file " + path);
  out_ << "time_ns,command,bank,row,col,kind\n";
}

void CsvTraceSink::on_command(double time_ns, const DramCommand& c) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%.2f,%s,%u,%u,%u,%s\n", time_ns, name(c.kind), c.bank,
                c.row, c.column, name(current_));
  out_ << buf;
}

void CsvTraceSink::on_event(const ScheduleEvent& e) { current_ = e.kind; }

}  // namespace pumsim
