#include "pumsim/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <vector>

#include "pumsim/errors.hpp"

namespace pumsim {

namespace {

uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    uint64_t v = std::stoull(value, &pos, 0);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    raise(Errc::config_error, "bad integer for " + key + ": '" + value + "'");
  }
}

uint32_t parse_u32(const std::string& key, const std::string& value) {
  uint64_t v = parse_u64(key, value);
  if (v > 0xffffffffull) raise(Errc::config_error, key + " out of 32-bit range");
  return uint32_t(v);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    raise(Errc::config_error, "bad number for " + key + ": '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  raise(Errc::config_error, "bad bool for " + key + ": '" + value + "'");
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct Field {
  const char* key;
  std::function<void(SimConfig&, const std::string&)> set;
  std::function<std::string(const SimConfig&)> get;
};

#define U32_FIELD(key, expr)                                                      \
  {key, [](SimConfig& c, const std::string& v) { c.expr = parse_u32(key, v); },   \
   [](const SimConfig& c) { return std::to_string(c.expr); }}
#define U64_FIELD(key, expr)                                                      \
  {key, [](SimConfig& c, const std::string& v) { c.expr = parse_u64(key, v); },   \
   [](const SimConfig& c) { return std::to_string(c.expr); }}
#define DBL_FIELD(key, expr)                                                      \
  {key, [](SimConfig& c, const std::string& v) { c.expr = parse_double(key, v); },\
   [](const SimConfig& c) { return fmt_double(c.expr); }}
#define BOOL_FIELD(key, expr)                                                     \
  {key, [](SimConfig& c, const std::string& v) { c.expr = parse_bool(key, v); },  \
   [](const SimConfig& c) { return std::string(c.expr ? "true" : "false"); }}

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      U32_FIELD("device.banks", device.geometry.banks),
      U32_FIELD("device.rows_per_bank", device.geometry.rows_per_bank),
      U32_FIELD("device.row_bytes", device.geometry.row_bytes),
      U32_FIELD("device.rows_per_subarray", device.geometry.rows_per_subarray),
      U32_FIELD("device.burst_bytes", device.geometry.burst_bytes),
      U64_FIELD("device.weak_cell_seed", device.weak_cell_seed),
      DBL_FIELD("device.weak_cell_density", device.weak_cell_density),
      U32_FIELD("device.trng_cells_per_block", device.trng_cells_per_block),
      U32_FIELD("device.trng_row", device.trng_row),
      U32_FIELD("device.trng_column", device.trng_column),
      U64_FIELD("device.sample_seed", device.sample_seed),
      // nominal timings are one setting applied to the device thresholds and
      // the controller's command scheduling alike
      {"timing.trcd_ns",
       [](SimConfig& c, const std::string& v) {
         double d = parse_double("timing.trcd_ns", v);
         c.device.timing.trcd = c.device.timing.nominal_trcd = d;
         c.controller.timing.trcd = c.controller.timing.nominal_trcd = d;
       },
       [](const SimConfig& c) { return fmt_double(c.controller.timing.trcd); }},
      {"timing.tras_ns",
       [](SimConfig& c, const std::string& v) {
         double d = parse_double("timing.tras_ns", v);
         c.device.timing.tras = c.device.timing.nominal_tras = d;
         c.controller.timing.tras = c.controller.timing.nominal_tras = d;
       },
       [](const SimConfig& c) { return fmt_double(c.controller.timing.tras); }},
      {"timing.trp_ns",
       [](SimConfig& c, const std::string& v) {
         double d = parse_double("timing.trp_ns", v);
         c.device.timing.trp = c.device.timing.nominal_trp = d;
         c.controller.timing.trp = c.controller.timing.nominal_trp = d;
       },
       [](const SimConfig& c) { return fmt_double(c.controller.timing.trp); }},
      DBL_FIELD("controller.tcl_ns", controller.tcl_ns),
      DBL_FIELD("controller.tburst_ns", controller.tburst_ns),
      DBL_FIELD("controller.trefi_ns", controller.trefi_ns),
      DBL_FIELD("controller.trfc_ns", controller.trfc_ns),
      DBL_FIELD("controller.cpu_period_ns", controller.cpu_period_ns),
      DBL_FIELD("controller.dram_period_ns", controller.dram_period_ns),
      U32_FIELD("controller.demand_overhead_cycles", controller.demand_overhead_cycles),
      DBL_FIELD("controller.flag_sync_ns", controller.flag_sync_ns),
      BOOL_FIELD("controller.refresh_enabled", controller.refresh_enabled),
      U32_FIELD("controller.random_buffer_bits", controller.random_buffer_bits),
      U32_FIELD("cache.capacity_bytes", cache.capacity_bytes),
      U32_FIELD("cache.ways", cache.ways),
      U32_FIELD("cache.line_bytes", cache.line_bytes),
      U64_FIELD("cache.replacement_seed", cache.replacement_seed),
      U32_FIELD("cache.hit_cycles", cache.hit_cycles),
      U32_FIELD("cache.clflush_dirty_cycles", cache.clflush_dirty_cycles),
      U32_FIELD("cache.clflush_clean_cycles", cache.clflush_clean_cycles),
      U64_FIELD("poc.window_base", poc.window_base),
      U32_FIELD("poc.mmio_cycles", poc.mmio_cycles),
      U32_FIELD("pumolib.call_overhead", pumolib.call_overhead),
      U32_FIELD("pumolib.poll_loop_extra", pumolib.poll_loop_extra),
      U32_FIELD("pumolib.poll_cap", pumolib.poll_cap),
      U64_FIELD("supervisor.syscall_entry", supervisor.syscall_entry),
      U64_FIELD("supervisor.page_walk", supervisor.page_walk),
      U64_FIELD("supervisor.table_lookup", supervisor.table_lookup),
      U32_FIELD("model.word_copy_effective", cycle_model.word_copy_effective),
      U32_FIELD("model.word_store_effective", cycle_model.word_store_effective),
      U32_FIELD("model.word_copy_iter", cycle_model.word_copy_iter),
      U32_FIELD("model.word_store_iter", cycle_model.word_store_iter),
      U64_FIELD("model.compile_work_cycles", cycle_model.compile_work_cycles),
      U32_FIELD("model.compile_chunks", cycle_model.compile_chunks),
      U32_FIELD("model.fork_accesses", cycle_model.fork_accesses),
      U32_FIELD("model.fork_access_compute_cycles", cycle_model.fork_access_compute_cycles),
      DBL_FIELD("crf.violated_trcd_ns", violated_trcd_ns),
      DBL_FIELD("crf.violated_tras_ns", violated_tras_ns),
      DBL_FIELD("crf.violated_trp_ns", violated_trp_ns),
      DBL_FIELD("crf.trng_period_ns", trng_period_ns),
  };
  return f;
}

#undef U32_FIELD
#undef U64_FIELD
#undef DBL_FIELD
#undef BOOL_FIELD

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

void SimConfig::set(const std::string& key, const std::string& value) {
  for (const Field& f : fields()) {
    if (key == f.key) {
      f.set(*this, value);
      return;
    }
  }
  raise(Errc::config_error, "unknown config key '" + key + "'");
}

SimConfig SimConfig::from_text(const std::string& text) {
  SimConfig cfg;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      raise(Errc::config_error, "line " + std::to_string(lineno) + ": expected key=value");
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

SimConfig SimConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::config_error, "cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return from_text(buf.str());
  } catch (const SimError& e) {
    raise(e.code(), path + ": " + e.what());
  }
}

std::string SimConfig::to_text() const {
  std::string out;
  for (const Field& f : fields()) {
    out += f.key;
    out += " = ";
    out += f.get(*this);
    out += '\n';
  }
  return out;
}

void SimConfig::validate() const {
  device.geometry.validate();
  device.timing.validate();
  controller.timing.validate();
  if (controller.cpu_period_ns <= 0 || controller.dram_period_ns <= 0)
    raise(Errc::config_error, "clock periods must be positive");
  if (controller.tcl_ns <= 0 || controller.tburst_ns <= 0)
    raise(Errc::config_error, "column timings must be positive");
  if (controller.trefi_ns <= 0 || controller.trfc_ns <= 0)
    raise(Errc::config_error, "refresh timings must be positive");
  if (controller.random_buffer_bits == 0 || controller.random_buffer_bits % 32 != 0)
    raise(Errc::config_error, "random_buffer_bits must be a positive multiple of 32");
  if (violated_trcd_ns <= 0 || violated_tras_ns <= 0 || violated_trp_ns <= 0)
    raise(Errc::config_error, "violated timings must be positive");
  if (trng_period_ns < 0) raise(Errc::config_error, "trng_period_ns must be non-negative");
  if (device.weak_cell_density < 0 || device.weak_cell_density > 1e-3)
    raise(Errc::config_error, "weak_cell_density out of range");
}

std::ostream& operator<<(std::ostream& os, const SimConfig& cfg) { return os << cfg.to_text(); }

}  // namespace pumsim
