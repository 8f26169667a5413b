#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pumsim/bench.hpp"
#include "pumsim/calibrate.hpp"
#include "pumsim/config.hpp"
#include "pumsim/errors.hpp"
#include "pumsim/system.hpp"

namespace {

using namespace pumsim;

struct CliOpts {
  std::string config_path;
  uint64_t seed = 42;
  uint32_t reps = 1000;
  std::string out;
  std::string mode = "noflush";
  std::vector<uint64_t> sizes;
  double dirty_frac = 0.0;
};

void add_common(CLI::App* cmd, CliOpts& o) {
  cmd->add_option("--config", o.config_path, "key=value configuration file");
  cmd->add_option("--seed", o.seed, "run seed (replacement, data patterns, sweeps)");
  cmd->add_option("--out", o.out, "output file");
}

SimConfig load_config(const CliOpts& o) {
  SimConfig cfg = o.config_path.empty() ? SimConfig{} : SimConfig::from_file(o.config_path);
  cfg.validate();
  return cfg;
}

RunOptions run_options(const CliOpts& o) {
  RunOptions r;
  r.seed = o.seed;
  r.reps = o.reps;
  r.sizes = o.sizes;
  r.dirty_fraction = o.dirty_frac;
  return r;
}

std::ofstream open_or_die(const std::string& path) {
  std::ofstream f(path);
  if (!f) raise(Errc::config_error, "cannot open output file: " + path);
  return f;
}

int run_characterize(const CliOpts& o) {
  SimConfig cfg = load_config(o);
  System sys(cfg);
  sys.supervisor().characterize_subarrays();
  const Samt& samt = sys.supervisor().samt();
  uint64_t groups = 0, rows = 0;
  for (uint32_t b = 0; b < samt.banks(); ++b)
    for (uint32_t s = 0; s < samt.subarrays(b); ++s) {
      ++groups;
      rows += samt.entry(b, s).last_row - samt.entry(b, s).first_row + 1;
    }
  std::printf("characterized %u banks, %llu groups, %llu rows, %llu cycles\n", samt.banks(),
              (unsigned long long)groups, (unsigned long long)rows,
              (unsigned long long)sys.clock().now());
  if (!o.out.empty()) {
    auto f = open_or_die(o.out);
    sys.supervisor().save_tables(f);
    std::printf("tables saved to %s\n", o.out.c_str());
  }
  return 0;
}

int run_calibrate(const CliOpts& o) {
  SimConfig cfg = load_config(o);
  CalibrationReport rep = calibrate(cfg, o.seed);
  std::fputs(rep.summary().c_str(), stdout);
  std::fputs("fitted constants:\n", stdout);
  std::fputs(rep.constants_text().c_str(), stdout);
  if (!o.out.empty()) {
    auto f = open_or_die(o.out);
    f << rep.constants_text();
    std::printf("constants written to %s\n", o.out.c_str());
  }
  return rep.within_tolerance ? 0 : 1;
}

int run_dump_tables(const CliOpts& o) {
  SimConfig cfg = load_config(o);
  System sys(cfg);
  sys.supervisor().characterize_subarrays();
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!o.out.empty()) {
    file = open_or_die(o.out);
    out = &file;
  }
  *out << "# samt\n";
  sys.supervisor().samt().dump_csv(*out);
  *out << "# ait\n";
  sys.supervisor().ait().dump_csv(*out);
  *out << "# irt\n";
  sys.supervisor().irt().dump_csv(*out);
  return 0;
}

int run_bench(const CliOpts& o, const std::string& kind) {
  SimConfig cfg = load_config(o);
  RunOptions ro = run_options(o);
  if (kind == "flush" && !o.sizes.empty()) ro.flush_sweep_bytes = o.sizes.front();
  Bench bench(cfg, ro);
  std::string out = o.out.empty() ? kind + ".csv" : o.out;
  if (kind == "copy" || kind == "init") {
    BenchMode mode = bench_mode_from(o.mode);
    auto rows = kind == "copy" ? bench.copy_sweep(mode) : bench.init_sweep(mode);
    Bench::write_sweep_csv(out, rows);
    for (const SweepRow& r : rows)
      std::printf("%-10llu %8.2fx\n", (unsigned long long)r.size_bytes, r.speedup());
  } else if (kind == "flush") {
    auto rows = bench.flush_sweep();
    Bench::write_flush_csv(out, rows);
    for (const FlushRow& r : rows)
      std::printf("%s f=%.2f %8.2fx\n", r.workload.c_str(), r.dirty_fraction, r.speedup());
  } else if (kind == "fork") {
    auto rows = bench.forkbench();
    Bench::write_fork_csv(out, rows);
    for (const ForkRow& r : rows)
      std::printf("%-6u pages  %6.2f%% faster  (copy %5.2f%% of baseline)\n", r.pages,
                  r.improvement_pct(), r.memcpy_fraction_pct);
  } else if (kind == "compile") {
    CompileResult res = bench.compile_bench();
    Bench::write_compile_csv(out, res);
    std::printf("%u chunks of %llu B: %.2f%% faster\n", res.chunks,
                (unsigned long long)res.chunk_bytes, res.improvement_pct());
  } else if (kind == "trng") {
    TrngResult res = bench.trng_sweep();
    Bench::write_trng_csv(out, res.rows);
    std::printf("periods %zu, endpoint throughput ratio %.3f\n", res.rows.size(),
                res.endpoint_ratio);
    std::printf("%llu bits: monobit p=%.4f runs p=%.4f\n", (unsigned long long)res.tested_bits,
                res.monobit_p, res.runs_p);
  }
  Bench::write_plot_script(out, kind);
  std::printf("wrote %s and %s.gnuplot\n", out.c_str(), out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pumsim: end-to-end processing-using-memory system simulator"};
  app.require_subcommand(1);
  CliOpts o;

  CLI::App* characterize = app.add_subcommand("characterize", "discover subarray groups");
  add_common(characterize, o);

  CLI::App* calibrate_cmd =
      app.add_subcommand("calibrate", "fit cycle-model constants and verify them");
  add_common(calibrate_cmd, o);

  CLI::App* dump = app.add_subcommand("dump-tables", "characterize and dump SAMT/AIT/IRT");
  add_common(dump, o);

  CLI::App* bench = app.add_subcommand("bench", "run a benchmark sweep, write CSV");
  bench->require_subcommand(1);
  std::vector<std::string> kinds = {"copy", "init", "flush", "fork", "compile", "trng"};
  for (const std::string& kind : kinds) {
    CLI::App* cmd = bench->add_subcommand(kind);
    add_common(cmd, o);
    cmd->add_option("--reps", o.reps, "measured repetitions per point");
    if (kind == "copy" || kind == "init") {
      cmd->add_option("--mode", o.mode, "bare | noflush | flush");
      cmd->add_option("--sizes", o.sizes, "array sizes in bytes")->delimiter(',');
      cmd->add_option("--dirty-frac", o.dirty_frac, "modeled dirty fraction in flush mode");
    }
    if (kind == "flush")
      cmd->add_option("--sizes", o.sizes, "array size in bytes (first is used)")
          ->delimiter(',');
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(characterize)) return run_characterize(o);
    if (app.got_subcommand(calibrate_cmd)) return run_calibrate(o);
    if (app.got_subcommand(dump)) return run_dump_tables(o);
    for (const std::string& kind : kinds)
      if (bench->got_subcommand(kind)) return run_bench(o, kind);
  } catch (const SimError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
