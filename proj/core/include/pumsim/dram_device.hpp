#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include "pumsim/address_map.hpp"
#include "pumsim/geometry.hpp"
#include "pumsim/trace.hpp"

namespace pumsim {

// A cell that can fail to deliver its stored value when read too soon after
// activation. `probability` is the per-read chance that the bit comes back
// flipped under a violated tRCD. TRNG cells are weak cells pinned at 0.5.
struct WeakCell {
  uint32_t bank = 0;
  uint32_t row = 0;
  uint32_t column = 0;  // burst index
  uint32_t bit = 0;     // bit position within the burst [0, 8*burst_bytes)
  double probability = 0.0;
};

class WeakCellMap {
 public:
  void insert(const WeakCell& cell, const DeviceGeometry& g);
  // Cells of one burst, ordered by bit position. Sampling order is part of
  // the deterministic contract. Returns nullptr when the burst has none.
  const std::vector<WeakCell>* block(uint32_t bank, uint32_t row, uint32_t column,
                                     const DeviceGeometry& g) const;
  size_t size() const { return count_; }
  std::vector<WeakCell> all() const;  // deterministic order (by coordinates)

 private:
  std::unordered_map<uint64_t, std::vector<WeakCell>> blocks_;
  size_t count_ = 0;
};

struct TrngBlockInfo {
  uint32_t bank = 0;
  uint32_t row = 0;
  uint32_t column = 0;
  std::vector<uint32_t> bits;  // sorted bit positions, probability 0.5 each
};

struct DeviceConfig {
  DeviceGeometry geometry{};
  TimingParams timing{};  // nominal thresholds
  uint64_t weak_cell_seed = 0x5eed;
  double weak_cell_density = 1e-6;  // random weak cells per bit of capacity
  uint32_t trng_cells_per_block = 4;
  uint32_t trng_row = 100;    // designated TRNG burst, one per bank
  uint32_t trng_column = 7;
  uint64_t sample_seed = 0xdecaf;  // stream for activation-failure sampling
};

enum class PumEffect { none, rowclone_ok, rowclone_failed };

struct CommandResult {
  PumEffect pum_effect = PumEffect::none;
  uint32_t src_row = 0;  // valid when pum_effect != none
  uint32_t dst_row = 0;
};

// Functional + failure-mode model of the DRAM array. The device does not
// schedule anything: it executes the command stream it is given and reacts
// to deliberately violated timings the way the real array does:
//
//  * ACT -> PRE -> ACT on one bank with both gaps below nominal tRAS/tRP
//    leaves the first row's charge on the bitlines while the second row is
//    opened, i.e. copies the first row onto the second -- if the two rows
//    share a subarray. Across subarrays nothing moves (flagged no-op).
//  * A read whose distance from the activation is below nominal tRCD samples
//    each weak cell of the burst: the bit flips with its probability.
//
// Contents initialize to zero; row storage materializes lazily on first
// write so small experiments stay small.
class DramDevice {
 public:
  explicit DramDevice(const DeviceConfig& cfg);

  // Executes one command at absolute time `at_ns`. Commands on one bank must
  // be issued in non-decreasing time order; `timing` supplies the nominal
  // thresholds used for violation detection. RD fills `rdata`, WR consumes
  // `wdata` (both exactly one burst).
  CommandResult issue(const DramCommand& cmd, double at_ns, const TimingParams& timing,
                      std::span<const uint8_t> wdata = {}, std::span<uint8_t> rdata = {});

  // Composite ACT (violated tRCD) + RD + PRE on one burst.
  std::vector<uint8_t> reduced_trcd_read(uint32_t bank, uint32_t row, uint32_t column,
                                         const TimingParams& timing, double at_ns);

  const DeviceGeometry& geometry() const { return cfg_.geometry; }
  const DeviceConfig& config() const { return cfg_; }
  const WeakCellMap& weak_cells() const { return weak_; }
  const std::vector<TrngBlockInfo>& trng_blocks() const { return trng_blocks_; }

  // Untimed data plumbing for harnesses and tests; not a simulated access.
  void poke(uint32_t bank, uint32_t row, uint32_t byte_offset, std::span<const uint8_t> bytes);
  std::vector<uint8_t> peek(uint32_t bank, uint32_t row, uint32_t byte_offset,
                            uint32_t len) const;

 private:
  struct Past {
    DramCommandKind kind;
    double at_ns;
    uint32_t row;
  };
  struct BankState {
    std::optional<uint32_t> open_row;
    double act_ns = -1.0e18;
    Past hist[3];  // most recent last
    int hist_n = 0;
  };

  std::vector<uint8_t>& row_data(uint32_t bank, uint32_t row);
  const std::vector<uint8_t>* row_data_if_present(uint32_t bank, uint32_t row) const;
  void push_hist(BankState& b, DramCommandKind kind, double at_ns, uint32_t row);
  CommandResult on_activate(uint32_t bank, uint32_t row, double at_ns,
                            const TimingParams& timing);
  void apply_weak_cells(uint32_t bank, uint32_t row, uint32_t column,
                        std::span<uint8_t> burst);
  void check_bounds(const DramCommand& cmd) const;

  DeviceConfig cfg_;
  std::vector<std::vector<std::vector<uint8_t>>> banks_;  // [bank][row], lazy rows
  std::vector<BankState> state_;
  WeakCellMap weak_;
  std::vector<TrngBlockInfo> trng_blocks_;
  std::mt19937_64 sample_rng_;
};

}  // namespace pumsim
