#pragma once

#include <cstdint>

namespace pumsim {

// Physical organization of the simulated device (one rank, one channel).
// Defaults model a 1 GiB DDR3 part: 8 banks x 16384 rows x 8 KiB rows.
struct DeviceGeometry {
  uint32_t banks = 8;
  uint32_t rows_per_bank = 16384;
  uint32_t row_bytes = 8192;         // one full row across the bank's mats
  uint32_t rows_per_subarray = 512;  // contiguous rows sharing local sense amps
  uint32_t burst_bytes = 64;         // one access burst == one cache line

  uint64_t capacity_bytes() const {
    return uint64_t(banks) * rows_per_bank * row_bytes;
  }
  uint32_t columns_per_row() const { return row_bytes / burst_bytes; }
  uint32_t subarrays_per_bank() const { return rows_per_bank / rows_per_subarray; }
  uint32_t subarray_of_row(uint32_t row) const { return row / rows_per_subarray; }

  void validate() const;  // throws Errc::config_error
};

// Core timings in nanoseconds. The nominal_* members are the datasheet
// values; a parameter counts as violated iff it is set strictly below its
// nominal counterpart. Deliberate violations are the mechanism behind both
// the in-memory row copy (tRAS/tRP) and the activation-failure TRNG (tRCD).
struct TimingParams {
  double trcd = 13.75;
  double tras = 35.0;
  double trp = 13.75;
  double nominal_trcd = 13.75;
  double nominal_tras = 35.0;
  double nominal_trp = 13.75;

  bool trcd_violated() const { return trcd < nominal_trcd; }
  bool tras_violated() const { return tras < nominal_tras; }
  bool trp_violated() const { return trp < nominal_trp; }

  void validate() const;  // throws Errc::config_error
};

}  // namespace pumsim
