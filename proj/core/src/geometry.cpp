#include "pumsim/geometry.hpp"

#include <string>

#include "pumsim/errors.hpp"

namespace pumsim {

namespace {
bool power_of_two(uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }
}  // namespace

void DeviceGeometry::validate() const {
  if (banks == 0 || rows_per_bank == 0 || row_bytes == 0 || rows_per_subarray == 0 ||
      burst_bytes == 0)
    raise(Errc::config_error, "geometry fields must be positive");
  if (!power_of_two(banks) || !power_of_two(rows_per_bank) || !power_of_two(row_bytes) ||
      !power_of_two(burst_bytes))
    raise(Errc::config_error, "geometry fields must be powers of two");
  if (rows_per_bank % rows_per_subarray != 0)
    raise(Errc::config_error, "rows_per_subarray must divide rows_per_bank");
  if (row_bytes % burst_bytes != 0)
    raise(Errc::config_error, "row_bytes must be a multiple of burst_bytes");
}

void TimingParams::validate() const {
  for (double v : {trcd, tras, trp, nominal_trcd, nominal_tras, nominal_trp})
    if (v <= 0.0) raise(Errc::config_error, "timing parameters must be positive");
}

}  // namespace pumsim
