#pragma once

#include <cstdint>

#include "pumsim/geometry.hpp"

namespace pumsim {

using PhysAddr = uint64_t;

struct DramAddress {
  uint32_t row = 0;
  uint32_t bank = 0;
  uint32_t column = 0;       // burst index within the row
  uint32_t byte_offset = 0;  // byte within the burst

  bool operator==(const DramAddress&) const = default;
};

// Physical-address bit slicing, low to high:
//
//   [ byte offset | column | bank | row ]
//
// Field widths are derived from the geometry and must be exact powers of
// two. The default geometry yields 6 + 7 + 3 + 14 = 30 bits (1 GiB). Putting
// the bank bits directly above the column bits means consecutive row-sized
// blocks of the physical space land in consecutive banks, which is what lets
// the allocator stripe row pairs across banks round-robin.
class DramAddressLayout {
 public:
  DramAddressLayout() = default;
  static DramAddressLayout for_geometry(const DeviceGeometry& g);

  uint32_t byte_offset_bits() const { return byte_offset_bits_; }
  uint32_t column_bits() const { return column_bits_; }
  uint32_t bank_bits() const { return bank_bits_; }
  uint32_t row_bits() const { return row_bits_; }
  uint32_t total_bits() const {
    return byte_offset_bits_ + column_bits_ + bank_bits_ + row_bits_;
  }
  uint64_t capacity_bytes() const { return 1ull << total_bits(); }

  DramAddress decompose(PhysAddr addr) const;    // Errc::out_of_range past capacity
  PhysAddr compose(const DramAddress& a) const;  // Errc::out_of_range on any field

 private:
  uint32_t byte_offset_bits_ = 0;
  uint32_t column_bits_ = 0;
  uint32_t bank_bits_ = 0;
  uint32_t row_bits_ = 0;
};

}  // namespace pumsim
