#include "pumsim/address_map.hpp"

#include <bit>
#include <string>

#include "pumsim/errors.hpp"

namespace pumsim {

namespace {
uint32_t log2_exact(uint64_t v, const char* what) {
  if (v == 0 || (v & (v - 1)) != 0)
    raise(Errc::config_error, std::string(what) + " must be a power of two");
  return uint32_t(std::countr_zero(v));
}
}  // namespace

DramAddressLayout DramAddressLayout::for_geometry(const DeviceGeometry& g) {
  g.validate();
  DramAddressLayout l;
  l.byte_offset_bits_ = log2_exact(g.burst_bytes, "burst_bytes");
  l.column_bits_ = log2_exact(g.columns_per_row(), "columns_per_row");
  l.bank_bits_ = log2_exact(g.banks, "banks");
  l.row_bits_ = log2_exact(g.rows_per_bank, "rows_per_bank");
  return l;
}

DramAddress DramAddressLayout::decompose(PhysAddr addr) const {
  if (addr >= capacity_bytes())
    raise(Errc::out_of_range, "physical address 0x" + std::to_string(addr) + " past capacity");
  DramAddress a;
  uint64_t v = addr;
  a.byte_offset = uint32_t(v & ((1ull << byte_offset_bits_) - 1));
  v >>= byte_offset_bits_;
  a.column = uint32_t(v & ((1ull << column_bits_) - 1));
  v >>= column_bits_;
  a.bank = uint32_t(v & ((1ull << bank_bits_) - 1));
  v >>= bank_bits_;
  a.row = uint32_t(v);
  return a;
}

PhysAddr DramAddressLayout::compose(const DramAddress& a) const {
  if (a.byte_offset >= (1u << byte_offset_bits_) || a.column >= (1u << column_bits_) ||
      a.bank >= (1u << bank_bits_) || a.row >= (1u << row_bits_))
    raise(Errc::out_of_range, "DRAM address field exceeds layout width");
  uint64_t v = a.row;
  v = (v << bank_bits_) | a.bank;
  v = (v << column_bits_) | a.column;
  v = (v << byte_offset_bits_) | a.byte_offset;
  return v;
}

}  // namespace pumsim
