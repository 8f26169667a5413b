#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <unordered_map>
#include <vector>

#include "pumsim/address_map.hpp"

namespace pumsim {

// One allocatable row: the physical addresses of its two 4 KiB halves
// (column 0 and the row midpoint). Both map to the same (bank, row).
struct RowPair {
  uint32_t row = 0;
  PhysAddr col0 = 0;
  PhysAddr half = 0;
};

struct SamtEntry {
  uint32_t first_row = 0;  // discovery info, useful in dumps
  uint32_t last_row = 0;
  std::vector<RowPair> pairs;
  size_t next = 0;  // pairs[next..] are free

  uint32_t free_pairs() const { return uint32_t(pairs.size() - next); }
};

// Subarray Mapping Table: per bank, the characterized groups of rows that
// row-copy can reach from each other, with their unconsumed row pairs.
class Samt {
 public:
  Samt() = default;
  explicit Samt(uint32_t banks) : banks_(banks) {}

  uint32_t banks() const { return uint32_t(banks_.size()); }
  uint32_t subarrays(uint32_t bank) const { return uint32_t(banks_.at(bank).size()); }
  SamtEntry& entry(uint32_t bank, uint32_t subarray) { return banks_.at(bank).at(subarray); }
  const SamtEntry& entry(uint32_t bank, uint32_t subarray) const {
    return banks_.at(bank).at(subarray);
  }
  uint32_t add_group(uint32_t bank, SamtEntry entry);  // returns subarray index
  std::optional<uint32_t> subarray_of(uint32_t bank, uint32_t row) const;
  bool empty() const;

  void dump_csv(std::ostream& out) const;
  void serialize(std::ostream& out) const;
  static Samt deserialize(std::istream& in);

 private:
  std::vector<std::vector<SamtEntry>> banks_;
};

// Allocation ID Table: per bank, which subarray an allocation ID draws from.
class Ait {
 public:
  Ait() = default;
  explicit Ait(uint32_t banks) : banks_(banks) {}

  std::optional<uint32_t> lookup(uint32_t bank, uint32_t id) const;
  void bind(uint32_t bank, uint32_t id, uint32_t subarray);
  bool subarray_bound(uint32_t bank, uint32_t subarray) const;  // to any ID

  void dump_csv(std::ostream& out) const;

 private:
  std::vector<std::unordered_map<uint32_t, uint32_t>> banks_;
};

// Initializer Row Table: physical page number -> physical address of the
// zero row kept in that page's subarray. Filled in as pages are handed out.
class Irt {
 public:
  std::optional<PhysAddr> lookup(uint64_t ppn) const;
  void insert(uint64_t ppn, PhysAddr initializer_row);
  size_t size() const { return map_.size(); }

  void dump_csv(std::ostream& out) const;
  void serialize(std::ostream& out) const;
  static Irt deserialize(std::istream& in);

 private:
  std::unordered_map<uint64_t, PhysAddr> map_;
};

// 4 KiB-page virtual-to-physical map. All mappings are pinned: nothing the
// in-memory operations depend on is ever paged or migrated.
class PageTable {
 public:
  static constexpr uint64_t kPageBytes = 4096;

  void map(uint64_t va, PhysAddr pa);  // both page-aligned
  std::optional<PhysAddr> translate(uint64_t va) const;
  size_t pages() const { return vpn_to_ppn_.size(); }

 private:
  std::unordered_map<uint64_t, uint64_t> vpn_to_ppn_;
};

}  // namespace pumsim
