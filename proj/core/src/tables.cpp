#include "pumsim/tables.hpp"

#include <algorithm>
#include <ostream>
#include <istream>
#include <string>

#include "pumsim/errors.hpp"

namespace pumsim {

uint32_t Samt::add_group(uint32_t bank, SamtEntry entry) {
  if (bank >= banks_.size()) raise(Errc::out_of_range, "bank " + std::to_string(bank));
  banks_[bank].push_back(std::move(entry));
  return uint32_t(banks_[bank].size() - 1);
}

std::optional<uint32_t> Samt::subarray_of(uint32_t bank, uint32_t row) const {
  if (bank >= banks_.size()) return std::nullopt;
  const auto& groups = banks_[bank];
  for (uint32_t s = 0; s < groups.size(); ++s)
    if (row >= groups[s].first_row && row <= groups[s].last_row) return s;
  return std::nullopt;
}

bool Samt::empty() const {
  for (const auto& b : banks_)
    if (!b.empty()) return false;
  return true;
}

void Samt::dump_csv(std::ostream& out) const {
  out << "bank,subarray,first_row,last_row,rows,free_pairs\n";
  for (uint32_t b = 0; b < banks_.size(); ++b)
    for (uint32_t s = 0; s < banks_[b].size(); ++s) {
      const SamtEntry& e = banks_[b][s];
      out << b << ',' << s << ',' << e.first_row << ',' << e.last_row << ','
          << (e.last_row - e.first_row + 1) << ',' << e.free_pairs() << '\n';
    }
}

void Samt::serialize(std::ostream& out) const {
  out << "samt " << banks_.size() << '\n';
  for (const auto& bank : banks_) {
    out << bank.size() << '\n';
    for (const SamtEntry& e : bank) {
      out << e.first_row << ' ' << e.last_row << ' ' << e.pairs.size() << ' ' << e.next << '\n';
      for (const RowPair& p : e.pairs) out << p.row << ' ' << p.col0 << ' ' << p.half << '\n';
    }
  }
}

Samt Samt::deserialize(std::istream& in) {
  std::string tag;
  size_t nbanks = 0;
  if (!(in >> tag >> nbanks) || tag != "samt")
    raise(Errc::config_error, "bad subarray table header");
  Samt samt{uint32_t(nbanks)};
  for (size_t b = 0; b < nbanks; ++b) {
    size_t groups = 0;
    in >> groups;
    for (size_t s = 0; s < groups; ++s) {
      SamtEntry e;
      size_t pairs = 0;
      in >> e.first_row >> e.last_row >> pairs >> e.next;
      e.pairs.resize(pairs);
      for (RowPair& p : e.pairs) in >> p.row >> p.col0 >> p.half;
      if (!in) raise(Errc::config_error, "truncated subarray table");
      samt.banks_[b].push_back(std::move(e));
    }
  }
  return samt;
}

std::optional<uint32_t> Ait::lookup(uint32_t bank, uint32_t id) const {
  if (bank >= banks_.size()) return std::nullopt;
  auto it = banks_[bank].find(id);
  if (it == banks_[bank].end()) return std::nullopt;
  return it->second;
}

void Ait::bind(uint32_t bank, uint32_t id, uint32_t subarray) {
  if (bank >= banks_.size()) raise(Errc::out_of_range, "bank " + std::to_string(bank));
  banks_[bank][id] = subarray;
}

bool Ait::subarray_bound(uint32_t bank, uint32_t subarray) const {
  if (bank >= banks_.size()) return false;
  for (const auto& [id, sa] : banks_[bank])
    if (sa == subarray) return true;
  return false;
}

void Ait::dump_csv(std::ostream& out) const {
  out << "bank,alloc_id,subarray\n";
  for (uint32_t b = 0; b < banks_.size(); ++b) {
    std::vector<std::pair<uint32_t, uint32_t>> rows(banks_[b].begin(), banks_[b].end());
    std::sort(rows.begin(), rows.end());
    for (const auto& [id, sa] : rows) out << b << ',' << id << ',' << sa << '\n';
  }
}

std::optional<PhysAddr> Irt::lookup(uint64_t ppn) const {
  auto it = map_.find(ppn);
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

void Irt::insert(uint64_t ppn, PhysAddr initializer_row) { map_[ppn] = initializer_row; }

void Irt::dump_csv(std::ostream& out) const {
  out << "ppn,initializer_row_addr\n";
  std::vector<std::pair<uint64_t, PhysAddr>> rows(map_.begin(), map_.end());
  std::sort(rows.begin(), rows.end());
  for (const auto& [ppn, pa] : rows) out << ppn << ',' << pa << '\n';
}

void Irt::serialize(std::ostream& out) const {
  out << "irt " << map_.size() << '\n';
  std::vector<std::pair<uint64_t, PhysAddr>> rows(map_.begin(), map_.end());
  std::sort(rows.begin(), rows.end());
  for (const auto& [ppn, pa] : rows) out << ppn << ' ' << pa << '\n';
}

Irt Irt::deserialize(std::istream& in) {
  std::string tag;
  size_t n = 0;
  if (!(in >> tag >> n) || tag != "irt")
    raise(Errc::config_error, "bad initializer table header");
  Irt irt;
  for (size_t i = 0; i < n; ++i) {
    uint64_t ppn = 0;
    PhysAddr pa = 0;
    in >> ppn >> pa;
    if (!in) raise(Errc::config_error, "truncated initializer table");
    irt.insert(ppn, pa);
  }
  return irt;
}

void PageTable::map(uint64_t va, PhysAddr pa) {
  if (va % kPageBytes != 0 || pa % kPageBytes != 0)
    raise(Errc::granularity_violation, "page mapping must be 4 KiB aligned");
  vpn_to_ppn_[va / kPageBytes] = pa / kPageBytes;
}

std::optional<PhysAddr> PageTable::translate(uint64_t va) const {
  auto it = vpn_to_ppn_.find(va / kPageBytes);
  if (it == vpn_to_ppn_.end()) return std::nullopt;
  return it->second * kPageBytes + va % kPageBytes;
}

}  // namespace pumsim
