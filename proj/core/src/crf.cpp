#include "pumsim/crf.hpp"

#include <string>

#include "pumsim/errors.hpp"

namespace pumsim {

void Crf::write(size_t idx, uint32_t value) {
  if (idx >= kCount)
    raise(Errc::out_of_range, "CRF register " + std::to_string(idx) + " of " +
                                  std::to_string(kCount));
  staged_[idx] = value;
  pending_ = true;
}

uint32_t Crf::read(size_t idx) const {
  if (idx >= kCount)
    raise(Errc::out_of_range, "CRF register " + std::to_string(idx) + " of " +
                                  std::to_string(kCount));
  return staged_[idx];
}

uint32_t Crf::active(size_t idx) const {
  if (idx >= kCount)
    raise(Errc::out_of_range, "CRF register " + std::to_string(idx) + " of " +
                                  std::to_string(kCount));
  return active_[idx];
}

}  // namespace pumsim
