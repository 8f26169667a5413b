#include "pumsim/random_buffer.hpp"

#include <string>

#include "pumsim/errors.hpp"

namespace pumsim {

RandomBuffer::RandomBuffer(size_t capacity_bits) : capacity_bits_(capacity_bits) {
  if (capacity_bits == 0) raise(Errc::config_error, "random buffer capacity must be positive");
}

void RandomBuffer::push_bits(uint32_t bits, size_t count) {
  if (count > 32) raise(Errc::internal_bug, "push_bits count exceeds 32");
  if (!can_push(count))
    raise(Errc::internal_bug, "random buffer overflow: generation must halt when full");
  for (size_t i = 0; i < count; ++i) bits_.push_back(uint8_t((bits >> i) & 1u));
  produced_ += count;
}

uint32_t RandomBuffer::pop_word() {
  if (bits_.size() < 32)
    raise(Errc::buffer_underflow,
          "need 32 buffered bits, have " + std::to_string(bits_.size()));
  uint32_t word = 0;
  for (size_t i = 0; i < 32; ++i) {
    word |= uint32_t(bits_.front()) << i;
    bits_.pop_front();
  }
  consumed_ += 32;
  return word;
}

}  // namespace pumsim
