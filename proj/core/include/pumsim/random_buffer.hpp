#pragma once

#include <cstdint>
#include <deque>

namespace pumsim {

// Bit-granular FIFO between the TRNG engine and software. The engine pushes
// a few bits per period; software drains whole 32-bit words. Generation
// halts while the buffer is full (no overwrite), so every produced bit is
// eventually consumed in order.
class RandomBuffer {
 public:
  explicit RandomBuffer(size_t capacity_bits = 8192);

  size_t capacity_bits() const { return capacity_bits_; }
  size_t size_bits() const { return bits_.size(); }
  size_t word_count() const { return bits_.size() / 32; }
  bool full() const { return bits_.size() == capacity_bits_; }
  bool can_push(size_t count) const { return bits_.size() + count <= capacity_bits_; }

  // Pushes `count` bits, LSB of `bits` first. Errc::internal_bug on overflow:
  // callers must check can_push / full first, matching the halt semantics.
  void push_bits(uint32_t bits, size_t count);

  // Pops 32 bits in production order; the first-produced bit lands in bit 0.
  // Errc::buffer_underflow when fewer than 32 bits are buffered.
  uint32_t pop_word();

  uint64_t produced_bits() const { return produced_; }
  uint64_t consumed_bits() const { return consumed_; }

 private:
  size_t capacity_bits_;
  std::deque<uint8_t> bits_;
  uint64_t produced_ = 0;
  uint64_t consumed_ = 0;
};

}  // namespace pumsim
