#include <random>

#include "doctest.h"
#include "pumsim/errors.hpp"
#include "pumsim/random_buffer.hpp"

using namespace pumsim;

TEST_SUITE("random-buffer") {

TEST_CASE("words round-trip through 4-bit pushes in production order") {
  RandomBuffer buf(256);
  std::mt19937 gen(7);
  std::vector<uint32_t> words(5);
  for (auto& w : words) w = gen();
  for (uint32_t w : words)
    for (int i = 0; i < 8; ++i) buf.push_bits((w >> (4 * i)) & 0xf, 4);
  CHECK(buf.word_count() == 5);
  for (uint32_t w : words) CHECK(buf.pop_word() == w);
  CHECK(buf.size_bits() == 0);
}

TEST_CASE("first-produced bit lands in bit zero") {
  RandomBuffer buf(64);
  buf.push_bits(0b1, 1);
  buf.push_bits(0, 31);
  CHECK(buf.pop_word() == 1u);
}

TEST_CASE("word_count floors to whole words") {
  RandomBuffer buf(64);
  buf.push_bits(0, 31);
  CHECK(buf.word_count() == 0);
  buf.push_bits(1, 2);
  CHECK(buf.size_bits() == 33);
  CHECK(buf.word_count() == 1);
}

TEST_CASE("conservation: produced minus consumed equals what is buffered") {
  RandomBuffer buf(128);
  std::mt19937 gen(11);
  for (int step = 0; step < 2000; ++step) {
    if (buf.can_push(4) && (gen() % 3) != 0)
      buf.push_bits(gen() & 0xf, 4);
    else if (buf.word_count() > 0)
      buf.pop_word();
    REQUIRE(buf.produced_bits() - buf.consumed_bits() == buf.size_bits());
    REQUIRE(buf.size_bits() <= buf.capacity_bits());
  }
  CHECK(buf.produced_bits() > 0);
  CHECK(buf.consumed_bits() > 0);
}

TEST_CASE("overflow is a simulator bug, not silent loss") {
  RandomBuffer buf(8);
  buf.push_bits(0xff, 8);
  CHECK(buf.full());
  CHECK_FALSE(buf.can_push(1));
  CHECK_THROWS_AS(buf.push_bits(1, 1), SimError);
  CHECK(buf.produced_bits() == 8);  // the failed push produced nothing
}

TEST_CASE("underflow on short reads") {
  RandomBuffer buf(64);
  buf.push_bits(0xf, 4);
  try {
    buf.pop_word();
    FAIL("unreachable");
  } catch (const SimError& e) {
    CHECK(e.code() == Errc::buffer_underflow);
  }
  CHECK(buf.size_bits() == 4);  // nothing consumed by the failed pop
}

TEST_CASE("zero capacity is rejected") {
  CHECK_THROWS_AS(RandomBuffer(0), SimError);
}

}  // TEST_SUITE
