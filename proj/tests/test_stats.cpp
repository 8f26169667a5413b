#include <vector>

#include "doctest.h"
#include "pumsim/errors.hpp"
#include "pumsim/stats.hpp"

using namespace pumsim;

namespace {

std::vector<uint8_t> bits_of(const char* s) {
  std::vector<uint8_t> v;
  for (; *s; ++s) v.push_back(uint8_t(*s - '0'));
  return v;
}

}  // namespace

TEST_SUITE("stats") {

TEST_CASE("monobit p-value matches the worked reference example") {
  CHECK(monobit_pvalue(bits_of("1011010101")) ==
        doctest::Approx(0.527089).epsilon(1e-4));
  // perfectly balanced input: S == 0, p == 1
  std::vector<uint8_t> balanced;
  for (int i = 0; i < 1000; ++i) balanced.push_back(uint8_t(i & 1));
  CHECK(monobit_pvalue(balanced) == doctest::Approx(1.0));
  CHECK_THROWS_AS(monobit_pvalue({}), SimError);
}

TEST_CASE("runs p-value matches the worked reference example") {
  // epsilon = 1001101011: pi = 0.6, V = 7
  CHECK(runs_pvalue(bits_of("1001101011")) ==
        doctest::Approx(0.147232).epsilon(1e-4));
  CHECK_THROWS_AS(runs_pvalue({1}), SimError);
}

TEST_CASE("runs test is gated on the frequency precondition") {
  std::vector<uint8_t> ones(100, 1);  // |pi - 0.5| = 0.5 >= 2/sqrt(100)
  CHECK(runs_pvalue(ones) == 0.0);
}

TEST_CASE("strict alternation passes monobit but fails runs") {
  std::vector<uint8_t> alt;
  for (int i = 0; i < 1024; ++i) alt.push_back(uint8_t(i & 1));
  CHECK(monobit_pvalue(alt) == doctest::Approx(1.0));
  CHECK(runs_pvalue(alt) < 1e-6);
}

TEST_CASE("words unpack LSB first") {
  std::vector<uint8_t> bits = unpack_bits({0x00000001, 0x80000000});
  REQUIRE(bits.size() == 64);
  CHECK(bits[0] == 1);
  for (int i = 1; i < 63; ++i) CHECK(bits[i] == 0);
  CHECK(bits[63] == 1);

  std::vector<uint8_t> b2 = unpack_bits({0xdecafu});
  uint32_t back = 0;
  for (int i = 0; i < 32; ++i) back |= uint32_t(b2[i]) << i;
  CHECK(back == 0xdecafu);
}

TEST_CASE("the scaled complementary error function anchors both tests") {
  CHECK(erfc_scaled(0.0) == doctest::Approx(1.0));
  CHECK(erfc_scaled(0.632455) == doctest::Approx(0.527089).epsilon(1e-4));
}

}  // TEST_SUITE
