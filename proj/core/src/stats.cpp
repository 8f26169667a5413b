#include "pumsim/stats.hpp"

#include <cmath>

#include "pumsim/errors.hpp"

namespace pumsim {

double erfc_scaled(double x) { return std::erfc(x / std::sqrt(2.0)); }

double monobit_pvalue(const std::vector<uint8_t>& bits) {
  if (bits.empty()) raise(Errc::invalid_size, "monobit test needs bits");
  double n = double(bits.size());
  long long s = 0;
  for (uint8_t b : bits) s += b ? 1 : -1;
  double s_obs = std::abs(double(s)) / std::sqrt(n);
  return erfc_scaled(s_obs);
}

double runs_pvalue(const std::vector<uint8_t>& bits) {
  if (bits.size() < 2) raise(Errc::invalid_size, "runs test needs bits");
  double n = double(bits.size());
  uint64_t ones = 0;
  for (uint8_t b : bits) ones += b ? 1 : 0;
  double pi = double(ones) / n;
  if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(n)) return 0.0;
  uint64_t v = 1;
  for (size_t i = 0; i + 1 < bits.size(); ++i)
    if ((bits[i] != 0) != (bits[i + 1] != 0)) ++v;
  double num = std::abs(double(v) - 2.0 * n * pi * (1.0 - pi));
  double den = 2.0 * std::sqrt(2.0 * n) * pi * (1.0 - pi);
  return std::erfc(num / den);
}

std::vector<uint8_t> unpack_bits(const std::vector<uint32_t>& words) {
  std::vector<uint8_t> bits;
  bits.reserve(words.size() * 32);
  for (uint32_t w : words)
    for (int i = 0; i < 32; ++i) bits.push_back((w >> i) & 1);
  return bits;
}

}  // namespace pumsim
