#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace pumsim {

// Frequency (monobit) test: p-value of the bias of ones vs zeros.
double monobit_pvalue(const std::vector<uint8_t>& bits);

// Runs test: p-value of the number of maximal same-bit runs given the
// observed ones fraction. Returns 0.0 when the monobit precondition
// (|pi - 1/2| < 2/sqrt(n)) fails, matching the reference procedure.
double runs_pvalue(const std::vector<uint8_t>& bits);

// Unpacks 32-bit words into bits, LSB first.
std::vector<uint8_t> unpack_bits(const std::vector<uint32_t>& words);

double erfc_scaled(double x);  // wrapper kept for testability

}  // namespace pumsim
