#pragma once

#include <stdexcept>
#include <string>

namespace pumsim {

// Failure classes surfaced by the simulator. Operations abort with a
// diagnostic message; tests and callers match on the code, not the text.
enum class Errc {
  illegal_command,
  out_of_range,
  malformed_instruction,
  operand_bank_mismatch,
  buffer_underflow,
  protocol_violation,
  unmapped_offset,
  invalid_size,
  out_of_subarray_capacity,
  unknown_bank_state,
  granularity_violation,
  not_colocated,
  unmapped_address,
  missing_initializer,
  no_trng_cells,
  characterization_failure,
  calibration_infeasible,
  config_error,
  internal_bug,
};

const char* name(Errc code);

class SimError : public std::runtime_error {
 public:
  SimError(Errc code, const std::string& what)
      : std::runtime_error(std::string(name(code)) + ": " + what), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& msg) {
  throw SimError(code, msg);
}

}  // namespace pumsim
