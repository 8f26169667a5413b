#include "pumsim/errors.hpp"

namespace pumsim {

const char* name(Errc code) {
  switch (code) {
    case Errc::illegal_command: return "IllegalCommand";
    case Errc::out_of_range: return "OutOfRange";
    case Errc::malformed_instruction: return "MalformedInstruction";
    case Errc::operand_bank_mismatch: return "OperandBankMismatch";
    case Errc::buffer_underflow: return "BufferUnderflow";
    case Errc::protocol_violation: return "ProtocolViolation";
    case Errc::unmapped_offset: return "UnmappedOffset";
    case Errc::invalid_size: return "InvalidSize";
    case Errc::out_of_subarray_capacity: return "OutOfSubarrayCapacity";
    case Errc::unknown_bank_state: return "UnknownBankState";
    case Errc::granularity_violation: return "GranularityViolation";
    case Errc::not_colocated: return "NotCoLocated";
    case Errc::unmapped_address: return "UnmappedAddress";
    case Errc::missing_initializer: return "MissingInitializer";
    case Errc::no_trng_cells: return "NoTrngCells";
    case Errc::characterization_failure: return "CharacterizationFailure";
    case Errc::calibration_infeasible: return "CalibrationInfeasible";
    case Errc::config_error: return "ConfigError";
    case Errc::internal_bug: return "InternalBug";
  }
  return "UnknownError";
}

}  // namespace pumsim
