#pragma once

#include <stdexcept>
#include <string>

namespace flatneat {

// Error categories shared across the library. Every failure carries one of
// these codes so callers (and tests) can dispatch without string matching.
enum class Errc {
  unknown_function,
  genome_full,
  duplicate_key,
  duplicate_conn,
  dangling_endpoint,
  key_not_found,
  protected_node,
  attr_out_of_range,
  shape_mismatch,
  corrupt_row,
  cycle_detected,
  non_finite_input,
  non_finite_state,
  empty_aggregation,
  empty_dataset,
  parse_error,
  version_unsupported,
  limits_too_small,
  config_error,
  eval_error,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::unknown_function: return "unknown_function";
    case Errc::genome_full: return "genome_full";
    case Errc::duplicate_key: return "duplicate_key";
    case Errc::duplicate_conn: return "duplicate_conn";
    case Errc::dangling_endpoint: return "dangling_endpoint";
    case Errc::key_not_found: return "key_not_found";
    case Errc::protected_node: return "protected_node";
    case Errc::attr_out_of_range: return "attr_out_of_range";
    case Errc::shape_mismatch: return "shape_mismatch";
    case Errc::corrupt_row: return "corrupt_row";
    case Errc::cycle_detected: return "cycle_detected";
    case Errc::non_finite_input: return "non_finite_input";
    case Errc::non_finite_state: return "non_finite_state";
    case Errc::empty_aggregation: return "empty_aggregation";
    case Errc::empty_dataset: return "empty_dataset";
    case Errc::parse_error: return "parse_error";
    case Errc::version_unsupported: return "version_unsupported";
    case Errc::limits_too_small: return "limits_too_small";
    case Errc::config_error: return "config_error";
    case Errc::eval_error: return "eval_error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace flatneat
