#pragma once

#include <stdexcept>
#include <string>

namespace boltzgap {

// Codes are shared with the C API (see boltzgap.h); keep the numeric values in sync.
enum class ErrorCode : int {
  ok = 0,
  invalid_argument = 1,
  singular_evaluation = 2,
  not_applicable = 3,
  memory_budget = 4,
  tolerance_not_met = 5,
  rank_deficient = 6,
  ill_conditioned = 7,
  not_positive_definite = 8,
  representation_mismatch = 9,
  io = 10,
  diagnostic = 11,
  internal = 99,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace boltzgap
