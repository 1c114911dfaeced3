#pragma once

#include <stdexcept>
#include <string>

namespace relinfo {

enum class ErrorCode {
  invalid_argument,
  parse,
  io,
  domain,
  boundary,
  undefined_measure,
  instability,
  unsupported,
  oracle_unavailable,
  estimation_failure,
  degenerate_data,
  separation,
  rank_deficient,
  data_integrity,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so the
// C layer can translate it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // Validation failures (bad input) as opposed to numerical ones.
  bool is_validation() const noexcept {
    return code_ == ErrorCode::invalid_argument || code_ == ErrorCode::parse ||
           code_ == ErrorCode::io;
  }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace relinfo
