#pragma once

#include <stdexcept>
#include <string>

namespace branchwave {

enum class ErrorCode {
  invalid_argument,
  shape_mismatch,
  domain,
  degenerate_basis,
  oscillatory_regime,
  imaginary_root,
  invalid_segment,
  not_unstable,
  non_convergence,
  oscillatory_failure,
  budget_exhausted,
  blow_up,
  contaminated_measurement,
  splitting_failure,
  contour_resolution,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace branchwave
