#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gridclear {

enum class ErrorCode {
  structural,       // topology problems: disconnected network, dangling references
  numerical,        // singular matrices, solver breakdown
  contract,         // caller violated a documented precondition
  pricing_failure,  // no eligible price-setting unit
  capacity,         // search space or problem size beyond supported limits
  io,
  scenario,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gridclear
