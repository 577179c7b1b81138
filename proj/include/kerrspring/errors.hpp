#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kerrspring {

enum class ErrorKind {
  invalid_parameter,
  domain,
  multistability,
  no_critical_power,
  numerical_failure,
  divergent_spring,
  inconsistent_powers,
  configuration,
  instability,
  fit_failure,
  insufficient_band,
  no_divergence,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers dispatch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Throws invalid_parameter unless value is finite.
void require_finite(double value, std::string_view name);

// Replaces the sink for non-fatal diagnostics (default writes to stderr).
// Set once at startup; the handler itself must be thread-safe.
using WarningHandler = void (*)(std::string_view message);
void set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

}  // namespace kerrspring
