#include "kerrspring/errors.hpp"

#include <atomic>
#include <cmath>
#include <iostream>

namespace kerrspring {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_parameter: return "invalid_parameter";
    case ErrorKind::domain: return "domain";
    case ErrorKind::multistability: return "multistability";
    case ErrorKind::no_critical_power: return "no_critical_power";
    case ErrorKind::numerical_failure: return "numerical_failure";
    case ErrorKind::divergent_spring: return "divergent_spring";
    case ErrorKind::inconsistent_powers: return "inconsistent_powers";
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::instability: return "instability";
    case ErrorKind::fit_failure: return "fit_failure";
    case ErrorKind::insufficient_band: return "insufficient_band";
    case ErrorKind::no_divergence: return "no_divergence";
  }
  return "unknown";
}

void require_finite(double value, std::string_view name) {
  if (!std::isfinite(value)) {
    throw Error(ErrorKind::invalid_parameter,
                std::string(name) + " must be finite");
  }
}

namespace {

void default_warning(std::string_view message) {
  std::cerr << "warning: " << message << '\n';
}

std::atomic<WarningHandler> g_warning_handler{&default_warning};

}  // namespace

void set_warning_handler(WarningHandler handler) {
  g_warning_handler.store(handler ? handler : &default_warning);
}

void warn(std::string_view message) { g_warning_handler.load()(message); }

}  // namespace kerrspring
