#pragma once

#include <stdexcept>
#include <string>

namespace hscalc {

enum class errc {
  order_exceeded,
  nonpositive_epsilon,
  interval_inverted,
  zero_endpoint,
  endpoint_hits_lambda,
  value_attained,
  scalar_equals_lambda,
  divergence,
  singular_shift,
  real_shift_inside_spectrum,
  singular_conditioner,
  insufficient_order,
  epsilon_nonpositive,
  enclosure_missing,
  interval_does_not_enclose_spectrum,
  spectrum_not_semibounded,
  t_out_of_range,
  k_too_large,
  cutoff_shape_invalid,
  not_an_eigenvalue,
  grid_touches_axis,
  bad_config,
  io_failure,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::order_exceeded: return "order-exceeded";
    case errc::nonpositive_epsilon: return "nonpositive-epsilon";
    case errc::interval_inverted: return "interval-inverted";
    case errc::zero_endpoint: return "zero-endpoint";
    case errc::endpoint_hits_lambda: return "endpoint-hits-lambda";
    case errc::value_attained: return "value-attained";
    case errc::scalar_equals_lambda: return "scalar-equals-lambda";
    case errc::divergence: return "divergence";
    case errc::singular_shift: return "singular-shift";
    case errc::real_shift_inside_spectrum: return "real-shift-inside-spectrum";
    case errc::singular_conditioner: return "singular-conditioner";
    case errc::insufficient_order: return "insufficient-order";
    case errc::epsilon_nonpositive: return "epsilon-nonpositive";
    case errc::enclosure_missing: return "enclosure-missing";
    case errc::interval_does_not_enclose_spectrum: return "interval-does-not-enclose-spectrum";
    case errc::spectrum_not_semibounded: return "spectrum-not-semibounded";
    case errc::t_out_of_range: return "t-out-of-range";
    case errc::k_too_large: return "K-too-large";
    case errc::cutoff_shape_invalid: return "cutoff-shape-invalid";
    case errc::not_an_eigenvalue: return "not-an-eigenvalue";
    case errc::grid_touches_axis: return "grid-touches-axis";
    case errc::bad_config: return "bad-config";
    case errc::io_failure: return "io-failure";
  }
  return "unknown";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

}  // namespace hscalc
