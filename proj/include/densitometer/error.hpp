#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace densitometer {

enum class ErrorKind {
  out_of_range,
  zero_tail,
  not_closed_form,
  degenerate_index,
  grid_too_coarse,
  inadmissible_parameter,
  never_holds,
  invalid_interval,
  invalid_gamma,
  overlapping_inputs,
  point_not_outside,
  horizon_exhausted,
  below_horizon,
  divergent,
  packing_infeasible,
  empty_rect,
  truncation_too_small,
  acceptance_too_low,
  invalid_input,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::out_of_range: return "OutOfRange";
    case ErrorKind::zero_tail: return "ZeroTail";
    case ErrorKind::not_closed_form: return "NotClosedForm";
    case ErrorKind::degenerate_index: return "DegenerateIndex";
    case ErrorKind::grid_too_coarse: return "GridTooCoarse";
    case ErrorKind::inadmissible_parameter: return "InadmissibleParameter";
    case ErrorKind::never_holds: return "NeverHolds";
    case ErrorKind::invalid_interval: return "InvalidInterval";
    case ErrorKind::invalid_gamma: return "InvalidGamma";
    case ErrorKind::overlapping_inputs: return "OverlappingInputs";
    case ErrorKind::point_not_outside: return "PointNotOutside";
    case ErrorKind::horizon_exhausted: return "HorizonExhausted";
    case ErrorKind::below_horizon: return "BelowHorizon";
    case ErrorKind::divergent: return "Divergent";
    case ErrorKind::packing_infeasible: return "PackingInfeasible";
    case ErrorKind::empty_rect: return "EmptyRect";
    case ErrorKind::truncation_too_small: return "TruncationTooSmall";
    case ErrorKind::acceptance_too_low: return "AcceptanceTooLow";
    case ErrorKind::invalid_input: return "InvalidInput";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace densitometer
