#pragma once

#include <stdexcept>
#include <string>

namespace condensation {

enum class errc {
  non_positive_bandwidth,
  zero_degree_row,
  shape_mismatch,
  dimension_mismatch,
  dimension_unsupported,
  all_coincident,
  degenerate_diameter,
  delta_too_large,
  zeta_not_below_diameter,
  tie_detected,
  leaf_mismatch,
  inconsistent_pairing,
  too_large,
  essential_mismatch,
  zero_kernel_entry,
  bad_params,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::non_positive_bandwidth: return "NonPositiveBandwidth";
    case errc::zero_degree_row: return "ZeroDegreeRow";
    case errc::shape_mismatch: return "ShapeMismatch";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::dimension_unsupported: return "DimensionUnsupported";
    case errc::all_coincident: return "AllCoincident";
    case errc::degenerate_diameter: return "DegenerateDiameter";
    case errc::delta_too_large: return "DeltaTooLarge";
    case errc::zeta_not_below_diameter: return "ZetaNotBelowDiameter";
    case errc::tie_detected: return "TieDetected";
    case errc::leaf_mismatch: return "LeafMismatch";
    case errc::inconsistent_pairing: return "InconsistentPairing";
    case errc::too_large: return "TooLarge";
    case errc::essential_mismatch: return "EssentialMismatch";
    case errc::zero_kernel_entry: return "ZeroKernelEntry";
    case errc::bad_params: return "BadParams";
  }
  return "UnknownError";
}

/// Library error carrying a machine-checkable code alongside the message.
class error : public std::runtime_error {
public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  errc code() const { return code_; }

private:
  errc code_;
};

}  // namespace condensation
