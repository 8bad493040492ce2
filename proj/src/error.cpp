#include "saa/error.hpp"

#include <cstdlib>
#include <string>

#include "saa/parallel.hpp"

namespace saa {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "InvalidArgument";
    case ErrorKind::empty_sample: return "EmptySample";
    case ErrorKind::dimension_mismatch: return "DimensionMismatch";
    case ErrorKind::budget: return "Budget";
    case ErrorKind::slater_margin: return "SlaterMargin";
    case ErrorKind::infeasible: return "Infeasible";
    case ErrorKind::missing_oracle: return "MissingOracle";
    case ErrorKind::missing_entry: return "MissingEntry";
    case ErrorKind::attestation: return "Attestation";
    case ErrorKind::degenerate: return "Degenerate";
    case ErrorKind::uncalibratable: return "Uncalibratable";
    case ErrorKind::io: return "IO";
  }
  return "InvalidArgument";
}

int resolve_threads(std::optional<int> requested) {
  if (requested) {
    require(*requested >= 1, ErrorKind::invalid_argument, "--threads must be >= 1");
    return *requested;
  }
  if (const char* env = std::getenv("SAA_CERTIFY_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    fail(ErrorKind::invalid_argument,
         std::string("SAA_CERTIFY_THREADS must be a positive integer, got '") + env + "'");
  }
  return 1;
}

}  // namespace saa
