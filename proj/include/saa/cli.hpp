#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "saa/apps.hpp"
#include "saa/certify.hpp"
#include "saa/geometry.hpp"
#include "saa/solve.hpp"
#include "saa/valid.hpp"

namespace saa {

inline constexpr const char* kSchemaVersion = "1.0";

using Json = nlohmann::ordered_json;

std::vector<std::string> subcommand_names();

// Parsed command line. `parameters` holds every flag as text, keyed by
// its long name without dashes.
struct RunConfig {
  std::string subcommand;
  std::vector<std::string> inputs;
  std::map<std::string, std::string> parameters;
  std::string output;  // empty: standard output
  std::optional<std::uint64_t> seed;
  int verbosity = 0;
  int threads = 1;
};

// Runs one command line (args excludes the program name). Writes the JSON
// artifact to `out` (or the --output file) and returns 0; on any failure
// writes an error object to `err` and returns 2.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Space JSON: {"kind": "box", "lo": [..], "hi": [..]}, {"kind": "ball",
// "center": [..], "radius": r}, {"kind": "simplex", "dimension": d},
// {"kind": "cloud", "points": [[..], ..]}, {"kind": "product", "factors":
// [..], "norm": n}; every kind takes an optional "norm".
SpaceDescriptor space_from_json(const Json& j);
Json space_to_json(const SpaceDescriptor& s);

Json to_json(const Certificate& c);
Json to_json(const Solution& s);
Json to_json(const CoverageReport& r);
Json to_json(const RateReport& r);
Json to_json(const TailReport& r);
Json to_json(const CalibrationResult& r);

// Checks required fields and their types for every artifact kind; returns
// the list of problems (empty when valid).
std::vector<std::string> validate_artifact(const Json& artifact);

// Copy without the top-level "timestamp" field.
Json without_timestamp(Json artifact);

}  // namespace saa
