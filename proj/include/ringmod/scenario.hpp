#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ringmod/quadrature.hpp"

namespace ringmod::scenario {

/// Malformed scenario text: bad JSON, unknown kind, missing or mistyped
/// field. The message names the offending field path.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitParse = 2;
inline constexpr int kExitValidation = 3;
inline constexpr int kExitContract = 4;

struct Scenario {
  std::string kind;
  std::uint64_t seed = 0x5eedULL;
  /// Output path prefix, relative to the output directory.
  std::string output;
  bool svg = false;
  QuadratureConfig quadrature;
  nlohmann::json parameters;
};

/// Kinds accepted by parse_scenario.
const std::vector<std::string>& scenario_kinds();

/// Parses and type-checks a scenario document. `fallback_output` is used when
/// the document has no "output" field.
Scenario parse_scenario(const std::string& text, const std::string& fallback_output);

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir = ".";
  bool verbose = false;
  /// Progress messages when verbose; may be null.
  std::ostream* log = nullptr;
};

struct RunResult {
  /// Files written, main CSV first.
  std::vector<std::filesystem::path> files;
  /// Contents of the main CSV.
  std::string csv;
};

/// Runs a parsed scenario and writes its artifacts. Library exceptions
/// propagate; a failed numerical contract throws ContractError after the CSV
/// has been written.
RunResult run_scenario(const Scenario& s, const RunOptions& opts);

/// Reads, parses and runs a scenario file, printing diagnostics to `err`.
/// Returns the process exit status.
int run_file(const std::filesystem::path& file, const RunOptions& opts, std::ostream& err);

}  // namespace ringmod::scenario
