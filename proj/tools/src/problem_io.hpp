#pragma once

#include <json.hpp>
#include <otecon/types.hpp>

#include <cstdint>
#include <string>

namespace otecon::cli {

using Json = nlohmann::ordered_json;

/// Schema violations: caught at the top level and mapped to exit code 2.
/// `where` is a dotted location inside the document.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& where, const std::string& what)
      : std::runtime_error("at " + where + ": " + what) {}
};

/// Tolerance and solver knobs shared by every kind; file values can be
/// overridden from the command line.
struct Overrides {
  std::optional<double> tol;
  std::optional<int> max_iterations;
  std::optional<double> sigma;
};

/// FNV-1a 64-bit over raw bytes; pinned so documents hash identically
/// everywhere.
std::uint64_t fnv1a64(const std::string& bytes);

/// Solve one problem document (already parsed JSON, no "batch" wrapper).
/// Returns the exit code (0 solved, 1 solver-level failure) and the result
/// document. Schema problems throw SchemaError.
std::pair<int, Json> run_problem(const Json& doc, const Overrides& overrides);

/// Full document entry point: handles single problems and {"batch": [...]}
/// files. The worst per-entry exit code wins.
std::pair<int, Json> run_document(const Json& doc, const Overrides& overrides,
                                  const std::string& raw_bytes);

/// Kinds accepted by each CLI subcommand.
bool kind_matches_subcommand(const std::string& subcommand, const std::string& kind);

}  // namespace otecon::cli
