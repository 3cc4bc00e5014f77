#pragma once

// Spec-file ingestion and the command implementations behind the affdim
// executable. Each command returns its JSON report and exit code; the
// executable only parses flags and writes output.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "affdim/error.hpp"
#include "affdim/ifs.hpp"

namespace affdim::cli {

using json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "affdim/1";

enum ExitCode : int { kPass = 0, kFail = 1, kInputError = 2, kBudget = 3, kIoError = 4 };

class IoError : public Error {
 public:
  using Error::Error;
};

struct IFSSpec {
  AffineIFS ifs;
  std::map<std::string, std::string> meta;
};

// Throws InvalidInput naming the offending line/column or field path.
IFSSpec parse_spec(const std::string& text);
IFSSpec read_spec_file(const std::string& path);
json spec_to_json(const IFSSpec& spec);
// FNV-1a 64 of the canonical serialization, as 16 hex digits.
std::string spec_hash(const IFSSpec& spec);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& data);

int exit_code_for(const std::exception& e);

struct Outcome {
  json report;
  int exit_code = kPass;
};

struct CheckOptions {
  int domination_levels = 8;
  int pinching_length = 6;
};

struct DimensionOptions {
  int level = 8;
  std::size_t mc_steps = 100000;
  std::size_t trials = 8;
  double tol = 1e-9;
};

struct AttractorOptions {
  std::size_t points = 100000;
  std::optional<std::size_t> depth;        // random points: truncation depth
  std::optional<int> exhaustive_depth;     // one point per cylinder instead
  std::optional<std::string> render;
  int width = 800;
  int height = 800;
  std::optional<std::string> csv;
  bool box_dim = false;
  int box_scales = 24;                     // delta = R 2^-m, m = 0 .. box_scales
  bool measure_dim = false;                // correlation dimension over r = R 2^-m, m = 3 .. 10
  bool local_dim = false;                  // local-dimension histogram instead of the correlation slope
};

struct FurstenbergOptions {
  int k = 1;
  std::size_t steps = 10000;
  std::size_t discard = 1000;
  std::vector<double> s_values{1.0};
  std::size_t mc_steps = 100000;
  std::size_t trials = 8;
  double tolerance = 0.05;
};

struct TransversalityOptions {
  std::uint64_t samples = 10000;
  std::size_t depth = 40;
  std::uint64_t tail_samples = 100000;
  std::vector<double> t_grid{1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
  double h = 1e-4;
  std::size_t derivative_checks = 100;
};

struct VerifyOptions {
  DimensionOptions dimension;
  std::size_t points = 1000000;
  int box_scales = 24;
  double tolerance = 0.2;
  FurstenbergOptions furstenberg;
  TransversalityOptions transversality;
};

struct EnsembleOptions {
  int size = 20;
  int branches = 3;
  int dim = 2;
  std::optional<double> target_norm;  // default 0.3 for d = 2, 0.1 otherwise
  double min_pass_rate = 0.9;
  std::size_t points = 200000;
};

Outcome run_check(const IFSSpec& spec, const CheckOptions& options, std::uint64_t seed);
Outcome run_dimension(const IFSSpec& spec, const DimensionOptions& options, std::uint64_t seed);
Outcome run_attractor(const IFSSpec& spec, const AttractorOptions& options, std::uint64_t seed);
Outcome run_verify(const IFSSpec& spec, const VerifyOptions& options, std::uint64_t seed);
Outcome run_ensemble(const EnsembleOptions& ensemble, const VerifyOptions& options, std::uint64_t seed);
Outcome run_furstenberg(const IFSSpec& spec, const FurstenbergOptions& options, std::uint64_t seed);
Outcome run_transversality(const IFSSpec& spec, const TransversalityOptions& options, std::uint64_t seed);

// Random member of the membership set: Gaussian matrices rescaled to the
// target norm, translations equally spaced on a unit circle.
IFSSpec random_member(int branches, int dim, double target_norm, std::uint64_t seed);

// Wraps results into {version, command, inputs, results, timing}.
json make_report(const std::string& command, json inputs, json results, double seconds);

}  // namespace affdim::cli
