#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nodalab/eigenmodes.hpp"

namespace nodalab {

enum class ExperimentKind { Zeros, Modes, Nodal, Bound, Frequency, SweepNStar, Reflect, Tiling, SmallCube, Theorem2 };

/// Subcommand name ("zeros", "sweep-n-star", ...).
std::string to_string(ExperimentKind k);
ExperimentKind parse_experiment_kind(const std::string& s);
const std::vector<ExperimentKind>& all_experiment_kinds();

/// Inclusive integer range.
struct IndexRange {
  int lo = 0;
  int hi = 0;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Zeros;
  std::string domain = "rect:1,1";
  IndexRange n{1, 1}, m{1, 1};
  bool diagonal = false;  ///< keep only n = m from the ranges
  int k = 1;
  std::vector<ModeIndex> modes;  ///< explicit list; overrides the ranges when non-empty

  // zeros
  IndexRange orders{0, 0};
  int count = 5;
  std::string zero_kind = "j";

  int resolution = 0;

  // frequency
  std::string index = "1,1";
  std::vector<double> center;
  std::vector<double> radii;

  // reflect
  std::vector<std::string> charts{"flat"};
  std::optional<double> delta;
  int grid = 17;
  int pairs = 2000;
  int dim = 2;

  // tiling, small-cube, theorem2, sweep-n-star
  double side = 0.25;
  double c = 0.5;
  double T = 1.0;
  bool slab = false;
  bool caps_as_interior = true;
  int samples = 100000;
  std::vector<double> cube;  ///< small-cube: center of Q (3 coordinates); empty selects the bottom-edge midpoint
  int M = 4;
  std::optional<double> threshold;
  int density = 8;
  int radius_count = 12;
  double min_fraction = 1.0 / 64.0;

  std::string out;
  std::uint64_t seed = 0;
  int jobs = 1;
};

/// Keys accepted for an experiment kind, besides "experiment", "out", "seed" and "jobs".
const std::vector<std::string>& config_keys(ExperimentKind k);

/// Builds a config from a JSON object text. The "experiment" key selects the kind unless
/// `kind` is given, in which case a differing "experiment" value is an error. Unknown keys,
/// wrong types, empty index ranges and out-of-range values throw std::invalid_argument
/// naming the key.
ExperimentConfig parse_config(const std::string& json_text, std::optional<ExperimentKind> kind = std::nullopt);

/// The same object with every default filled in.
std::string config_to_json(const ExperimentConfig& c);

/// Re-checks a config built in code.
void validate(const ExperimentConfig& c);

/// Mode list selected by the config (explicit list, or the ranges and the diagonal filter).
std::vector<ModeIndex> selected_modes(const ExperimentConfig& c);

/// CSV header of an experiment kind; tiling writes JSON and has none.
const std::vector<std::string>& csv_header(ExperimentKind k);

/// Human-readable column descriptions for --help.
std::string schema_help(ExperimentKind k);

struct RunResult {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string json;                  ///< tiling output, or the summary of small-cube and theorem2
  std::vector<std::string> failures;  ///< hard assertions that did not hold
  std::vector<std::string> notes;     ///< report lines for the console
  bool ok() const { return failures.empty(); }
};

/// Runs the experiment and returns its rows. Does not write files.
RunResult execute(const ExperimentConfig& c);

/// CSV text with a header line and "\n" line ends.
std::string to_csv(const RunResult& r);

/// Writes `content` to a temporary file beside `path` and renames it into place.
void write_atomic(const std::string& path, const std::string& content);

/// Executes and writes the outputs: the CSV to `out` (or the JSON for tiling) and, when a
/// summary exists, `out` + ".summary.json". Returns the result for the exit status.
RunResult run(const ExperimentConfig& c);

/// 17 significant digits.
std::string format_double(double v);

}  // namespace nodalab
