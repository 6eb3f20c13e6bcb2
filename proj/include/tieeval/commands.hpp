#pragma once

// Command implementations behind the tieeval executable. Each command reads
// its inputs from files named in the config and returns the bytes it would
// write; warnings go to `log`.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tieeval/evaluation.hpp"
#include "tieeval/floatsim.hpp"
#include "tieeval/io.hpp"
#include "tieeval/metrics.hpp"
#include "tieeval/scoring.hpp"

namespace tieeval {

struct SynthOptions {
  std::size_t queries = 717;
  std::size_t candidates = 100;
  double relevant_rate = 0.03;
  ScoringFunction phi = ScoringFunction::kSoftmax;
  PrecisionFormat format = fp32();  // declared source format of the logits
  // Non-relevant logits ~ N(mean, stddev); relevant ones are shifted by `shift`.
  double mean = 3.0;
  double stddev = 2.0;
  double shift = 2.0;
  std::size_t dimension = 16;  // dot only
  bool positives_first = false;
  std::uint64_t seed = 0;
};

/// "miracl" (717 x 100) or "askubuntu" (375 x 20).
SynthOptions synth_preset(std::string_view name);

/// Reproducible synthetic corpus: logits plus binary judgments for every
/// candidate.
std::pair<LogitsFile, QrelsFile> synthesize(const SynthOptions& options);

struct CliConfig {
  std::string command;
  std::string run_path;
  std::string qrels_path;
  std::string logits_path;
  std::optional<ScoringFunction> phi;
  std::optional<PrecisionFormat> logit_format;
  std::optional<PrecisionFormat> scoring_format;
  bool hps = false;
  bool normalize = true;  // dot scoring: cosine rather than raw inner product
  std::vector<MetricKind> metrics{std::begin(kAllMetrics), std::end(kAllMetrics)};
  std::vector<std::size_t> cutoffs{10};
  bool oracle = false;
  std::uint64_t oracle_budget = EnumerationBudget{}.max_configurations;
  std::string out_path;  // empty: standard output
  ReportFormat format = ReportFormat::kJson;
  std::uint64_t seed = 0;
  unsigned workers = 1;

  // compare / curve
  std::vector<std::string> regimes{"fp32", "bf16", "bf16->fp32"};

  // grid
  std::optional<PrecisionFormat> grid_format;
  double grid_lo = 0.0;
  double grid_hi = 1.0;
  std::size_t grid_limit = 1000;

  // synth
  SynthOptions synth;
  std::string qrels_out_path;

  /// Throws ConstraintError on inconsistent settings.
  void validate() const;

  /// The regime for evaluate: logit format defaults to `source`, scoring
  /// format to the logit format; --hps selects FP32 scoring and requires a
  /// narrower logit format.
  ScoringRegime regime(const PrecisionFormat& source) const;
};

/// Parses "10", "1,3,10" or "1..10".
std::vector<std::size_t> parse_cutoffs(std::string_view text);
std::vector<MetricKind> parse_metrics(std::string_view text);

std::string cmd_evaluate(const CliConfig& config, std::ostream& log);
std::string cmd_compare(const CliConfig& config, std::ostream& log);
/// CSV: metric,k,regime,oblivious,expected,minimum,maximum.
std::string cmd_curve(const CliConfig& config, std::ostream& log);
std::string cmd_grid(const CliConfig& config);
/// Writes the logits to out_path and judgments to qrels_out_path; returns a
/// one-line summary.
std::string cmd_synth(const CliConfig& config);

}  // namespace tieeval
