#pragma once

// Relevance scoring functions evaluated under a precision regime. Each
// elementary operation of the scoring function is rounded into the
// regime's scoring format; logits are first rounded to the logit format.

#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tieeval/floatsim.hpp"

namespace tieeval {

/// Precision the model emitted logits in, and precision the scoring
/// function runs in.
struct ScoringRegime {
  PrecisionFormat logit_format = fp32();
  PrecisionFormat scoring_format = fp32();

  static ScoringRegime pure(const PrecisionFormat& fmt) { return {fmt, fmt}; }
  /// Logits stay in `low`; only the scoring function is upcast to FP32.
  static ScoringRegime high_precision_scoring(const PrecisionFormat& low) { return {low, fp32()}; }

  bool is_pure() const noexcept { return logit_format == scoring_format; }
  bool is_hps() const noexcept {
    return scoring_format.mantissa_bits > logit_format.mantissa_bits;
  }

  /// "bf16", "bf16->fp32", ...
  std::string label() const;
};

/// Parses "bf16" (pure) or "bf16->fp32" / "bf16/fp32" (logit->scoring).
ScoringRegime parse_regime(std::string_view text);

enum class ScoringFunction { kSoftmax, kSigmoid, kDot };

std::string_view to_string(ScoringFunction phi);
ScoringFunction parse_scoring_function(std::string_view text);

struct SoftmaxLogits {
  double positive = 0.0;
  double negative = 0.0;
};

struct SigmoidLogit {
  double value = 0.0;
};

struct EmbeddingPair {
  std::vector<double> query;
  std::vector<double> document;
};

using LogitInput = std::variant<SoftmaxLogits, SigmoidLogit, EmbeddingPair>;

ScoringFunction scoring_function_of(const LogitInput& input);

/// Rounds every component of `input` to `fmt`.
LogitInput quantize_input(const LogitInput& input, const PrecisionFormat& fmt);

struct RelevanceScore {
  double value = 0.0;
  ScoringRegime regime;
};

/// Two-logit softmax probability of the positive class, max-subtracted.
RelevanceScore score_softmax(const SoftmaxLogits& z, const ScoringRegime& regime);

/// 1 / (1 + exp(-z)).
RelevanceScore score_sigmoid(const SigmoidLogit& z, const ScoringRegime& regime);

/// Inner product accumulated left to right; with `normalize` each vector is
/// first scaled to unit Euclidean norm.
RelevanceScore score_dot(const EmbeddingPair& pair, const ScoringRegime& regime,
                         bool normalize = true);

/// Dispatches on the input's alternative.
RelevanceScore score(const LogitInput& input, const ScoringRegime& regime, bool normalize = true);

/// The input rounded to `low` and scored in FP32.
RelevanceScore score_hps(const LogitInput& input, ScoringFunction phi, const PrecisionFormat& low,
                         bool normalize = true);

/// Scores a batch; results are written in input order and do not depend on
/// the worker count.
std::vector<double> score_batch(std::span<const LogitInput> inputs, const ScoringRegime& regime,
                                bool normalize = true, unsigned workers = 1);

}  // namespace tieeval
