#include "tieeval/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "tieeval/errors.hpp"
#include "tieeval/parallel.hpp"

namespace tieeval {
namespace {

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

void require_not_nan(double v, const char* what) {
  if (std::isnan(v)) throw ConstraintError(std::string("NaN ") + what);
}

// Brings a logit onto the logit grid, then into the scoring format.
double ingest(double z, const ScoringRegime& regime) {
  return quantize(quantize(z, regime.logit_format), regime.scoring_format);
}

RelevanceScore finish(double value, const ScoringRegime& regime) {
  if (!std::isfinite(value)) {
    throw ConstraintError("scoring produced a non-finite score");
  }
  return {value, regime};
}

}  // namespace

std::string ScoringRegime::label() const {
  if (is_pure()) return logit_format.name;
  return logit_format.name + "->" + scoring_format.name;
}

ScoringRegime parse_regime(std::string_view text) {
  for (std::string_view sep : {"->", "/", "_"}) {
    const auto pos = text.find(sep);
    if (pos != std::string_view::npos) {
      return {parse_format(text.substr(0, pos)), parse_format(text.substr(pos + sep.size()))};
    }
  }
  return ScoringRegime::pure(parse_format(text));
}

std::string_view to_string(ScoringFunction phi) {
  switch (phi) {
    case ScoringFunction::kSoftmax:
      return "softmax";
    case ScoringFunction::kSigmoid:
      return "sigmoid";
    case ScoringFunction::kDot:
      return "dot";
  }
  return "unknown";
}

ScoringFunction parse_scoring_function(std::string_view text) {
  const std::string lower = lowercase(text);
  if (lower == "softmax") return ScoringFunction::kSoftmax;
  if (lower == "sigmoid") return ScoringFunction::kSigmoid;
  if (lower == "dot" || lower == "product" || lower == "cosine") return ScoringFunction::kDot;
  throw ConstraintError("unknown scoring function '" + std::string(text) + "'");
}

ScoringFunction scoring_function_of(const LogitInput& input) {
  switch (input.index()) {
    case 0:
      return ScoringFunction::kSoftmax;
    case 1:
      return ScoringFunction::kSigmoid;
    default:
      return ScoringFunction::kDot;
  }
}

LogitInput quantize_input(const LogitInput& input, const PrecisionFormat& fmt) {
  if (const auto* s = std::get_if<SoftmaxLogits>(&input)) {
    return SoftmaxLogits{quantize(s->positive, fmt), quantize(s->negative, fmt)};
  }
  if (const auto* s = std::get_if<SigmoidLogit>(&input)) {
    return SigmoidLogit{quantize(s->value, fmt)};
  }
  EmbeddingPair pair = std::get<EmbeddingPair>(input);
  for (double& v : pair.query) v = quantize(v, fmt);
  for (double& v : pair.document) v = quantize(v, fmt);
  return pair;
}

RelevanceScore score_softmax(const SoftmaxLogits& z, const ScoringRegime& regime) {
  require_not_nan(z.positive, "softmax logit");
  require_not_nan(z.negative, "softmax logit");
  const double pos = ingest(z.positive, regime);
  const double neg = ingest(z.negative, regime);
  if (std::isinf(pos) && std::isinf(neg) && pos < 0 && neg < 0) {
    throw ConstraintError("softmax undefined: both logits are -inf");
  }
  const PrecisionFormat& f = regime.scoring_format;
  const double peak = std::max(pos, neg);
  if (std::isinf(peak)) {
    // A +inf logit (an overflowed low-precision logit) takes all the mass.
    if (pos == neg) throw ConstraintError("softmax undefined: both logits are +inf");
    return finish(pos > neg ? 1.0 : 0.0, regime);
  }
  const double e_pos = qfunc(qop(pos, peak, Op::kSub, f), Func::kExp, f);
  const double e_neg = qfunc(qop(neg, peak, Op::kSub, f), Func::kExp, f);
  const double total = qop(e_pos, e_neg, Op::kAdd, f);
  return finish(qop(e_pos, total, Op::kDiv, f), regime);
}

RelevanceScore score_sigmoid(const SigmoidLogit& z, const ScoringRegime& regime) {
  require_not_nan(z.value, "sigmoid logit");
  const PrecisionFormat& f = regime.scoring_format;
  const double logit = ingest(z.value, regime);
  const double e = qfunc(qfunc(logit, Func::kNegate, f), Func::kExp, f);
  const double denom = qop(1.0, e, Op::kAdd, f);
  return finish(qop(1.0, denom, Op::kDiv, f), regime);
}

RelevanceScore score_dot(const EmbeddingPair& pair, const ScoringRegime& regime, bool normalize) {
  if (pair.query.empty() || pair.document.empty()) {
    throw ConstraintError("embedding vectors must be non-empty");
  }
  if (pair.query.size() != pair.document.size()) {
    throw ConstraintError("embedding dimension mismatch: " + std::to_string(pair.query.size()) +
                          " vs " + std::to_string(pair.document.size()));
  }
  const PrecisionFormat& f = regime.scoring_format;

  auto load = [&](const std::vector<double>& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      require_not_nan(v[i], "embedding component");
      out[i] = ingest(v[i], regime);
    }
    if (normalize) {
      double sq = 0.0;
      for (double x : out) sq = qop(sq, qop(x, x, Op::kMul, f), Op::kAdd, f);
      const double norm = qfunc(sq, Func::kSqrt, f);
      if (norm == 0.0) throw ConstraintError("cannot normalize a zero embedding");
      for (double& x : out) x = qop(x, norm, Op::kDiv, f);
    }
    return out;
  };

  const std::vector<double> q = load(pair.query);
  const std::vector<double> d = load(pair.document);
  double acc = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    acc = qop(acc, qop(q[i], d[i], Op::kMul, f), Op::kAdd, f);
  }
  return finish(acc, regime);
}

RelevanceScore score(const LogitInput& input, const ScoringRegime& regime, bool normalize) {
  if (const auto* s = std::get_if<SoftmaxLogits>(&input)) return score_softmax(*s, regime);
  if (const auto* s = std::get_if<SigmoidLogit>(&input)) return score_sigmoid(*s, regime);
  return score_dot(std::get<EmbeddingPair>(input), regime, normalize);
}

RelevanceScore score_hps(const LogitInput& input, ScoringFunction phi, const PrecisionFormat& low,
                         bool normalize) {
  if (scoring_function_of(input) != phi) {
    throw ConstraintError("input shape does not match scoring function " +
                          std::string(to_string(phi)));
  }
  return score(input, ScoringRegime::high_precision_scoring(low), normalize);
}

std::vector<double> score_batch(std::span<const LogitInput> inputs, const ScoringRegime& regime,
                                bool normalize, unsigned workers) {
  std::vector<double> out(inputs.size());
  parallel_for(inputs.size(), workers,
               [&](std::size_t i) { out[i] = score(inputs[i], regime, normalize).value; });
  return out;
}

}  // namespace tieeval
