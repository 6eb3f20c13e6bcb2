#include "tieeval/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include "tieeval/errors.hpp"

namespace tieeval {
namespace {

// Deterministic across standard libraries, unlike std::normal_distribution.
class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : engine_(seed) {}

  double uniform() {  // (0, 1]
    return static_cast<double>((engine_() >> 11) + 1) * 0x1p-53;
  }

  double operator()(double mean, double stddev) {
    if (has_spare_) {
      has_spare_ = false;
      return mean + stddev * spare_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return mean + stddev * radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::string padded(std::size_t n, std::size_t width) {
  std::string s = std::to_string(n);
  return std::string(width > s.size() ? width - s.size() : 0, '0') + s;
}

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> parts;
  while (true) {
    const auto comma = text.find(',');
    const std::string_view part = text.substr(0, comma);
    if (!part.empty()) parts.push_back(part);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return parts;
}

std::size_t parse_size(std::string_view text) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConstraintError("invalid cutoff '" + std::string(text) + "'");
  }
  return v;
}

EvaluationOptions evaluation_options(const CliConfig& config) {
  EvaluationOptions options;
  options.metrics = config.metrics;
  options.cutoffs = config.cutoffs;
  options.workers = config.workers;
  options.oracle_check = config.oracle;
  options.budget.max_configurations = config.oracle_budget;
  return options;
}

void warn_about(const Diagnostics& d, std::ostream& log) {
  if (d.queries_skipped_no_relevant > 0) {
    log << "warning: skipped " << d.queries_skipped_no_relevant
        << " queries without relevant documents\n";
  }
  if (d.missing_relevant > 0) {
    log << "note: " << d.missing_relevant
        << " judged-relevant documents are absent from the candidate lists\n";
  }
}

LogitsFile load_logits(const CliConfig& config) {
  LogitsFile logits = parse_logits(read_file(config.logits_path));
  if (config.phi && *config.phi != logits.phi) {
    throw ConstraintError("--phi " + std::string(to_string(*config.phi)) +
                          " does not match the logits file (" +
                          std::string(to_string(logits.phi)) + ")");
  }
  return logits;
}

void require_qrels(const CliConfig& config) {
  if (config.qrels_path.empty()) throw ConstraintError("--qrels is required");
}

EvaluationReport evaluate_regime(const CliConfig& config, const LogitsFile& logits,
                                 const QrelsFile& qrels, const ScoringRegime& regime,
                                 std::ostream& log) {
  const auto queries = queries_from_logits(logits, qrels, regime, config.normalize, config.workers);
  EvaluationReport report = evaluate(queries, evaluation_options(config), regime.label());
  warn_about(report.diagnostics, log);
  return report;
}

// One report per regime; a run file is a single, already-scored regime.
std::vector<EvaluationReport> regime_reports(const CliConfig& config, std::ostream& log) {
  require_qrels(config);
  const QrelsFile qrels = parse_qrels(read_file(config.qrels_path));
  if (!config.run_path.empty()) {
    const auto queries = queries_from_run(parse_run(read_file(config.run_path)), qrels);
    EvaluationReport report = evaluate(queries, evaluation_options(config), "run");
    warn_about(report.diagnostics, log);
    return {std::move(report)};
  }
  if (config.logits_path.empty()) throw ConstraintError("--logits is required");
  if (config.regimes.empty()) throw ConstraintError("at least one regime is required");
  const LogitsFile logits = load_logits(config);
  std::vector<EvaluationReport> reports;
  for (const std::string& text : config.regimes) {
    reports.push_back(evaluate_regime(config, logits, qrels, parse_regime(text), log));
  }
  return reports;
}

}  // namespace

SynthOptions synth_preset(std::string_view name) {
  SynthOptions o;
  if (name == "miracl") {
    o.queries = 717;
    o.candidates = 100;
    o.relevant_rate = 0.03;
    o.phi = ScoringFunction::kSoftmax;
  } else if (name == "askubuntu") {
    o.queries = 375;
    o.candidates = 20;
    o.relevant_rate = 0.3;
    o.phi = ScoringFunction::kDot;
  } else {
    throw ConstraintError("unknown preset '" + std::string(name) + "' (miracl, askubuntu)");
  }
  return o;
}

std::pair<LogitsFile, QrelsFile> synthesize(const SynthOptions& o) {
  if (o.queries < 1 || o.candidates < 1) throw ConstraintError("need queries and candidates >= 1");
  if (!(o.relevant_rate >= 0.0 && o.relevant_rate <= 1.0)) {
    throw ConstraintError("relevant rate must lie in [0, 1]");
  }
  if (!(o.stddev >= 0.0) || !std::isfinite(o.mean) || !std::isfinite(o.shift)) {
    throw ConstraintError("invalid logit distribution");
  }
  if (o.phi == ScoringFunction::kDot && o.dimension < 1) {
    throw ConstraintError("embedding dimension must be >= 1");
  }
  o.format.validate();

  Gaussian rng(o.seed);
  LogitsFile logits;
  logits.phi = o.phi;
  logits.source_format = o.format;
  QrelsFile qrels;
  const std::size_t qwidth = std::to_string(o.queries).size();
  const std::size_t dwidth = std::to_string(o.candidates).size();
  auto q = [&](double x) { return quantize(x, o.format); };

  for (std::size_t qi = 0; qi < o.queries; ++qi) {
    const std::string qid = "q" + padded(qi + 1, qwidth);
    std::vector<double> query_vec;
    if (o.phi == ScoringFunction::kDot) {
      for (std::size_t d = 0; d < o.dimension; ++d) query_vec.push_back(q(rng(0.0, 1.0)));
      logits.query_embeddings[qid] = query_vec;
    }

    std::vector<bool> relevant(o.candidates);
    for (std::size_t i = 0; i < o.candidates; ++i) relevant[i] = rng.uniform() <= o.relevant_rate;
    if (o.positives_first) std::stable_partition(relevant.begin(), relevant.end(), [](bool r) { return r; });

    for (std::size_t i = 0; i < o.candidates; ++i) {
      const double shift = relevant[i] ? o.shift : 0.0;
      LogitRecord rec{qid, qid + "-d" + padded(i + 1, dwidth), {}};
      switch (o.phi) {
        case ScoringFunction::kSoftmax:
          rec.values = {q(rng(o.mean + shift, o.stddev)), q(rng(0.0, 1.0))};
          break;
        case ScoringFunction::kSigmoid:
          rec.values = {q(rng(o.mean + shift, o.stddev))};
          break;
        case ScoringFunction::kDot:
          for (std::size_t d = 0; d < o.dimension; ++d) {
            rec.values.push_back(q(rng(0.0, 1.0) + shift * query_vec[d]));
          }
          break;
      }
      qrels.records.push_back({qid, rec.doc_id, relevant[i] ? 1 : 0});
      logits.records.push_back(std::move(rec));
    }
  }
  return {std::move(logits), std::move(qrels)};
}

void CliConfig::validate() const {
  if (workers < 1) throw ConstraintError("--workers must be >= 1");
  if (metrics.empty()) throw ConstraintError("at least one metric is required");
  validate_cutoffs(cutoffs);
  if (oracle_budget < 1) throw ConstraintError("oracle budget must be >= 1");
  if (!run_path.empty() && !logits_path.empty()) {
    throw ConstraintError("give either --run or --logits, not both");
  }
  if (hps && scoring_format && !(*scoring_format == fp32())) {
    throw ConstraintError("--hps implies fp32 scoring");
  }
  if (logit_format) logit_format->validate();
  if (scoring_format) scoring_format->validate();
}

ScoringRegime CliConfig::regime(const PrecisionFormat& source) const {
  const PrecisionFormat low = logit_format.value_or(source);
  if (hps) {
    if (low.mantissa_bits >= fp32().mantissa_bits) {
      throw ConstraintError("--hps needs a logit format narrower than fp32");
    }
    return ScoringRegime::high_precision_scoring(low);
  }
  return {low, scoring_format.value_or(low)};
}

std::vector<std::size_t> parse_cutoffs(std::string_view text) {
  std::vector<std::size_t> out;
  for (std::string_view part : split_list(text)) {
    const auto dots = part.find("..");
    if (dots == std::string_view::npos) {
      out.push_back(parse_size(part));
      continue;
    }
    const std::size_t lo = parse_size(part.substr(0, dots));
    const std::size_t hi = parse_size(part.substr(dots + 2));
    if (lo > hi) throw ConstraintError("empty cutoff range '" + std::string(part) + "'");
    for (std::size_t k = lo; k <= hi; ++k) out.push_back(k);
  }
  validate_cutoffs(out);
  return out;
}

std::vector<MetricKind> parse_metrics(std::string_view text) {
  std::vector<MetricKind> out;
  for (std::string_view part : split_list(text)) {
    if (part == "all") {
      out.insert(out.end(), std::begin(kAllMetrics), std::end(kAllMetrics));
    } else {
      out.push_back(parse_metric(part));
    }
  }
  if (out.empty()) throw ConstraintError("at least one metric is required");
  return out;
}

std::string cmd_evaluate(const CliConfig& config, std::ostream& log) {
  config.validate();
  require_qrels(config);
  if (config.run_path.empty() && config.logits_path.empty()) {
    throw ConstraintError("evaluate needs --run or --logits");
  }
  if (!config.run_path.empty()) {
    return write_report(regime_reports(config, log).front(), config.format);
  }
  const QrelsFile qrels = parse_qrels(read_file(config.qrels_path));
  const LogitsFile logits = load_logits(config);
  const EvaluationReport report =
      evaluate_regime(config, logits, qrels, config.regime(logits.source_format), log);
  return write_report(report, config.format);
}

std::string cmd_compare(const CliConfig& config, std::ostream& log) {
  config.validate();
  if (config.logits_path.empty()) throw ConstraintError("compare needs --logits");
  const auto reports = regime_reports(config, log);
  return write_comparison(reports, config.format);
}

std::string cmd_curve(const CliConfig& config, std::ostream& log) {
  config.validate();
  const auto reports = regime_reports(config, log);
  std::string out = "metric,k,regime,oblivious,expected,minimum,maximum\n";
  const std::size_t cutoffs = config.cutoffs.size();
  for (std::size_t m = 0; m < config.metrics.size(); ++m) {
    for (const EvaluationReport& r : reports) {
      for (std::size_t c = 0; c < cutoffs; ++c) {
        const AggregateReport& agg = r.results[m * cutoffs + c];
        out += std::string(to_string(agg.metric)) + ',' + std::to_string(agg.k) + ',' + r.label +
               ',' + format_double(agg.mean.oblivious) + ',' + format_double(agg.mean.expected) +
               ',' + format_double(agg.mean.minimum) + ',' + format_double(agg.mean.maximum) +
               '\n';
      }
    }
  }
  return out;
}

std::string cmd_grid(const CliConfig& config) {
  if (!config.grid_format) throw ConstraintError("grid needs a format");
  const PrecisionFormat& fmt = *config.grid_format;
  fmt.validate();
  const double lo = config.grid_lo;
  const double hi = config.grid_hi;
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw ConstraintError("interval must be finite");
  if (lo > hi) throw ConstraintError("interval lower bound exceeds upper bound");
  if (std::fabs(lo) > fmt.max_finite() || std::fabs(hi) > fmt.max_finite()) {
    throw ConstraintError("interval exceeds the format's finite range");
  }

  const std::int64_t count = grid_count(lo, hi, fmt);
  std::string out = "# " + fmt.name + " [" + format_double(lo) + ", " + format_double(hi) +
                    "]: " + std::to_string(count) + " representable values\n";
  out += "value,ulp\n";
  double v = quantize(lo, fmt);
  if (v < lo) v = next_up(v, fmt);
  if (v == 0.0) v = 0.0;  // list -0 as 0
  std::int64_t listed = 0;
  for (; v <= hi && listed < count; v = next_up(v, fmt)) {
    if (listed == static_cast<std::int64_t>(config.grid_limit)) break;
    out += format_double(v) + ',' + format_double(ulp(v, fmt)) + '\n';
    ++listed;
  }
  if (listed < count) out += "# ... " + std::to_string(count - listed) + " more\n";
  return out;
}

std::string cmd_synth(const CliConfig& config) {
  if (config.out_path.empty()) throw ConstraintError("synth needs --out for the logits file");
  if (config.qrels_out_path.empty()) throw ConstraintError("synth needs --qrels-out");
  SynthOptions options = config.synth;
  options.seed = config.seed;
  const auto [logits, qrels] = synthesize(options);
  write_file(config.out_path, write_logits(logits));
  write_file(config.qrels_out_path, write_qrels(qrels));
  std::size_t relevant = 0;
  for (const QrelsRecord& r : qrels.records) relevant += r.relevant() ? 1 : 0;
  return "wrote " + std::to_string(options.queries) + " queries x " +
         std::to_string(options.candidates) + " candidates (" + std::to_string(relevant) +
         " relevant, " + std::string(to_string(options.phi)) + ", " + options.format.name +
         ")\n";
}

}  // namespace tieeval
