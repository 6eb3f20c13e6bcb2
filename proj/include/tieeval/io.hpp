#pragma once

// File formats.
//
//   run     TREC six-column text "qid Q0 docid rank score tag", or JSON lines
//           {"query_id", "doc_id", "score", "rank"?}. Detected from the first
//           non-empty line. Score text is kept verbatim.
//   qrels   TREC four-column text "qid iter docid rel", or JSON lines
//           {"query_id", "doc_id", "relevance"}. rel > 0 means relevant.
//   logits  JSON lines. The first record is a header
//           {"schema": "tieeval.logits", "version": 1, "phi": ..., "format": ...};
//           then {"query_id", "doc_id", "logits": [z+, z-] | [z]} for
//           softmax / sigmoid, or for dot {"query_id", "query_embedding": [...]}
//           once per query plus {"query_id", "doc_id", "embedding": [...]}.
//   report  JSON (schema "tieeval.report"), CSV, or a fixed-width table.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tieeval/evaluation.hpp"
#include "tieeval/floatsim.hpp"
#include "tieeval/scoring.hpp"

namespace tieeval {

enum class RecordLayout { kTrec, kJsonLines };

struct RunRecord {
  std::string query_id;
  std::string doc_id;
  std::string score_text;
  double score = 0.0;
  std::optional<long long> rank;
  std::string tag = "Q0";
  std::string run_name;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

struct RunFile {
  RecordLayout layout = RecordLayout::kTrec;
  std::vector<RunRecord> records;  // file order

  friend bool operator==(const RunFile&, const RunFile&) = default;
};

struct QrelsRecord {
  std::string query_id;
  std::string doc_id;
  int relevance = 0;

  bool relevant() const { return relevance > 0; }
};

struct QrelsFile {
  RecordLayout layout = RecordLayout::kTrec;
  std::vector<QrelsRecord> records;
};

struct LogitRecord {
  std::string query_id;
  std::string doc_id;
  std::vector<double> values;  // [z+, z-], [z], or the document embedding
};

struct LogitsFile {
  ScoringFunction phi = ScoringFunction::kSigmoid;
  PrecisionFormat source_format = fp32();
  std::vector<LogitRecord> records;                            // file order
  std::map<std::string, std::vector<double>> query_embeddings;  // dot only

  /// The scoring input of one record.
  LogitInput input(const LogitRecord& record) const;
};

enum class ReportFormat { kJson, kCsv, kTable };

ReportFormat parse_report_format(std::string_view text);

/// All parsers throw ParseError (with a line number where one applies).
RunFile parse_run(std::string_view bytes);
std::string write_run(const RunFile& run);

QrelsFile parse_qrels(std::string_view bytes);
std::string write_qrels(const QrelsFile& qrels);

/// Values are rounded to the declared source format on load.
LogitsFile parse_logits(std::string_view bytes);
std::string write_logits(const LogitsFile& logits);

/// Joins a run with judgments. Candidates keep their per-query file order as
/// original_index; judged-relevant documents absent from the run are counted
/// in missing_relevant. Queries appear in first-seen run order.
std::vector<Query> queries_from_run(const RunFile& run, const QrelsFile& qrels);

/// Scores every logit record under `regime` and joins with judgments.
std::vector<Query> queries_from_logits(const LogitsFile& logits, const QrelsFile& qrels,
                                       const ScoringRegime& regime, bool normalize = true,
                                       unsigned workers = 1);

inline constexpr int kReportSchemaVersion = 1;

std::string write_report(const EvaluationReport& report, ReportFormat format);
/// Parses the JSON form.
EvaluationReport parse_report(std::string_view bytes);

/// Several reports over the same (metric, k) set, one per precision regime
/// (labelled by EvaluationReport::label). The table has one
/// (M_obl, E[M], Range, Bias) column block per report.
std::string write_comparison(std::span<const EvaluationReport> reports, ReportFormat format);
std::vector<EvaluationReport> parse_comparison(std::string_view bytes);

/// Shortest decimal text that reads back to exactly `v`.
std::string format_double(double v);

/// Correctly rounded, locale-independent decimal parse of the whole string.
std::optional<double> parse_double(std::string_view text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);

}  // namespace tieeval
