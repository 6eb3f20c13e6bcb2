#include "tieeval/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "json.hpp"
#include "tieeval/errors.hpp"

namespace tieeval {
namespace {

using nlohmann::json;

struct Line {
  std::string_view text;
  std::size_t number;  // 1-based
};

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Non-empty lines, with their 1-based line numbers.
std::vector<Line> split_lines(std::string_view bytes) {
  std::vector<Line> lines;
  std::size_t number = 0;
  while (!bytes.empty()) {
    const auto end = bytes.find('\n');
    const std::string_view raw = bytes.substr(0, end);
    ++number;
    if (!trim(raw).empty()) lines.push_back({trim(raw), number});
    if (end == std::string_view::npos) break;
    bytes.remove_prefix(end + 1);
  }
  return lines;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

RecordLayout detect_layout(const std::vector<Line>& lines) {
  return lines.front().text.front() == '{' ? RecordLayout::kJsonLines : RecordLayout::kTrec;
}

template <typename Int>
std::optional<Int> parse_int(std::string_view text) {
  Int value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

double parse_finite_score(std::string_view text, std::size_t line) {
  const auto v = parse_double(text);
  if (!v) throw ParseError("invalid score '" + std::string(text) + "'", line);
  if (!std::isfinite(*v)) throw ParseError("score must be finite", line);
  return *v;
}

// A scalar member of a flat JSON object, with the number's source text.
struct FlatValue {
  enum class Kind { kString, kNumber, kOther } kind = Kind::kOther;
  std::string text;
};

// SAX handler for one-level JSON objects whose members are scalars. Keeps
// the lexeme of floating-point numbers so scores survive verbatim.
class FlatObjectReader : public nlohmann::json_sax<json> {
 public:
  std::map<std::string, FlatValue> members;
  std::string error;

  bool null() override { return put({FlatValue::Kind::kOther, "null"}); }
  bool boolean(bool v) override { return put({FlatValue::Kind::kOther, v ? "true" : "false"}); }
  bool number_integer(number_integer_t v) override {
    return put({FlatValue::Kind::kNumber, std::to_string(v)});
  }
  bool number_unsigned(number_unsigned_t v) override {
    return put({FlatValue::Kind::kNumber, std::to_string(v)});
  }
  bool number_float(number_float_t, const string_t& s) override {
    return put({FlatValue::Kind::kNumber, s});
  }
  bool string(string_t& s) override { return put({FlatValue::Kind::kString, s}); }
  bool binary(binary_t&) override { return fail("unexpected binary value"); }
  bool start_object(std::size_t) override {
    if (++depth_ > 1) return fail("nested objects are not supported");
    return true;
  }
  bool key(string_t& k) override {
    key_ = k;
    return true;
  }
  bool end_object() override {
    --depth_;
    return true;
  }
  bool start_array(std::size_t) override { return fail("arrays are not supported here"); }
  bool end_array() override { return true; }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception& e) override {
    return fail(e.what());
  }

 private:
  bool put(FlatValue v) {
    if (depth_ != 1) return fail("expected a JSON object");
    if (!members.emplace(key_, std::move(v)).second) return fail("duplicate key '" + key_ + "'");
    return true;
  }
  bool fail(std::string message) {
    error = std::move(message);
    return false;
  }

  int depth_ = 0;
  std::string key_;
};

std::map<std::string, FlatValue> read_flat_object(std::string_view text, std::size_t line) {
  FlatObjectReader reader;
  const bool ok = json::sax_parse(text.begin(), text.end(), &reader);
  if (!ok) throw ParseError(reader.error.empty() ? "malformed JSON record" : reader.error, line);
  return std::move(reader.members);
}

const FlatValue& member(const std::map<std::string, FlatValue>& obj, const std::string& key,
                        std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError("missing field '" + key + "'", line);
  return it->second;
}

std::string string_member(const std::map<std::string, FlatValue>& obj, const std::string& key,
                          std::size_t line) {
  const FlatValue& v = member(obj, key, line);
  if (v.kind == FlatValue::Kind::kOther) throw ParseError("field '" + key + "' must be text", line);
  if (v.text.empty()) throw ParseError("field '" + key + "' is empty", line);
  return v.text;
}

json parse_json_line(std::string_view text, std::size_t line) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed JSON record: ") + e.what(), line);
  }
}

std::string json_string(std::string_view s) { return json(std::string(s)).dump(); }

bool is_json_number(std::string_view text) {
  if (text.empty()) return false;
  try {
    return json::parse(text.begin(), text.end()).is_number();
  } catch (const json::exception&) {
    return false;
  }
}

std::vector<double> number_array(const json& value, const char* what, std::size_t line) {
  if (!value.is_array()) throw ParseError(std::string(what) + " must be an array", line);
  std::vector<double> out;
  out.reserve(value.size());
  for (const json& v : value) {
    if (!v.is_number()) throw ParseError(std::string(what) + " must hold numbers", line);
    out.push_back(v.get<double>());
  }
  return out;
}

std::string pair_key(const std::string& a, const std::string& b) {
  std::string key = a;
  key.push_back('\0');
  key += b;
  return key;
}

json report_fields(const MetricReport& r) {
  return json{{"oblivious", r.oblivious}, {"expected", r.expected}, {"maximum", r.maximum},
              {"minimum", r.minimum},     {"range", r.range},       {"bias", r.bias}};
}

MetricReport read_report_fields(const json& j, MetricKind metric, std::size_t k) {
  MetricReport r;
  r.metric = metric;
  r.k = k;
  r.oblivious = j.at("oblivious").get<double>();
  r.expected = j.at("expected").get<double>();
  r.maximum = j.at("maximum").get<double>();
  r.minimum = j.at("minimum").get<double>();
  r.range = j.at("range").get<double>();
  r.bias = j.at("bias").get<double>();
  return r;
}

std::string percent_cell(double v, MetricKind metric) {
  char buf[64];
  const double shown = metric == MetricKind::kHits ? v : 100.0 * v;
  std::snprintf(buf, sizeof buf, "%.2f", shown);
  return buf;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::optional<double> parse_double(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConstraintError("cannot write '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ConstraintError("failed writing '" + path + "'");
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "json") return ReportFormat::kJson;
  if (text == "csv") return ReportFormat::kCsv;
  if (text == "table") return ReportFormat::kTable;
  throw ConstraintError("unknown output format '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Run files

RunFile parse_run(std::string_view bytes) {
  const auto lines = split_lines(bytes);
  if (lines.empty()) throw ParseError("run file is empty");
  RunFile run;
  run.layout = detect_layout(lines);
  std::set<std::string> seen;

  for (const Line& line : lines) {
    RunRecord r;
    if (run.layout == RecordLayout::kTrec) {
      const auto f = split_fields(line.text);
      if (f.size() != 6) {
        throw ParseError("expected 6 columns (qid Q0 docid rank score tag), got " +
                             std::to_string(f.size()),
                         line.number);
      }
      r.query_id = f[0];
      r.tag = f[1];
      r.doc_id = f[2];
      r.rank = parse_int<long long>(f[3]);
      if (!r.rank) throw ParseError("invalid rank '" + std::string(f[3]) + "'", line.number);
      r.score_text = f[4];
      r.run_name = f[5];
    } else {
      const auto obj = read_flat_object(line.text, line.number);
      r.query_id = string_member(obj, "query_id", line.number);
      r.doc_id = string_member(obj, "doc_id", line.number);
      r.tag.clear();
      const FlatValue& score = member(obj, "score", line.number);
      if (score.kind == FlatValue::Kind::kOther) throw ParseError("invalid score", line.number);
      r.score_text = score.text;
      if (const auto it = obj.find("rank"); it != obj.end()) {
        r.rank = parse_int<long long>(it->second.text);
        if (!r.rank || it->second.kind != FlatValue::Kind::kNumber) {
          throw ParseError("invalid rank", line.number);
        }
      }
    }
    r.score = parse_finite_score(r.score_text, line.number);
    if (!seen.insert(pair_key(r.query_id, r.doc_id)).second) {
      throw ParseError("duplicate (query, doc) pair " + r.query_id + " " + r.doc_id, line.number);
    }
    run.records.push_back(std::move(r));
  }
  return run;
}

std::string write_run(const RunFile& run) {
  std::string out;
  std::unordered_map<std::string, long long> position;
  for (const RunRecord& r : run.records) {
    const long long rank = r.rank ? *r.rank : ++position[r.query_id];
    if (run.layout == RecordLayout::kTrec) {
      out += r.query_id + ' ' + (r.tag.empty() ? "Q0" : r.tag) + ' ' + r.doc_id + ' ' +
             std::to_string(rank) + ' ' + r.score_text + ' ' +
             (r.run_name.empty() ? "tieeval" : r.run_name) + '\n';
    } else {
      out += "{\"query_id\":" + json_string(r.query_id) + ",\"doc_id\":" + json_string(r.doc_id) +
             ",\"score\":" + (is_json_number(r.score_text) ? r.score_text : json_string(r.score_text));
      if (r.rank) out += ",\"rank\":" + std::to_string(*r.rank);
      out += "}\n";
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Qrels

QrelsFile parse_qrels(std::string_view bytes) {
  const auto lines = split_lines(bytes);
  if (lines.empty()) throw ParseError("qrels file is empty");
  QrelsFile qrels;
  qrels.layout = detect_layout(lines);
  std::set<std::string> seen;
  for (const Line& line : lines) {
    QrelsRecord r;
    std::string rel_text;
    if (qrels.layout == RecordLayout::kTrec) {
      const auto f = split_fields(line.text);
      if (f.size() != 4) {
        throw ParseError("expected 4 columns (qid iter docid rel), got " + std::to_string(f.size()),
                         line.number);
      }
      r.query_id = f[0];
      r.doc_id = f[2];
      rel_text = f[3];
    } else {
      const auto obj = read_flat_object(line.text, line.number);
      r.query_id = string_member(obj, "query_id", line.number);
      r.doc_id = string_member(obj, "doc_id", line.number);
      rel_text = member(obj, "relevance", line.number).text;
    }
    const auto rel = parse_int<int>(rel_text);
    if (!rel || *rel < 0) {
      throw ParseError("relevance must be an integer >= 0, got '" + rel_text + "'", line.number);
    }
    r.relevance = *rel;
    if (!seen.insert(pair_key(r.query_id, r.doc_id)).second) {
      throw ParseError("duplicate judgment for " + r.query_id + " " + r.doc_id, line.number);
    }
    qrels.records.push_back(std::move(r));
  }
  return qrels;
}

std::string write_qrels(const QrelsFile& qrels) {
  std::string out;
  for (const QrelsRecord& r : qrels.records) {
    if (qrels.layout == RecordLayout::kTrec) {
      out += r.query_id + " 0 " + r.doc_id + ' ' + std::to_string(r.relevance) + '\n';
    } else {
      out += "{\"query_id\":" + json_string(r.query_id) + ",\"doc_id\":" + json_string(r.doc_id) +
             ",\"relevance\":" + std::to_string(r.relevance) + "}\n";
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Logits

LogitInput LogitsFile::input(const LogitRecord& record) const {
  switch (phi) {
    case ScoringFunction::kSoftmax:
      return SoftmaxLogits{record.values.at(0), record.values.at(1)};
    case ScoringFunction::kSigmoid:
      return SigmoidLogit{record.values.at(0)};
    case ScoringFunction::kDot:
      return EmbeddingPair{query_embeddings.at(record.query_id), record.values};
  }
  throw ConstraintError("unknown scoring function");
}

LogitsFile parse_logits(std::string_view bytes) {
  const auto lines = split_lines(bytes);
  if (lines.empty()) throw ParseError("logits file is empty");

  LogitsFile file;
  {
    const json header = parse_json_line(lines.front().text, lines.front().number);
    if (!header.is_object() || header.value("schema", "") != "tieeval.logits") {
      throw ParseError("missing tieeval.logits header", lines.front().number);
    }
    if (header.value("version", 0) != 1) {
      throw ParseError("unsupported logits version", lines.front().number);
    }
    try {
      file.phi = parse_scoring_function(header.at("phi").get<std::string>());
      file.source_format = parse_format(header.at("format").get<std::string>());
    } catch (const std::exception& e) {
      throw ParseError(std::string("bad logits header: ") + e.what(), lines.front().number);
    }
  }

  const PrecisionFormat& fmt = file.source_format;
  std::set<std::string> seen;
  std::size_t dimension = 0;
  auto check_dimension = [&](std::size_t d, std::size_t line) {
    if (d == 0) throw ParseError("embedding must be non-empty", line);
    if (dimension == 0) dimension = d;
    if (d != dimension) {
      throw ParseError("embedding length " + std::to_string(d) + " differs from " +
                           std::to_string(dimension),
                       line);
    }
  };

  for (std::size_t i = 1; i < lines.size(); ++i) {
    const Line& line = lines[i];
    const json rec = parse_json_line(line.text, line.number);
    if (!rec.is_object() || !rec.contains("query_id") || !rec["query_id"].is_string()) {
      throw ParseError("record needs a string query_id", line.number);
    }
    const std::string qid = rec["query_id"].get<std::string>();

    if (rec.contains("query_embedding")) {
      if (file.phi != ScoringFunction::kDot) {
        throw ParseError("query_embedding given for a non-dot scoring function", line.number);
      }
      auto v = number_array(rec["query_embedding"], "query_embedding", line.number);
      check_dimension(v.size(), line.number);
      for (double& x : v) x = quantize(x, fmt);
      if (!file.query_embeddings.emplace(qid, std::move(v)).second) {
        throw ParseError("duplicate query_embedding for " + qid, line.number);
      }
      continue;
    }

    if (!rec.contains("doc_id") || !rec["doc_id"].is_string()) {
      throw ParseError("record needs a string doc_id", line.number);
    }
    LogitRecord r{qid, rec["doc_id"].get<std::string>(), {}};
    if (file.phi == ScoringFunction::kDot) {
      if (!rec.contains("embedding")) throw ParseError("missing embedding", line.number);
      r.values = number_array(rec["embedding"], "embedding", line.number);
      check_dimension(r.values.size(), line.number);
    } else {
      if (!rec.contains("logits")) throw ParseError("missing logits", line.number);
      r.values = number_array(rec["logits"], "logits", line.number);
      const std::size_t want = file.phi == ScoringFunction::kSoftmax ? 2 : 1;
      if (r.values.size() != want) {
        throw ParseError(std::string(to_string(file.phi)) + " expects " + std::to_string(want) +
                             " logit(s), got " + std::to_string(r.values.size()),
                         line.number);
      }
    }
    for (double& x : r.values) {
      if (std::isnan(x)) throw ParseError("NaN logit", line.number);
      x = quantize(x, fmt);
    }
    if (!seen.insert(pair_key(r.query_id, r.doc_id)).second) {
      throw ParseError("duplicate (query, doc) pair " + r.query_id + " " + r.doc_id, line.number);
    }
    file.records.push_back(std::move(r));
  }

  if (file.phi == ScoringFunction::kDot) {
    for (const LogitRecord& r : file.records) {
      if (!file.query_embeddings.count(r.query_id)) {
        throw ParseError("no query_embedding for query " + r.query_id);
      }
    }
  }
  return file;
}

std::string write_logits(const LogitsFile& logits) {
  std::string out = json{{"schema", "tieeval.logits"},
                         {"version", 1},
                         {"phi", std::string(to_string(logits.phi))},
                         {"format", logits.source_format.name}}
                        .dump();
  out += '\n';
  std::set<std::string> emitted;
  for (const LogitRecord& r : logits.records) {
    if (logits.phi == ScoringFunction::kDot && emitted.insert(r.query_id).second) {
      out += json{{"query_id", r.query_id},
                  {"query_embedding", logits.query_embeddings.at(r.query_id)}}
                 .dump();
      out += '\n';
    }
    const char* field = logits.phi == ScoringFunction::kDot ? "embedding" : "logits";
    out += json{{"query_id", r.query_id}, {"doc_id", r.doc_id}, {field, r.values}}.dump();
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Joining

namespace {

struct Judgments {
  std::unordered_map<std::string, bool> relevant;  // by (query, doc) key
  std::unordered_map<std::string, std::size_t> relevant_per_query;
};

Judgments index_qrels(const QrelsFile& qrels) {
  Judgments j;
  for (const QrelsRecord& r : qrels.records) {
    j.relevant[pair_key(r.query_id, r.doc_id)] = r.relevant();
    if (r.relevant()) ++j.relevant_per_query[r.query_id];
  }
  return j;
}

template <typename Record, typename ScoreOf>
std::vector<Query> join(const std::vector<Record>& records, const Judgments& judged,
                        ScoreOf&& score_of) {
  std::vector<Query> queries;
  std::unordered_map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const Record& r = records[i];
    auto [it, fresh] = slot.emplace(r.query_id, queries.size());
    if (fresh) queries.push_back({r.query_id, {}, 0});
    Query& q = queries[it->second];
    const auto found = judged.relevant.find(pair_key(r.query_id, r.doc_id));
    const bool relevant = found != judged.relevant.end() && found->second;
    q.candidates.push_back({r.doc_id, score_of(i), relevant, q.candidates.size()});
  }
  for (Query& q : queries) {
    std::size_t retrieved = 0;
    for (const ScoredCandidate& c : q.candidates) retrieved += c.relevant ? 1 : 0;
    const auto total = judged.relevant_per_query.find(q.id);
    q.missing_relevant = total == judged.relevant_per_query.end() ? 0 : total->second - retrieved;
  }
  return queries;
}

}  // namespace

std::vector<Query> queries_from_run(const RunFile& run, const QrelsFile& qrels) {
  const Judgments judged = index_qrels(qrels);
  return join(run.records, judged, [&](std::size_t i) { return run.records[i].score; });
}

std::vector<Query> queries_from_logits(const LogitsFile& logits, const QrelsFile& qrels,
                                       const ScoringRegime& regime, bool normalize,
                                       unsigned workers) {
  std::vector<LogitInput> inputs;
  inputs.reserve(logits.records.size());
  for (const LogitRecord& r : logits.records) inputs.push_back(logits.input(r));
  const std::vector<double> scores = score_batch(inputs, regime, normalize, workers);
  const Judgments judged = index_qrels(qrels);
  return join(logits.records, judged, [&](std::size_t i) { return scores[i]; });
}

// ---------------------------------------------------------------------------
// Reports

namespace {

json report_to_json(const EvaluationReport& report) {
  json results = json::array();
  for (const AggregateReport& agg : report.results) {
    json per_query = json::array();
    for (const QueryReport& q : agg.per_query) {
      json row = report_fields(q.report);
      row["query_id"] = q.query_id;
      per_query.push_back(std::move(row));
    }
    results.push_back(json{{"metric", std::string(to_string(agg.metric))},
                           {"k", agg.k},
                           {"mean", report_fields(agg.mean)},
                           {"range_mean_of_ranges", agg.mean.range},
                           {"range_of_mean_extrema", agg.range_of_means},
                           {"per_query", std::move(per_query)}});
  }
  const Diagnostics& d = report.diagnostics;
  return json{{"schema", "tieeval.report"},
              {"schema_version", kReportSchemaVersion},
              {"label", report.label},
              {"diagnostics",
               {{"queries_evaluated", d.queries_evaluated},
                {"queries_skipped_no_relevant", d.queries_skipped_no_relevant},
                {"missing_relevant", d.missing_relevant},
                {"oracle_checked", d.oracle_checked},
                {"oracle_skipped", d.oracle_skipped}}},
              {"results", std::move(results)}};
}

EvaluationReport report_from_json(const json& doc) {
  if (doc.at("schema").get<std::string>() != "tieeval.report") {
    throw ParseError("not a tieeval report");
  }
  if (doc.at("schema_version").get<int>() != kReportSchemaVersion) {
    throw ParseError("unsupported report schema version");
  }
  EvaluationReport report;
  report.label = doc.at("label").get<std::string>();
  const json& d = doc.at("diagnostics");
  report.diagnostics.queries_evaluated = d.at("queries_evaluated").get<std::size_t>();
  report.diagnostics.queries_skipped_no_relevant =
      d.at("queries_skipped_no_relevant").get<std::size_t>();
  report.diagnostics.missing_relevant = d.at("missing_relevant").get<std::size_t>();
  report.diagnostics.oracle_checked = d.at("oracle_checked").get<std::size_t>();
  report.diagnostics.oracle_skipped = d.at("oracle_skipped").get<std::size_t>();
  for (const json& r : doc.at("results")) {
    AggregateReport agg;
    agg.metric = parse_metric(r.at("metric").get<std::string>());
    agg.k = r.at("k").get<std::size_t>();
    agg.mean = read_report_fields(r.at("mean"), agg.metric, agg.k);
    agg.range_of_means = r.at("range_of_mean_extrema").get<double>();
    for (const json& q : r.at("per_query")) {
      agg.per_query.push_back(
          {q.at("query_id").get<std::string>(), read_report_fields(q, agg.metric, agg.k)});
    }
    report.results.push_back(std::move(agg));
  }
  return report;
}

template <typename Fn>
auto with_report_errors(std::string_view bytes, Fn&& fn) {
  json doc;
  try {
    doc = json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what());
  }
  try {
    return fn(doc);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what());
  } catch (const ConstraintError& e) {
    throw ParseError(std::string("malformed report: ") + e.what());
  }
}

std::string csv_header() {
  return "metric,k,query_id,oblivious,expected,maximum,minimum,range,bias,range_of_means";
}

}  // namespace

std::string write_report(const EvaluationReport& report, ReportFormat format) {
  if (format == ReportFormat::kJson) return report_to_json(report).dump(2) + "\n";

  if (format == ReportFormat::kCsv) {
    std::string out = csv_header() + "\n";
    auto row = [&](const AggregateReport& agg, const std::string& id, const MetricReport& r,
                   const std::string& tail) {
      out += std::string(to_string(agg.metric)) + ',' + std::to_string(agg.k) + ',' + id + ',' +
             format_double(r.oblivious) + ',' + format_double(r.expected) + ',' +
             format_double(r.maximum) + ',' + format_double(r.minimum) + ',' +
             format_double(r.range) + ',' + format_double(r.bias) + ',' + tail + '\n';
    };
    for (const AggregateReport& agg : report.results) {
      for (const QueryReport& q : agg.per_query) row(agg, q.query_id, q.report, "");
      row(agg, "__mean__", agg.mean, format_double(agg.range_of_means));
    }
    return out;
  }

  // Fixed-width table, values in percent points (Hits stays a count).
  std::string out;
  if (!report.label.empty()) out += "# " + report.label + '\n';
  out += "# queries evaluated: " + std::to_string(report.diagnostics.queries_evaluated) +
         ", skipped (no relevant): " + std::to_string(report.diagnostics.queries_skipped_no_relevant) +
         '\n';
  const std::vector<std::string> header = {"M_obl", "E[M]", "Range", "Bias",
                                           "M_max", "M_min", "Range(mean-ext)"};
  out += pad_right("metric@k", 14);
  for (const std::string& h : header) out += pad_left(h, h.size() > 8 ? h.size() + 2 : 9);
  out += '\n';
  for (const AggregateReport& agg : report.results) {
    const MetricReport& m = agg.mean;
    out += pad_right(std::string(to_string(agg.metric)) + "@" + std::to_string(agg.k), 14);
    const double cells[] = {m.oblivious, m.expected, m.range,          m.bias,
                            m.maximum,   m.minimum,  agg.range_of_means};
    for (std::size_t i = 0; i < header.size(); ++i) {
      out += pad_left(percent_cell(cells[i], agg.metric),
                      header[i].size() > 8 ? header[i].size() + 2 : 9);
    }
    out += '\n';
  }
  return out;
}

EvaluationReport parse_report(std::string_view bytes) {
  return with_report_errors(bytes, [](const json& doc) { return report_from_json(doc); });
}

std::string write_comparison(std::span<const EvaluationReport> reports, ReportFormat format) {
  if (reports.empty()) throw ConstraintError("comparison needs at least one report");
  if (format == ReportFormat::kJson) {
    json all = json::array();
    for (const EvaluationReport& r : reports) all.push_back(report_to_json(r));
    return json{{"schema", "tieeval.comparison"},
                {"schema_version", kReportSchemaVersion},
                {"reports", std::move(all)}}
               .dump(2) +
           "\n";
  }

  if (format == ReportFormat::kCsv) {
    std::string out = "regime,metric,k,oblivious,expected,maximum,minimum,range,bias,range_of_means\n";
    for (const EvaluationReport& r : reports) {
      for (const AggregateReport& agg : r.results) {
        const MetricReport& m = agg.mean;
        out += r.label + ',' + std::string(to_string(agg.metric)) + ',' + std::to_string(agg.k) +
               ',' + format_double(m.oblivious) + ',' + format_double(m.expected) + ',' +
               format_double(m.maximum) + ',' + format_double(m.minimum) + ',' +
               format_double(m.range) + ',' + format_double(m.bias) + ',' +
               format_double(agg.range_of_means) + '\n';
      }
    }
    return out;
  }

  // One row per metric@k, one (M_obl, E[M], Range, Bias) block per regime.
  for (const EvaluationReport& r : reports) {
    if (r.results.size() != reports.front().results.size()) {
      throw ConstraintError("reports cover different metric/cutoff sets");
    }
  }
  constexpr std::size_t kCell = 9;
  std::string out = pad_right("", 14);
  for (const EvaluationReport& r : reports) out += " | " + pad_right(r.label, 4 * kCell);
  out += '\n';
  out += pad_right("metric@k", 14);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    out += " | ";
    for (const char* h : {"M_obl", "E[M]", "Range", "Bias"}) out += pad_left(h, kCell);
  }
  out += '\n';
  for (std::size_t row = 0; row < reports.front().results.size(); ++row) {
    const AggregateReport& first = reports.front().results[row];
    out += pad_right(std::string(to_string(first.metric)) + "@" + std::to_string(first.k), 14);
    for (const EvaluationReport& r : reports) {
      const AggregateReport& agg = r.results[row];
      if (agg.metric != first.metric || agg.k != first.k) {
        throw ConstraintError("reports cover different metric/cutoff sets");
      }
      out += " | ";
      for (double v : {agg.mean.oblivious, agg.mean.expected, agg.mean.range, agg.mean.bias}) {
        out += pad_left(percent_cell(v, agg.metric), kCell);
      }
    }
    out += '\n';
  }
  return out;
}

std::vector<EvaluationReport> parse_comparison(std::string_view bytes) {
  return with_report_errors(bytes, [](const json& doc) {
    if (doc.at("schema").get<std::string>() != "tieeval.comparison") {
      throw ParseError("not a tieeval comparison");
    }
    std::vector<EvaluationReport> out;
    for (const json& r : doc.at("reports")) out.push_back(report_from_json(r));
    return out;
  });
}

}  // namespace tieeval
