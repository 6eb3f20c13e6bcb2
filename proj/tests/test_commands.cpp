#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "tieeval/commands.hpp"
#include "tieeval/errors.hpp"
#include "tieeval/io.hpp"

namespace tieeval {
namespace {

namespace fs = std::filesystem;

const std::string kData = TIEEVAL_TEST_DATA;

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("tieeval-test-" + std::to_string(::getpid()) + "-" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name() + "-" +
             std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

CliConfig run_config(const std::string& stem) {
  CliConfig c;
  c.command = "evaluate";
  c.run_path = kData + "/" + stem + ".run";
  c.qrels_path = kData + "/" + stem + ".qrels";
  return c;
}

// Writes a small synthetic corpus and returns a config pointing at it.
CliConfig synth_corpus(const TempDir& dir, std::uint64_t seed = 3) {
  CliConfig c;
  c.command = "synth";
  c.synth.queries = 12;
  c.synth.candidates = 40;
  c.synth.relevant_rate = 0.1;
  c.seed = seed;
  c.out_path = dir.file("logits.jsonl");
  c.qrels_out_path = dir.file("qrels.txt");
  cmd_synth(c);
  CliConfig e;
  e.logits_path = c.out_path;
  e.qrels_path = c.qrels_out_path;
  e.metrics = {MetricKind::kNDCG, MetricKind::kRR, MetricKind::kRecall};
  e.cutoffs = {1, 5, 10};
  return e;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TIEEVAL_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Evaluate, MatchesGoldenReport) {
  CliConfig c = run_config("three_queries");
  c.cutoffs = {1, 3, 5};
  c.oracle = true;
  std::ostringstream log;
  const std::string out = cmd_evaluate(c, log);
  EXPECT_EQ(out, read_file(kData + "/three_queries.golden.json"));

  // Recall@3 per query, by hand: q2 has a relevant document outside the run.
  const EvaluationReport r = parse_report(out);
  const AggregateReport* recall3 = nullptr;
  for (const auto& a : r.results) {
    if (a.metric == MetricKind::kRecall && a.k == 3) recall3 = &a;
  }
  ASSERT_NE(recall3, nullptr);
  ASSERT_EQ(recall3->per_query.size(), 3u);
  EXPECT_EQ(recall3->per_query[0].report.expected, 0.5);
  EXPECT_EQ(recall3->per_query[1].report.expected, 5.0 / 12.0);
  EXPECT_EQ(recall3->per_query[2].report.expected, 0.5);
  EXPECT_EQ(r.diagnostics.missing_relevant, 1u);
  EXPECT_EQ(r.diagnostics.oracle_checked, 3u);
}

TEST(Evaluate, StraddlingTieFixture) {
  CliConfig c = run_config("straddle");
  c.metrics = {MetricKind::kRecall};
  c.cutoffs = {3};
  std::ostringstream log;
  const EvaluationReport r = parse_report(cmd_evaluate(c, log));
  const MetricReport& m = r.results.at(0).mean;
  EXPECT_EQ(m.expected, 7.0 / 9.0);
  EXPECT_EQ(m.range, 1.0 / 3.0);
}

TEST(Evaluate, DistinctScoresHaveNoRangeOrBias) {
  TempDir dir;
  std::string run, qrels;
  for (int i = 0; i < 30; ++i) {
    run += "q Q0 d" + std::to_string(i) + " " + std::to_string(i + 1) + " " +
           std::to_string(1.0 - 0.03 * i) + " sys\n";
    if (i % 4 == 1) qrels += "q 0 d" + std::to_string(i) + " 1\n";
  }
  write_file(dir.file("r.run"), run);
  write_file(dir.file("r.qrels"), qrels);
  CliConfig c;
  c.run_path = dir.file("r.run");
  c.qrels_path = dir.file("r.qrels");
  c.cutoffs = {1, 2, 5, 10, 50};
  std::ostringstream log;
  for (const auto& a : parse_report(cmd_evaluate(c, log)).results) {
    EXPECT_EQ(a.mean.range, 0.0);
    EXPECT_EQ(a.mean.bias, 0.0);
    EXPECT_EQ(a.mean.oblivious, a.mean.expected);
  }
}

TEST(Evaluate, SkipsQueriesWithoutRelevant) {
  TempDir dir;
  write_file(dir.file("r.run"), "q1 Q0 a 1 0.5 s\nq2 Q0 a 1 0.5 s\n");
  write_file(dir.file("r.qrels"), "q1 0 a 1\nq2 0 a 0\n");
  CliConfig c;
  c.run_path = dir.file("r.run");
  c.qrels_path = dir.file("r.qrels");
  std::ostringstream log;
  const EvaluationReport r = parse_report(cmd_evaluate(c, log));
  EXPECT_EQ(r.diagnostics.queries_skipped_no_relevant, 1u);
  EXPECT_NE(log.str().find("warning"), std::string::npos);
}

TEST(Synth, Deterministic) {
  TempDir a, b;
  synth_corpus(a, 9);
  synth_corpus(b, 9);
  EXPECT_EQ(read_file(a.file("logits.jsonl")), read_file(b.file("logits.jsonl")));
  EXPECT_EQ(read_file(a.file("qrels.txt")), read_file(b.file("qrels.txt")));
  TempDir other;
  synth_corpus(other, 10);
  EXPECT_NE(read_file(a.file("logits.jsonl")), read_file(other.file("logits.jsonl")));
}

TEST(Synth, Presets) {
  const SynthOptions miracl = synth_preset("miracl");
  const auto [logits, qrels] = synthesize(miracl);
  EXPECT_EQ(logits.records.size(), 717u * 100u);
  EXPECT_EQ(logits.records.front().query_id, logits.records[99].query_id);
  EXPECT_NE(logits.records[99].query_id, logits.records[100].query_id);
  const SynthOptions ubuntu = synth_preset("askubuntu");
  EXPECT_EQ(ubuntu.queries, 375u);
  EXPECT_EQ(ubuntu.candidates, 20u);
  EXPECT_THROW(synth_preset("nope"), ConstraintError);
}

TEST(Synth, ZeroRateLeavesNothingToEvaluate) {
  TempDir dir;
  CliConfig c;
  c.synth.queries = 4;
  c.synth.candidates = 5;
  c.synth.relevant_rate = 0.0;
  c.out_path = dir.file("l.jsonl");
  c.qrels_out_path = dir.file("q.txt");
  cmd_synth(c);
  CliConfig e;
  e.logits_path = c.out_path;
  e.qrels_path = c.qrels_out_path;
  std::ostringstream log;
  try {
    cmd_evaluate(e, log);
    FAIL();
  } catch (const ConstraintError& err) {
    EXPECT_NE(std::string(err.what()).find("4 skipped"), std::string::npos);
  }
}

TEST(Compare, SingleRegimeEqualsEvaluate) {
  TempDir dir;
  CliConfig c = synth_corpus(dir);
  for (const char* name : {"fp32", "bf16", "bf16->fp32"}) {
    c.regimes = {name};
    std::ostringstream log;
    const auto reports = parse_comparison(cmd_compare(c, log));
    ASSERT_EQ(reports.size(), 1u);
    CliConfig e = c;
    e.logit_format = parse_format(std::string_view(name).substr(0, 4));
    if (std::string_view(name).find("->") != std::string_view::npos) e.hps = true;
    const EvaluationReport single = parse_report(cmd_evaluate(e, log));
    EXPECT_EQ(reports[0].results, single.results) << name;
    EXPECT_EQ(reports[0].diagnostics, single.diagnostics) << name;
  }
  c.regimes = {};
  std::ostringstream log;
  EXPECT_THROW(cmd_compare(c, log), ConstraintError);
}

TEST(Compare, FP32HasNoRangeAndBF16HasMore) {
  TempDir dir;
  CliConfig c = synth_corpus(dir);
  std::ostringstream log;
  const auto reports = parse_comparison(cmd_compare(c, log));
  ASSERT_EQ(reports.size(), 3u);
  for (std::size_t i = 0; i < reports[0].results.size(); ++i) {
    EXPECT_EQ(reports[0].results[i].mean.range, 0.0);
    EXPECT_GE(reports[1].results[i].mean.range, reports[2].results[i].mean.range);
  }
}

TEST(Curve, RowsAndProperties) {
  TempDir dir;
  CliConfig c = synth_corpus(dir);
  c.cutoffs = parse_cutoffs("1..10");
  c.metrics = {MetricKind::kRecall, MetricKind::kNDCG};
  std::ostringstream log;
  std::istringstream csv(cmd_curve(c, log));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "metric,k,regime,oblivious,expected,minimum,maximum");
  std::map<std::string, std::vector<double>> expected_by_series;
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    std::vector<std::string> f;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    ASSERT_EQ(f.size(), 7u) << line;
    const double e = *parse_double(f[4]);
    const double lo = *parse_double(f[5]);
    const double hi = *parse_double(f[6]);
    EXPECT_LE(lo, e);
    EXPECT_LE(e, hi);
    expected_by_series[f[0] + "/" + f[2]].push_back(e);
    ++rows;
  }
  EXPECT_EQ(rows, 2u * 3u * 10u);
  for (const auto& [series, values] : expected_by_series) {
    EXPECT_EQ(values.size(), 10u) << series;
    if (series.rfind("recall", 0) == 0) {
      for (std::size_t i = 1; i < values.size(); ++i) EXPECT_GE(values[i], values[i - 1]);
    }
  }
}

TEST(Grid, Listings) {
  CliConfig c;
  c.grid_format = bf16();
  c.grid_lo = 0.99;
  c.grid_hi = 1.0;
  const std::string out = cmd_grid(c);
  EXPECT_NE(out.find("\n0.9921875,"), std::string::npos);
  EXPECT_NE(out.find("\n0.99609375,"), std::string::npos);
  EXPECT_NE(out.find("\n1,"), std::string::npos);
  EXPECT_NE(out.find(": 3 representable values"), std::string::npos);

  c.grid_format = fp32();
  c.grid_limit = 5;
  const std::string wide = cmd_grid(c);
  EXPECT_NE(wide.find(": 167773 representable values"), std::string::npos);

  c.grid_format = bf16();
  c.grid_lo = c.grid_hi = 0.5;
  EXPECT_NE(cmd_grid(c).find(": 1 representable values"), std::string::npos);
}

TEST(Config, Validation) {
  CliConfig c;
  c.hps = true;
  c.logit_format = fp32();
  EXPECT_THROW(c.regime(fp32()), ConstraintError);
  c.logit_format = bf16();
  EXPECT_EQ(c.regime(fp32()).label(), "bf16->fp32");
  EXPECT_EQ(parse_cutoffs("1,3,10"), (std::vector<std::size_t>{1, 3, 10}));
  EXPECT_EQ(parse_cutoffs("2..4"), (std::vector<std::size_t>{2, 3, 4}));
  EXPECT_THROW(parse_cutoffs("3,1"), ConstraintError);
  EXPECT_THROW(parse_cutoffs("0"), ConstraintError);
  EXPECT_THROW(parse_metrics("ndcg,bogus"), ConstraintError);
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  const std::string straddle = "--run " + kData + "/straddle.run --qrels " + kData + "/straddle.qrels";
  EXPECT_EQ(run_cli("evaluate " + straddle + " --k 3 --oracle"), 0);
  EXPECT_EQ(run_cli("evaluate " + straddle + " --k 0"), 2);
  EXPECT_EQ(run_cli("evaluate " + straddle + " --metrics nope"), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("evaluate --run /nonexistent --qrels " + kData + "/straddle.qrels"), 3);
  write_file(dir.file("bad.run"), "q1 Q0 a 1\n");
  EXPECT_EQ(run_cli("evaluate --run " + dir.file("bad.run") + " --qrels " + kData +
                    "/straddle.qrels"),
            3);
  write_file(dir.file("none.qrels"), "strad 0 a 0\n");
  EXPECT_EQ(run_cli("evaluate --run " + kData + "/straddle.run --qrels " + dir.file("none.qrels")),
            4);
  EXPECT_EQ(run_cli("evaluate " + straddle + " --oracle --oracle-budget 1"), 0);
  EXPECT_EQ(run_cli("grid bf16 0.9 1"), 0);
}

}  // namespace
}  // namespace tieeval
