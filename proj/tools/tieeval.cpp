// tieeval: tie-aware ranking evaluation under reduced-precision scoring.
//
// Exit status: 0 success, 1 internal error, 2 usage, 3 input parse error,
// 4 constraint violation, 5 oracle mismatch.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tieeval/commands.hpp"
#include "tieeval/errors.hpp"

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kUsage = 2, kParse = 3, kConstraint = 4, kOracle = 5 };

struct RawFlags {
  std::string phi;
  std::string logit_format;
  std::string scoring_format;
  std::string metrics = "all";
  std::string cutoffs = "10";
  std::string format = "json";
  std::string regimes = "fp32,bf16,bf16->fp32";
  std::string grid_format;
  std::string preset;
  std::string synth_phi;
  std::string synth_format;
  bool raw_dot = false;
};

void add_input_flags(CLI::App* cmd, tieeval::CliConfig& c, RawFlags& raw) {
  cmd->add_option("--run", c.run_path, "Scored run (TREC or JSON lines)");
  cmd->add_option("--qrels", c.qrels_path, "Relevance judgments (TREC or JSON lines)");
  cmd->add_option("--logits", c.logits_path, "Logits file (JSON lines)");
  cmd->add_option("--phi", raw.phi, "Scoring function: softmax, sigmoid or dot");
  cmd->add_flag("--raw-dot", raw.raw_dot, "Dot scoring without normalization");
  cmd->add_option("--metrics", raw.metrics, "Comma list: hits,precision,recall,f1,ndcg,rr,ap or all");
  cmd->add_option("--k", raw.cutoffs, "Cutoffs: 10, 1,5,10 or 1..10");
  cmd->add_option("--out", c.out_path, "Output file (default: standard output)");
  cmd->add_option("--format", raw.format, "json, csv or table");
  cmd->add_option("--workers", c.workers, "Worker threads");
}

std::optional<tieeval::PrecisionFormat> optional_format(const std::string& text) {
  if (text.empty()) return std::nullopt;
  return tieeval::parse_format(text);
}

std::vector<std::string> split_regimes(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Flag values that need parsing are converted after CLI11 is done.
void finish_config(tieeval::CliConfig& c, const RawFlags& raw, const CLI::App& grid,
                   const CLI::App& synth) {
  if (!raw.phi.empty()) c.phi = tieeval::parse_scoring_function(raw.phi);
  c.logit_format = optional_format(raw.logit_format);
  c.scoring_format = optional_format(raw.scoring_format);
  c.normalize = !raw.raw_dot;
  c.metrics = tieeval::parse_metrics(raw.metrics);
  c.cutoffs = tieeval::parse_cutoffs(raw.cutoffs);
  c.format = tieeval::parse_report_format(raw.format);
  c.regimes = split_regimes(raw.regimes);
  if (grid.parsed()) c.grid_format = tieeval::parse_format(raw.grid_format);
  if (synth.parsed()) {
    tieeval::SynthOptions defaults = raw.preset.empty() ? tieeval::SynthOptions{}
                                                        : tieeval::synth_preset(raw.preset);
    // Explicit flags override the preset.
    if (synth.count("--queries") == 0) c.synth.queries = defaults.queries;
    if (synth.count("--candidates") == 0) c.synth.candidates = defaults.candidates;
    if (synth.count("--relevant-rate") == 0) c.synth.relevant_rate = defaults.relevant_rate;
    c.synth.phi = raw.synth_phi.empty() ? defaults.phi
                                        : tieeval::parse_scoring_function(raw.synth_phi);
    if (!raw.synth_format.empty()) c.synth.format = tieeval::parse_format(raw.synth_format);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tie-aware ranking evaluation under reduced-precision scoring"};
  app.require_subcommand(1);
  tieeval::CliConfig c;
  RawFlags raw;

  CLI::App* evaluate = app.add_subcommand("evaluate", "Per-query and mean tie-aware reports");
  add_input_flags(evaluate, c, raw);
  evaluate->add_option("--logit-format", raw.logit_format, "Logit precision (bf16, fp16, fp32)");
  evaluate->add_option("--scoring-format", raw.scoring_format, "Scoring precision");
  evaluate->add_flag("--hps", c.hps, "Score in fp32 on low-precision logits");
  evaluate->add_flag("--oracle", c.oracle, "Cross-check small queries by enumeration");
  evaluate->add_option("--oracle-budget", c.oracle_budget, "Max configurations per query");

  CLI::App* compare = app.add_subcommand("compare", "Compare precision regimes on one logits file");
  add_input_flags(compare, c, raw);
  compare->add_option("--regimes", raw.regimes, "Comma list, e.g. fp32,bf16,bf16->fp32");

  CLI::App* curve = app.add_subcommand("curve", "Metric values per cutoff as CSV");
  add_input_flags(curve, c, raw);
  curve->add_option("--regimes", raw.regimes, "Comma list of regimes (logits input)");

  CLI::App* grid = app.add_subcommand("grid", "List representable values in an interval");
  grid->add_option("format", raw.grid_format, "bf16, fp16, fp32 or e<E>m<M>")->required();
  grid->add_option("lo", c.grid_lo, "Lower bound")->required();
  grid->add_option("hi", c.grid_hi, "Upper bound")->required();
  grid->add_option("--limit", c.grid_limit, "Maximum values listed");
  grid->add_option("--out", c.out_path, "Output file (default: standard output)");

  CLI::App* synth = app.add_subcommand("synth", "Generate a seeded synthetic logits corpus");
  synth->add_option("--preset", raw.preset, "miracl or askubuntu");
  synth->add_option("--queries", c.synth.queries, "Number of queries");
  synth->add_option("--candidates", c.synth.candidates, "Candidates per query");
  synth->add_option("--relevant-rate", c.synth.relevant_rate, "Probability a candidate is relevant");
  synth->add_option("--phi", raw.synth_phi, "softmax, sigmoid or dot");
  synth->add_option("--source-format", raw.synth_format, "Precision of the stored logits");
  synth->add_option("--mean", c.synth.mean, "Mean of non-relevant logits");
  synth->add_option("--stddev", c.synth.stddev, "Standard deviation of logits");
  synth->add_option("--shift", c.synth.shift, "Mean shift of relevant logits");
  synth->add_option("--dimension", c.synth.dimension, "Embedding dimension (dot)");
  synth->add_flag("--positives-first", c.synth.positives_first, "Place relevant candidates first");
  synth->add_option("--seed", c.seed, "Random seed");
  synth->add_option("--out", c.out_path, "Logits output file")->required();
  synth->add_option("--qrels-out", c.qrels_out_path, "Judgments output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    finish_config(c, raw, *grid, *synth);
  } catch (const std::exception& e) {
    std::cerr << "tieeval: " << e.what() << "\n";
    return kUsage;
  }

  try {
    std::string output;
    if (evaluate->parsed()) {
      c.command = "evaluate";
      output = tieeval::cmd_evaluate(c, std::cerr);
    } else if (compare->parsed()) {
      c.command = "compare";
      output = tieeval::cmd_compare(c, std::cerr);
    } else if (curve->parsed()) {
      c.command = "curve";
      output = tieeval::cmd_curve(c, std::cerr);
    } else if (grid->parsed()) {
      c.command = "grid";
      output = tieeval::cmd_grid(c);
    } else {
      c.command = "synth";
      std::cerr << tieeval::cmd_synth(c);
      return kOk;
    }
    if (c.out_path.empty()) {
      std::cout << output;
    } else {
      tieeval::write_file(c.out_path, output);
    }
    return kOk;
  } catch (const tieeval::ParseError& e) {
    std::cerr << "tieeval: parse error: " << e.what() << "\n";
    return kParse;
  } catch (const tieeval::OracleMismatch& e) {
    std::cerr << "tieeval: oracle mismatch: " << e.what() << "\n";
    return kOracle;
  } catch (const tieeval::ConstraintError& e) {
    std::cerr << "tieeval: " << e.what() << "\n";
    return kConstraint;
  } catch (const std::exception& e) {
    std::cerr << "tieeval: internal error: " << e.what() << "\n";
    return kInternal;
  }
}
