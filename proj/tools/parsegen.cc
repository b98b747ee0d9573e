// parsegen: generate corpora, infer parser trees from traces, evaluate,
// emit C and render trees.

#include <iostream>

#include <CLI11.hpp>

#include "parsegen/cli.h"

using namespace parsegen;

namespace {

void AddCommon(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--corpus", c.corpus_dir, "corpus directory (holds manifest.json)");
  cmd->add_option("--out", c.out_dir, "output directory");
  cmd->add_option("--seed", c.seed, "seed");
}

void AddInference(CLI::App* cmd, RunConfig& c, std::string& strategy, std::string& voting) {
  cmd->add_option("--batch", c.batch, "logs acquired per round")->check(CLI::PositiveNumber);
  cmd->add_option("--strategy", strategy, "smallest, largest or random")
      ->check(CLI::IsMember({"smallest", "largest", "random"}));
  cmd->add_option("--header-start", c.header_start, "initial header size")->check(CLI::PositiveNumber);
  cmd->add_option("--header-cap", c.header_cap, "largest header size tried")->check(CLI::PositiveNumber);
  cmd->add_option("--max-stride", c.max_stride, "strides 1..N are tried")->check(CLI::Range(1, 64));
  cmd->add_option("--voting", voting, "cartesian, simplest, conceptual or optimized")
      ->check(CLI::IsMember({"cartesian", "simplest", "conceptual", "optimized"}));
  cmd->add_option("--tuple-cap", c.tuple_cap, "Cartesian tuples per file before the greedy fallback");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Infers loop-structured parsers from byte-level traces"};
  app.require_subcommand(1);
  RunConfig c;
  std::string strategy = "smallest", voting = "cartesian";

  CLI::App* gen = app.add_subcommand("gen-corpus", "write a generated corpus and its manifest");
  gen->add_option("--formats", c.formats, "type tokens, comma separated, or all")
      ->delimiter(',')
      ->required();
  gen->add_option("--count", c.count, "files per type");
  gen->add_option("--out", c.corpus_dir, "corpus directory");
  gen->add_option("--seed", c.seed, "seed");
  gen->add_option("--min-dim", c.sizes.min_dim, "smallest bitmap side");
  gen->add_option("--max-dim", c.sizes.max_dim, "largest bitmap side");
  gen->add_option("--min-samples", c.sizes.min_samples, "fewest samples per WAV channel");
  gen->add_option("--max-samples", c.sizes.max_samples, "most samples per WAV channel");
  gen->add_option("--min-chunk", c.sizes.min_chunk, "smallest FWC chunk");
  gen->add_option("--max-chunk", c.sizes.max_chunk, "largest FWC chunk");

  CLI::App* infer = app.add_subcommand("infer", "acquire logs until the corpus parses");
  AddCommon(infer, c);
  AddInference(infer, c, strategy, voting);

  CLI::App* eval = app.add_subcommand("eval", "repeated train/test split evaluation");
  AddCommon(eval, c);
  AddInference(eval, c, strategy, voting);
  eval->add_option("--split", c.split, "training fraction")->check(CLI::Range(0.0, 1.0));
  eval->add_option("--repeats", c.repeats, "number of splits")->check(CLI::PositiveNumber);

  CLI::App* emit = app.add_subcommand("emit", "write a C translation unit for a tree");
  AddCommon(emit, c);
  emit->add_option("--tree", c.tree_path, "tree JSON (default <out>/tree.json)");
  emit->add_flag("--partial", c.partial, "turn leaves without a parser into reject branches");
  emit->add_flag("--verify", c.verify, "compile and compare against the interpreter on the corpus");

  CLI::App* viz = app.add_subcommand("viz", "write a DOT rendering of a tree");
  AddCommon(viz, c);
  viz->add_option("--tree", c.tree_path, "tree JSON (default <out>/tree.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  c.strategy = ParseStrategy(strategy);
  c.voting = ParseVotingMode(voting);

  try {
    if (*gen) return CmdGenCorpus(c);
    if (*infer) return CmdInfer(c);
    if (*eval) return CmdEval(c);
    if (*emit) return CmdEmit(c);
    if (*viz) return CmdViz(c);
  } catch (const FormatError& e) {
    std::cerr << "parsegen: " << e.what() << "\n";
    return kExitUsage;
  } catch (const GenerationError& e) {
    std::cerr << "parsegen: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "parsegen: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
