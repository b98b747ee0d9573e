// Batch commands behind the parsegen tool. Each returns a process exit code.

#ifndef PARSEGEN_CLI_H_
#define PARSEGEN_CLI_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "parsegen/formats.h"
#include "parsegen/serialize.h"
#include "parsegen/tree.h"

namespace parsegen {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNoConvergence = 3;
inline constexpr int kExitMismatch = 4;

struct RunConfig {
  std::string corpus_dir = "corpus";
  std::string out_dir = "out";
  std::uint64_t seed = 1;

  // gen-corpus
  std::vector<std::string> formats;  // type tokens; "all" expands
  std::size_t count = 10;           // files per type
  SizeRange sizes;

  // infer / eval
  std::size_t batch = 10;
  Strategy strategy = Strategy::kSmallest;
  std::uint32_t header_start = 32;
  std::uint32_t header_cap = 1024;
  unsigned max_stride = 8;  // strides 1..max_stride are tried
  VotingMode voting = VotingMode::kCartesian;
  std::size_t tuple_cap = 1000000;

  // eval
  double split = 0.8;
  std::size_t repeats = 20;

  // emit / viz
  std::string tree_path;  // default: <out_dir>/tree.json
  bool partial = false;
  bool verify = false;
};

Json ToJson(const RunConfig& c);
RunConfig ConfigFromJson(const Json& j);

std::string_view VotingModeName(VotingMode m);
VotingMode ParseVotingMode(std::string_view name);

// Every type token the generator knows.
const std::vector<std::string>& AllTypeTokens();

// Loads <corpus_dir>/manifest.json and the files it lists; the expected
// output of each file comes from the reference parser.
std::vector<CorpusEntry> LoadCorpus(const std::filesystem::path& corpus_dir, Manifest* manifest = nullptr);

int CmdGenCorpus(const RunConfig& config);
int CmdInfer(const RunConfig& config);
int CmdEval(const RunConfig& config);
int CmdEmit(const RunConfig& config);
int CmdViz(const RunConfig& config);

// One repeat of the split evaluation.
struct EvalRepeat {
  std::size_t repeat = 0;
  std::vector<std::size_t> train, test;  // corpus indices
  bool converged = false;
  double train_accuracy = 0;
  double test_accuracy = 0;
  std::vector<std::size_t> failures;       // test indices that did not parse
  std::vector<std::string> missing_types;  // test types absent from training
};

std::vector<EvalRepeat> EvaluateSplits(std::span<const CorpusEntry> corpus,
                                       const std::vector<std::string>& types,
                                       const RunConfig& config);

ExpandOptions ExpandOptionsFor(const RunConfig& config);

}  // namespace parsegen

#endif  // PARSEGEN_CLI_H_
