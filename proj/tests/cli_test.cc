#include "parsegen/cli.h"

#include <gtest/gtest.h>

#include <filesystem>

#include "test_util.h"

namespace parsegen {
namespace {

namespace fs = std::filesystem;

RunConfig Config(const std::string& name) {
  fs::path root = fs::temp_directory_path() / ("parsegen_cli_" + name);
  fs::remove_all(root);
  RunConfig c;
  c.corpus_dir = (root / "corpus").string();
  c.out_dir = (root / "out").string();
  return c;
}

Json ReadJson(const fs::path& p) { return Json::parse(ReadTextFile(p)); }

TEST(GenCorpus, CountsAndManifest) {
  RunConfig c = Config("gen");
  c.formats = {"bmp24", "bmp32"};
  c.count = 20;
  c.seed = 7;
  ASSERT_EQ(CmdGenCorpus(c), kExitOk);
  Manifest m = ManifestFromJson(ReadJson(fs::path(c.corpus_dir) / "manifest.json"));
  EXPECT_EQ(m.files.size(), 40u);
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(c.corpus_dir)) files += entry.path().extension() == ".bmp";
  EXPECT_EQ(files, 40u);
  for (const ManifestEntry& e : m.files) EXPECT_EQ(fs::file_size(fs::path(c.corpus_dir) / e.name), e.size);
}

TEST(GenCorpus, Deterministic) {
  RunConfig a = Config("det_a"), b = Config("det_b");
  a.formats = b.formats = {"wav-s16", "fwc", "bmp16"};
  a.count = b.count = 3;
  ASSERT_EQ(CmdGenCorpus(a), kExitOk);
  ASSERT_EQ(CmdGenCorpus(b), kExitOk);
  EXPECT_EQ(ReadTextFile(fs::path(a.corpus_dir) / "manifest.json"),
            ReadTextFile(fs::path(b.corpus_dir) / "manifest.json"));
  for (const auto& entry : fs::directory_iterator(a.corpus_dir)) {
    EXPECT_EQ(ReadBinaryFile(entry.path()), ReadBinaryFile(fs::path(b.corpus_dir) / entry.path().filename()));
  }
}

TEST(GenCorpus, SingleContainer) {
  RunConfig c = Config("fwc");
  c.formats = {"fwc"};
  c.count = 1;
  ASSERT_EQ(CmdGenCorpus(c), kExitOk);
  Manifest m = ManifestFromJson(ReadJson(fs::path(c.corpus_dir) / "manifest.json"));
  ASSERT_EQ(m.files.size(), 1u);
  std::vector<std::uint8_t> f = ReadBinaryFile(fs::path(c.corpus_dir) / m.files[0].name);
  EXPECT_EQ(std::string(f.begin(), f.begin() + 4), "FWC0");
  EXPECT_EQ(f.size(), 32u + m.files[0].spec.chunk0 + m.files[0].spec.chunk1);
}

TEST(GenCorpus, UsageErrors) {
  RunConfig c = Config("usage");
  EXPECT_EQ(CmdGenCorpus(c), kExitUsage);
}

TEST(Infer, SingleTypeOneLeafWithArtifacts) {
  RunConfig c = Config("infer1");
  c.formats = {"bmp24"};
  c.count = 6;
  ASSERT_EQ(CmdGenCorpus(c), kExitOk);
  ASSERT_EQ(CmdInfer(c), kExitOk);
  fs::path out(c.out_dir);
  Json report = ReadJson(out / "report.json");
  EXPECT_EQ(report.at("leaves"), 1);
  EXPECT_EQ(report.at("parseable"), 6);
  EXPECT_TRUE(fs::exists(out / "tree.dot"));
  EXPECT_TRUE(fs::exists(out / "leaves" / "leaf0.ir"));
  EXPECT_TRUE(fs::exists(out / "rounds.txt"));
  EXPECT_FALSE(fs::is_empty(out / "logs"));
  RunConfig back = ConfigFromJson(ReadJson(out / "config.json"));
  EXPECT_EQ(back.corpus_dir, c.corpus_dir);
  EXPECT_EQ(back.strategy, c.strategy);
}

TEST(Infer, StrategiesReportTracedBytes) {
  RunConfig c = Config("strategy");
  c.formats = {"bmp24", "wav-m16", "fwc"};
  c.count = 12;
  c.sizes = SizeRange{2, 100, 16, 20000, 1, 20000};
  ASSERT_EQ(CmdGenCorpus(c), kExitOk);
  RunConfig large = c;
  large.out_dir += "_large";
  large.strategy = Strategy::kLargest;
  ASSERT_EQ(CmdInfer(c), kExitOk);
  ASSERT_EQ(CmdInfer(large), kExitOk);
  EXPECT_LT(ReadJson(fs::path(c.out_dir) / "report.json").at("traced_bytes").get<std::uint64_t>(),
            ReadJson(fs::path(large.out_dir) / "report.json").at("traced_bytes").get<std::uint64_t>());
}

TEST(Infer, NonConvergenceExitCode) {
  RunConfig c = Config("noconv");
  c.formats = {"wav-m8", "wav-s8"};
  c.count = 4;
  ASSERT_EQ(CmdGenCorpus(c), kExitOk);
  c.header_start = 4;
  c.header_cap = 4;  // only the RIFF tag, identical across files
  EXPECT_EQ(CmdInfer(c), kExitNoConvergence);
  EXPECT_FALSE(ReadJson(fs::path(c.out_dir) / "report.json").at("diagnostic").get<std::string>().empty());
}

TEST(Infer, MissingManifest) {
  RunConfig c = Config("nomanifest");
  EXPECT_THROW(CmdInfer(c), FormatError);
}

TEST(EmitViz, RoundTrip) {
  RunConfig c = Config("emit");
  c.formats = {"bmp24", "wav-s8"};
  c.count = 3;
  ASSERT_EQ(CmdGenCorpus(c), kExitOk);
  ASSERT_EQ(CmdInfer(c), kExitOk);
  c.verify = true;
  ASSERT_EQ(CmdEmit(c), kExitOk);
  EXPECT_TRUE(fs::exists(fs::path(c.out_dir) / "parser.c"));
  std::string first = ReadTextFile(fs::path(c.out_dir) / "tree.dot");
  ASSERT_EQ(CmdViz(c), kExitOk);
  std::string again = ReadTextFile(fs::path(c.out_dir) / "tree.dot");
  ASSERT_EQ(CmdViz(c), kExitOk);
  EXPECT_EQ(again, ReadTextFile(fs::path(c.out_dir) / "tree.dot"));
  EXPECT_EQ(first, again);
}

TEST(EmitViz, MissingTree) {
  RunConfig c = Config("notree");
  EXPECT_NE(CmdEmit(c), kExitOk);
  EXPECT_NE(CmdViz(c), kExitOk);
}

TEST(EmitViz, PartialTree) {
  RunConfig c = Config("partial");
  CorpusEntry e = testing::EntryFor(testing::Bmp("bmp24", 3, 3), 1);
  IrProgram p = SummarizeBest(AbstractTrace(TracedParse(e.bytes, e.name).log));
  ParserTree t = ParserTree::Node({28, 24}, ParserTree::Leaf(std::make_shared<const IrProgram>(p)),
                                  ParserTree::Leaf(nullptr));
  WriteTextFile(fs::path(c.out_dir) / "tree.json", ToJson(t).dump());
  EXPECT_NE(CmdEmit(c), kExitOk);
  c.partial = true;
  ASSERT_EQ(CmdEmit(c), kExitOk);
  EXPECT_NE(ReadTextFile(fs::path(c.out_dir) / "parser.c").find("pg_reject();"), std::string::npos);
}

TEST(Eval, DeterministicSingleRepeat) {
  RunConfig c = Config("eval");
  c.formats = {"bmp24", "wav-m8", "fwc"};
  c.count = 5;
  c.repeats = 1;
  ASSERT_EQ(CmdGenCorpus(c), kExitOk);
  ASSERT_EQ(CmdEval(c), kExitOk);
  std::string first = ReadTextFile(fs::path(c.out_dir) / "eval.json");
  ASSERT_EQ(CmdEval(c), kExitOk);
  EXPECT_EQ(first, ReadTextFile(fs::path(c.out_dir) / "eval.json"));
  Json j = Json::parse(first);
  EXPECT_EQ(j.at("repeats").size(), 1u);
  EXPECT_EQ(j.at("repeats")[0].at("train"), 12);
}

TEST(Eval, AllTypesTrainedMeansFullAccuracy) {
  std::vector<CorpusEntry> corpus = testing::MakeCorpus({"bmp24", "wav-s16", "fwc"}, 6, 2);
  std::vector<std::string> types;
  for (const CorpusEntry& e : corpus) types.push_back(e.name.substr(5, e.name.find('_', 5) - 5));
  RunConfig c;
  c.repeats = 3;
  for (const EvalRepeat& r : EvaluateSplits(corpus, types, c)) {
    EXPECT_TRUE(r.converged);
    if (r.missing_types.empty()) {
      EXPECT_EQ(r.test_accuracy, 1.0);
    }
    EXPECT_EQ(r.train.size() + r.test.size(), corpus.size());
  }
}

TEST(Config, JsonRoundTrip) {
  RunConfig c;
  c.seed = 99;
  c.strategy = Strategy::kRandom;
  c.voting = VotingMode::kOptimized;
  c.sizes.max_dim = 7;
  c.formats = {"fwc"};
  RunConfig back = ConfigFromJson(ToJson(c));
  EXPECT_EQ(ToJson(back), ToJson(c));
  EXPECT_THROW(ConfigFromJson(Json::parse(R"({"strategy":"median"})")), std::invalid_argument);
}

}  // namespace
}  // namespace parsegen
