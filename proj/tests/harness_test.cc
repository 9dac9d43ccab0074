// Copyright 2026 The etlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "etlab/harness.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace etlab {
namespace {

namespace fs = std::filesystem;

// A few seconds' worth of experiment.
ExperimentConfig Tiny() {
  ExperimentConfig c;
  c.task.synth.num_classes = 2;
  c.task.synth.n_per_class = 60;
  c.task.test_per_class = 20;
  c.task.transfer_docs = 200;
  c.embed_dim = 8;
  c.hidden = 8;
  c.victim_train.epochs = 5;
  c.extract_train.epochs = 5;
  c.vocab.buckets = 512;
  c.seeds = {3};
  return c;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path FreshDir(const std::string& name) {
  const fs::path dir = fs::path(testing::TempDir()) / name;
  fs::remove_all(dir);
  return dir;
}

TEST(SummarizeTest, SampleStandardDeviation) {
  const Stat s = Summarize({1.0, 2.0, 3.0, 4.0});
  EXPECT_EQ(s.n, 4u);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.stddev, std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_EQ(Summarize({7.0}).stddev, 0.0);
  EXPECT_EQ(Summarize({}).n, 0u);
}

TEST(EstimateCostTest, PriceTable) {
  EXPECT_EQ(FormatDollars(EstimateCost(112000, {"google", 1.0})), "$112.0");
  EXPECT_EQ(FormatDollars(EstimateCost(520000, {"ibm", 3.0})), "$1,560.0");
  EXPECT_EQ(FormatDollars(EstimateCost(0, {"ibm", 3.0})), "$0.0");
  EXPECT_THROW(EstimateCost(-1, {"ibm", 3.0}), InvalidArgument);
}

TEST(RunExperimentTest, OneSeedOneBudgetNoDefence) {
  const Report r = RunExperiment(Tiny());
  ASSERT_EQ(r.mea.size(), 1u);
  ASSERT_EQ(r.aet.size(), 2u);
  EXPECT_EQ(r.aet[0].mode, "random");
  EXPECT_EQ(r.aet[1].mode, "whitebox");
  EXPECT_EQ(r.mea[0].extracted_accuracy.n, 1u);
  EXPECT_EQ(r.seeds_ok, std::vector<uint64_t>{3});
  EXPECT_TRUE(r.failures.empty());
  // Reported cost is the billed meter delta.
  const auto& rec = r.mea_raw[0].report;
  EXPECT_EQ(rec.query_count, 120u);
  EXPECT_DOUBLE_EQ(rec.cost, EstimateCost(rec.query_count, Tiny().price));
}

TEST(RunExperimentTest, ByteIdenticalReruns) {
  ExperimentConfig c = Tiny();
  c.scenarios = {Scenario::kSameDistribution, Scenario::kTransfer};
  c.defences = {DefenceConfig::None(), DefenceConfig::Perturb(0.2, 1)};
  const fs::path a = FreshDir("rerun_a"), b = FreshDir("rerun_b");
  const std::vector<ReportFormat> all{ReportFormat::kJson, ReportFormat::kCsv,
                                      ReportFormat::kMarkdown};
  EmitReport(RunExperiment(c), all, a.string());
  EmitReport(RunExperiment(c), all, b.string());
  for (const char* f : {"report.json", "report.csv", "report.md"}) {
    EXPECT_EQ(Slurp(a / f), Slurp(b / f)) << f;
  }
}

TEST(RunExperimentTest, HttpTransportMatchesInProcess) {
  ExperimentConfig c = Tiny();
  c.defences = {DefenceConfig::Perturb(0.2, 5)};
  const std::string in_process = Render(RunExperiment(c), ReportFormat::kJson);
  c.transport = Transport::kHttp;
  const Report http = RunExperiment(c);
  // Only the transport setting (and so the hash) differs.
  Report relabeled = http;
  c.transport = Transport::kInProcess;
  relabeled.config = c.ToJson();
  relabeled.config_hash = ConfigHash(c);
  EXPECT_EQ(Render(relabeled, ReportFormat::kJson), in_process);
}

TEST(RunExperimentTest, AllSeedsFailingIsAnError) {
  ExperimentConfig c = Tiny();
  c.task.train_path = "/nonexistent/train.jsonl";
  c.task.test_path = "/nonexistent/test.jsonl";
  try {
    RunExperiment(c);
    FAIL() << "expected Error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("no seed completed"), std::string::npos);
  }
}

TEST(RunExperimentTest, FileTask) {
  const fs::path dir = FreshDir("file_task");
  fs::create_directories(dir);
  const SynthLexicon lex = MakeLexicon(2, 12, 300, 1);
  SynthOptions o{.num_classes = 2, .n_per_class = 40};
  SaveDataset(GenSynth(lex, o, 1, Split::kTrain, "s"), (dir / "train.jsonl").string(),
              DataFormat::kJsonl);
  o.n_per_class = 10;
  SaveDataset(GenSynth(lex, o, 1, Split::kTest, "e"), (dir / "test.tsv").string(),
              DataFormat::kTsv);
  ExperimentConfig c = Tiny();
  c.task.name = "files";
  c.task.train_path = (dir / "train.jsonl").string();
  c.task.test_path = (dir / "test.tsv").string();
  const Report r = RunExperiment(c);
  ASSERT_EQ(r.mea.size(), 1u);
  EXPECT_EQ(r.mea[0].key.task, "files");
  EXPECT_EQ(r.mea_raw[0].report.query_count, 80u);
  c.scenarios = {Scenario::kTransfer};
  EXPECT_THROW(RunExperiment(c), Error);
}

TEST(ValidateTest, RejectsBadGrids) {
  ExperimentConfig c = Tiny();
  c.seeds.clear();
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c = Tiny();
  c.budgets = {1.0, 0.0};
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c = Tiny();
  c.defences = {DefenceConfig::Soften(-1.0)};
  EXPECT_THROW(c.Validate(), InvalidArgument);
}

class ReportTest : public testing::Test {
 protected:
  static void SetUpTestSuite() {
    ExperimentConfig c = Tiny();
    c.seeds = {1, 2};
    c.defences.clear();
    for (const char* d : {"none", "soften:0", "soften:0.5", "soften:5",
                          "perturb:0.05", "perturb:0.2", "perturb:0.5"}) {
      c.defences.push_back(DefenceConfig::Parse(d, 11));
    }
    c.budgets = {0.5, 1.0};
    report_ = new Report(RunExperiment(c));
  }
  static void TearDownTestSuite() { delete report_; }

  static Report* report_;
};

Report* ReportTest::report_ = nullptr;

TEST_F(ReportTest, DefenceTableHasSevenRowsAndColumnPairs) {
  const std::string md = RenderMarkdown(*report_);
  EXPECT_NE(md.find("MEA ↓"), std::string::npos);
  EXPECT_NE(md.find("AET ↓"), std::string::npos);
  const auto table = md.find("## Defences");
  ASSERT_NE(table, std::string::npos);
  const std::vector<std::string> rows = {
      "| No def. |",       "| soft. (τ=0.0) |",  "| soft. (τ=0.5) |",
      "| soft. (τ=5.0) |", "| pert. (σ=0.05) |", "| pert. (σ=0.20) |",
      "| pert. (σ=0.50) |"};
  size_t at = table;
  for (const auto& row : rows) {
    const size_t next = md.find(row, at);
    ASSERT_NE(next, std::string::npos) << row;
    at = next + 1;
  }
  // Two groups (two budgets) -> two MEA/AET pairs per row.
  EXPECT_NE(md.find("G2 MEA ↓"), std::string::npos);
  EXPECT_NE(md.find("mean ± sample std over 2 seeds"), std::string::npos);
}

TEST_F(ReportTest, CsvRoundTripIsExact) {
  const CsvTable t = ParseCsv(RenderCsv(*report_));
  EXPECT_EQ(t.config_hash, report_->config_hash);
  ASSERT_EQ(t.header.size(), 12u);
  EXPECT_EQ(t.rows.size(), report_->mea.size() * 6 + report_->aet.size());
  size_t row = 0;
  auto check = [&](const Stat& s) {
    const auto& cells = t.rows[row++];
    EXPECT_EQ(std::stoul(cells[9]), s.n);
    EXPECT_EQ(std::stod(cells[10]), s.mean);
    EXPECT_EQ(std::stod(cells[11]), s.stddev);
  };
  for (const auto& c : report_->mea) {
    EXPECT_EQ(std::stod(t.rows[row][6]), c.key.budget);
    check(c.victim_accuracy);
    check(c.defended_victim_accuracy);
    check(c.extracted_accuracy);
    check(c.agreement);
    check(c.query_count);
    check(c.cost);
  }
  for (const auto& c : report_->aet) check(c.transferability);
}

TEST_F(ReportTest, JsonCarriesRawValuesAndAggregatesRecompute) {
  const nlohmann::json j = ReportToJson(*report_);
  EXPECT_EQ(j["raw"]["mea"].size(), 2u * 7u * 2u);
  EXPECT_EQ(j["raw"]["aet"].size(), 2u * 7u * 2u * 2u);
  // Recompute every aggregate from the raw per-seed values.
  const nlohmann::json stored = j["aggregate"]["mea"];
  ASSERT_EQ(stored.size(), report_->mea.size());
  for (const auto& cell : stored) {
    std::vector<double> values;
    for (const auto& rec : j["raw"]["mea"]) {
      if (rec["key"] == cell["key"]) {
        values.push_back(rec["report"]["extracted_accuracy"].get<double>());
      }
    }
    ASSERT_EQ(values.size(), 2u);
    const double mean = (values[0] + values[1]) / 2.0;
    const double sd = std::abs(values[0] - values[1]) / std::sqrt(2.0);
    EXPECT_NEAR(cell["extracted_accuracy"]["mean"].get<double>(), mean, 1e-9);
    EXPECT_NEAR(cell["extracted_accuracy"]["std"].get<double>(), sd, 1e-9);
  }
  const Report back = ReportFromJson(j);
  EXPECT_EQ(ReportToJson(back), j);
}

TEST_F(ReportTest, CostMatchesMeterForEveryCell) {
  for (const auto& rec : report_->mea_raw) {
    EXPECT_EQ(rec.report.query_count, QueryCount(Budget{rec.key.budget}, 120));
    EXPECT_DOUBLE_EQ(rec.report.cost,
                     EstimateCost(static_cast<long long>(rec.report.query_count),
                                  PriceSheet{}));
  }
}

TEST_F(ReportTest, RefusesToOverwriteForeignHash) {
  const fs::path dir = FreshDir("emit");
  EmitReport(*report_, {ReportFormat::kJson, ReportFormat::kCsv}, dir.string());
  // Same hash: rewriting is fine.
  EXPECT_NO_THROW(EmitReport(*report_, {ReportFormat::kJson}, dir.string()));
  Report other = *report_;
  other.config_hash = "0000000000000000";
  const std::string before = Slurp(dir / "report.csv");
  EXPECT_THROW(EmitReport(other, {ReportFormat::kCsv}, dir.string()), Error);
  EXPECT_EQ(Slurp(dir / "report.csv"), before);
}

TEST_F(ReportTest, LoadFromDirectory) {
  const fs::path dir = FreshDir("load");
  EmitReport(*report_, {ReportFormat::kJson}, dir.string());
  EXPECT_EQ(Render(LoadReportJson(dir.string()), ReportFormat::kMarkdown),
            RenderMarkdown(*report_));
}

TEST(ReportFormatTest, Names) {
  EXPECT_EQ(ParseReportFormat("md"), ReportFormat::kMarkdown);
  EXPECT_EQ(ParseReportFormat("csv"), ReportFormat::kCsv);
  EXPECT_EQ(ParseReportFormat("json"), ReportFormat::kJson);
  EXPECT_THROW(ParseReportFormat("xml"), InvalidArgument);
}

TEST(ConfigTest, ParsesSectionsAndResolvesPaths) {
  const fs::path dir = FreshDir("cfg");
  fs::create_directories(dir);
  std::ofstream(dir / "exp.ini") << R"([task]
name = tiny
num_classes = 3
n_per_class = 20
test_per_class = 10
transfer_docs = 90

[victim]
archs = embedbag, mlp
embed_dim = 8
epochs = 4

[extract]
archs = mlp
epochs = 6
optimizer = sgd

[defence]
grid = none, soften:0, perturb:0.5
noise_seed = 9

[mea]
scenarios = same, transfer
budgets = 0.1, 1, 5

[attack]
k = 2
ops = swap,deletion
modes = whitebox

[price]
name = ibm
price_per_1000 = 3.0

[run]
seeds = 0, 1, 2
output_dir = results
transport = http
)";
  const ExperimentConfig c = ExperimentConfig::Load((dir / "exp.ini").string());
  EXPECT_EQ(c.task.name, "tiny");
  EXPECT_EQ(c.task.synth.num_classes, 3);
  EXPECT_EQ(c.task.transfer_docs, 90u);
  EXPECT_EQ(c.victim_archs, (std::vector<Family>{Family::kEmbedBag, Family::kMlp}));
  EXPECT_EQ(c.extracted_archs, std::vector<Family>{Family::kMlp});
  EXPECT_EQ(c.victim_train.epochs, 4);
  EXPECT_EQ(c.extract_train.epochs, 6);
  EXPECT_EQ(c.extract_train.optimizer, Optimizer::kSgdMomentum);
  ASSERT_EQ(c.defences.size(), 3u);
  EXPECT_EQ(c.defences[2], DefenceConfig::Perturb(0.5, 9));
  EXPECT_EQ(c.budgets, (std::vector<double>{0.1, 1.0, 5.0}));
  EXPECT_EQ(c.attack_k, 2);
  EXPECT_EQ(c.attack_ops, (std::vector<TypoOp>{TypoOp::kSwap, TypoOp::kDeletion}));
  EXPECT_EQ(c.attack_modes, std::vector<AttackMode>{AttackMode::kWhiteboxSaliency});
  EXPECT_DOUBLE_EQ(c.price.price_per_1000, 3.0);
  EXPECT_EQ(c.seeds, (std::vector<uint64_t>{0, 1, 2}));
  EXPECT_EQ(fs::path(c.output_dir), dir / "results");
  EXPECT_EQ(c.transport, Transport::kHttp);
}

TEST(ConfigTest, DefaultsAndErrors) {
  const fs::path dir = FreshDir("cfg2");
  fs::create_directories(dir);
  std::ofstream(dir / "empty.ini") << "[task]\nname = x\n";
  const ExperimentConfig c = ExperimentConfig::Load((dir / "empty.ini").string());
  EXPECT_EQ(c.seeds, std::vector<uint64_t>{0});
  EXPECT_EQ(c.budgets, std::vector<double>{1.0});
  EXPECT_EQ(fs::path(c.output_dir), dir / "out");

  std::ofstream(dir / "bad.ini") << "[mea]\nbudgets = 1, 0\n";
  EXPECT_THROW(ExperimentConfig::Load((dir / "bad.ini").string()), InvalidArgument);
  std::ofstream(dir / "bad2.ini") << "[run]\ntransport = pigeon\n";
  EXPECT_THROW(ExperimentConfig::Load((dir / "bad2.ini").string()), InvalidArgument);
}

TEST(ConfigTest, HashTracksContent) {
  ExperimentConfig a = Tiny();
  ExperimentConfig b = Tiny();
  EXPECT_EQ(ConfigHash(a), ConfigHash(b));
  b.seeds = {4};
  EXPECT_NE(ConfigHash(a), ConfigHash(b));
}

}  // namespace
}  // namespace etlab
