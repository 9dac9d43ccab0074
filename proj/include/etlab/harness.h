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

// Experiment orchestration: config, multi-seed runs, aggregation and
// table emission.

#ifndef ETLAB_HARNESS_H_
#define ETLAB_HARNESS_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "etlab/advgen.h"
#include "etlab/config.h"
#include "etlab/corpus.h"
#include "etlab/extraction.h"
#include "etlab/model.h"
#include "etlab/typo.h"
#include "etlab/victim.h"
#include "json.hpp"

namespace etlab {

enum class Transport { kInProcess, kHttp };

struct TaskConfig {
  std::string name = "synth";
  // Synthetic task; ignored when `train_path` is set.
  SynthOptions synth;
  int test_per_class = 100;
  size_t transfer_docs = 2000;
  TransferOptions transfer;
  // File task.
  std::string train_path;
  std::string test_path;
  std::string transfer_path;
  int num_classes = 0;
};

struct ExperimentConfig {
  TaskConfig task;
  std::vector<Family> victim_archs{Family::kEmbedBag};
  // Empty means "same family as the victim".
  std::vector<Family> extracted_archs;
  int embed_dim = 16;
  int hidden = 32;
  TrainConfig victim_train;
  TrainConfig extract_train{.epochs = 30};
  VocabOptions vocab;
  std::vector<DefenceConfig> defences{DefenceConfig::None()};
  std::vector<Scenario> scenarios{Scenario::kSameDistribution};
  std::vector<double> budgets{1.0};
  int attack_k = -1;
  std::vector<TypoOp> attack_ops{kAllTypoOps.begin(), kAllTypoOps.end()};
  std::vector<AttackMode> attack_modes{AttackMode::kWhiteboxSaliency,
                                       AttackMode::kRandomBaseline};
  bool gold_from_victim = false;
  PriceSheet price;
  std::vector<uint64_t> seeds{0};
  std::string output_dir = "out";
  Transport transport = Transport::kInProcess;
  std::string typo_tables_dir;  // empty: built-in tables

  void Validate() const;
  nlohmann::json ToJson() const;  // canonical form, used for the hash
  // Sections [task] [victim] [extract] [defence] [mea] [attack] [price]
  // [run]; relative paths resolve against the config file's directory.
  static ExperimentConfig FromConfig(const KeyValueConfig& kv);
  static ExperimentConfig Load(const std::string& path);
};

// Hex FNV-1a of the canonical config JSON.
std::string ConfigHash(const ExperimentConfig& cfg);

// Identifies one extraction cell.
struct CellKey {
  std::string task;
  std::string defence;
  std::string victim_arch;
  std::string extracted_arch;
  std::string scenario;
  double budget = 0.0;

  auto operator<=>(const CellKey&) const = default;
};

struct MeaRecord {
  CellKey key;
  uint64_t seed = 0;
  MeaReport report;
  double defended_victim_accuracy = 0.0;
};

struct AetRecord {
  CellKey key;
  uint64_t seed = 0;
  AetReport report;
};

struct SeedFailure {
  uint64_t seed = 0;
  std::string message;
};

struct Stat {
  size_t n = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 when n < 2
};

Stat Summarize(const std::vector<double>& values);

struct MeaCell {
  CellKey key;
  Stat victim_accuracy;
  Stat defended_victim_accuracy;
  Stat extracted_accuracy;
  Stat agreement;
  Stat query_count;
  Stat cost;
};

struct AetCell {
  CellKey key;
  std::string mode;
  Stat transferability;
};

struct Report {
  std::string config_hash;
  nlohmann::json config;
  std::vector<uint64_t> seeds_ok;
  std::vector<SeedFailure> failures;
  std::vector<MeaRecord> mea_raw;
  std::vector<AetRecord> aet_raw;
  std::vector<MeaCell> mea;
  std::vector<AetCell> aet;

  const MeaCell* FindMea(const CellKey& key) const;
  const AetCell* FindAet(const CellKey& key, std::string_view mode) const;
};

// Recomputes the aggregate cells from the raw records.
void Aggregate(Report& r);

// Deterministic given `cfg`. A failing seed is recorded and skipped; no
// successful seed at all raises Error.
Report RunExperiment(const ExperimentConfig& cfg);

// n_queries * price / 1000. Negative counts are rejected.
double EstimateCost(long long n_queries, const PriceSheet& sheet);

nlohmann::json ReportToJson(const Report& r);
Report ReportFromJson(const nlohmann::json& j);
Report LoadReportJson(const std::string& path);

std::string RenderCsv(const Report& r);
std::string RenderMarkdown(const Report& r);

// One parsed CSV data row: column name -> cell text.
struct CsvTable {
  std::string config_hash;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable ParseCsv(const std::string& text);

enum class ReportFormat { kCsv, kMarkdown, kJson };
ReportFormat ParseReportFormat(std::string_view name);  // csv | md | json
std::string Render(const Report& r, ReportFormat format);

// Writes report.{csv,md,json} under `dir` (created if missing). Refuses to
// replace files that carry a different config hash.
std::vector<std::string> EmitReport(const Report& r,
                                    const std::vector<ReportFormat>& formats,
                                    const std::string& dir);

}  // namespace etlab

#endif  // ETLAB_HARNESS_H_
