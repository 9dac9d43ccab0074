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

// Model extraction: query the victim, distill its posteriors into a local
// copy, and measure how good the copy is.

#ifndef ETLAB_EXTRACTION_H_
#define ETLAB_EXTRACTION_H_

#include <string>
#include <utility>
#include <vector>

#include "etlab/corpus.h"
#include "etlab/model.h"
#include "etlab/victim.h"
#include "json.hpp"

namespace etlab {

enum class Scenario { kSameDistribution, kTransfer };

std::string_view ScenarioName(Scenario s);  // "same" / "transfer"
Scenario ParseScenario(std::string_view name);

struct Budget {
  double multiplier = 1.0;
};

// round-half-up(multiplier * victim_train_size).
size_t QueryCount(Budget budget, size_t victim_train_size);

struct QueryPool {
  Scenario source = Scenario::kSameDistribution;
  std::string corpus_name;
  Budget budget;
  std::vector<Document> docs;  // labels stripped, ids "q<i>"
  bool with_replacement = false;
};

// same_distribution draws from the victim's training texts, transfer from a
// foreign corpus. Sampling is without replacement while the source is large
// enough; beyond that every source document is used floor(m / n) times and
// the remainder is sampled without replacement, and the pool is flagged.
// A same_distribution pool at exactly 1x is the training set in order.
QueryPool BuildQueryPool(Scenario scenario, size_t victim_train_size,
                         const Dataset& source, Budget budget, uint64_t seed,
                         std::string corpus_name = {});

struct TransferSet {
  std::vector<std::pair<Document, LabelDistribution>> pairs;
};

// Issues the pool sequentially. A TransportError is retried up to
// `max_retries` times before failing with the index of the query.
TransferSet CollectPredictions(VictimClient& client, const QueryPool& pool,
                               int max_retries = 3);

// Attacker-side vocabulary, built from the queried texts only.
Vocab BuildAttackerVocab(const QueryPool& pool, const VocabOptions& opts = {});

// Fresh InitModel(cfg.seed) trained with soft_kl on the transfer set.
Model Distill(const Architecture& arch, const Vocab& vocab,
              const TransferSet& ts, const TrainConfig& cfg);

// Fraction of eval documents where `model` and the victim agree.
double Agreement(const Model& model, const Vocab& vocab, VictimClient& victim,
                 const Dataset& eval);

// Accuracy of the victim's predicted class against gold labels.
double ClientAccuracy(VictimClient& victim, const Dataset& eval);

struct MeaReport {
  std::string scenario;
  std::string corpus_name;
  std::string arch;
  double budget = 0.0;
  double victim_accuracy = 0.0;
  double extracted_accuracy = 0.0;
  double agreement = 0.0;
  uint64_t query_count = 0;
  double cost = 0.0;
  bool with_replacement = false;
  uint64_t seed = 0;
};

nlohmann::json ToJson(const MeaReport& r);

struct MeaOptions {
  Scenario scenario = Scenario::kSameDistribution;
  Budget budget;
  size_t victim_train_size = 0;
  std::string corpus_name;
  Architecture arch;
  TrainConfig train{.epochs = 30};  // loss is forced to soft_kl
  VocabOptions vocab;
  PriceSheet price;
  uint64_t seed = 0;
  int max_retries = 3;
};

struct MeaResult {
  MeaReport report;
  Model model;
  Vocab vocab;
};

// `api` is the (possibly defended) endpoint the attacker pays for. `oracle`
// answers evaluation queries (victim accuracy and agreement) and is not
// billed. Both accuracies use the same held-out `test` set.
MeaResult RunMea(VictimClient& api, VictimClient& oracle, const Dataset& source,
                 const Dataset& test, const MeaOptions& opts);

}  // namespace etlab

#endif  // ETLAB_EXTRACTION_H_
