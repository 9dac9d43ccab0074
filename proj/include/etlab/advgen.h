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

// Adversarial typo examples crafted on a local (extracted) model and
// replayed against the victim.

#ifndef ETLAB_ADVGEN_H_
#define ETLAB_ADVGEN_H_

#include <map>
#include <span>
#include <string>
#include <vector>

#include "etlab/corpus.h"
#include "etlab/model.h"
#include "etlab/typo.h"
#include "etlab/victim.h"
#include "json.hpp"

namespace etlab {

enum class AttackMode { kWhiteboxSaliency, kRandomBaseline };

std::string_view AttackModeName(AttackMode m);  // "whitebox" / "random"
AttackMode ParseAttackMode(std::string_view name);

struct AdversarialExample {
  Document original;
  int gold = 0;
  std::string corrupted_text;
  // Parallel arrays, one entry per corrupted token.
  std::vector<int> corrupted_positions;
  std::vector<TypoOp> ops_used;
  std::vector<std::string> original_tokens;
  std::vector<std::string> corrupted_tokens;
  bool flipped_on_extracted = false;
};

nlohmann::json ToJson(const AdversarialExample& ex);

// max(1, round(0.15 * n_tokens)).
int DefaultCorruptionBudget(size_t n_tokens);

// Token positions of `doc`, most salient first (ties by lower position).
std::vector<int> SaliencyRank(const Model& model, const Vocab& vocab,
                              const Document& doc, int gold);

// Greedy: walk the saliency order, corrupt each position with a
// seeded-uniform applicable operator, stop once the local model's
// prediction leaves `gold` or `k` tokens are corrupted.
AdversarialExample GenerateAdversarial(const Model& model, const Vocab& vocab,
                                       const Document& doc, int gold, int k,
                                       std::span<const TypoOp> ops,
                                       const TypoTables& tables, Rng& rng);

// Same operators and budget, positions chosen uniformly without any model
// access.
AdversarialExample RandomBaseline(const Document& doc, int gold, int k,
                                  std::span<const TypoOp> ops,
                                  const TypoTables& tables, Rng& rng);

// Replays `ex` against its original text: token count unchanged, only the
// listed positions differ, each by exactly its recorded operator, and at
// most `k` of them.
bool VerifyExample(const AdversarialExample& ex, int k,
                   const TypoTables& tables);

struct AetReport {
  AttackMode mode = AttackMode::kWhiteboxSaliency;
  int k = 0;  // 0 means the per-document default was used
  size_t examples = 0;
  size_t misclassified = 0;
  double transferability = 0.0;
  std::map<std::string, size_t> op_counts;
};

nlohmann::json ToJson(const AetReport& r);

// Queries the victim with every corrupted text; transferability is the
// fraction whose predicted class differs from the example's gold label.
AetReport MeasureTransferability(VictimClient& victim,
                                 std::span<const AdversarialExample> adv,
                                 AttackMode mode, int k);

struct AttackOptions {
  AttackMode mode = AttackMode::kWhiteboxSaliency;
  int k = -1;  // negative: DefaultCorruptionBudget per document
  std::vector<TypoOp> ops{kAllTypoOps.begin(), kAllTypoOps.end()};
  // Use the victim's predictions (through `victim`) as gold instead of the
  // dataset labels.
  bool gold_from_victim = false;
  uint64_t seed = 0;
};

// Generates one example per document (document i uses seed (seed, i)).
// `model`/`vocab` are ignored by the random baseline. `label_source` is only
// consulted when gold_from_victim is set and is billed like any query.
std::vector<AdversarialExample> GenerateAll(const Model& model,
                                            const Vocab& vocab,
                                            const Dataset& data,
                                            const AttackOptions& opts,
                                            const TypoTables& tables,
                                            VictimClient* label_source = nullptr);

}  // namespace etlab

#endif  // ETLAB_ADVGEN_H_
