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

#include "etlab/extraction.h"

#include <cmath>
#include <numeric>

namespace etlab {

std::string_view ScenarioName(Scenario s) {
  return s == Scenario::kTransfer ? "transfer" : "same";
}

Scenario ParseScenario(std::string_view name) {
  if (name == "same" || name == "same_distribution") {
    return Scenario::kSameDistribution;
  }
  if (name == "transfer") return Scenario::kTransfer;
  throw InvalidArgument("unknown scenario: " + std::string(name));
}

size_t QueryCount(Budget budget, size_t victim_train_size) {
  if (!(budget.multiplier > 0.0) || !std::isfinite(budget.multiplier)) {
    throw InvalidArgument("budget must be > 0");
  }
  return static_cast<size_t>(
      std::floor(budget.multiplier * static_cast<double>(victim_train_size) + 0.5));
}

QueryPool BuildQueryPool(Scenario scenario, size_t victim_train_size,
                         const Dataset& source, Budget budget, uint64_t seed,
                         std::string corpus_name) {
  const size_t m = QueryCount(budget, victim_train_size);
  if (source.empty()) throw InvalidArgument("empty query source");
  QueryPool pool;
  pool.source = scenario;
  pool.budget = budget;
  pool.corpus_name = std::move(corpus_name);

  const size_t n = source.size();
  std::vector<size_t> picks;
  picks.reserve(m);
  if (scenario == Scenario::kSameDistribution && m == n) {
    picks.resize(n);
    std::iota(picks.begin(), picks.end(), size_t{0});
  } else {
    Rng rng(MixSeed(seed, 0x9001));
    std::vector<size_t> perm(n);
    std::iota(perm.begin(), perm.end(), size_t{0});
    for (size_t full = 0; full < m / n; ++full) {
      picks.insert(picks.end(), perm.begin(), perm.end());
    }
    // Partial Fisher-Yates for the remainder.
    const size_t rest = m % n;
    for (size_t i = 0; i < rest; ++i) {
      std::swap(perm[i], perm[i + UniformIndex(rng, n - i)]);
      picks.push_back(perm[i]);
    }
    pool.with_replacement = m > n;
  }
  pool.docs.reserve(picks.size());
  for (size_t i = 0; i < picks.size(); ++i) {
    pool.docs.push_back({"q" + std::to_string(i), source[picks[i]].text, {}});
  }
  return pool;
}

TransferSet CollectPredictions(VictimClient& client, const QueryPool& pool,
                               int max_retries) {
  TransferSet ts;
  ts.pairs.reserve(pool.docs.size());
  for (size_t i = 0; i < pool.docs.size(); ++i) {
    for (int attempt = 0;; ++attempt) {
      try {
        auto r = client.Predict(pool.docs[i].text);
        ts.pairs.emplace_back(pool.docs[i], std::move(r.probs));
        break;
      } catch (const TransportError& e) {
        if (attempt >= max_retries) {
          throw TransportError("query " + std::to_string(i) + " failed after " +
                               std::to_string(attempt + 1) +
                               " attempts: " + e.what());
        }
      }
    }
  }
  return ts;
}

Vocab BuildAttackerVocab(const QueryPool& pool, const VocabOptions& opts) {
  return BuildVocab(std::span<const Document>(pool.docs), opts);
}

Model Distill(const Architecture& arch, const Vocab& vocab,
              const TransferSet& ts, const TrainConfig& cfg) {
  if (ts.pairs.empty()) throw InvalidArgument("empty transfer set");
  if (cfg.loss != LossKind::kSoftKl) {
    throw InvalidArgument("distillation uses the soft_kl loss");
  }
  const int k_classes = ts.pairs.front().second.size();
  std::vector<TrainExample> data;
  data.reserve(ts.pairs.size());
  for (const auto& [doc, probs] : ts.pairs) {
    data.push_back({EncodeText(vocab, doc.text, doc.id), probs});
  }
  return Train(InitModel(arch, vocab, k_classes, cfg.seed),
               std::span<const TrainExample>(data), cfg);
}

double Agreement(const Model& model, const Vocab& vocab, VictimClient& victim,
                 const Dataset& eval) {
  if (eval.empty()) throw InvalidArgument("empty evaluation set");
  size_t same = 0;
  for (const auto& d : eval.docs()) {
    if (Predict(model, EncodeText(vocab, d.text)) == victim.Predict(d.text).predicted) {
      ++same;
    }
  }
  return static_cast<double>(same) / static_cast<double>(eval.size());
}

double ClientAccuracy(VictimClient& victim, const Dataset& eval) {
  if (eval.empty()) throw InvalidArgument("empty evaluation set");
  size_t correct = 0;
  for (const auto& d : eval.docs()) {
    if (!d.label) throw InvalidArgument("document " + d.id + " has no label");
    if (victim.Predict(d.text).predicted == *d.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(eval.size());
}

nlohmann::json ToJson(const MeaReport& r) {
  return {{"scenario", r.scenario},
          {"corpus", r.corpus_name},
          {"arch", r.arch},
          {"budget", r.budget},
          {"victim_accuracy", r.victim_accuracy},
          {"extracted_accuracy", r.extracted_accuracy},
          {"agreement", r.agreement},
          {"query_count", r.query_count},
          {"cost", r.cost},
          {"with_replacement", r.with_replacement},
          {"seed", r.seed}};
}

MeaResult RunMea(VictimClient& api, VictimClient& oracle, const Dataset& source,
                 const Dataset& test, const MeaOptions& opts) {
  const size_t train_size =
      opts.victim_train_size ? opts.victim_train_size : source.size();
  const QueryPool pool =
      BuildQueryPool(opts.scenario, train_size, source, opts.budget,
                     MixSeed(opts.seed, 0x9007), opts.corpus_name);

  const uint64_t before = api.MeterCount();
  const TransferSet ts = CollectPredictions(api, pool, opts.max_retries);
  const uint64_t queries = api.MeterCount() - before;

  Vocab vocab = BuildAttackerVocab(pool, opts.vocab);
  TrainConfig cfg = opts.train;
  cfg.loss = LossKind::kSoftKl;
  cfg.seed = opts.seed;
  Model model = Distill(opts.arch, vocab, ts, cfg);

  MeaReport r;
  r.scenario = std::string(ScenarioName(opts.scenario));
  r.corpus_name = pool.corpus_name;
  r.arch = std::string(FamilyName(opts.arch.family));
  r.budget = opts.budget.multiplier;
  r.victim_accuracy = ClientAccuracy(oracle, test);
  r.extracted_accuracy = EvaluateAccuracy(model, test, vocab);
  r.agreement = Agreement(model, vocab, oracle, test);
  r.query_count = queries;
  r.cost = BilledCost(queries, opts.price);
  r.with_replacement = pool.with_replacement;
  r.seed = opts.seed;
  return {std::move(r), std::move(model), std::move(vocab)};
}

}  // namespace etlab
