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

#include "etlab/advgen.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace etlab {

std::string_view AttackModeName(AttackMode m) {
  return m == AttackMode::kRandomBaseline ? "random" : "whitebox";
}

AttackMode ParseAttackMode(std::string_view name) {
  if (name == "whitebox" || name == "whitebox_saliency") {
    return AttackMode::kWhiteboxSaliency;
  }
  if (name == "random" || name == "random_baseline") {
    return AttackMode::kRandomBaseline;
  }
  throw InvalidArgument("unknown attack mode: " + std::string(name));
}

int DefaultCorruptionBudget(size_t n_tokens) {
  return std::max(1, static_cast<int>(std::floor(0.15 * static_cast<double>(n_tokens) + 0.5)));
}

nlohmann::json ToJson(const AdversarialExample& ex) {
  std::vector<std::string> ops;
  for (TypoOp op : ex.ops_used) ops.emplace_back(TypoOpName(op));
  return {{"id", ex.original.id},
          {"text", ex.original.text},
          {"gold", ex.gold},
          {"corrupted_text", ex.corrupted_text},
          {"corrupted_positions", ex.corrupted_positions},
          {"ops_used", ops},
          {"original_tokens", ex.original_tokens},
          {"corrupted_tokens", ex.corrupted_tokens},
          {"flipped_on_extracted", ex.flipped_on_extracted}};
}

nlohmann::json ToJson(const AetReport& r) {
  return {{"mode", AttackModeName(r.mode)},
          {"k", r.k},
          {"examples", r.examples},
          {"misclassified", r.misclassified},
          {"transferability", r.transferability},
          {"op_counts", r.op_counts}};
}

namespace {

std::vector<std::string> Lowered(const std::vector<TokenSpan>& spans) {
  std::vector<std::string> out;
  out.reserve(spans.size());
  for (const auto& s : spans) out.push_back(AsciiLower(s.surface));
  return out;
}

// Rebuilds the text with replaced token surfaces, keeping every byte
// outside the replaced spans.
std::string Splice(const std::string& text, const std::vector<TokenSpan>& spans,
                   const std::vector<std::string>& surfaces) {
  std::string out;
  size_t cursor = 0;
  for (size_t j = 0; j < spans.size(); ++j) {
    out.append(text, cursor, spans[j].begin - cursor);
    out += surfaces[j];
    cursor = spans[j].end;
  }
  out.append(text, cursor, std::string::npos);
  return out;
}

// Tries the enabled operators in a seeded-random order; the first one that
// applies wins, which makes the choice uniform over applicable operators.
bool CorruptToken(const std::string& token, std::span<const TypoOp> ops,
                  const TypoTables& tables, Rng& rng, std::string* out,
                  TypoOp* used) {
  std::vector<TypoOp> order(ops.begin(), ops.end());
  for (size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[UniformIndex(rng, i)]);
  }
  for (TypoOp op : order) {
    if (auto r = ApplyTypo(token, op, tables, rng)) {
      *out = std::move(*r);
      *used = op;
      return true;
    }
  }
  return false;
}

AdversarialExample Unchanged(const Document& doc, int gold) {
  AdversarialExample ex;
  ex.original = doc;
  ex.gold = gold;
  ex.corrupted_text = doc.text;
  return ex;
}

}  // namespace

std::vector<int> SaliencyRank(const Model& model, const Vocab& vocab,
                              const Document& doc, int gold) {
  const auto tokens = Tokenize(doc.text);
  if (tokens.empty()) throw InvalidArgument("document has no tokens");
  const GradReport g = EmbeddingGradients(model, Encode(vocab, tokens), gold);
  std::vector<int> order(tokens.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return g.saliency[a] > g.saliency[b];
  });
  return order;
}

AdversarialExample GenerateAdversarial(const Model& model, const Vocab& vocab,
                                       const Document& doc, int gold, int k,
                                       std::span<const TypoOp> ops,
                                       const TypoTables& tables, Rng& rng) {
  if (k < 0) throw InvalidArgument("corruption budget must be >= 0");
  AdversarialExample ex = Unchanged(doc, gold);
  const auto spans = SplitTokens(doc.text);
  auto lowered = Lowered(spans);
  if (Predict(model, Encode(vocab, lowered)) != gold) {
    ex.flipped_on_extracted = true;
    return ex;
  }
  if (k == 0 || spans.empty()) return ex;

  std::vector<std::string> surfaces;
  for (const auto& s : spans) surfaces.push_back(s.surface);
  for (int pos : SaliencyRank(model, vocab, doc, gold)) {
    if (static_cast<int>(ex.corrupted_positions.size()) >= k) break;
    std::string corrupted;
    TypoOp op;
    if (!CorruptToken(surfaces[pos], ops, tables, rng, &corrupted, &op)) continue;
    ex.corrupted_positions.push_back(pos);
    ex.ops_used.push_back(op);
    ex.original_tokens.push_back(surfaces[pos]);
    ex.corrupted_tokens.push_back(corrupted);
    lowered[pos] = AsciiLower(corrupted);
    surfaces[pos] = std::move(corrupted);
    if (Predict(model, Encode(vocab, lowered)) != gold) {
      ex.flipped_on_extracted = true;
      break;
    }
  }
  ex.corrupted_text = Splice(doc.text, spans, surfaces);
  return ex;
}

AdversarialExample RandomBaseline(const Document& doc, int gold, int k,
                                  std::span<const TypoOp> ops,
                                  const TypoTables& tables, Rng& rng) {
  if (k < 0) throw InvalidArgument("corruption budget must be >= 0");
  AdversarialExample ex = Unchanged(doc, gold);
  if (k == 0) return ex;
  const auto spans = SplitTokens(doc.text);
  std::vector<std::string> surfaces;
  for (const auto& s : spans) surfaces.push_back(s.surface);
  std::vector<int> order(spans.size());
  std::iota(order.begin(), order.end(), 0);
  for (size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[UniformIndex(rng, i)]);
  }
  for (int pos : order) {
    if (static_cast<int>(ex.corrupted_positions.size()) >= k) break;
    std::string corrupted;
    TypoOp op;
    if (!CorruptToken(surfaces[pos], ops, tables, rng, &corrupted, &op)) continue;
    ex.corrupted_positions.push_back(pos);
    ex.ops_used.push_back(op);
    ex.original_tokens.push_back(surfaces[pos]);
    ex.corrupted_tokens.push_back(corrupted);
    surfaces[pos] = std::move(corrupted);
  }
  ex.corrupted_text = Splice(doc.text, spans, surfaces);
  return ex;
}

bool VerifyExample(const AdversarialExample& ex, int k,
                   const TypoTables& tables) {
  const size_t n = ex.corrupted_positions.size();
  if (ex.ops_used.size() != n || ex.original_tokens.size() != n ||
      ex.corrupted_tokens.size() != n || static_cast<int>(n) > k) {
    return false;
  }
  const auto before = SplitTokens(ex.original.text);
  const auto after = SplitTokens(ex.corrupted_text);
  if (before.size() != after.size()) return false;
  std::vector<int> changed(before.size(), -1);
  for (size_t i = 0; i < n; ++i) {
    const int pos = ex.corrupted_positions[i];
    if (pos < 0 || pos >= static_cast<int>(before.size()) || changed[pos] >= 0) {
      return false;
    }
    changed[pos] = static_cast<int>(i);
  }
  for (size_t j = 0; j < before.size(); ++j) {
    const int i = changed[j];
    if (i < 0) {
      if (before[j].surface != after[j].surface) return false;
      continue;
    }
    if (before[j].surface != ex.original_tokens[i] ||
        after[j].surface != ex.corrupted_tokens[i] ||
        !IsSingleApplication(before[j].surface, after[j].surface,
                             ex.ops_used[i], tables)) {
      return false;
    }
  }
  return true;
}

AetReport MeasureTransferability(VictimClient& victim,
                                 std::span<const AdversarialExample> adv,
                                 AttackMode mode, int k) {
  if (adv.empty()) throw InvalidArgument("empty adversarial set");
  AetReport r;
  r.mode = mode;
  r.k = std::max(k, 0);
  for (TypoOp op : kAllTypoOps) r.op_counts[std::string(TypoOpName(op))] = 0;
  for (const auto& ex : adv) {
    if (victim.Predict(ex.corrupted_text).predicted != ex.gold) ++r.misclassified;
    for (TypoOp op : ex.ops_used) ++r.op_counts[std::string(TypoOpName(op))];
  }
  r.examples = adv.size();
  r.transferability =
      static_cast<double>(r.misclassified) / static_cast<double>(r.examples);
  return r;
}

std::vector<AdversarialExample> GenerateAll(const Model& model,
                                            const Vocab& vocab,
                                            const Dataset& data,
                                            const AttackOptions& opts,
                                            const TypoTables& tables,
                                            VictimClient* label_source) {
  if (opts.gold_from_victim && !label_source) {
    throw InvalidArgument("gold_from_victim needs a victim client");
  }
  std::vector<AdversarialExample> out;
  out.reserve(data.size());
  for (size_t i = 0; i < data.size(); ++i) {
    const Document& doc = data[i];
    int gold;
    if (opts.gold_from_victim) {
      gold = label_source->Predict(doc.text).predicted;
    } else if (doc.label) {
      gold = *doc.label;
    } else {
      throw InvalidArgument("document " + doc.id + " has no label");
    }
    const int k = opts.k >= 0
                      ? opts.k
                      : DefaultCorruptionBudget(SplitTokens(doc.text).size());
    Rng rng(MixSeed(opts.seed, i));
    if (opts.mode == AttackMode::kWhiteboxSaliency) {
      out.push_back(GenerateAdversarial(model, vocab, doc, gold, k, opts.ops,
                                        tables, rng));
    } else {
      out.push_back(RandomBaseline(doc, gold, k, opts.ops, tables, rng));
    }
  }
  return out;
}

}  // namespace etlab
