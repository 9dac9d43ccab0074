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

// Bag-of-embeddings text classifiers with analytic gradients.
//
// Two families share the same mean-pooled input representation
//   h = sum_f weight_f * E[f]
// and differ only in the head:
//   EmbedBag:  z = W h + b
//   Mlp:       z = W2 tanh(W1 h + b1) + b2
//
// Everything here is templated on the scalar type; the rest of the library
// uses the double instantiations declared at the bottom.

#ifndef ETLAB_MODEL_H_
#define ETLAB_MODEL_H_

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "etlab/common.h"
#include "etlab/corpus.h"

namespace etlab {

enum class Family { kEmbedBag, kMlp };

struct Architecture {
  Family family = Family::kEmbedBag;
  int embed_dim = 16;
  int hidden = 32;  // Mlp only.

  void Validate() const {
    if (embed_dim < 1) throw InvalidArgument("embed_dim must be >= 1");
    if (family == Family::kMlp && hidden < 1) {
      throw InvalidArgument("hidden must be >= 1 for mlp");
    }
  }
  bool operator==(const Architecture&) const = default;
};

std::string_view FamilyName(Family f);
Family ParseFamily(std::string_view name);

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowMat =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
struct BasicModel {
  Architecture arch;
  int num_classes = 0;
  uint64_t vocab_fingerprint = 0;

  RowMat<Scalar> embedding;  // vocab.size() x d
  RowMat<Scalar> w1;         // hidden x d (Mlp)
  Vec<Scalar> b1;            // hidden (Mlp)
  RowMat<Scalar> w_out;      // K x d, or K x hidden for Mlp
  Vec<Scalar> b_out;         // K

  int head_inputs() const {
    return arch.family == Family::kMlp ? arch.hidden : arch.embed_dim;
  }

  bool operator==(const BasicModel& o) const {
    return arch == o.arch && num_classes == o.num_classes &&
           vocab_fingerprint == o.vocab_fingerprint &&
           embedding == o.embedding && w1 == o.w1 && b1 == o.b1 &&
           w_out == o.w_out && b_out == o.b_out;
  }
};

// Parameters drawn i.i.d. uniform(-0.05, 0.05) from a generator seeded by
// `seed`, in the fixed order embedding, w1, b1, w_out, b_out.
template <typename Scalar>
BasicModel<Scalar> InitModel(const Architecture& arch, const Vocab& vocab,
                             int num_classes, uint64_t seed) {
  arch.Validate();
  if (num_classes < 2) throw InvalidArgument("K must be at least 2");
  BasicModel<Scalar> m;
  m.arch = arch;
  m.num_classes = num_classes;
  m.vocab_fingerprint = vocab.Fingerprint();
  Rng rng(MixSeed(seed, 0x1417));
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  auto fill = [&](auto& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      t.data()[i] = static_cast<Scalar>(u(rng));
    }
  };
  const int d = arch.embed_dim;
  m.embedding.resize(vocab.size(), d);
  fill(m.embedding);
  if (arch.family == Family::kMlp) {
    m.w1.resize(arch.hidden, d);
    m.b1.resize(arch.hidden);
    fill(m.w1);
    fill(m.b1);
  }
  m.w_out.resize(num_classes, m.head_inputs());
  m.b_out.resize(num_classes);
  fill(m.w_out);
  fill(m.b_out);
  return m;
}

// Intermediate values kept for the backward pass.
template <typename Scalar>
struct ForwardCache {
  Vec<Scalar> pooled;
  Vec<Scalar> hidden;  // tanh activations (Mlp only)
  Vec<Scalar> logits;
};

template <typename Scalar>
void CheckFeatureIds(const BasicModel<Scalar>& m, const EncodedDoc& x) {
  const auto rows = m.embedding.rows();
  for (const auto& f : x.features) {
    if (f.id < 0 || f.id >= rows) {
      throw InvalidArgument("feature id " + std::to_string(f.id) +
                            " out of range");
    }
  }
}

template <typename Scalar>
Vec<Scalar> Pool(const BasicModel<Scalar>& m, const EncodedDoc& x) {
  CheckFeatureIds(m, x);
  Vec<Scalar> h = Vec<Scalar>::Zero(m.arch.embed_dim);
  for (const auto& f : x.features) {
    h.noalias() += static_cast<Scalar>(f.weight) * m.embedding.row(f.id).transpose();
  }
  return h;
}

// Head applied to a pooled vector; fills `cache` (pooled, hidden, logits).
template <typename Scalar>
const Vec<Scalar>& HeadForward(const BasicModel<Scalar>& m, Vec<Scalar> pooled,
                               ForwardCache<Scalar>* cache) {
  cache->pooled = std::move(pooled);
  if (m.arch.family == Family::kMlp) {
    cache->hidden = (m.w1 * cache->pooled + m.b1).array().tanh().matrix();
    cache->logits = m.w_out * cache->hidden + m.b_out;
  } else {
    cache->hidden.resize(0);
    cache->logits = m.w_out * cache->pooled + m.b_out;
  }
  return cache->logits;
}

template <typename Scalar>
Vec<Scalar> Forward(const BasicModel<Scalar>& m, const EncodedDoc& x) {
  ForwardCache<Scalar> cache;
  HeadForward(m, Pool(m, x), &cache);
  return cache.logits;
}

// Gradients of the head parameters for one example.
template <typename Scalar>
struct HeadGrads {
  RowMat<Scalar> w1;
  Vec<Scalar> b1;
  RowMat<Scalar> w_out;
  Vec<Scalar> b_out;
};

// Back-propagates dL/dlogits through the head. Returns dL/dpooled. If
// `grads` is non-null, parameter gradients are accumulated into it.
template <typename Scalar>
Vec<Scalar> HeadBackward(const BasicModel<Scalar>& m,
                         const ForwardCache<Scalar>& cache,
                         const Vec<Scalar>& dlogits, HeadGrads<Scalar>* grads) {
  if (m.arch.family == Family::kMlp) {
    Vec<Scalar> dhidden = m.w_out.transpose() * dlogits;
    Vec<Scalar> dpre =
        (dhidden.array() * (Scalar(1) - cache.hidden.array().square())).matrix();
    if (grads) {
      grads->w_out.noalias() += dlogits * cache.hidden.transpose();
      grads->b_out += dlogits;
      grads->w1.noalias() += dpre * cache.pooled.transpose();
      grads->b1 += dpre;
    }
    return m.w1.transpose() * dpre;
  }
  if (grads) {
    grads->w_out.noalias() += dlogits * cache.pooled.transpose();
    grads->b_out += dlogits;
  }
  return m.w_out.transpose() * dlogits;
}

// Index of the largest entry; the lowest index wins ties.
template <typename Derived>
int Argmax(const Eigen::MatrixBase<Derived>& v) {
  int best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = static_cast<int>(i);
  }
  return best;
}

inline int Argmax(std::span<const double> v) {
  int best = 0;
  for (size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = static_cast<int>(i);
  }
  return best;
}

// Softmax of z / tau with max subtraction. tau == 0 yields the one-hot
// vector at the argmax.
template <typename Scalar>
Vec<Scalar> SoftmaxWithTemperature(const Vec<Scalar>& z, double tau) {
  if (!(tau >= 0.0)) throw InvalidArgument("temperature must be >= 0");
  if (!z.allFinite()) throw InvalidArgument("non-finite logits");
  Vec<Scalar> p = Vec<Scalar>::Zero(z.size());
  if (z.size() == 0) return p;
  if (tau == 0.0) {
    p(Argmax(z)) = Scalar(1);
    return p;
  }
  const Scalar t = static_cast<Scalar>(tau);
  const Scalar top = z.maxCoeff();
  p = ((z.array() - top) / t).exp().matrix();
  p /= p.sum();
  return p;
}

constexpr double kProbFloor = 1e-12;

// A posterior over K classes: non-negative, summing to one within 1e-9.
class LabelDistribution {
 public:
  static constexpr double kTolerance = 1e-9;

  LabelDistribution() = default;
  // Throws InvalidArgument unless `probs` is on the simplex.
  explicit LabelDistribution(Eigen::VectorXd probs);

  static LabelDistribution OneHot(int num_classes, int k);
  static bool IsValid(const Eigen::VectorXd& probs);

  const Eigen::VectorXd& probs() const { return probs_; }
  int size() const { return static_cast<int>(probs_.size()); }
  double operator[](int k) const { return probs_(k); }
  int argmax() const { return Argmax(probs_); }

  bool operator==(const LabelDistribution& o) const {
    return probs_ == o.probs_;
  }

 private:
  Eigen::VectorXd probs_;
};

LabelDistribution Softmax(const Eigen::VectorXd& logits, double tau = 1.0);

// -log p_gold, with p clamped below at 1e-12.
double CrossEntropy(const LabelDistribution& p, int gold);
// sum_k t_k log(t_k / p_k), 0 log 0 = 0, p clamped below at 1e-12.
double KlDivergence(const LabelDistribution& target,
                    const LabelDistribution& pred);

// Per-token gradients of the gold-label cross entropy.
//
// Token j contributes x_j = sum_{f in token j} E[f] / N to the pooled
// vector, so `gradients[j]` is dL/dx_j. Because pooling is linear those
// vectors coincide; what separates tokens is `saliency[j] = -dL/dx_j . x_j`,
// the first-order loss increase from removing token j.
template <typename Scalar>
struct BasicGradReport {
  std::vector<Vec<Scalar>> gradients;
  std::vector<Scalar> norms;
  std::vector<Scalar> saliency;
};

// Token j's contribution x_j to the pooled vector.
template <typename Scalar>
Vec<Scalar> TokenContribution(const BasicModel<Scalar>& m, const EncodedDoc& x,
                              size_t j) {
  Vec<Scalar> c = Vec<Scalar>::Zero(m.arch.embed_dim);
  const Scalar inv = Scalar(1) / static_cast<Scalar>(x.total_features);
  for (int id : x.positions[j]) c.noalias() += m.embedding.row(id).transpose();
  return c * inv;
}

template <typename Scalar>
BasicGradReport<Scalar> EmbeddingGradients(const BasicModel<Scalar>& m,
                                           const EncodedDoc& x, int gold) {
  if (gold < 0 || gold >= m.num_classes) {
    throw InvalidArgument("gold label out of range");
  }
  if (x.positions.empty()) {
    throw InvalidArgument("document has no token positions");
  }
  ForwardCache<Scalar> cache;
  HeadForward(m, Pool(m, x), &cache);
  Vec<Scalar> dlogits = SoftmaxWithTemperature(cache.logits, 1.0);
  dlogits(gold) -= Scalar(1);
  const Vec<Scalar> dpooled = HeadBackward<Scalar>(m, cache, dlogits, nullptr);

  BasicGradReport<Scalar> report;
  const size_t n = x.positions.size();
  report.gradients.assign(n, dpooled);
  report.norms.assign(n, dpooled.norm());
  report.saliency.reserve(n);
  for (size_t j = 0; j < n; ++j) {
    report.saliency.push_back(-dpooled.dot(TokenContribution(m, x, j)));
  }
  return report;
}

enum class Optimizer { kSgdMomentum, kAdam };
enum class LossKind { kHardCe, kSoftKl };

struct TrainConfig {
  int epochs = 10;
  int batch_size = 32;
  double learning_rate = 1e-2;
  Optimizer optimizer = Optimizer::kAdam;
  LossKind loss = LossKind::kHardCe;
  uint64_t seed = 0;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void Validate() const {
    if (epochs < 0) throw InvalidArgument("epochs must be >= 0");
    if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
    if (!(learning_rate > 0.0)) {
      throw InvalidArgument("learning_rate must be > 0");
    }
  }
};

using Target = std::variant<int, LabelDistribution>;

struct TrainExample {
  EncodedDoc doc;
  Target target;
};

namespace internal {

template <typename Scalar>
struct Moments {
  RowMat<Scalar> embedding, w1, w_out;
  Vec<Scalar> b1, b_out;

  void ZeroLike(const BasicModel<Scalar>& m) {
    embedding = RowMat<Scalar>::Zero(m.embedding.rows(), m.embedding.cols());
    w1 = RowMat<Scalar>::Zero(m.w1.rows(), m.w1.cols());
    w_out = RowMat<Scalar>::Zero(m.w_out.rows(), m.w_out.cols());
    b1 = Vec<Scalar>::Zero(m.b1.size());
    b_out = Vec<Scalar>::Zero(m.b_out.size());
  }
};

// Applies one optimizer step to every tensor of the model.
template <typename Scalar>
class Stepper {
 public:
  Stepper(const BasicModel<Scalar>& m, const TrainConfig& cfg) : cfg_(cfg) {
    first_.ZeroLike(m);
    if (cfg.optimizer == Optimizer::kAdam) second_.ZeroLike(m);
  }

  void Step(BasicModel<Scalar>& m, const Moments<Scalar>& g) {
    ++t_;
    Apply(m.embedding, g.embedding, first_.embedding, second_.embedding);
    Apply(m.w1, g.w1, first_.w1, second_.w1);
    Apply(m.b1, g.b1, first_.b1, second_.b1);
    Apply(m.w_out, g.w_out, first_.w_out, second_.w_out);
    Apply(m.b_out, g.b_out, first_.b_out, second_.b_out);
  }

 private:
  template <typename T>
  void Apply(T& param, const T& grad, T& m1, T& m2) {
    if (param.size() == 0) return;
    const Scalar lr = static_cast<Scalar>(cfg_.learning_rate);
    if (cfg_.optimizer == Optimizer::kSgdMomentum) {
      m1 = static_cast<Scalar>(cfg_.momentum) * m1 + grad;
      param -= lr * m1;
      return;
    }
    const Scalar b1 = static_cast<Scalar>(cfg_.beta1);
    const Scalar b2 = static_cast<Scalar>(cfg_.beta2);
    m1 = b1 * m1 + (Scalar(1) - b1) * grad;
    m2 = b2 * m2 + (Scalar(1) - b2) * grad.cwiseProduct(grad);
    const Scalar c1 = Scalar(1) - std::pow(b1, static_cast<Scalar>(t_));
    const Scalar c2 = Scalar(1) - std::pow(b2, static_cast<Scalar>(t_));
    const Scalar eps = static_cast<Scalar>(cfg_.epsilon);
    param.array() -= lr * (m1.array() / c1) /
                     ((m2.array() / c2).sqrt() + eps);
  }

  TrainConfig cfg_;
  Moments<Scalar> first_, second_;
  long t_ = 0;
};

}  // namespace internal

// Mini-batch training. Examples are reshuffled every epoch with a generator
// seeded by cfg.seed; the per-batch gradient is the mean over the batch.
template <typename Scalar>
BasicModel<Scalar> Train(BasicModel<Scalar> m,
                         std::span<const TrainExample> data,
                         const TrainConfig& cfg) {
  cfg.Validate();
  if (cfg.epochs == 0) return m;
  if (data.empty()) throw InvalidArgument("empty training data");

  const int k_classes = m.num_classes;
  std::vector<Vec<Scalar>> targets;
  targets.reserve(data.size());
  for (const auto& ex : data) {
    CheckFeatureIds(m, ex.doc);
    Vec<Scalar> t = Vec<Scalar>::Zero(k_classes);
    if (cfg.loss == LossKind::kHardCe) {
      const int* gold = std::get_if<int>(&ex.target);
      if (!gold) throw InvalidArgument("hard_ce needs class-index targets");
      if (*gold < 0 || *gold >= k_classes) {
        throw InvalidArgument("target class out of range");
      }
      t(*gold) = Scalar(1);
    } else {
      const auto* dist = std::get_if<LabelDistribution>(&ex.target);
      if (!dist) throw InvalidArgument("soft_kl needs distribution targets");
      if (dist->size() != k_classes) {
        throw InvalidArgument("target distribution has wrong dimension");
      }
      t = dist->probs().template cast<Scalar>();
    }
    targets.push_back(std::move(t));
  }

  internal::Stepper<Scalar> stepper(m, cfg);
  internal::Moments<Scalar> grads;
  HeadGrads<Scalar> head;
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(MixSeed(cfg.seed, 0x7a1));
  const Scalar floor = static_cast<Scalar>(kProbFloor);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[UniformIndex(rng, i)]);
    }
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const size_t stop =
          std::min(order.size(), start + static_cast<size_t>(cfg.batch_size));
      grads.ZeroLike(m);
      head.w1 = grads.w1;
      head.b1 = grads.b1;
      head.w_out = grads.w_out;
      head.b_out = grads.b_out;
      for (size_t b = start; b < stop; ++b) {
        const auto& ex = data[order[b]];
        const Vec<Scalar>& t = targets[order[b]];
        ForwardCache<Scalar> cache;
        HeadForward(m, Pool(m, ex.doc), &cache);
        if (!cache.logits.allFinite()) throw Diverged();
        const Vec<Scalar> p = SoftmaxWithTemperature(cache.logits, 1.0);
        // KL(t || p); for one-hot t this is exactly -log p_gold.
        Scalar loss = 0;
        for (int k = 0; k < k_classes; ++k) {
          if (t(k) > Scalar(0)) {
            loss += t(k) * (std::log(t(k)) - std::log(std::max(p(k), floor)));
          }
        }
        if (!std::isfinite(static_cast<double>(loss))) throw Diverged();
        const Vec<Scalar> dlogits = p - t;
        const Vec<Scalar> dpooled = HeadBackward(m, cache, dlogits, &head);
        for (const auto& f : ex.doc.features) {
          grads.embedding.row(f.id) +=
              static_cast<Scalar>(f.weight) * dpooled.transpose();
        }
      }
      const Scalar scale = Scalar(1) / static_cast<Scalar>(stop - start);
      grads.embedding *= scale;
      grads.w1 = head.w1 * scale;
      grads.b1 = head.b1 * scale;
      grads.w_out = head.w_out * scale;
      grads.b_out = head.b_out * scale;
      stepper.Step(m, grads);
    }
  }
  if (!m.embedding.allFinite() || !m.w_out.allFinite() ||
      !m.b_out.allFinite() || !m.w1.allFinite() || !m.b1.allFinite()) {
    throw Diverged();
  }
  return m;
}

using Model = BasicModel<double>;
using GradReport = BasicGradReport<double>;

inline Model InitModel(const Architecture& arch, const Vocab& vocab,
                       int num_classes, uint64_t seed) {
  return InitModel<double>(arch, vocab, num_classes, seed);
}

int Predict(const Model& m, const EncodedDoc& x);

// Fraction of documents whose argmax prediction equals the label.
double EvaluateAccuracy(const Model& m, const Dataset& data,
                        const Vocab& vocab);

// Flat binary checkpoint; see checkpoint.cc for the layout.
void SaveModel(const Model& m, const std::string& path);
// Throws if the checkpoint was trained against a different vocabulary.
Model LoadModel(const std::string& path, const Vocab& vocab);

}  // namespace etlab

#endif  // ETLAB_MODEL_H_
