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

#include "etlab/model.h"

namespace etlab {

std::string_view FamilyName(Family f) {
  return f == Family::kMlp ? "mlp" : "embedbag";
}

Family ParseFamily(std::string_view name) {
  if (name == "embedbag") return Family::kEmbedBag;
  if (name == "mlp") return Family::kMlp;
  throw InvalidArgument("unknown architecture: " + std::string(name));
}

bool LabelDistribution::IsValid(const Eigen::VectorXd& probs) {
  if (probs.size() == 0 || !probs.allFinite()) return false;
  if (probs.minCoeff() < 0.0) return false;
  return std::abs(probs.sum() - 1.0) <= kTolerance;
}

LabelDistribution::LabelDistribution(Eigen::VectorXd probs)
    : probs_(std::move(probs)) {
  if (!IsValid(probs_)) throw InvalidArgument("not a probability vector");
}

LabelDistribution LabelDistribution::OneHot(int num_classes, int k) {
  if (k < 0 || k >= num_classes) throw InvalidArgument("class out of range");
  Eigen::VectorXd p = Eigen::VectorXd::Zero(num_classes);
  p(k) = 1.0;
  return LabelDistribution(std::move(p));
}

LabelDistribution Softmax(const Eigen::VectorXd& logits, double tau) {
  return LabelDistribution(SoftmaxWithTemperature<double>(logits, tau));
}

double CrossEntropy(const LabelDistribution& p, int gold) {
  if (gold < 0 || gold >= p.size()) throw InvalidArgument("gold out of range");
  return -std::log(std::max(p[gold], kProbFloor));
}

double KlDivergence(const LabelDistribution& target,
                    const LabelDistribution& pred) {
  if (target.size() != pred.size()) {
    throw InvalidArgument("dimension mismatch");
  }
  double kl = 0.0;
  for (int k = 0; k < target.size(); ++k) {
    const double t = target[k];
    if (t > 0.0) kl += t * (std::log(t) - std::log(std::max(pred[k], kProbFloor)));
  }
  // Clamping can push the sum a hair below zero when target == pred.
  return std::max(kl, 0.0);
}

int Predict(const Model& m, const EncodedDoc& x) { return Argmax(Forward(m, x)); }

double EvaluateAccuracy(const Model& m, const Dataset& data,
                        const Vocab& vocab) {
  if (data.empty()) throw InvalidArgument("empty dataset");
  size_t correct = 0;
  for (const auto& d : data.docs()) {
    if (!d.label) throw InvalidArgument("document " + d.id + " has no label");
    if (Predict(m, EncodeText(vocab, d.text)) == *d.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace etlab
