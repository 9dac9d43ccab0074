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

#include "etlab/victim.h"

#include <cmath>
#include <cstdio>

namespace etlab {

void DefenceConfig::Validate() const {
  if (!(tau >= 0.0)) throw InvalidArgument("tau must be >= 0");
  if (!(sigma >= 0.0)) throw InvalidArgument("sigma must be >= 0");
}

namespace {

std::string Compact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

std::string DefenceConfig::Label() const {
  switch (kind) {
    case Kind::kNone:
      return "none";
    case Kind::kSoften:
      return "soften:" + Compact(tau);
    case Kind::kPerturb:
      return "perturb:" + Compact(sigma);
  }
  return "none";
}

DefenceConfig DefenceConfig::Parse(std::string_view label,
                                   uint64_t noise_seed) {
  const auto colon = label.find(':');
  const std::string kind(label.substr(0, colon));
  double value = 0.0;
  if (colon != std::string_view::npos) {
    const std::string num(label.substr(colon + 1));
    size_t used = 0;
    try {
      value = std::stod(num, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != num.size()) {
      throw InvalidArgument("bad defence strength in " + std::string(label));
    }
  }
  DefenceConfig cfg;
  if (kind == "none") {
    cfg = None();
  } else if (kind == "soften" && colon != std::string_view::npos) {
    cfg = Soften(value);
  } else if (kind == "perturb" && colon != std::string_view::npos) {
    cfg = Perturb(value, noise_seed);
  } else {
    throw InvalidArgument("unknown defence: " + std::string(label));
  }
  cfg.noise_seed = noise_seed;
  cfg.Validate();
  return cfg;
}

LabelDistribution ApplyDefence(const Eigen::VectorXd& logits,
                               const DefenceConfig& cfg, uint64_t ordinal) {
  cfg.Validate();
  switch (cfg.kind) {
    case DefenceConfig::Kind::kNone:
      return Softmax(logits, 1.0);
    case DefenceConfig::Kind::kSoften:
      return Softmax(logits, cfg.tau);
    case DefenceConfig::Kind::kPerturb:
      break;
  }
  Eigen::VectorXd p = SoftmaxWithTemperature<double>(logits, 1.0);
  if (cfg.sigma == 0.0) return LabelDistribution(std::move(p));
  Rng rng(MixSeed(cfg.noise_seed, ordinal));
  std::normal_distribution<double> noise(0.0, cfg.sigma);
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    p(k) = std::clamp(p(k) + noise(rng), 1e-6, 1.0);
  }
  p /= p.sum();
  return LabelDistribution(std::move(p));
}

double BilledCost(uint64_t count, const PriceSheet& sheet) {
  return static_cast<double>(count) * sheet.price_per_1000 / 1000.0;
}

double RoundToTenth(double dollars) {
  // Nudged so that exact halves round up despite representation error.
  const double scaled = dollars * 10.0;
  return std::round(scaled + std::copysign(1e-9, scaled)) / 10.0;
}

std::string FormatDollars(double dollars) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f", std::abs(RoundToTenth(dollars)));
  std::string digits(buf);
  const auto dot = digits.find('.');
  std::string whole = digits.substr(0, dot);
  for (int i = static_cast<int>(whole.size()) - 3; i > 0; i -= 3) {
    whole.insert(static_cast<size_t>(i), ",");
  }
  return std::string(dollars < 0 ? "-$" : "$") + whole + digits.substr(dot);
}

nlohmann::json ToJson(const PredictionResponse& r) {
  const auto& p = r.probs.probs();
  return {{"probs", std::vector<double>(p.data(), p.data() + p.size())},
          {"predicted", r.predicted},
          {"api_version", r.api_version}};
}

PredictionResponse PredictionResponseFromJson(const nlohmann::json& j) {
  try {
    const auto probs = j.at("probs").get<std::vector<double>>();
    PredictionResponse r;
    r.probs = LabelDistribution(
        Eigen::Map<const Eigen::VectorXd>(probs.data(),
                                          static_cast<Eigen::Index>(probs.size())));
    r.predicted = j.at("predicted").get<int>();
    r.api_version = j.at("api_version").get<std::string>();
    if (r.predicted < 0 || r.predicted >= r.probs.size()) {
      throw ParseError("predicted class out of range");
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad prediction response: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("bad prediction response: ") + e.what());
  }
}

VictimService::VictimService(Model model, Vocab vocab, DefenceConfig defence)
    : model_(std::move(model)),
      vocab_(std::move(vocab)),
      defence_(std::move(defence)) {
  defence_.Validate();
  if (model_.vocab_fingerprint != vocab_.Fingerprint()) {
    throw InvalidArgument("model and vocab do not match");
  }
}

PredictionResponse VictimService::Predict(std::string_view text) {
  const uint64_t ordinal = meter_.Next();
  const Eigen::VectorXd logits = Forward(model_, EncodeText(vocab_, text));
  if (!logits.allFinite()) throw Error("internal error: non-finite logits");
  PredictionResponse r;
  r.probs = ApplyDefence(logits, defence_, ordinal);
  r.predicted = r.probs.argmax();
  return r;
}

ServiceConfig ServiceConfig::FromConfig(const KeyValueConfig& kv) {
  ServiceConfig cfg;
  cfg.model_path = kv.GetPath("model").value_or("");
  cfg.vocab_path = kv.GetPath("vocab").value_or("");
  if (cfg.model_path.empty() || cfg.vocab_path.empty()) {
    throw InvalidArgument("service config needs model and vocab");
  }
  const uint64_t noise_seed = kv.GetUint("noise_seed", 0);
  const std::string kind = kv.GetString("defence", "none");
  if (kind == "none") {
    cfg.defence = DefenceConfig::None();
  } else if (kind == "soften") {
    cfg.defence = DefenceConfig::Soften(kv.GetDouble("tau", 1.0));
  } else if (kind == "perturb") {
    cfg.defence = DefenceConfig::Perturb(kv.GetDouble("sigma", 0.0), noise_seed);
  } else {
    cfg.defence = DefenceConfig::Parse(kind, noise_seed);
  }
  cfg.defence.noise_seed = noise_seed;
  cfg.defence.Validate();
  cfg.price.name = kv.GetString("price_name", cfg.price.name);
  cfg.price.price_per_1000 =
      kv.GetDouble("price_per_1000", cfg.price.price_per_1000);
  if (cfg.price.price_per_1000 < 0) throw InvalidArgument("negative price");
  cfg.host = kv.GetString("host", cfg.host);
  cfg.port = static_cast<int>(kv.GetInt("port", cfg.port));
  cfg.meter_file = kv.GetPath("meter_file").value_or("");
  return cfg;
}

}  // namespace etlab
