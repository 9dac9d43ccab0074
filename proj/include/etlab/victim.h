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

// The black-box prediction API: serve-time defences, query metering,
// billing and the HTTP transport.
//
// Callers outside this module only ever see PredictionResponse values.
// Nothing here hands out parameters or gradients.

#ifndef ETLAB_VICTIM_H_
#define ETLAB_VICTIM_H_

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <thread>

#include "etlab/config.h"
#include "etlab/model.h"
#include "json.hpp"

namespace etlab {

struct DefenceConfig {
  enum class Kind { kNone, kSoften, kPerturb };

  Kind kind = Kind::kNone;
  double tau = 1.0;    // kSoften
  double sigma = 0.0;  // kPerturb, standard deviation of the noise
  uint64_t noise_seed = 0;

  static DefenceConfig None() { return {}; }
  static DefenceConfig Soften(double tau) {
    return {Kind::kSoften, tau, 0.0, 0};
  }
  static DefenceConfig Perturb(double sigma, uint64_t noise_seed) {
    return {Kind::kPerturb, 1.0, sigma, noise_seed};
  }

  void Validate() const;
  // "none", "soften:0.5" or "perturb:0.2".
  std::string Label() const;
  static DefenceConfig Parse(std::string_view label, uint64_t noise_seed = 0);

  bool operator==(const DefenceConfig&) const = default;
};

// Turns raw logits into the posterior the API returns. Perturbation noise
// for request `ordinal` comes from a generator seeded by
// (cfg.noise_seed, ordinal), so responses are reproducible.
LabelDistribution ApplyDefence(const Eigen::VectorXd& logits,
                               const DefenceConfig& cfg, uint64_t ordinal);

struct PriceSheet {
  std::string name = "google";
  double price_per_1000 = 1.0;
};

// count * price / 1000, unrounded.
double BilledCost(uint64_t count, const PriceSheet& sheet);
// Rounds half away from zero to one decimal place.
double RoundToTenth(double dollars);
// "$1,560.0"
std::string FormatDollars(double dollars);

inline constexpr std::string_view kApiVersion = "etlab-v1";

struct PredictionResponse {
  LabelDistribution probs;
  int predicted = 0;
  std::string api_version{kApiVersion};
};

nlohmann::json ToJson(const PredictionResponse& r);
PredictionResponse PredictionResponseFromJson(const nlohmann::json& j);

// Counts served queries. The value after increment is the request ordinal.
class QueryMeter {
 public:
  uint64_t Next() { return count_.fetch_add(1, std::memory_order_relaxed) + 1; }
  uint64_t count() const { return count_.load(std::memory_order_relaxed); }

 private:
  std::atomic<uint64_t> count_{0};
};

class VictimService {
 public:
  VictimService(Model model, Vocab vocab, DefenceConfig defence);

  // Thread-safe. Empty text is served through the UNK encoding.
  PredictionResponse Predict(std::string_view text);

  uint64_t meter_count() const { return meter_.count(); }
  int num_classes() const { return model_.num_classes; }
  const DefenceConfig& defence() const { return defence_; }

 private:
  const Model model_;
  const Vocab vocab_;
  const DefenceConfig defence_;
  QueryMeter meter_;
};

// The only way attack code talks to a victim.
class VictimClient {
 public:
  virtual ~VictimClient() = default;
  virtual PredictionResponse Predict(std::string_view text) = 0;
  virtual uint64_t MeterCount() = 0;
};

class InProcessClient : public VictimClient {
 public:
  explicit InProcessClient(VictimService& service) : service_(service) {}

  PredictionResponse Predict(std::string_view text) override {
    return service_.Predict(text);
  }
  uint64_t MeterCount() override { return service_.meter_count(); }

 private:
  VictimService& service_;
};

// Client for the HTTP endpoints below. `url` looks like
// "http://127.0.0.1:8080". Connection failures raise TransportError;
// non-200 replies raise Error.
class HttpClient : public VictimClient {
 public:
  explicit HttpClient(const std::string& url, double timeout_seconds = 30.0);
  ~HttpClient() override;

  PredictionResponse Predict(std::string_view text) override;
  uint64_t MeterCount() override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// POST /v1/predict  {"text": str} -> PredictionResponse JSON
// GET  /v1/meter    -> {"count": int}
class HttpServer {
 public:
  // If `meter_file` is non-empty, Stop() writes {"count": n} there.
  explicit HttpServer(VictimService& service, std::string meter_file = {});
  ~HttpServer();

  // Binds; port 0 picks a free port. Returns the bound port.
  int Bind(const std::string& host, int port);
  // Blocks until Stop() is called.
  void Listen();
  // Bind + Listen on a background thread.
  int Start(const std::string& host, int port);
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Victim deployment described by a flat key = value file:
//   model, vocab         checkpoint and vocab paths
//   defence              none | soften | perturb
//   tau, sigma           defence strength
//   noise_seed           u64
//   price_name, price_per_1000
//   host, port, meter_file
struct ServiceConfig {
  std::string model_path;
  std::string vocab_path;
  DefenceConfig defence;
  PriceSheet price;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string meter_file;

  static ServiceConfig FromConfig(const KeyValueConfig& kv);
};

}  // namespace etlab

#endif  // ETLAB_VICTIM_H_
