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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>

namespace etlab {
namespace {

std::string_view OptimizerName(Optimizer o) {
  return o == Optimizer::kAdam ? "adam" : "sgd";
}

Optimizer ParseOptimizer(std::string_view name) {
  if (name == "adam") return Optimizer::kAdam;
  if (name == "sgd" || name == "sgd_momentum") return Optimizer::kSgdMomentum;
  throw InvalidArgument("unknown optimizer: " + std::string(name));
}

nlohmann::json TrainJson(const TrainConfig& t) {
  return {{"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"learning_rate", t.learning_rate},
          {"optimizer", OptimizerName(t.optimizer)},
          {"momentum", t.momentum}};
}

TrainConfig TrainFromConfig(const KeyValueConfig& kv, const std::string& section,
                            TrainConfig t) {
  t.epochs = static_cast<int>(kv.GetInt(section + ".epochs", t.epochs));
  t.batch_size =
      static_cast<int>(kv.GetInt(section + ".batch_size", t.batch_size));
  t.learning_rate = kv.GetDouble(section + ".learning_rate", t.learning_rate);
  t.momentum = kv.GetDouble(section + ".momentum", t.momentum);
  if (kv.Has(section + ".optimizer")) {
    t.optimizer = ParseOptimizer(kv.GetString(section + ".optimizer"));
  }
  return t;
}

std::vector<Family> FamiliesFrom(const std::vector<std::string>& names) {
  std::vector<Family> out;
  for (const auto& n : names) out.push_back(ParseFamily(n));
  return out;
}

std::vector<std::string> FamilyNames(const std::vector<Family>& fs) {
  std::vector<std::string> out;
  for (Family f : fs) out.emplace_back(FamilyName(f));
  return out;
}

TypoTables LoadTables(const std::string& dir) {
  TypoTables t = TypoTables::Builtin();
  if (dir.empty()) return t;
  const std::filesystem::path base(dir);
  auto maybe = [&](const char* file, TypoMap& into) {
    const auto p = base / file;
    if (std::filesystem::exists(p)) into = LoadTypoMap(p.string());
  };
  maybe("keyboard.tsv", t.keyboard_adjacency);
  maybe("mistype.tsv", t.mistype);
  maybe("pronounce.tsv", t.pronounce);
  maybe("wiki.tsv", t.wiki_typos);
  t.Validate();
  return t;
}

struct TaskData {
  Dataset train;
  Dataset test;
  std::optional<Dataset> transfer;
};

TaskData MakeTaskData(const TaskConfig& task, uint64_t seed) {
  if (!task.train_path.empty()) {
    Dataset train = LoadDataset(task.train_path, FormatFromPath(task.train_path),
                                task.num_classes, Split::kTrain);
    const int k = train.num_classes();
    Dataset test = LoadDataset(task.test_path, FormatFromPath(task.test_path), k,
                               Split::kTest);
    std::optional<Dataset> transfer;
    if (!task.transfer_path.empty()) {
      transfer = LoadDataset(task.transfer_path,
                             FormatFromPath(task.transfer_path), k, Split::kPool);
    }
    return {std::move(train), std::move(test), std::move(transfer)};
  }
  const uint64_t data_seed = MixSeed(seed, 0xda7a);
  const SynthOptions& s = task.synth;
  const SynthLexicon lex = MakeLexicon(s.num_classes, s.signal_tokens_per_class,
                                       s.noise_vocab, data_seed);
  Dataset train = GenSynth(lex, s, data_seed, Split::kTrain, "s");
  SynthOptions test_opts = s;
  test_opts.n_per_class = task.test_per_class;
  Dataset test = GenSynth(lex, test_opts, data_seed, Split::kTest, "e");
  Dataset transfer =
      GenTransferCorpus(lex, task.transfer_docs, task.transfer, data_seed);
  return {std::move(train), std::move(test), std::move(transfer)};
}

Model TrainVictim(const Architecture& arch, const Vocab& vocab,
                  const Dataset& train, TrainConfig cfg, uint64_t seed) {
  std::vector<TrainExample> data;
  data.reserve(train.size());
  for (const auto& d : train.docs()) {
    data.push_back({EncodeText(vocab, d.text, d.id), *d.label});
  }
  cfg.loss = LossKind::kHardCe;
  cfg.seed = seed;
  return Train(InitModel(arch, vocab, train.num_classes(), seed),
               std::span<const TrainExample>(data), cfg);
}

// Serves `service` to the attack code, either directly or over loopback
// HTTP.
class Endpoint {
 public:
  Endpoint(VictimService& service, Transport transport) {
    if (transport == Transport::kHttp) {
      server_ = std::make_unique<HttpServer>(service);
      const int port = server_->Start("127.0.0.1", 0);
      client_ = std::make_unique<HttpClient>("http://127.0.0.1:" +
                                             std::to_string(port));
    } else {
      client_ = std::make_unique<InProcessClient>(service);
    }
  }
  ~Endpoint() {
    client_.reset();
    if (server_) server_->Stop();
  }

  VictimClient& client() { return *client_; }

 private:
  std::unique_ptr<HttpServer> server_;
  std::unique_ptr<VictimClient> client_;
};

struct SeedResult {
  std::vector<MeaRecord> mea;
  std::vector<AetRecord> aet;
};

SeedResult RunSeed(const ExperimentConfig& cfg, uint64_t seed,
                   const TypoTables& tables) {
  SeedResult out;
  const TaskData data = MakeTaskData(cfg.task, seed);
  const Vocab victim_vocab = BuildVocab(data.train, cfg.vocab);

  for (Family victim_family : cfg.victim_archs) {
    const Architecture victim_arch{victim_family, cfg.embed_dim, cfg.hidden};
    const Model victim = TrainVictim(victim_arch, victim_vocab, data.train,
                                     cfg.victim_train, MixSeed(seed, 0x71c));
    VictimService oracle_service(victim, victim_vocab, DefenceConfig::None());
    InProcessClient oracle(oracle_service);

    const std::vector<Family> extracted =
        cfg.extracted_archs.empty() ? std::vector<Family>{victim_family}
                                    : cfg.extracted_archs;
    for (DefenceConfig defence : cfg.defences) {
      defence.noise_seed = MixSeed(defence.noise_seed, seed);
      double defended_accuracy;
      {
        VictimService probe(victim, victim_vocab, defence);
        InProcessClient probe_client(probe);
        defended_accuracy = ClientAccuracy(probe_client, data.test);
      }
      for (Family ex_family : extracted) {
        for (Scenario scenario : cfg.scenarios) {
          const Dataset* source = &data.train;
          if (scenario == Scenario::kTransfer) {
            if (!data.transfer) {
              throw InvalidArgument("transfer scenario needs a transfer corpus");
            }
            source = &*data.transfer;
          }
          for (double budget : cfg.budgets) {
            CellKey key{cfg.task.name,
                        defence.Label(),
                        std::string(FamilyName(victim_family)),
                        std::string(FamilyName(ex_family)),
                        std::string(ScenarioName(scenario)),
                        budget};
            VictimService api_service(victim, victim_vocab, defence);
            Endpoint endpoint(api_service, cfg.transport);

            MeaOptions mo;
            mo.scenario = scenario;
            mo.budget = Budget{budget};
            mo.victim_train_size = data.train.size();
            mo.corpus_name = scenario == Scenario::kTransfer ? "transfer" : "train";
            mo.arch = Architecture{ex_family, cfg.embed_dim, cfg.hidden};
            mo.train = cfg.extract_train;
            mo.vocab = cfg.vocab;
            mo.price = cfg.price;
            mo.seed = seed;
            MeaResult mea =
                RunMea(endpoint.client(), oracle, *source, data.test, mo);
            out.mea.push_back({key, seed, mea.report, defended_accuracy});

            for (AttackMode mode : cfg.attack_modes) {
              AttackOptions ao;
              ao.mode = mode;
              ao.k = cfg.attack_k;
              ao.ops = cfg.attack_ops;
              ao.gold_from_victim = cfg.gold_from_victim;
              ao.seed = MixSeed(seed, 0xa77);
              const auto adv = GenerateAll(mea.model, mea.vocab, data.test, ao,
                                           tables, &oracle);
              out.aet.push_back(
                  {key, seed,
                   MeasureTransferability(oracle, adv, mode, cfg.attack_k)});
            }
          }
        }
      }
    }
  }
  return out;
}

}  // namespace

void ExperimentConfig::Validate() const {
  if (seeds.empty()) throw InvalidArgument("seed list must be non-empty");
  if (budgets.empty()) throw InvalidArgument("budget grid must be non-empty");
  for (double b : budgets) {
    if (!(b > 0.0) || !std::isfinite(b)) {
      throw InvalidArgument("budget grid values must be > 0");
    }
  }
  if (victim_archs.empty()) throw InvalidArgument("no victim architecture");
  if (defences.empty()) throw InvalidArgument("defence grid must be non-empty");
  if (scenarios.empty()) throw InvalidArgument("no scenario");
  if (attack_ops.empty()) throw InvalidArgument("no typo operator enabled");
  for (const auto& d : defences) d.Validate();
  victim_train.Validate();
  extract_train.Validate();
  if (price.price_per_1000 < 0.0) throw InvalidArgument("negative price");
  if (task.train_path.empty() && task.test_per_class < 1) {
    throw InvalidArgument("test_per_class must be >= 1");
  }
  if (!task.train_path.empty() && task.test_path.empty()) {
    throw InvalidArgument("file task needs a test path");
  }
}

nlohmann::json ExperimentConfig::ToJson() const {
  nlohmann::json task_j = {{"name", task.name}};
  if (task.train_path.empty()) {
    const auto& s = task.synth;
    task_j["synth"] = {{"num_classes", s.num_classes},
                       {"n_per_class", s.n_per_class},
                       {"signal_tokens_per_class", s.signal_tokens_per_class},
                       {"noise_vocab", s.noise_vocab},
                       {"doc_len", s.doc_len},
                       {"max_signal", s.max_signal},
                       {"test_per_class", task.test_per_class},
                       {"transfer_docs", task.transfer_docs},
                       {"transfer_closeness", task.transfer.closeness},
                       {"transfer_signal_overlap", task.transfer.signal_overlap},
                       {"transfer_doc_len", task.transfer.doc_len},
                       {"transfer_mix_rate", task.transfer.mix_rate},
                       {"transfer_max_signal", task.transfer.max_signal}};
  } else {
    task_j["files"] = {{"train", task.train_path},
                       {"test", task.test_path},
                       {"transfer", task.transfer_path},
                       {"num_classes", task.num_classes}};
  }
  std::vector<std::string> defence_labels;
  for (const auto& d : defences) defence_labels.push_back(d.Label());
  std::vector<std::string> scenario_names;
  for (Scenario s : scenarios) scenario_names.emplace_back(ScenarioName(s));
  std::vector<std::string> op_names;
  for (TypoOp op : attack_ops) op_names.emplace_back(TypoOpName(op));
  std::vector<std::string> mode_names;
  for (AttackMode m : attack_modes) mode_names.emplace_back(AttackModeName(m));
  return {
      {"task", task_j},
      {"victim",
       {{"archs", FamilyNames(victim_archs)},
        {"embed_dim", embed_dim},
        {"hidden", hidden},
        {"train", TrainJson(victim_train)}}},
      {"extract",
       {{"archs", FamilyNames(extracted_archs)},
        {"train", TrainJson(extract_train)}}},
      {"vocab",
       {{"min_count", vocab.min_count},
        {"buckets", vocab.buckets},
        {"ngram_lo", vocab.ngram_lo},
        {"ngram_hi", vocab.ngram_hi}}},
      {"defence",
       {{"grid", defence_labels},
        {"noise_seed", defences.front().noise_seed}}},
      {"mea", {{"scenarios", scenario_names}, {"budgets", budgets}}},
      {"attack",
       {{"k", attack_k},
        {"ops", op_names},
        {"modes", mode_names},
        {"gold_from_victim", gold_from_victim}}},
      {"price", {{"name", price.name}, {"price_per_1000", price.price_per_1000}}},
      {"run",
       {{"seeds", seeds},
        {"transport", transport == Transport::kHttp ? "http" : "inprocess"},
        {"typo_tables", typo_tables_dir}}},
  };
}

ExperimentConfig ExperimentConfig::FromConfig(const KeyValueConfig& kv) {
  ExperimentConfig c;
  c.task.name = kv.GetString("task.name", c.task.name);
  if (auto p = kv.GetPath("task.train")) {
    c.task.train_path = *p;
    c.task.test_path = kv.GetPath("task.test").value_or("");
    c.task.transfer_path = kv.GetPath("task.transfer").value_or("");
    c.task.num_classes = static_cast<int>(kv.GetInt("task.num_classes", 0));
  }
  auto& s = c.task.synth;
  s.num_classes = static_cast<int>(kv.GetInt("task.num_classes", s.num_classes));
  s.n_per_class = static_cast<int>(kv.GetInt("task.n_per_class", s.n_per_class));
  s.signal_tokens_per_class = static_cast<int>(
      kv.GetInt("task.signal_tokens_per_class", s.signal_tokens_per_class));
  s.noise_vocab = static_cast<int>(kv.GetInt("task.noise_vocab", s.noise_vocab));
  s.doc_len = static_cast<int>(kv.GetInt("task.doc_len", s.doc_len));
  s.max_signal = static_cast<int>(kv.GetInt("task.max_signal", s.max_signal));
  c.task.test_per_class =
      static_cast<int>(kv.GetInt("task.test_per_class", c.task.test_per_class));
  c.task.transfer_docs = kv.GetUint("task.transfer_docs", c.task.transfer_docs);
  auto& t = c.task.transfer;
  t.closeness = kv.GetDouble("task.transfer_closeness", t.closeness);
  t.signal_overlap =
      kv.GetDouble("task.transfer_signal_overlap", t.signal_overlap);
  t.doc_len = static_cast<int>(kv.GetInt("task.transfer_doc_len", t.doc_len));
  t.mix_rate = kv.GetDouble("task.transfer_mix_rate", t.mix_rate);
  t.max_signal =
      static_cast<int>(kv.GetInt("task.transfer_max_signal", t.max_signal));

  c.victim_archs = FamiliesFrom(kv.GetList("victim.archs", {"embedbag"}));
  c.embed_dim = static_cast<int>(kv.GetInt("victim.embed_dim", c.embed_dim));
  c.hidden = static_cast<int>(kv.GetInt("victim.hidden", c.hidden));
  c.victim_train = TrainFromConfig(kv, "victim", c.victim_train);
  c.extracted_archs = FamiliesFrom(kv.GetList("extract.archs", {}));
  c.extract_train = TrainFromConfig(kv, "extract", c.extract_train);

  c.vocab.min_count = static_cast<int>(kv.GetInt("vocab.min_count", c.vocab.min_count));
  c.vocab.buckets = static_cast<int>(kv.GetInt("vocab.buckets", c.vocab.buckets));
  c.vocab.ngram_lo = static_cast<int>(kv.GetInt("vocab.ngram_lo", c.vocab.ngram_lo));
  c.vocab.ngram_hi = static_cast<int>(kv.GetInt("vocab.ngram_hi", c.vocab.ngram_hi));

  const uint64_t noise_seed = kv.GetUint("defence.noise_seed", 0);
  c.defences.clear();
  for (const auto& label : kv.GetList("defence.grid", {"none"})) {
    c.defences.push_back(DefenceConfig::Parse(label, noise_seed));
  }

  c.scenarios.clear();
  for (const auto& name : kv.GetList("mea.scenarios", {"same"})) {
    c.scenarios.push_back(ParseScenario(name));
  }
  c.budgets.clear();
  for (const auto& b : kv.GetList("mea.budgets", {"1.0"})) {
    c.budgets.push_back(std::stod(b));
  }

  c.attack_k = static_cast<int>(kv.GetInt("attack.k", c.attack_k));
  c.attack_ops = ParseTypoOps(kv.GetString("attack.ops", "all"));
  c.attack_modes.clear();
  for (const auto& m : kv.GetList("attack.modes", {"whitebox", "random"})) {
    c.attack_modes.push_back(ParseAttackMode(m));
  }
  c.gold_from_victim = kv.GetInt("attack.gold_from_victim", 0) != 0;

  c.price.name = kv.GetString("price.name", c.price.name);
  c.price.price_per_1000 = kv.GetDouble("price.price_per_1000", c.price.price_per_1000);

  c.seeds.clear();
  for (const auto& s_str : kv.GetList("run.seeds", {"0"})) {
    c.seeds.push_back(std::stoull(s_str));
  }
  c.output_dir = kv.GetPath("run.output_dir").value_or(
      (kv.base_dir() / "out").lexically_normal().string());
  const std::string transport = kv.GetString("run.transport", "inprocess");
  if (transport == "http") {
    c.transport = Transport::kHttp;
  } else if (transport != "inprocess") {
    throw InvalidArgument("unknown transport: " + transport);
  }
  c.typo_tables_dir = kv.GetPath("attack.typo_tables").value_or("");
  c.Validate();
  return c;
}

ExperimentConfig ExperimentConfig::Load(const std::string& path) {
  return FromConfig(KeyValueConfig::Load(path));
}

std::string ConfigHash(const ExperimentConfig& cfg) {
  const std::string canon = cfg.ToJson().dump();
  return HexDigest(Fnv1a(canon));
}

double EstimateCost(long long n_queries, const PriceSheet& sheet) {
  if (n_queries < 0) throw InvalidArgument("query count must be >= 0");
  return BilledCost(static_cast<uint64_t>(n_queries), sheet);
}

Stat Summarize(const std::vector<double>& values) {
  Stat s;
  s.n = values.size();
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

const MeaCell* Report::FindMea(const CellKey& key) const {
  for (const auto& c : mea) {
    if (c.key == key) return &c;
  }
  return nullptr;
}

const AetCell* Report::FindAet(const CellKey& key, std::string_view mode) const {
  for (const auto& c : aet) {
    if (c.key == key && c.mode == mode) return &c;
  }
  return nullptr;
}

void Aggregate(Report& r) {
  struct MeaAcc {
    std::vector<double> victim, defended, extracted, agreement, queries, cost;
  };
  std::map<CellKey, MeaAcc> mea;
  for (const auto& rec : r.mea_raw) {
    auto& a = mea[rec.key];
    a.victim.push_back(rec.report.victim_accuracy);
    a.defended.push_back(rec.defended_victim_accuracy);
    a.extracted.push_back(rec.report.extracted_accuracy);
    a.agreement.push_back(rec.report.agreement);
    a.queries.push_back(static_cast<double>(rec.report.query_count));
    a.cost.push_back(rec.report.cost);
  }
  r.mea.clear();
  for (const auto& [key, a] : mea) {
    r.mea.push_back({key, Summarize(a.victim), Summarize(a.defended),
                     Summarize(a.extracted), Summarize(a.agreement),
                     Summarize(a.queries), Summarize(a.cost)});
  }
  std::map<std::pair<CellKey, std::string>, std::vector<double>> aet;
  for (const auto& rec : r.aet_raw) {
    aet[{rec.key, std::string(AttackModeName(rec.report.mode))}].push_back(
        rec.report.transferability);
  }
  r.aet.clear();
  for (const auto& [k, v] : aet) r.aet.push_back({k.first, k.second, Summarize(v)});
}

Report RunExperiment(const ExperimentConfig& cfg) {
  cfg.Validate();
  const TypoTables tables = LoadTables(cfg.typo_tables_dir);
  Report r;
  r.config = cfg.ToJson();
  r.config_hash = ConfigHash(cfg);
  // Seeds are independent jobs; they run sequentially so that HTTP ports
  // and meters never interleave.
  for (uint64_t seed : cfg.seeds) {
    try {
      SeedResult s = RunSeed(cfg, seed, tables);
      r.mea_raw.insert(r.mea_raw.end(), s.mea.begin(), s.mea.end());
      r.aet_raw.insert(r.aet_raw.end(), s.aet.begin(), s.aet.end());
      r.seeds_ok.push_back(seed);
    } catch (const std::exception& e) {
      r.failures.push_back({seed, e.what()});
    }
  }
  if (r.seeds_ok.empty()) {
    std::string msg = "no seed completed";
    if (!r.failures.empty()) msg += ": " + r.failures.front().message;
    throw Error(msg);
  }
  Aggregate(r);
  return r;
}

}  // namespace etlab
