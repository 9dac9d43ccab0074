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

// `lab`: command-line front end for the extraction/transfer lab.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "etlab/advgen.h"
#include "etlab/extraction.h"
#include "etlab/harness.h"
#include "etlab/victim.h"

namespace {

using namespace etlab;

void WriteJson(const nlohmann::json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw Error("cannot write " + path);
}

Dataset LoadAny(const std::string& path, Split split, int k = 0) {
  return LoadDataset(path, FormatFromPath(path), k, split);
}

HttpServer* g_server = nullptr;

void OnSignal(int) {
  if (g_server) g_server->Stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model extraction and adversarial transfer lab"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic task");
  std::string synth_dir = "data/synth";
  uint64_t synth_seed = 0;
  SynthOptions so;
  int synth_test = 100;
  size_t synth_transfer = 2000;
  synth->add_option("--out-dir", synth_dir, "Output directory");
  synth->add_option("--seed", synth_seed);
  synth->add_option("--classes", so.num_classes);
  synth->add_option("--n-per-class", so.n_per_class);
  synth->add_option("--test-per-class", synth_test);
  synth->add_option("--transfer-docs", synth_transfer);
  synth->add_option("--doc-len", so.doc_len);

  // train
  auto* train = app.add_subcommand("train", "Train a victim model");
  std::string train_path, model_out = "victim.ckpt", vocab_out = "victim.vocab";
  std::string train_arch = "embedbag";
  uint64_t train_seed = 0;
  TrainConfig train_cfg;
  train->add_option("--train", train_path, "Labeled training data")->required();
  train->add_option("--arch", train_arch);
  train->add_option("--seed", train_seed);
  train->add_option("--epochs", train_cfg.epochs);
  train->add_option("--lr", train_cfg.learning_rate);
  train->add_option("--model-out", model_out);
  train->add_option("--vocab-out", vocab_out);

  // serve
  auto* serve = app.add_subcommand("serve", "Serve a victim over HTTP");
  std::string serve_config;
  serve->add_option("--config", serve_config)->required();

  // extract
  auto* extract = app.add_subcommand("extract", "Run model extraction");
  std::string victim_url, scenario = "same", corpus, test_path, mea_out;
  std::string ex_arch = "embedbag", ex_model_out, ex_vocab_out;
  double budget = 1.0, price = 1.0;
  uint64_t ex_seed = 0;
  size_t victim_train_size = 0;
  extract->add_option("--victim-url", victim_url)->required();
  extract->add_option("--scenario", scenario);
  extract->add_option("--corpus", corpus, "Query source")->required();
  extract->add_option("--test", test_path, "Labeled evaluation set")->required();
  extract->add_option("--budget", budget);
  extract->add_option("--victim-train-size", victim_train_size,
                      "Defaults to the corpus size");
  extract->add_option("--arch", ex_arch);
  extract->add_option("--seed", ex_seed);
  extract->add_option("--price-per-1k", price);
  extract->add_option("--out", mea_out);
  extract->add_option("--model-out", ex_model_out);
  extract->add_option("--vocab-out", ex_vocab_out);

  // attack
  auto* attack = app.add_subcommand("attack", "Craft and transfer typo examples");
  std::string at_model, at_vocab, at_url, at_data, at_ops = "all";
  std::string at_mode = "whitebox", at_out, at_examples;
  int at_k = -1;
  uint64_t at_seed = 0;
  attack->add_option("--extracted", at_model)->required();
  attack->add_option("--vocab", at_vocab)->required();
  attack->add_option("--victim-url", at_url)->required();
  attack->add_option("--dataset", at_data)->required();
  attack->add_option("--k", at_k, "Corruption budget; default 15% of tokens");
  attack->add_option("--ops", at_ops);
  attack->add_option("--mode", at_mode);
  attack->add_option("--seed", at_seed);
  attack->add_option("--out", at_out);
  attack->add_option("--examples-out", at_examples);

  // run
  auto* run = app.add_subcommand("run", "Run a full experiment");
  std::string run_config, run_out;
  run->add_option("--config", run_config)->required();
  run->add_option("--out", run_out, "Overrides run.output_dir");

  // cost
  auto* cost = app.add_subcommand("cost", "Estimate query cost");
  long long queries = 0;
  double cost_price = 1.0;
  cost->add_option("--queries", queries)->required();
  cost->add_option("--price-per-1k", cost_price);

  // report
  auto* report = app.add_subcommand("report", "Render a stored report");
  std::string report_in, report_format = "md";
  report->add_option("--in", report_in, "report.json or its directory")->required();
  report->add_option("--format", report_format);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      const auto lex = MakeLexicon(so.num_classes, so.signal_tokens_per_class,
                                   so.noise_vocab, synth_seed);
      std::filesystem::create_directories(synth_dir);
      const std::filesystem::path dir(synth_dir);
      SaveDataset(GenSynth(lex, so, synth_seed, Split::kTrain, "s"),
                  (dir / "train.jsonl").string(), DataFormat::kJsonl);
      SynthOptions test_opts = so;
      test_opts.n_per_class = synth_test;
      SaveDataset(GenSynth(lex, test_opts, synth_seed, Split::kTest, "e"),
                  (dir / "test.jsonl").string(), DataFormat::kJsonl);
      SaveDataset(GenTransferCorpus(lex, synth_transfer, {}, synth_seed),
                  (dir / "transfer.jsonl").string(), DataFormat::kJsonl);
      std::cout << "wrote " << synth_dir << "/{train,test,transfer}.jsonl\n";
    } else if (*train) {
      const Dataset data = LoadAny(train_path, Split::kTrain);
      const Vocab vocab = BuildVocab(data);
      std::vector<TrainExample> ex;
      for (const auto& d : data.docs()) {
        ex.push_back({EncodeText(vocab, d.text, d.id), *d.label});
      }
      train_cfg.seed = train_seed;
      const Architecture arch{ParseFamily(train_arch)};
      const Model m = Train(InitModel(arch, vocab, data.num_classes(), train_seed),
                            std::span<const TrainExample>(ex), train_cfg);
      SaveModel(m, model_out);
      vocab.Save(vocab_out);
      std::cout << "train accuracy " << EvaluateAccuracy(m, data, vocab) << '\n';
    } else if (*serve) {
      const auto sc = ServiceConfig::FromConfig(KeyValueConfig::Load(serve_config));
      const Vocab vocab = Vocab::Load(sc.vocab_path);
      VictimService service(LoadModel(sc.model_path, vocab), vocab, sc.defence);
      HttpServer server(service, sc.meter_file);
      const int port = server.Bind(sc.host, sc.port);
      std::cout << "serving on http://" << sc.host << ':' << port << " ("
                << sc.defence.Label() << ")" << std::endl;
      g_server = &server;
      std::signal(SIGINT, OnSignal);
      std::signal(SIGTERM, OnSignal);
      server.Listen();
      g_server = nullptr;
    } else if (*extract) {
      const Dataset source = LoadAny(corpus, Split::kPool);
      const Dataset test = LoadAny(test_path, Split::kTest);
      HttpClient api(victim_url);
      MeaOptions mo;
      mo.scenario = ParseScenario(scenario);
      mo.budget = Budget{budget};
      mo.victim_train_size = victim_train_size;
      mo.corpus_name = std::filesystem::path(corpus).stem().string();
      mo.arch = Architecture{ParseFamily(ex_arch)};
      mo.price.price_per_1000 = price;
      mo.seed = ex_seed;
      // Evaluation queries go through the same endpoint after the meter
      // delta has been taken.
      MeaResult r = RunMea(api, api, source, test, mo);
      WriteJson(ToJson(r.report), mea_out);
      if (!ex_model_out.empty()) SaveModel(r.model, ex_model_out);
      if (!ex_vocab_out.empty()) r.vocab.Save(ex_vocab_out);
    } else if (*attack) {
      const Vocab vocab = Vocab::Load(at_vocab);
      const Model model = LoadModel(at_model, vocab);
      const Dataset data = LoadAny(at_data, Split::kTest);
      HttpClient victim(at_url);
      AttackOptions ao;
      ao.mode = ParseAttackMode(at_mode);
      ao.k = at_k;
      ao.ops = ParseTypoOps(at_ops);
      ao.seed = at_seed;
      const TypoTables tables = TypoTables::Builtin();
      const auto adv = GenerateAll(model, vocab, data, ao, tables);
      WriteJson(ToJson(MeasureTransferability(victim, adv, ao.mode, at_k)), at_out);
      if (!at_examples.empty()) {
        std::ofstream out(at_examples);
        for (const auto& e : adv) out << ToJson(e).dump() << '\n';
      }
    } else if (*run) {
      ExperimentConfig cfg = ExperimentConfig::Load(run_config);
      if (!run_out.empty()) cfg.output_dir = run_out;
      const Report r = RunExperiment(cfg);
      for (const auto& f : r.failures) {
        std::cerr << "seed " << f.seed << " failed: " << f.message << '\n';
      }
      for (const auto& path :
           EmitReport(r, {ReportFormat::kJson, ReportFormat::kCsv, ReportFormat::kMarkdown},
                      cfg.output_dir)) {
        std::cout << "wrote " << path << '\n';
      }
    } else if (*cost) {
      const PriceSheet sheet{"custom", cost_price};
      std::cout << FormatDollars(RoundToTenth(EstimateCost(queries, sheet))) << '\n';
    } else if (*report) {
      std::cout << Render(LoadReportJson(report_in), ParseReportFormat(report_format));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
