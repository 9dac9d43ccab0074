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

// Acceptance suite: one PASS/FAIL line per criterion A1-A11. Exits
// non-zero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "etlab/advgen.h"
#include "etlab/harness.h"
#include "oracles.h"

namespace etlab {
namespace {

namespace fs = std::filesystem;

const std::vector<uint64_t> kSeeds = {0, 1, 2, 3, 4};

int g_failures = 0;

void Verdict(const char* id, bool ok, const std::string& detail) {
  std::printf("%s %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string Fmt(const char* fmt, double a, double b = 0, double c = 0,
                double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, a, b, c, d);
  return buf;
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since)
      .count();
}

CellKey Key(const std::string& victim, const std::string& extracted,
            const std::string& scenario, double budget,
            const std::string& defence = "none") {
  return {"synth", defence, victim, extracted, scenario, budget};
}

const MeaCell& Mea(const Report& r, const CellKey& k) {
  const MeaCell* c = r.FindMea(k);
  if (!c) throw Error("missing MEA cell " + k.victim_arch + "->" + k.extracted_arch);
  return *c;
}

double Aet(const Report& r, const CellKey& k, const char* mode) {
  const AetCell* c = r.FindAet(k, mode);
  if (!c) throw Error("missing AET cell");
  return c->transferability.mean;
}

// Runs a check, turning exceptions into a FAIL line.
void Check(const char* id, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    Verdict(id, false, std::string("error: ") + e.what());
  }
}

ExperimentConfig Base() {
  ExperimentConfig c;  // K=4, 250 docs per class: 1,000 training documents
  c.seeds = kSeeds;
  return c;
}

void A1() {
  Check("A1", [] {
    ExperimentConfig c = Base();
    c.attack_modes = {AttackMode::kWhiteboxSaliency};
    const auto t0 = std::chrono::steady_clock::now();
    const Report r = RunExperiment(c);
    const double secs = Seconds(t0);
    const MeaCell& m = Mea(r, Key("embedbag", "embedbag", "same", 1.0));
    const double ratio = m.extracted_accuracy.mean / m.victim_accuracy.mean;
    Verdict("A1",
            ratio >= 0.9 && m.agreement.mean >= 0.9 && secs < 60.0 &&
                r.seeds_ok.size() == kSeeds.size(),
            Fmt("extracted/victim=%.4f (>=0.9) agreement=%.4f (>=0.9) "
                "runtime=%.1fs (<60)",
                ratio, m.agreement.mean, secs));
  });
}

// Both families as victim and as extracted model, both query sources, 1x.
void ArchitectureGrid() {
  Report r;
  try {
    ExperimentConfig c = Base();
    c.victim_archs = {Family::kEmbedBag, Family::kMlp};
    c.extracted_archs = {Family::kEmbedBag, Family::kMlp};
    c.scenarios = {Scenario::kSameDistribution, Scenario::kTransfer};
    r = RunExperiment(c);
  } catch (const std::exception& e) {
    for (const char* id : {"A3", "A4", "A7"}) {
      Verdict(id, false, std::string("error: ") + e.what());
    }
    return;
  }

  Check("A3", [&] {
    bool ok = true;
    std::string detail;
    for (const char* v : {"embedbag", "mlp"}) {
      const double same = Mea(r, Key(v, v, "same", 1.0)).extracted_accuracy.mean;
      const double transfer =
          Mea(r, Key(v, v, "transfer", 1.0)).extracted_accuracy.mean;
      ok &= same >= transfer - 0.01;
      detail += std::string(v) + Fmt(": same=%.4f transfer=%.4f  ", same, transfer);
    }
    Verdict("A3", ok, detail + "(same >= transfer - 0.01)");
  });

  Check("A4", [&] {
    bool ok = true;
    std::string detail;
    for (const char* s : {"same", "transfer"}) {
      const CellKey k = Key("embedbag", "embedbag", s, 1.0);
      const double wb = Aet(r, k, "whitebox");
      const double rnd = Aet(r, k, "random");
      ok &= wb >= rnd + 0.10;
      detail += std::string(s) + Fmt(": whitebox=%.4f random=%.4f  ", wb, rnd);
    }
    Verdict("A4", ok, detail + "(whitebox >= random + 0.10)");
  });

  Check("A7", [&] {
    bool ok = true;
    std::string detail;
    for (const char* s : {"same", "transfer"}) {
      for (auto [v, e] : {std::pair{"embedbag", "mlp"}, std::pair{"mlp", "embedbag"}}) {
        const MeaCell& m = Mea(r, Key(v, e, s, 1.0));
        const double ratio = m.extracted_accuracy.mean / m.victim_accuracy.mean;
        ok &= ratio >= 0.85;
        detail += std::string(s) + " " + v + "->" + e + Fmt(": %.3f  ", ratio);
      }
    }
    // Matched vs mismatched transferability, transfer queries at 1x,
    // averaged over both victim families.
    auto wb = [&](const char* v, const char* e) {
      return Aet(r, Key(v, e, "transfer", 1.0), "whitebox");
    };
    const double matched = (wb("embedbag", "embedbag") + wb("mlp", "mlp")) / 2.0;
    const double mismatched = (wb("embedbag", "mlp") + wb("mlp", "embedbag")) / 2.0;
    ok &= matched >= mismatched;
    Verdict("A7", ok,
            "cross-family extracted/victim " + detail + "(>=0.85); " +
                Fmt("AET matched=%.4f mismatched=%.4f", matched, mismatched));
  });
}

// No defence, hard labels and the strongest perturbation, over the budget
// grid with transfer queries.
void DefenceGrid() {
  Report r;
  try {
    ExperimentConfig c = Base();
    c.defences = {DefenceConfig::None(), DefenceConfig::Soften(0.0),
                  DefenceConfig::Perturb(0.5, 0)};
    c.scenarios = {Scenario::kTransfer};
    c.budgets = {0.1, 0.5, 1.0, 5.0};
    r = RunExperiment(c);
  } catch (const std::exception& e) {
    for (const char* id : {"A2", "A5", "A6"}) {
      Verdict(id, false, std::string("error: ") + e.what());
    }
    return;
  }
  const std::string eb = "embedbag";

  Check("A2", [&] {
    std::vector<double> acc;
    std::string detail;
    for (double b : {0.1, 0.5, 1.0, 5.0}) {
      acc.push_back(Mea(r, Key(eb, eb, "transfer", b)).extracted_accuracy.mean);
      detail += Fmt("%gx=%.4f ", b, acc.back());
    }
    bool ok = acc.back() >= acc.front();
    for (size_t i = 1; i < acc.size(); ++i) ok &= acc[i] >= acc[i - 1] - 0.02;
    Verdict("A2", ok, detail + "(5x >= 0.1x, steps within 0.02)");
  });

  const CellKey none = Key(eb, eb, "transfer", 1.0, "none");
  const CellKey hard = Key(eb, eb, "transfer", 1.0, "soften:0");
  const CellKey noisy = Key(eb, eb, "transfer", 1.0, "perturb:0.5");

  Check("A5", [&] {
    const double ag_none = Mea(r, none).agreement.mean;
    const double ag_hard = Mea(r, hard).agreement.mean;
    const double t_none = Aet(r, none, "whitebox");
    const double t_hard = Aet(r, hard, "whitebox");
    Verdict("A5", ag_hard <= ag_none && t_hard <= t_none + 0.02,
            Fmt("agreement tau=0 %.4f <= none %.4f; AET tau=0 %.4f <= none "
                "%.4f + 0.02",
                ag_hard, ag_none, t_hard, t_none));
  });

  Check("A6", [&] {
    const double v_none = Mea(r, none).defended_victim_accuracy.mean;
    const double v_noisy = Mea(r, noisy).defended_victim_accuracy.mean;
    const double t_none = Aet(r, none, "whitebox");
    const double t_noisy = Aet(r, noisy, "whitebox");
    Verdict("A6", v_noisy <= v_none - 0.05 && t_noisy < t_none,
            Fmt("defended victim %.4f vs %.4f (drop >= 0.05); AET %.4f < %.4f",
                v_noisy, v_none, t_noisy, t_none));
  });
}

void A8() {
  Check("A8", [] {
    struct Row {
      long long q;
      double price;
      const char* want;
    };
    const Row rows[] = {{22142, 1.0, "$22.1"},   {520000, 1.0, "$520.0"},
                        {112000, 1.0, "$112.0"}, {7098, 1.0, "$7.1"},
                        {7098, 3.0, "$21.3"},    {112000, 3.0, "$336.0"},
                        {520000, 3.0, "$1,560.0"}};
    bool ok = true;
    std::string detail;
    for (const auto& row : rows) {
      const std::string got =
          FormatDollars(EstimateCost(row.q, PriceSheet{"p", row.price}));
      ok &= got == row.want;
      detail += got + " ";
    }
    Verdict("A8", ok, detail);
  });
}

void A9() {
  Check("A9", [] {
    double worst = 0.0;
    int mlp = 0;
    for (uint64_t seed = 0; seed < 100; ++seed) {
      const oracle::Case c = oracle::RandomCase(0xa9000 + seed);
      mlp += c.model.arch.family == Family::kMlp;
      worst = std::max(worst, oracle::GradientError(c.model, c.doc, c.gold));
    }
    Verdict("A9", worst < 1e-5,
            Fmt("max relative error %.3g over 100 cases (%.0f mlp) (<1e-5)", worst,
                mlp));
  });
}

Eigen::VectorXd RandomLogits(Rng& rng, int k, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  Eigen::VectorXd z(k);
  for (int i = 0; i < k; ++i) z(i) = n(rng);
  return z;
}

void A10() {
  Check("A10", [] {
    Rng rng(0xa10);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::string> broken;

    // Simplex validity of every defence output.
    for (int t = 0; t < 10000; ++t) {
      const int k = 2 + static_cast<int>(UniformIndex(rng, 6));
      const auto z = RandomLogits(rng, k, 0.1 + 10.0 * unit(rng));
      DefenceConfig d;
      switch (t % 3) {
        case 0:
          d = DefenceConfig::None();
          break;
        case 1:
          d = DefenceConfig::Soften(t % 7 == 0 ? 0.0 : 10.0 * unit(rng));
          break;
        default:
          d = DefenceConfig::Perturb(unit(rng), t);
      }
      const auto p = ApplyDefence(z, d, static_cast<uint64_t>(t));
      if (!LabelDistribution::IsValid(p.probs()) || p.probs().minCoeff() < 0.0) {
        broken.push_back("simplex");
        break;
      }
    }

    // Argmax invariance and monotone max-probability in tau.
    for (int t = 0; t < 2000; ++t) {
      const auto z = RandomLogits(rng, 2 + t % 5, 3.0);
      const int top = Argmax(z);
      double prev = 1.0;
      for (double tau : {0.05, 0.2, 0.5, 1.0, 2.0, 5.0, 50.0}) {
        const auto p = Softmax(z, tau);
        if (p.argmax() != top) broken.push_back("argmax");
        const double mx = p.probs().maxCoeff();
        if (mx > prev + 1e-15) broken.push_back("monotone");
        prev = mx;
      }
    }

    // KL >= 0, zero exactly on equal inputs.
    std::gamma_distribution<double> g(0.5, 1.0);
    for (int t = 0; t < 2000; ++t) {
      const int k = 2 + t % 5;
      Eigen::VectorXd a(k), b(k);
      for (int i = 0; i < k; ++i) {
        a(i) = g(rng) + 1e-9;
        b(i) = g(rng) + 1e-9;
      }
      a /= a.sum();
      b /= b.sum();
      const LabelDistribution p(a), q(b);
      if (KlDivergence(p, q) < 0.0) broken.push_back("kl>=0");
      if (KlDivergence(p, p) != 0.0) broken.push_back("kl(p,p)=0");
      if (!(p == q) && !(KlDivergence(p, q) > 0.0)) broken.push_back("kl>0");
    }

    // Soft KL on one-hot targets is hard CE, bit for bit.
    const SynthOptions so{.num_classes = 4, .n_per_class = 60};
    const Dataset data = GenSynth(so, 10);
    const Vocab vocab = BuildVocab(data);
    std::vector<TrainExample> hard, soft;
    for (const auto& d : data.docs()) {
      hard.push_back({EncodeText(vocab, d.text), *d.label});
      soft.push_back({EncodeText(vocab, d.text), LabelDistribution::OneHot(4, *d.label)});
    }
    for (Family f : {Family::kEmbedBag, Family::kMlp}) {
      const Model m0 = InitModel(Architecture{f}, vocab, 4, 1);
      TrainConfig hc{.epochs = 3, .seed = 2};
      TrainConfig sc = hc;
      sc.loss = LossKind::kSoftKl;
      if (!(Train(m0, std::span<const TrainExample>(hard), hc) ==
            Train(m0, std::span<const TrainExample>(soft), sc))) {
        broken.push_back("soft==hard");
      }
    }

    // Budget and operator soundness over 1,000 generated examples.
    const SynthLexicon lex = MakeLexicon(4, 12, 300, 77);
    const Dataset train = GenSynth(lex, SynthOptions{}, 77, Split::kTrain, "s");
    SynthOptions to;
    to.n_per_class = 125;
    const Dataset test = GenSynth(lex, to, 77, Split::kTest, "e");
    const Vocab tv = BuildVocab(train);
    std::vector<TrainExample> ex;
    for (const auto& d : train.docs()) ex.push_back({EncodeText(tv, d.text), *d.label});
    const Model model = Train(InitModel(Architecture{}, tv, 4, 77),
                              std::span<const TrainExample>(ex), TrainConfig{});
    const TypoTables tables = TypoTables::Builtin();
    size_t replayed = 0, corrupted = 0;
    for (AttackMode mode : {AttackMode::kWhiteboxSaliency, AttackMode::kRandomBaseline}) {
      AttackOptions ao;
      ao.mode = mode;
      ao.seed = 5;
      for (const auto& e : GenerateAll(model, tv, test, ao, tables)) {
        ++replayed;
        corrupted += e.corrupted_positions.size();
        const int k = DefaultCorruptionBudget(SplitTokens(e.original.text).size());
        if (!VerifyExample(e, k, tables)) broken.push_back("replay " + e.original.id);
        for (size_t i = 0; i < e.ops_used.size(); ++i) {
          const auto& a = e.original_tokens[i];
          const auto& b = e.corrupted_tokens[i];
          const bool len_ok =
              (e.ops_used[i] == TypoOp::kInsertion && b.size() == a.size() + 1) ||
              (e.ops_used[i] == TypoOp::kDeletion && b.size() + 1 == a.size()) ||
              (e.ops_used[i] == TypoOp::kSwap && b.size() == a.size()) ||
              (e.ops_used[i] != TypoOp::kInsertion &&
               e.ops_used[i] != TypoOp::kDeletion && e.ops_used[i] != TypoOp::kSwap);
          if (!len_ok || a == b) broken.push_back("operator " + a + "->" + b);
        }
      }
    }

    std::string detail =
        Fmt("10000 defence trials, %.0f adversarial examples replayed "
            "(%.0f corruptions)",
            static_cast<double>(replayed), static_cast<double>(corrupted));
    if (!broken.empty()) detail += "; first violation: " + broken.front();
    Verdict("A10", broken.empty() && replayed >= 1000, detail);
  });
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void A11() {
  Check("A11", [] {
    ExperimentConfig c = Base();
    c.seeds = {0, 1};
    c.defences = {DefenceConfig::None(), DefenceConfig::Perturb(0.2, 3)};
    c.scenarios = {Scenario::kSameDistribution, Scenario::kTransfer};
    c.budgets = {0.5, 1.0};
    const fs::path root = fs::temp_directory_path() / "etlab_acceptance_a11";
    fs::remove_all(root);
    bool ok = true;
    std::string detail;
    for (Transport t : {Transport::kHttp, Transport::kInProcess}) {
      c.transport = t;
      const std::string name = t == Transport::kHttp ? "http" : "inprocess";
      const fs::path a = root / (name + "_1"), b = root / (name + "_2");
      EmitReport(RunExperiment(c), {ReportFormat::kJson}, a.string());
      EmitReport(RunExperiment(c), {ReportFormat::kJson}, b.string());
      const std::string ja = Slurp(a / "report.json");
      const bool same = !ja.empty() && ja == Slurp(b / "report.json");
      ok &= same;
      detail += name + (same ? ": identical " : ": DIFFER ") +
                std::to_string(ja.size()) + " bytes  ";
    }
    fs::remove_all(root);
    Verdict("A11", ok, detail);
  });
}

}  // namespace
}  // namespace etlab

int main() {
  using namespace etlab;
  const auto t0 = std::chrono::steady_clock::now();
  A1();
  ArchitectureGrid();
  DefenceGrid();
  A8();
  A9();
  A10();
  A11();
  std::printf("acceptance: %d failure(s), %.1fs\n", g_failures, Seconds(t0));
  return g_failures == 0 ? 0 : 1;
}
