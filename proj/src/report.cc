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

// Report serialization: JSON (raw + aggregates), long-format CSV and
// markdown tables.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "etlab/harness.h"

namespace etlab {
namespace {

nlohmann::json KeyJson(const CellKey& k) {
  return {{"task", k.task},
          {"defence", k.defence},
          {"victim_arch", k.victim_arch},
          {"extracted_arch", k.extracted_arch},
          {"scenario", k.scenario},
          {"budget", k.budget}};
}

CellKey KeyFromJson(const nlohmann::json& j) {
  return {j.at("task").get<std::string>(),
          j.at("defence").get<std::string>(),
          j.at("victim_arch").get<std::string>(),
          j.at("extracted_arch").get<std::string>(),
          j.at("scenario").get<std::string>(),
          j.at("budget").get<double>()};
}

nlohmann::json StatJson(const Stat& s) {
  return {{"n", s.n}, {"mean", s.mean}, {"std", s.stddev}};
}

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string Pct(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * rate);
  return buf;
}

std::string PctPm(const Stat& s) {
  return Pct(s.mean) + " ± " + Pct(s.stddev);
}

std::string BudgetLabel(double b) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%gx", b);
  return buf;
}

// "none" -> "No def.", "soften:0.5" -> "soft. (τ=0.5)",
// "perturb:0.2" -> "pert. (σ=0.20)".
std::string DefenceDisplay(const std::string& label) {
  const auto d = DefenceConfig::Parse(label);
  char buf[64];
  switch (d.kind) {
    case DefenceConfig::Kind::kNone:
      return "No def.";
    case DefenceConfig::Kind::kSoften:
      std::snprintf(buf, sizeof(buf), "soft. (τ=%.1f)", d.tau);
      return buf;
    case DefenceConfig::Kind::kPerturb:
      std::snprintf(buf, sizeof(buf), "pert. (σ=%.2f)", d.sigma);
      return buf;
  }
  return label;
}

bool IsNoDefence(const std::string& label) { return label == "none"; }

std::string Arrow(const CellKey& k) {
  return k.victim_arch + "→" + k.extracted_arch;
}

void Row(std::ostringstream& os, const std::vector<std::string>& cells) {
  os << '|';
  for (const auto& c : cells) os << ' ' << c << " |";
  os << '\n';
}

void Header(std::ostringstream& os, const std::vector<std::string>& cells) {
  Row(os, cells);
  os << '|';
  for (size_t i = 0; i < cells.size(); ++i) os << " --- |";
  os << '\n';
}

std::string CsvEscape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::string> CsvSplit(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::string ReadFile(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

nlohmann::json ReportToJson(const Report& r) {
  nlohmann::json mea_raw = nlohmann::json::array();
  for (const auto& rec : r.mea_raw) {
    mea_raw.push_back({{"key", KeyJson(rec.key)},
                       {"seed", rec.seed},
                       {"report", ToJson(rec.report)},
                       {"defended_victim_accuracy", rec.defended_victim_accuracy}});
  }
  nlohmann::json aet_raw = nlohmann::json::array();
  for (const auto& rec : r.aet_raw) {
    aet_raw.push_back(
        {{"key", KeyJson(rec.key)}, {"seed", rec.seed}, {"report", ToJson(rec.report)}});
  }
  nlohmann::json mea = nlohmann::json::array();
  for (const auto& c : r.mea) {
    mea.push_back({{"key", KeyJson(c.key)},
                   {"victim_accuracy", StatJson(c.victim_accuracy)},
                   {"defended_victim_accuracy", StatJson(c.defended_victim_accuracy)},
                   {"extracted_accuracy", StatJson(c.extracted_accuracy)},
                   {"agreement", StatJson(c.agreement)},
                   {"query_count", StatJson(c.query_count)},
                   {"cost", StatJson(c.cost)}});
  }
  nlohmann::json aet = nlohmann::json::array();
  for (const auto& c : r.aet) {
    aet.push_back({{"key", KeyJson(c.key)},
                   {"mode", c.mode},
                   {"transferability", StatJson(c.transferability)}});
  }
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : r.failures) {
    failures.push_back({{"seed", f.seed}, {"error", f.message}});
  }
  return {{"config_hash", r.config_hash},
          {"config", r.config},
          {"seeds_ok", r.seeds_ok},
          {"failures", failures},
          {"raw", {{"mea", mea_raw}, {"aet", aet_raw}}},
          {"aggregate", {{"mea", mea}, {"aet", aet}}}};
}

Report ReportFromJson(const nlohmann::json& j) {
  try {
    Report r;
    r.config_hash = j.at("config_hash").get<std::string>();
    r.config = j.at("config");
    r.seeds_ok = j.at("seeds_ok").get<std::vector<uint64_t>>();
    for (const auto& f : j.at("failures")) {
      r.failures.push_back({f.at("seed").get<uint64_t>(),
                            f.at("error").get<std::string>()});
    }
    for (const auto& m : j.at("raw").at("mea")) {
      MeaRecord rec;
      rec.key = KeyFromJson(m.at("key"));
      rec.seed = m.at("seed").get<uint64_t>();
      rec.defended_victim_accuracy = m.at("defended_victim_accuracy").get<double>();
      const auto& p = m.at("report");
      rec.report.scenario = p.at("scenario").get<std::string>();
      rec.report.corpus_name = p.at("corpus").get<std::string>();
      rec.report.arch = p.at("arch").get<std::string>();
      rec.report.budget = p.at("budget").get<double>();
      rec.report.victim_accuracy = p.at("victim_accuracy").get<double>();
      rec.report.extracted_accuracy = p.at("extracted_accuracy").get<double>();
      rec.report.agreement = p.at("agreement").get<double>();
      rec.report.query_count = p.at("query_count").get<uint64_t>();
      rec.report.cost = p.at("cost").get<double>();
      rec.report.with_replacement = p.at("with_replacement").get<bool>();
      rec.report.seed = p.at("seed").get<uint64_t>();
      r.mea_raw.push_back(std::move(rec));
    }
    for (const auto& a : j.at("raw").at("aet")) {
      AetRecord rec;
      rec.key = KeyFromJson(a.at("key"));
      rec.seed = a.at("seed").get<uint64_t>();
      const auto& p = a.at("report");
      rec.report.mode = ParseAttackMode(p.at("mode").get<std::string>());
      rec.report.k = p.at("k").get<int>();
      rec.report.examples = p.at("examples").get<size_t>();
      rec.report.misclassified = p.at("misclassified").get<size_t>();
      rec.report.transferability = p.at("transferability").get<double>();
      rec.report.op_counts =
          p.at("op_counts").get<std::map<std::string, size_t>>();
      r.aet_raw.push_back(std::move(rec));
    }
    Aggregate(r);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what());
  }
}

Report LoadReportJson(const std::string& path) {
  std::filesystem::path p(path);
  if (std::filesystem::is_directory(p)) p /= "report.json";
  std::ifstream in(p);
  if (!in) throw Error("cannot open " + p.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(p.string() + ": " + e.what());
  }
  return ReportFromJson(j);
}

std::string RenderCsv(const Report& r) {
  std::ostringstream os;
  os << "# config_hash=" << r.config_hash << '\n';
  os << "kind,task,defence,victim_arch,extracted_arch,scenario,budget,mode,"
        "metric,n,mean,std\n";
  auto line = [&](const char* kind, const CellKey& k, const std::string& mode,
                  const char* metric, const Stat& s) {
    os << kind << ',' << CsvEscape(k.task) << ',' << CsvEscape(k.defence) << ','
       << k.victim_arch << ',' << k.extracted_arch << ',' << k.scenario << ','
       << Num(k.budget) << ',' << mode << ',' << metric << ',' << s.n << ','
       << Num(s.mean) << ',' << Num(s.stddev) << '\n';
  };
  for (const auto& c : r.mea) {
    line("mea", c.key, "", "victim_accuracy", c.victim_accuracy);
    line("mea", c.key, "", "defended_victim_accuracy", c.defended_victim_accuracy);
    line("mea", c.key, "", "extracted_accuracy", c.extracted_accuracy);
    line("mea", c.key, "", "agreement", c.agreement);
    line("mea", c.key, "", "query_count", c.query_count);
    line("mea", c.key, "", "cost", c.cost);
  }
  for (const auto& c : r.aet) {
    line("aet", c.key, c.mode, "transferability", c.transferability);
  }
  return os.str();
}

CsvTable ParseCsv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# config_hash=", 0) == 0) {
      t.config_hash = line.substr(14);
      continue;
    }
    if (line[0] == '#') continue;
    auto cells = CsvSplit(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
    } else {
      if (cells.size() != t.header.size()) {
        throw ParseError("csv row has " + std::to_string(cells.size()) +
                         " cells, header has " + std::to_string(t.header.size()));
      }
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

std::string RenderMarkdown(const Report& r) {
  std::ostringstream os;
  os << "<!-- config_hash: " << r.config_hash << " -->\n";
  os << "# Experiment report\n\n";

  os << "## Extraction accuracy [%]\n\n";
  Header(os, {"Task", "Victim→extracted", "Scenario", "#Q", "Victim",
              "Extracted", "Agreement"});
  for (const auto& c : r.mea) {
    if (!IsNoDefence(c.key.defence)) continue;
    Row(os, {c.key.task, Arrow(c.key), c.key.scenario, BudgetLabel(c.key.budget),
             PctPm(c.victim_accuracy), PctPm(c.extracted_accuracy),
             PctPm(c.agreement)});
  }

  os << "\n## Query cost\n\n";
  const std::string price_name = r.config.contains("price")
                                     ? r.config["price"].value("name", "price")
                                     : "price";
  Header(os, {"Task", "Scenario", "#Q", "Queries", price_name + " price"});
  std::set<std::tuple<std::string, std::string, double>> seen;
  for (const auto& c : r.mea) {
    if (!IsNoDefence(c.key.defence)) continue;
    if (!seen.insert({c.key.task, c.key.scenario, c.key.budget}).second) continue;
    char q[32];
    std::snprintf(q, sizeof(q), "%.0f", c.query_count.mean);
    Row(os, {c.key.task, c.key.scenario, BudgetLabel(c.key.budget), q,
             FormatDollars(RoundToTenth(c.cost.mean))});
  }

  os << "\n## Adversarial transferability [%]\n\n";
  std::vector<std::string> modes;
  for (const auto& c : r.aet) {
    if (std::find(modes.begin(), modes.end(), c.mode) == modes.end()) {
      modes.push_back(c.mode);
    }
  }
  std::vector<std::string> head{"Task", "Defence", "Victim→extracted",
                                "Scenario", "#Q"};
  head.insert(head.end(), modes.begin(), modes.end());
  Header(os, head);
  for (const auto& c : r.mea) {
    std::vector<std::string> row{c.key.task, DefenceDisplay(c.key.defence),
                                 Arrow(c.key), c.key.scenario,
                                 BudgetLabel(c.key.budget)};
    for (const auto& m : modes) {
      const AetCell* a = r.FindAet(c.key, m);
      row.push_back(a ? PctPm(a->transferability) : "-");
    }
    Row(os, row);
  }

  // One MEA/AET column pair per (task, archs, scenario, budget) group, one
  // row per defence.
  std::vector<CellKey> groups;
  std::vector<std::string> defences;
  for (const auto& c : r.mea) {
    CellKey g = c.key;
    g.defence.clear();
    if (std::find(groups.begin(), groups.end(), g) == groups.end()) groups.push_back(g);
    if (std::find(defences.begin(), defences.end(), c.key.defence) == defences.end()) {
      defences.push_back(c.key.defence);
    }
  }
  std::stable_sort(defences.begin(), defences.end(),
                   [](const std::string& a, const std::string& b) {
                     return DefenceConfig::Parse(a).kind < DefenceConfig::Parse(b).kind;
                   });
  std::string aet_mode = modes.empty() ? "" : modes.front();
  if (std::find(modes.begin(), modes.end(), "whitebox") != modes.end()) {
    aet_mode = "whitebox";
  }
  os << "\n## Defences [%]\n\n";
  for (size_t i = 0; i < groups.size(); ++i) {
    const auto& g = groups[i];
    os << "- G" << i + 1 << ": " << g.task << ", " << Arrow(g) << ", "
       << g.scenario << ", " << BudgetLabel(g.budget) << '\n';
  }
  os << '\n';
  std::vector<std::string> dhead{"Defence"};
  for (size_t i = 0; i < groups.size(); ++i) {
    dhead.push_back("G" + std::to_string(i + 1) + " MEA ↓");
    dhead.push_back("G" + std::to_string(i + 1) + " AET ↓");
  }
  Header(os, dhead);
  for (const auto& d : defences) {
    std::vector<std::string> row{DefenceDisplay(d)};
    for (CellKey g : groups) {
      g.defence = d;
      const MeaCell* m = r.FindMea(g);
      const AetCell* a = r.FindAet(g, aet_mode);
      row.push_back(m ? Pct(m->extracted_accuracy.mean) + " (" +
                            Pct(m->defended_victim_accuracy.mean) + ")"
                      : "-");
      row.push_back(a ? Pct(a->transferability.mean) : "-");
    }
    Row(os, row);
  }

  size_t n = r.seeds_ok.size();
  os << "\nMEA: extracted-model accuracy; numbers in parentheses are the "
        "accuracy of the victim with the defence in place. AET: "
     << (aet_mode.empty() ? "whitebox" : aet_mode)
     << " transferability. Lower is a better defence.\n";
  os << "\nValues are mean ± sample std over " << n << " seed"
     << (n == 1 ? "" : "s")
     << " (defence table: mean only). Multi-seed aggregation is an extension "
        "of single-run reporting; per-seed values are in report.json.\n";
  if (!r.failures.empty()) {
    os << "\nFailed seeds:";
    for (const auto& f : r.failures) os << ' ' << f.seed << " (" << f.message << ')';
    os << '\n';
  }
  return os.str();
}

ReportFormat ParseReportFormat(std::string_view name) {
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "md" || name == "markdown") return ReportFormat::kMarkdown;
  if (name == "json") return ReportFormat::kJson;
  throw InvalidArgument("unknown report format: " + std::string(name));
}

std::string Render(const Report& r, ReportFormat format) {
  switch (format) {
    case ReportFormat::kCsv:
      return RenderCsv(r);
    case ReportFormat::kMarkdown:
      return RenderMarkdown(r);
    case ReportFormat::kJson:
      return ReportToJson(r).dump(2) + "\n";
  }
  return {};
}

std::vector<std::string> EmitReport(const Report& r,
                                    const std::vector<ReportFormat>& formats,
                                    const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error("cannot create output directory " + dir);
  }
  std::vector<std::pair<fs::path, std::string>> files;
  for (ReportFormat f : formats) {
    const char* name = f == ReportFormat::kCsv        ? "report.csv"
                       : f == ReportFormat::kMarkdown ? "report.md"
                                                      : "report.json";
    files.emplace_back(fs::path(dir) / name, Render(r, f));
  }
  for (const auto& [path, body] : files) {
    if (fs::exists(path) &&
        ReadFile(path).find(r.config_hash) == std::string::npos) {
      throw Error(path.string() + " belongs to a different config; refusing to overwrite");
    }
  }
  std::vector<std::string> written;
  for (const auto& [path, body] : files) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << body;
    if (!out) throw Error("cannot write " + path.string());
    written.push_back(path.string());
  }
  return written;
}

}  // namespace etlab
