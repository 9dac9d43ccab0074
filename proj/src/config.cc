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

#include "etlab/config.h"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <sstream>

#include "etlab/common.h"

namespace etlab {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  std::string out = s.substr(b, e - b + 1);
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') {
    out = out.substr(1, out.size() - 2);
  }
  return out;
}

void Flatten(const boost::property_tree::ptree& tree, const std::string& prefix,
             std::map<std::string, std::string>* out) {
  for (const auto& [key, child] : tree) {
    const std::string full = prefix.empty() ? key : prefix + "." + key;
    if (child.empty()) {
      (*out)[full] = Trim(child.data());
    } else {
      Flatten(child, full, out);
    }
  }
}

}  // namespace

std::vector<std::string> SplitList(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

KeyValueConfig::KeyValueConfig(std::map<std::string, std::string> values,
                               std::filesystem::path base_dir)
    : values_(std::move(values)), base_dir_(std::move(base_dir)) {}

KeyValueConfig KeyValueConfig::Parse(const std::string& text,
                                     std::filesystem::path base_dir) {
  // The INI reader only knows ';' comments; accept '#' too.
  std::string cleaned;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    const auto first = line.find_first_not_of(" \t");
    if (first != std::string::npos && line[first] == '#') line = ";";
    cleaned += line + "\n";
  }
  boost::property_tree::ptree tree;
  std::istringstream in(cleaned);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  std::map<std::string, std::string> values;
  Flatten(tree, "", &values);
  return KeyValueConfig(std::move(values), std::move(base_dir));
}

KeyValueConfig KeyValueConfig::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  auto dir = std::filesystem::path(path).parent_path();
  if (dir.empty()) dir = ".";
  try {
    return Parse(buf.str(), dir);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

bool KeyValueConfig::Has(const std::string& key) const {
  return values_.count(key) > 0;
}

std::string KeyValueConfig::GetString(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw InvalidArgument("missing config key " + key);
  return it->second;
}

std::string KeyValueConfig::GetString(const std::string& key,
                                      const std::string& def) const {
  auto it = values_.find(key);
  return it == values_.end() ? def : it->second;
}

double KeyValueConfig::GetDouble(const std::string& key, double def) const {
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  try {
    size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used == it->second.size()) return v;
  } catch (const std::exception&) {
  }
  throw InvalidArgument("config key " + key + " is not a number");
}

int64_t KeyValueConfig::GetInt(const std::string& key, int64_t def) const {
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  try {
    size_t used = 0;
    const int64_t v = std::stoll(it->second, &used);
    if (used == it->second.size()) return v;
  } catch (const std::exception&) {
  }
  throw InvalidArgument("config key " + key + " is not an integer");
}

uint64_t KeyValueConfig::GetUint(const std::string& key, uint64_t def) const {
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  try {
    size_t used = 0;
    if (!it->second.empty() && it->second[0] != '-') {
      const uint64_t v = std::stoull(it->second, &used);
      if (used == it->second.size()) return v;
    }
  } catch (const std::exception&) {
  }
  throw InvalidArgument("config key " + key + " is not an unsigned integer");
}

std::vector<std::string> KeyValueConfig::GetList(
    const std::string& key, const std::vector<std::string>& def) const {
  auto it = values_.find(key);
  return it == values_.end() ? def : SplitList(it->second);
}

std::optional<std::string> KeyValueConfig::GetPath(
    const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end() || it->second.empty()) return std::nullopt;
  std::filesystem::path p(it->second);
  if (p.is_relative()) p = base_dir_ / p;
  return p.lexically_normal().string();
}

}  // namespace etlab
