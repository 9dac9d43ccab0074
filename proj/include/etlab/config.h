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

#ifndef ETLAB_CONFIG_H_
#define ETLAB_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace etlab {

// Flat-section `key = value` file (INI). Keys inside `[section]` are
// addressed as "section.key". Relative paths resolve against the
// directory that holds the file.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;
  KeyValueConfig(std::map<std::string, std::string> values,
                 std::filesystem::path base_dir);

  static KeyValueConfig Load(const std::string& path);
  static KeyValueConfig Parse(const std::string& text,
                              std::filesystem::path base_dir = ".");

  bool Has(const std::string& key) const;
  std::string GetString(const std::string& key) const;
  std::string GetString(const std::string& key, const std::string& def) const;
  double GetDouble(const std::string& key, double def) const;
  int64_t GetInt(const std::string& key, int64_t def) const;
  uint64_t GetUint(const std::string& key, uint64_t def) const;
  // Comma-separated list; empty entries are dropped.
  std::vector<std::string> GetList(const std::string& key,
                                   const std::vector<std::string>& def) const;
  std::optional<std::string> GetPath(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  const std::filesystem::path& base_dir() const { return base_dir_; }

 private:
  std::map<std::string, std::string> values_;
  std::filesystem::path base_dir_ = ".";
};

std::vector<std::string> SplitList(const std::string& s, char sep = ',');

}  // namespace etlab

#endif  // ETLAB_CONFIG_H_
