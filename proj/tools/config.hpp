// Copyright 2026 The ICDA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Run configuration: one JSON document with global keys (seed, threads, out,
// trials) and one block per command (beta_sweep, operators, fixed_point,
// gen_corpus, icda, verify). A key in a command block overrides the global
// key of the same name. --set path=value edits the document after loading.

#ifndef ICDA_TOOLS_CONFIG_HPP_
#define ICDA_TOOLS_CONFIG_HPP_

#include <filesystem>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace icda::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RunConfig {
 public:
  RunConfig();

  static RunConfig from_text(const std::string& text, const std::string& source);
  static RunConfig from_file(const std::filesystem::path& path);

  // "a.b.c=value"; value is parsed as JSON, or taken as a string if it is
  // not valid JSON.
  void apply_set(const std::string& assignment);
  void set_global(const std::string& key, nlohmann::json value);

  // Command block value, else global value, else nullptr.
  const nlohmann::json* find(const std::string& command, const std::string& key) const;

  template <typename T>
  T get(const std::string& command, const std::string& key, T fallback) const {
    const nlohmann::json* v = find(command, key);
    if (!v) return fallback;
    try {
      return v->get<T>();
    } catch (const nlohmann::json::exception& e) {
      fail(command, key, std::string("wrong type: ") + e.what());
    }
  }

  // Throws ConfigError naming the origin of command.key (file line, --set or
  // default).
  [[noreturn]] void fail(const std::string& command, const std::string& key,
                         const std::string& message) const;

  // Runs check(); rethrows std::exception as ConfigError located at key.
  void validate(const std::string& command, const std::string& key,
                const std::function<void()>& check) const;

  const nlohmann::json& root() const { return root_; }

 private:
  std::string origin(const std::string& path) const;
  std::string resolved_path(const std::string& command, const std::string& key) const;

  nlohmann::json root_;
  std::string source_;
  std::map<std::string, int> lines_;       // dotted path -> line in source
  std::map<std::string, bool> from_set_;   // dotted path -> set on command line
};

// Maps dotted key paths of a JSON object text to the 1-based line where the
// key appears.
std::map<std::string, int> locate_keys(const std::string& text);

}  // namespace icda::cli

#endif  // ICDA_TOOLS_CONFIG_HPP_
