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

#include "config.hpp"

#include <fstream>
#include <sstream>
#include <vector>

namespace icda::cli {
namespace {

using nlohmann::json;

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path) {
    if (c == '.') {
      parts.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(std::move(cur));
  for (const auto& p : parts) {
    if (p.empty()) throw ConfigError("malformed key path '" + path + "'");
  }
  return parts;
}

const json* walk(const json& node, const std::vector<std::string>& parts) {
  const json* cur = &node;
  for (const auto& p : parts) {
    if (!cur->is_object()) return nullptr;
    auto it = cur->find(p);
    if (it == cur->end()) return nullptr;
    cur = &*it;
  }
  return cur;
}

int line_of_byte(const std::string& text, std::size_t byte) {
  int line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) line += text[i] == '\n';
  return line;
}

}  // namespace

std::map<std::string, int> locate_keys(const std::string& text) {
  struct Frame {
    bool object = false;
    bool expect_key = false;
    std::string key;
    std::size_t index = 0;
  };
  std::map<std::string, int> out;
  std::vector<Frame> stack;
  int line = 1;
  auto path_of = [&]() {
    std::string path;
    for (const auto& f : stack) {
      if (!path.empty()) path += '.';
      path += f.object ? f.key : std::to_string(f.index);
    }
    return path;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
    } else if (c == '"') {
      std::string s;
      for (++i; i < text.size() && text[i] != '"'; ++i) {
        if (text[i] == '\\' && i + 1 < text.size()) ++i;
        s += text[i];
      }
      if (!stack.empty() && stack.back().object && stack.back().expect_key) {
        stack.back().key = s;
        stack.back().expect_key = false;
        out.emplace(path_of(), line);
      }
    } else if (c == '{') {
      stack.push_back({true, true, {}, 0});
    } else if (c == '[') {
      stack.push_back({false, false, {}, 0});
    } else if (c == '}' || c == ']') {
      if (!stack.empty()) stack.pop_back();
    } else if (c == ',' && !stack.empty()) {
      if (stack.back().object) {
        stack.back().expect_key = true;
      } else {
        ++stack.back().index;
      }
    }
  }
  return out;
}

RunConfig::RunConfig() : root_(json::object()), source_("<defaults>") {}

RunConfig RunConfig::from_text(const std::string& text, const std::string& source) {
  RunConfig cfg;
  cfg.source_ = source;
  try {
    cfg.root_ = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ":" + std::to_string(line_of_byte(text, e.byte)) +
                      ": invalid JSON: " + e.what());
  }
  if (!cfg.root_.is_object()) {
    throw ConfigError(source + ":1: top level must be a JSON object");
  }
  cfg.lines_ = locate_keys(text);
  return cfg;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str(), path.string());
}

void RunConfig::apply_set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("--set expects key=value, got '" + assignment + "'");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* cur = &root_;
  const auto parts = split_path(path);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    json& next = (*cur)[parts[i]];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) {
      throw ConfigError("--set " + path + ": '" + parts[i] + "' is not an object");
    }
    cur = &next;
  }
  (*cur)[parts.back()] = std::move(value);
  from_set_[path] = true;
}

void RunConfig::set_global(const std::string& key, json value) {
  root_[key] = std::move(value);
  from_set_[key] = true;
}

const json* RunConfig::find(const std::string& command, const std::string& key) const {
  const auto parts = split_path(key);
  if (const json* block = walk(root_, {command})) {
    if (const json* v = walk(*block, parts)) return v;
  }
  return walk(root_, parts);
}

std::string RunConfig::resolved_path(const std::string& command,
                                     const std::string& key) const {
  const std::string scoped = command + "." + key;
  if (walk(root_, split_path(scoped))) return scoped;
  if (walk(root_, split_path(key))) return key;
  return scoped;
}

std::string RunConfig::origin(const std::string& path) const {
  // Most specific source first: an exact --set, else the nearest located key.
  if (from_set_.count(path)) return "--set " + path;
  std::string probe = path;
  while (true) {
    auto it = lines_.find(probe);
    if (it != lines_.end()) return source_ + ":" + std::to_string(it->second) + ": " + path;
    if (from_set_.count(probe)) return "--set " + path;
    const auto dot = probe.rfind('.');
    if (dot == std::string::npos) break;
    probe.erase(dot);
  }
  return path + " (default)";
}

void RunConfig::fail(const std::string& command, const std::string& key,
                     const std::string& message) const {
  throw ConfigError(origin(resolved_path(command, key)) + ": " + message);
}

void RunConfig::validate(const std::string& command, const std::string& key,
                         const std::function<void()>& check) const {
  try {
    check();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail(command, key, e.what());
  }
}

}  // namespace icda::cli
