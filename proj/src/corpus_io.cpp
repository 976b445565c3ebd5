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

#include "icda/corpus_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace icda {
namespace {

using ordered_json = nlohmann::ordered_json;

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return in;
}

}  // namespace

std::string document_to_json_line(const Document& doc) {
  ordered_json j;
  j["doc_id"] = doc.doc_id;
  j["label"] = doc.label;
  j["is_counterfactual"] = doc.is_counterfactual;
  ordered_json sentences = ordered_json::array();
  for (const auto& s : doc.sentences) {
    ordered_json js;
    js["tokens"] = s.tokens;
    js["aspect"] = s.aspect();
    js["sentiment"] = s.sentiment();
    sentences.push_back(std::move(js));
  }
  j["sentences"] = std::move(sentences);
  if (doc.source_doc_id) {
    j["source_doc_id"] = *doc.source_doc_id;
  } else {
    j["source_doc_id"] = nullptr;
  }
  return j.dump();
}

Document document_from_json_line(const std::string& line) {
  const ordered_json j = ordered_json::parse(line);
  Document doc;
  doc.doc_id = j.at("doc_id").get<DocId>();
  doc.label = j.at("label").get<int>();
  doc.is_counterfactual = j.at("is_counterfactual").get<bool>();
  for (const auto& js : j.at("sentences")) {
    doc.sentences.emplace_back(js.at("tokens").get<std::vector<TokenId>>(),
                               js.at("aspect").get<int>(),
                               js.at("sentiment").get<int>());
  }
  if (j.contains("source_doc_id") && !j["source_doc_id"].is_null()) {
    doc.source_doc_id = j["source_doc_id"].get<DocId>();
  }
  return doc;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
  auto out = open_out(path);
  for (const auto& doc : ds.documents) out << document_to_json_line(doc) << '\n';
}

Dataset read_dataset(const std::filesystem::path& path, Split split,
                     std::shared_ptr<const CorpusSpec> spec) {
  auto in = open_in(path);
  Dataset ds;
  ds.split = split;
  ds.spec = std::move(spec);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      ds.documents.push_back(document_from_json_line(line));
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": " + e.what());
    }
  }
  return ds;
}

void write_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path) {
  auto out = open_out(path);
  for (const auto& w : vocab.words()) out << w << '\n';
}

std::vector<std::string> read_vocabulary(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) words.push_back(line);
  return words;
}

void write_human_readable(const Dataset& ds,
                          const std::vector<std::string>& words,
                          const std::filesystem::path& path) {
  auto out = open_out(path);
  for (const auto& doc : ds.documents) {
    out << "doc " << doc.doc_id << " label=" << doc.label;
    if (doc.is_counterfactual) out << " counterfactual_of=" << doc.source_doc_id.value_or(0);
    out << '\n';
    for (const auto& s : doc.sentences) {
      out << "  [aspect " << s.aspect() << (s.sentiment() ? " +" : " -") << "]";
      for (TokenId t : s.tokens) {
        out << ' ' << (t < words.size() ? words[t] : "<" + std::to_string(t) + ">");
      }
      out << '\n';
    }
  }
}

std::string corpus_spec_to_json(const CorpusSpec& spec) {
  ordered_json j;
  j["n_docs"] = spec.n_docs;
  j["n_aspects"] = spec.n_aspects;
  j["sentences_per_aspect"] = spec.sentences_per_aspect;
  j["p_target"] = spec.p_target;
  j["p_spurious"] = spec.p_spurious;
  j["vocab_size_per_aspect"] = spec.vocab_size_per_aspect;
  j["sentiment_words_per_aspect"] = spec.sentiment_words_per_aspect;
  j["neutral_words_shared"] = spec.neutral_words_shared;
  j["sentence_length"] = {spec.sentence_length_min, spec.sentence_length_max};
  j["sentiment_tokens"] = {spec.sentiment_tokens_min, spec.sentiment_tokens_max};
  j["aspect_tokens"] = spec.aspect_tokens;
  j["shuffle_sentences"] = spec.shuffle_sentences;
  j["dev_fraction"] = spec.dev_fraction;
  j["test_fraction"] = spec.test_fraction;
  j["seed"] = spec.seed;
  return j.dump(2);
}

CorpusSpec corpus_spec_from_json(const std::string& text) {
  const ordered_json j = ordered_json::parse(text);
  CorpusSpec spec;
  auto take = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  take("n_docs", spec.n_docs);
  take("n_aspects", spec.n_aspects);
  take("sentences_per_aspect", spec.sentences_per_aspect);
  take("p_target", spec.p_target);
  take("p_spurious", spec.p_spurious);
  take("vocab_size_per_aspect", spec.vocab_size_per_aspect);
  take("sentiment_words_per_aspect", spec.sentiment_words_per_aspect);
  take("neutral_words_shared", spec.neutral_words_shared);
  if (j.contains("sentence_length")) {
    spec.sentence_length_min = j["sentence_length"].at(0).get<std::size_t>();
    spec.sentence_length_max = j["sentence_length"].at(1).get<std::size_t>();
  }
  if (j.contains("sentiment_tokens")) {
    spec.sentiment_tokens_min = j["sentiment_tokens"].at(0).get<std::size_t>();
    spec.sentiment_tokens_max = j["sentiment_tokens"].at(1).get<std::size_t>();
  }
  take("aspect_tokens", spec.aspect_tokens);
  take("shuffle_sentences", spec.shuffle_sentences);
  take("dev_fraction", spec.dev_fraction);
  take("test_fraction", spec.test_fraction);
  take("seed", spec.seed);
  spec.validate();
  return spec;
}

void write_corpus_dir(const CorpusSplits& splits, const CorpusSpec& spec,
                      const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / "spec.json");
    out << corpus_spec_to_json(spec) << '\n';
  }
  write_vocabulary(Vocabulary(spec), dir / "vocab.txt");
  write_dataset(splits.train, dir / "train.jsonl");
  write_dataset(splits.dev, dir / "dev.jsonl");
  write_dataset(splits.test, dir / "test.jsonl");
}

CorpusSplits read_corpus_dir(const std::filesystem::path& dir,
                             CorpusSpec* spec_out) {
  std::stringstream buf;
  buf << open_in(dir / "spec.json").rdbuf();
  auto spec = std::make_shared<const CorpusSpec>(corpus_spec_from_json(buf.str()));
  if (spec_out) *spec_out = *spec;
  CorpusSplits splits;
  splits.train = read_dataset(dir / "train.jsonl", Split::kTrain, spec);
  splits.dev = read_dataset(dir / "dev.jsonl", Split::kDev, spec);
  splits.test = read_dataset(dir / "test.jsonl", Split::kTest, spec);
  return splits;
}

}  // namespace icda
