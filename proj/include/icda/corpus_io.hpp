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

// Corpus files.
//
// Dataset: UTF-8 JSON lines, one document per line, keys in this order:
//   {"doc_id":17,"label":1,"is_counterfactual":false,
//    "sentences":[{"tokens":[3,41,7],"aspect":0,"sentiment":1},...],
//    "source_doc_id":null}
// Vocabulary: one word per line, line i holds token id i.
// Spec: a JSON object with the CorpusSpec fields.

#ifndef ICDA_CORPUS_IO_HPP_
#define ICDA_CORPUS_IO_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>

#include "icda/corpus.hpp"

namespace icda {

std::string document_to_json_line(const Document& doc);
Document document_from_json_line(const std::string& line);

void write_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path, Split split,
                     std::shared_ptr<const CorpusSpec> spec);

void write_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path);
std::vector<std::string> read_vocabulary(const std::filesystem::path& path);

// One document per block: header line, then one line per sentence rendered
// through the vocabulary.
void write_human_readable(const Dataset& ds,
                          const std::vector<std::string>& words,
                          const std::filesystem::path& path);

std::string corpus_spec_to_json(const CorpusSpec& spec);
CorpusSpec corpus_spec_from_json(const std::string& text);

// gen-corpus layout: spec.json, vocab.txt, train/dev/test.jsonl.
void write_corpus_dir(const CorpusSplits& splits, const CorpusSpec& spec,
                      const std::filesystem::path& dir);
CorpusSplits read_corpus_dir(const std::filesystem::path& dir, CorpusSpec* spec_out);

}  // namespace icda

#endif  // ICDA_CORPUS_IO_HPP_
