// Copyright 2026 The semtype Authors.
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

#include "semtype/tokenizer.h"

#include <cctype>

#include "semtype/errors.h"
#include "semtype/formatting.h"

namespace semtype {
namespace {

bool IsPunctuation(char c) {
  switch (c) {
    case '.': case ',': case ';': case ':': case '!': case '?':
    case '(': case ')': case '"': case '%':
      return true;
    default:
      return false;
  }
}

void EmitWord(std::string &word, std::vector<std::string> *out) {
  if (word.empty()) return;
  if (word.size() > 2 && word.ends_with("'s")) {
    out->push_back(word.substr(0, word.size() - 2));
    out->push_back("'s");
  } else {
    out->push_back(word);
  }
  word.clear();
}

}  // namespace

Vocabulary::Vocabulary() {
  Add(kStartToken);
  Add(kUnknownToken);
  for (std::string_view marker : MarkerTokens()) Add(marker);
}

Vocabulary Vocabulary::Build(const std::vector<std::string> &texts) {
  Vocabulary vocab;
  for (const std::string &text : texts) {
    for (const std::string &word : SplitWords(text)) vocab.Add(word);
  }
  return vocab;
}

Vocabulary Vocabulary::FromWords(std::vector<std::string> words) {
  Vocabulary vocab;
  const size_t fixed = vocab.words_.size();
  if (words.size() < fixed) {
    throw ValidationError("vocabulary is missing its special symbols");
  }
  for (size_t i = 0; i < fixed; ++i) {
    if (words[i] != vocab.words_[i]) {
      throw ValidationError("vocabulary entry " + std::to_string(i) +
                            " should be " + vocab.words_[i]);
    }
  }
  for (size_t i = fixed; i < words.size(); ++i) {
    if (vocab.Add(words[i]) != static_cast<int>(i)) {
      throw ValidationError("duplicate vocabulary word '" + words[i] + "'");
    }
  }
  return vocab;
}

int Vocabulary::Add(std::string_view word) {
  auto [it, inserted] =
      ids_.emplace(std::string(word), static_cast<int>(words_.size()));
  if (inserted) words_.emplace_back(word);
  return it->second;
}

int Vocabulary::Lookup(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  return it == ids_.end() ? kUnknownId : it->second;
}

std::vector<std::string> SplitWords(std::string_view text) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) {
      ++pos;
    }
    size_t end = pos;
    while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) {
      ++end;
    }
    std::string_view piece = text.substr(pos, end - pos);
    pos = end;
    if (piece.empty()) continue;
    if (IsMarkerToken(piece)) {
      out.emplace_back(piece);
      continue;
    }
    std::string word;
    for (char c : piece) {
      if (IsPunctuation(c)) {
        EmitWord(word, &out);
        out.emplace_back(1, c);
      } else {
        word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      }
    }
    EmitWord(word, &out);
  }
  return out;
}

TokenizedText Tokenize(const Vocabulary &vocab, std::string_view text,
                       int max_length) {
  if (max_length < 1) throw ValidationError("max_sequence_length must be >= 1");
  TokenizedText out;
  out.ids.push_back(Vocabulary::kStartId);
  for (std::string &word : SplitWords(text)) {
    if (static_cast<int>(out.ids.size()) < max_length) {
      out.ids.push_back(vocab.Lookup(word));
    } else {
      out.truncated.push_back(std::move(word));
    }
  }
  return out;
}

}  // namespace semtype
