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

#ifndef SEMTYPE_TOKENIZER_H_
#define SEMTYPE_TOKENIZER_H_

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace semtype {

// Word-level vocabulary. Ids 0 and 1 are the sequence-start and unknown
// symbols; the eight marker tokens follow as atomic symbols.
class Vocabulary {
 public:
  static constexpr int kStartId = 0;
  static constexpr int kUnknownId = 1;
  static constexpr std::string_view kStartToken = "<s>";
  static constexpr std::string_view kUnknownToken = "<unk>";
  static constexpr std::string_view kSpec = "word-lower-v1";

  // Specials and markers only.
  Vocabulary();

  // Adds every word the tokenizer produces for `texts`.
  static Vocabulary Build(const std::vector<std::string> &texts);

  // Restores a vocabulary from its id-ordered word list. The list must start
  // with the specials and markers in canonical order.
  static Vocabulary FromWords(std::vector<std::string> words);

  int Add(std::string_view word);
  int Lookup(std::string_view word) const;
  const std::string &Word(int id) const { return words_.at(id); }
  int size() const { return static_cast<int>(words_.size()); }
  const std::vector<std::string> &words() const { return words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> ids_;
};

// Splits text into lowercase word pieces. Marker tokens are kept verbatim,
// punctuation is split off and a trailing "'s" becomes its own piece.
std::vector<std::string> SplitWords(std::string_view text);

struct TokenizedText {
  // Always starts with Vocabulary::kStartId.
  std::vector<int> ids;
  // Pieces dropped by right truncation.
  std::vector<std::string> truncated;
};

// Tokenizes and right-truncates to `max_length` ids (start symbol
// included).
TokenizedText Tokenize(const Vocabulary &vocab, std::string_view text,
                       int max_length);

}  // namespace semtype

#endif  // SEMTYPE_TOKENIZER_H_
