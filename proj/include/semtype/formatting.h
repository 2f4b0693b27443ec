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

#ifndef SEMTYPE_FORMATTING_H_
#define SEMTYPE_FORMATTING_H_

#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace semtype {

enum class TaskKind { kLexicalEntity, kLexicalEvent, kRelational };

enum class SpanRole { kEntity, kSubject, kObject, kTrigger };

std::string_view TaskKindName(TaskKind kind);
std::string_view SpanRoleName(SpanRole role);

// Both throw ValidationError on unknown names.
TaskKind ParseTaskKind(std::string_view name);
SpanRole ParseSpanRole(std::string_view name);

// Whether a span with `role` may appear in an instance of `kind`.
bool RoleMatchesTask(SpanRole role, TaskKind kind);

// Marker token strings. These are atomic symbols for the tokenizer.
inline constexpr std::string_view kEntityOpen = "<E>";
inline constexpr std::string_view kEntityClose = "</E>";
inline constexpr std::string_view kSubjectOpen = "<SUBJ>";
inline constexpr std::string_view kSubjectClose = "</SUBJ>";
inline constexpr std::string_view kObjectOpen = "<OBJ>";
inline constexpr std::string_view kObjectClose = "</OBJ>";
inline constexpr std::string_view kTriggerOpen = "<T>";
inline constexpr std::string_view kTriggerClose = "</T>";

// All eight markers, opener before closer, in role order.
std::span<const std::string_view> MarkerTokens();
bool IsMarkerToken(std::string_view token);

std::string_view OpenMarker(SpanRole role);
std::string_view CloseMarker(SpanRole role);

// A half-open token range [start, end) with the role it plays.
struct Span {
  int start = 0;
  int end = 0;
  SpanRole role = SpanRole::kEntity;
  std::optional<std::string> entity_type;

  bool operator==(const Span &) const = default;
};

struct TypingInstance {
  std::string id;
  TaskKind task = TaskKind::kLexicalEntity;
  std::vector<std::string> tokens;
  std::vector<Span> spans;
  std::set<std::string> gold_labels;

  bool operator==(const TypingInstance &) const = default;
};

struct FormattedInput {
  std::string text;
  bool description_included = false;
  // Byte length of the marker-annotated sentence prefix of `text`.
  size_t sentence_length = 0;
};

// Checks token well-formedness, span bounds and overlap. Throws
// ValidationError naming the offending span.
void ValidateSpans(std::span<const std::string> tokens,
                   std::span<const Span> spans);

// Full instance check: spans, role/task consistency and role completeness.
void ValidateInstance(const TypingInstance &instance);

// Joins tokens with single spaces. Trailing punctuation and the "'s"
// clitic attach to a preceding word, or to punctuation already attached to
// one, but never to a marker.
std::string Detokenize(std::span<const std::string> tokens);

// Detokenized sentence with every span wrapped in its role's markers.
std::string InsertMarkers(std::span<const std::string> tokens,
                          std::span<const Span> spans);

// Task description for the spans of interest, terminated by a period.
std::string RenderDescription(TaskKind task, std::span<const Span> spans,
                              std::span<const std::string> tokens);

FormattedInput FormatInput(const TypingInstance &instance,
                           bool include_description);

// Natural-language rendering of an ontological label name.
std::string VerbalizeLabel(std::string_view raw);

// Removes marker tokens (and the description, if any) and re-applies the
// detokenization rule. Inverse of FormatInput on the sentence part.
std::string StripFormatting(const FormattedInput &input);

}  // namespace semtype

#endif  // SEMTYPE_FORMATTING_H_
