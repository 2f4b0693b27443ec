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

#include "semtype/formatting.h"

#include <algorithm>
#include <array>
#include <numeric>
#include <sstream>

#include "semtype/errors.h"

namespace semtype {
namespace {

constexpr std::array<std::string_view, 8> kMarkers = {
    kEntityOpen,  kEntityClose, kSubjectOpen, kSubjectClose,
    kObjectOpen,  kObjectClose, kTriggerOpen, kTriggerClose};

constexpr std::array<std::string_view, 8> kAttachingTokens = {
    ".", ",", ";", ":", "!", "?", "'s", "%"};

bool Attaches(std::string_view token) {
  return std::find(kAttachingTokens.begin(), kAttachingTokens.end(), token) !=
         kAttachingTokens.end();
}

std::string DescribeSpan(size_t index, const Span &span) {
  std::ostringstream os;
  os << "span #" << index << " [" << span.start << "," << span.end << ") "
     << SpanRoleName(span.role);
  return os.str();
}

// Accumulates pieces under the detokenization rule. An attaching token
// joins the previous piece only when that piece is a word or was itself
// joined, so stripping markers later reproduces the plain sentence.
class Joiner {
 public:
  void AddWord(std::string_view word) {
    const bool join = attachable_ && Attaches(word);
    if (!out_.empty() && !join) out_ += ' ';
    out_ += word;
    attachable_ = join || !Attaches(word);
  }

  void AddMarker(std::string_view marker) {
    if (!out_.empty()) out_ += ' ';
    out_ += marker;
    attachable_ = false;
  }

  std::string Take() { return std::move(out_); }

 private:
  std::string out_;
  bool attachable_ = false;
};

std::string SpanText(std::span<const std::string> tokens, const Span &span) {
  return Detokenize(tokens.subspan(span.start, span.end - span.start));
}

std::string Argument(std::span<const std::string> tokens, const Span &span) {
  std::string text = SpanText(tokens, span);
  if (span.entity_type && !span.entity_type->empty()) {
    return *span.entity_type + " " + text;
  }
  return text;
}

}  // namespace

std::string_view TaskKindName(TaskKind kind) {
  switch (kind) {
    case TaskKind::kLexicalEntity: return "lexical-entity";
    case TaskKind::kLexicalEvent: return "lexical-event";
    case TaskKind::kRelational: return "relational";
  }
  return "unknown";
}

std::string_view SpanRoleName(SpanRole role) {
  switch (role) {
    case SpanRole::kEntity: return "entity";
    case SpanRole::kSubject: return "subject";
    case SpanRole::kObject: return "object";
    case SpanRole::kTrigger: return "trigger";
  }
  return "unknown";
}

TaskKind ParseTaskKind(std::string_view name) {
  for (TaskKind kind : {TaskKind::kLexicalEntity, TaskKind::kLexicalEvent,
                        TaskKind::kRelational}) {
    if (TaskKindName(kind) == name) return kind;
  }
  throw ValidationError("unknown task kind '" + std::string(name) + "'");
}

SpanRole ParseSpanRole(std::string_view name) {
  for (SpanRole role : {SpanRole::kEntity, SpanRole::kSubject,
                        SpanRole::kObject, SpanRole::kTrigger}) {
    if (SpanRoleName(role) == name) return role;
  }
  throw ValidationError("unknown span role '" + std::string(name) + "'");
}

bool RoleMatchesTask(SpanRole role, TaskKind kind) {
  switch (kind) {
    case TaskKind::kLexicalEntity: return role == SpanRole::kEntity;
    case TaskKind::kLexicalEvent: return role == SpanRole::kTrigger;
    case TaskKind::kRelational:
      return role == SpanRole::kSubject || role == SpanRole::kObject;
  }
  return false;
}

std::span<const std::string_view> MarkerTokens() { return kMarkers; }

bool IsMarkerToken(std::string_view token) {
  return std::find(kMarkers.begin(), kMarkers.end(), token) != kMarkers.end();
}

std::string_view OpenMarker(SpanRole role) {
  switch (role) {
    case SpanRole::kEntity: return kEntityOpen;
    case SpanRole::kSubject: return kSubjectOpen;
    case SpanRole::kObject: return kObjectOpen;
    case SpanRole::kTrigger: return kTriggerOpen;
  }
  return {};
}

std::string_view CloseMarker(SpanRole role) {
  switch (role) {
    case SpanRole::kEntity: return kEntityClose;
    case SpanRole::kSubject: return kSubjectClose;
    case SpanRole::kObject: return kObjectClose;
    case SpanRole::kTrigger: return kTriggerClose;
  }
  return {};
}

void ValidateSpans(std::span<const std::string> tokens,
                   std::span<const Span> spans) {
  for (size_t i = 0; i < tokens.size(); ++i) {
    const std::string &t = tokens[i];
    if (t.empty() || t.find_first_of(" \t\r\n") != std::string::npos) {
      throw ValidationError("token #" + std::to_string(i) +
                            " is empty or contains whitespace");
    }
    if (IsMarkerToken(t)) {
      throw ValidationError("token #" + std::to_string(i) +
                            " collides with marker token " + t);
    }
  }
  const int n = static_cast<int>(tokens.size());
  for (size_t i = 0; i < spans.size(); ++i) {
    const Span &s = spans[i];
    if (s.start < 0 || s.start >= s.end || s.end > n) {
      throw ValidationError(DescribeSpan(i, s) + " is out of range for " +
                            std::to_string(n) + " tokens");
    }
  }
  for (size_t i = 0; i < spans.size(); ++i) {
    for (size_t j = i + 1; j < spans.size(); ++j) {
      if (spans[i].start < spans[j].end && spans[j].start < spans[i].end) {
        throw ValidationError(DescribeSpan(j, spans[j]) + " overlaps " +
                              DescribeSpan(i, spans[i]));
      }
    }
  }
}

void ValidateInstance(const TypingInstance &instance) {
  ValidateSpans(instance.tokens, instance.spans);
  int subjects = 0, objects = 0, lexical = 0;
  for (size_t i = 0; i < instance.spans.size(); ++i) {
    const Span &s = instance.spans[i];
    if (!RoleMatchesTask(s.role, instance.task)) {
      throw ValidationError(DescribeSpan(i, s) + " is not valid for task " +
                            std::string(TaskKindName(instance.task)));
    }
    if (s.role == SpanRole::kSubject) ++subjects;
    else if (s.role == SpanRole::kObject) ++objects;
    else ++lexical;
  }
  if (instance.task == TaskKind::kRelational) {
    if (subjects != 1 || objects != 1) {
      throw ValidationError("relational instance '" + instance.id +
                            "' needs exactly one subject and one object span");
    }
  } else if (lexical != 1) {
    throw ValidationError("lexical instance '" + instance.id +
                          "' needs exactly one span of interest");
  }
}

std::string Detokenize(std::span<const std::string> tokens) {
  Joiner joiner;
  for (const std::string &t : tokens) joiner.AddWord(t);
  return joiner.Take();
}

std::string InsertMarkers(std::span<const std::string> tokens,
                          std::span<const Span> spans) {
  ValidateSpans(tokens, spans);
  std::vector<size_t> order(spans.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return spans[a].start < spans[b].start;
  });

  Joiner joiner;
  size_t next = 0;
  for (int i = 0; i < static_cast<int>(tokens.size()); ++i) {
    if (next < order.size() && spans[order[next]].start == i) {
      joiner.AddMarker(OpenMarker(spans[order[next]].role));
    }
    joiner.AddWord(tokens[i]);
    if (next < order.size() && spans[order[next]].end == i + 1) {
      joiner.AddMarker(CloseMarker(spans[order[next]].role));
      ++next;
    }
  }
  return joiner.Take();
}

std::string RenderDescription(TaskKind task, std::span<const Span> spans,
                              std::span<const std::string> tokens) {
  ValidateSpans(tokens, spans);
  if (task == TaskKind::kRelational) {
    const Span *subject = nullptr;
    const Span *object = nullptr;
    for (const Span &s : spans) {
      if (s.role == SpanRole::kSubject) subject = &s;
      if (s.role == SpanRole::kObject) object = &s;
    }
    if (subject == nullptr || object == nullptr) {
      throw ValidationError(
          "relational description needs both a subject and an object span");
    }
    return "Describe the relationship between " + Argument(tokens, *subject) +
           " and " + Argument(tokens, *object) + ".";
  }
  for (const Span &s : spans) {
    if (RoleMatchesTask(s.role, task)) {
      return "Describe the type of " + SpanText(tokens, s) + ".";
    }
  }
  throw ValidationError("lexical description needs a span of interest");
}

FormattedInput FormatInput(const TypingInstance &instance,
                           bool include_description) {
  ValidateInstance(instance);
  FormattedInput out;
  out.text = InsertMarkers(instance.tokens, instance.spans);
  out.sentence_length = out.text.size();
  out.description_included = include_description;
  if (include_description) {
    out.text += ' ';
    out.text += RenderDescription(instance.task, instance.spans,
                                  instance.tokens);
  }
  return out;
}

std::string VerbalizeLabel(std::string_view raw) {
  if (raw.empty()) throw ValidationError("label must be non-empty");
  std::string text;
  if (raw.starts_with("per:")) {
    text = "person " + std::string(raw.substr(4));
  } else if (raw.starts_with("org:")) {
    text = "organization " + std::string(raw.substr(4));
  } else {
    text = raw;
  }
  std::replace(text.begin(), text.end(), '_', ' ');

  // Collapse whitespace runs so the rewrite is idempotent.
  std::string out;
  std::istringstream words(text);
  std::string word;
  while (words >> word) {
    if (!out.empty()) out += ' ';
    out += word;
  }
  if (out.empty()) {
    throw ValidationError("label '" + std::string(raw) +
                          "' verbalizes to nothing");
  }
  return out;
}

std::string StripFormatting(const FormattedInput &input) {
  std::istringstream pieces(input.text.substr(0, input.sentence_length));
  std::string piece;
  Joiner joiner;
  while (pieces >> piece) {
    if (!IsMarkerToken(piece)) joiner.AddWord(piece);
  }
  return joiner.Take();
}

}  // namespace semtype
