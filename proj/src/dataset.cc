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

#include "semtype/dataset.h"

#include <set>
#include <sstream>

#include "semtype/errors.h"
#include "semtype/io.h"

namespace semtype {
namespace {

const nlohmann::json &Field(const nlohmann::json &record, const char *key,
                            const std::string &where) {
  auto it = record.find(key);
  if (it == record.end()) {
    throw ValidationError(where + ": missing field '" + key + "'");
  }
  return *it;
}

std::string ReadLine(std::istream &in, int *line_number, bool *ok) {
  std::string line;
  *ok = static_cast<bool>(std::getline(in, line));
  ++*line_number;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

TypingInstance InstanceFromJson(const nlohmann::json &record,
                                const std::string &where) {
  if (!record.is_object()) throw ValidationError(where + ": record is not an object");
  TypingInstance instance;
  try {
    instance.id = Field(record, "id", where).get<std::string>();
    instance.task = ParseTaskKind(Field(record, "task_kind", where).get<std::string>());
    instance.tokens = Field(record, "tokens", where).get<std::vector<std::string>>();
    for (const auto &span : Field(record, "spans", where)) {
      Span s;
      s.start = Field(span, "start", where).get<int>();
      s.end = Field(span, "end", where).get<int>();
      s.role = ParseSpanRole(Field(span, "role", where).get<std::string>());
      if (auto it = span.find("entity_type"); it != span.end() && !it->is_null()) {
        s.entity_type = it->get<std::string>();
      }
      instance.spans.push_back(std::move(s));
    }
    for (const auto &label : Field(record, "labels", where)) {
      instance.gold_labels.insert(label.get<std::string>());
    }
  } catch (const nlohmann::json::exception &e) {
    throw ValidationError(where + ": " + e.what());
  } catch (const ValidationError &e) {
    const std::string what = e.what();
    if (what.starts_with(where)) throw;
    throw ValidationError(where + ": " + what);
  }
  try {
    ValidateInstance(instance);
  } catch (const ValidationError &e) {
    throw ValidationError(where + ": " + e.what());
  }
  return instance;
}

nlohmann::ordered_json InstanceToJson(const TypingInstance &instance) {
  nlohmann::ordered_json j;
  j["id"] = instance.id;
  j["task_kind"] = std::string(TaskKindName(instance.task));
  j["tokens"] = instance.tokens;
  j["spans"] = nlohmann::ordered_json::array();
  for (const Span &s : instance.spans) {
    nlohmann::ordered_json span;
    span["start"] = s.start;
    span["end"] = s.end;
    span["role"] = std::string(SpanRoleName(s.role));
    if (s.entity_type) span["entity_type"] = *s.entity_type;
    j["spans"].push_back(std::move(span));
  }
  j["labels"] = std::vector<std::string>(instance.gold_labels.begin(),
                                         instance.gold_labels.end());
  return j;
}

std::vector<TypingInstance> ReadInstances(const std::string &path) {
  std::istringstream in(ReadFile(path));
  std::vector<TypingInstance> out;
  std::set<std::string> ids;
  int line_number = 0;
  bool ok = true;
  while (true) {
    const std::string line = ReadLine(in, &line_number, &ok);
    if (!ok) break;
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(line_number);
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception &e) {
      throw ValidationError(where + ": malformed JSON: " + e.what());
    }
    TypingInstance instance = InstanceFromJson(record, where);
    if (!ids.insert(instance.id).second) {
      throw ValidationError(where + ": duplicate instance id '" + instance.id + "'");
    }
    out.push_back(std::move(instance));
  }
  return out;
}

void WriteInstances(const std::string &path,
                    std::span<const TypingInstance> instances) {
  std::string out;
  for (const TypingInstance &instance : instances) {
    out += InstanceToJson(instance).dump();
    out += '\n';
  }
  WriteFileAtomic(path, out);
}

std::vector<std::string> ReadLabels(const std::string &path) {
  std::istringstream in(ReadFile(path));
  std::vector<std::string> labels;
  std::set<std::string> seen;
  int line_number = 0;
  bool ok = true;
  while (true) {
    std::string line = ReadLine(in, &line_number, &ok);
    if (!ok) break;
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (!seen.insert(line).second) {
      throw ValidationError(path + ":" + std::to_string(line_number) +
                            ": duplicate label '" + line + "'");
    }
    labels.push_back(std::move(line));
  }
  if (labels.empty()) throw ValidationError(path + ": label file is empty");
  return labels;
}

void WriteLabels(const std::string &path, std::span<const std::string> labels) {
  std::string out;
  for (const std::string &label : labels) {
    out += label;
    out += '\n';
  }
  WriteFileAtomic(path, out);
}

Dataset LoadDataset(const std::string &instances_path,
                    const std::string &labels_path,
                    std::optional<TaskKind> task_kind) {
  Dataset data;
  data.labels = ReadLabels(labels_path);
  data.instances = ReadInstances(instances_path);
  const std::set<std::string> known(data.labels.begin(), data.labels.end());
  for (size_t i = 0; i < data.instances.size(); ++i) {
    const TypingInstance &instance = data.instances[i];
    if (task_kind && instance.task != *task_kind) {
      throw ValidationError(instances_path + ": instance '" + instance.id +
                            "' has task kind " +
                            std::string(TaskKindName(instance.task)) +
                            ", expected " + std::string(TaskKindName(*task_kind)));
    }
    for (const std::string &label : instance.gold_labels) {
      if (!known.contains(label)) {
        throw ValidationError(instances_path + ": instance '" + instance.id +
                              "' has label '" + label + "' missing from " +
                              labels_path);
      }
    }
  }
  return data;
}

}  // namespace semtype
