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

#ifndef SEMTYPE_DATASET_H_
#define SEMTYPE_DATASET_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "semtype/formatting.h"

namespace semtype {

// Canonical JSONL record:
//   {id, task_kind, tokens:[...], spans:[{start,end,role,entity_type?}],
//    labels:[...]}
// Throws ValidationError (prefixed with `where`) on schema violations.
TypingInstance InstanceFromJson(const nlohmann::json &record,
                                const std::string &where);
nlohmann::ordered_json InstanceToJson(const TypingInstance &instance);

// One record per non-blank line; errors name the file and line number.
std::vector<TypingInstance> ReadInstances(const std::string &path);
void WriteInstances(const std::string &path,
                    std::span<const TypingInstance> instances);

// One raw label per non-blank line. Empty files and duplicates are
// validation errors.
std::vector<std::string> ReadLabels(const std::string &path);
void WriteLabels(const std::string &path, std::span<const std::string> labels);

struct Dataset {
  std::vector<TypingInstance> instances;
  std::vector<std::string> labels;
};

// Reads instances and labels, checking every record against `task_kind`
// and every gold label against the label file.
Dataset LoadDataset(const std::string &instances_path,
                    const std::string &labels_path,
                    std::optional<TaskKind> task_kind = std::nullopt);

}  // namespace semtype

#endif  // SEMTYPE_DATASET_H_
