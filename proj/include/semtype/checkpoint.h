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

#ifndef SEMTYPE_CHECKPOINT_H_
#define SEMTYPE_CHECKPOINT_H_

#include <cstdint>
#include <string>

#include "semtype/encoder.h"

namespace semtype {

inline constexpr uint32_t kCheckpointVersion = 1;

// Writes the binary parameter archive to `path` and its JSON sidecar
// {schema_version, dim, backbone_spec, marker_tokens, ...} to
// `path + ".json"`. Both writes are atomic.
void SaveCheckpoint(const Encoder &encoder, const std::string &path,
                    int64_t seed);

// Restores an encoder written by SaveCheckpoint. Throws RuntimeFailure on
// corrupt or incompatible archives.
Encoder LoadCheckpoint(const std::string &path);

std::string SidecarPath(const std::string &checkpoint_path);

}  // namespace semtype

#endif  // SEMTYPE_CHECKPOINT_H_
