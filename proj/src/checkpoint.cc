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

#include "semtype/checkpoint.h"

#include <json.hpp>

#include "semtype/errors.h"
#include "semtype/formatting.h"
#include "semtype/io.h"

namespace semtype {
namespace {

constexpr std::string_view kMagic = "SEMTYPE-CKPT";

}  // namespace

std::string SidecarPath(const std::string &checkpoint_path) {
  return checkpoint_path + ".json";
}

void SaveCheckpoint(const Encoder &encoder, const std::string &path,
                    int64_t seed) {
  const ParameterSet *params = encoder.backbone().parameters();
  if (params == nullptr) {
    throw ValidationError("backbone '" + encoder.backbone().spec() +
                          "' has no parameters to persist");
  }
  const EncoderConfig &config = encoder.config();

  std::string archive(kMagic);
  AppendU32(&archive, kCheckpointVersion);
  AppendString(&archive, config.backbone_spec);
  AppendString(&archive, config.vocabulary_spec);
  AppendU32(&archive, static_cast<uint32_t>(config.dim));
  AppendU32(&archive, static_cast<uint32_t>(config.max_sequence_length));
  AppendU32(&archive, static_cast<uint32_t>(encoder.vocabulary().size()));
  for (const std::string &word : encoder.vocabulary().words()) {
    AppendString(&archive, word);
  }
  AppendU32(&archive, static_cast<uint32_t>(params->blocks().size()));
  for (const auto &block : params->blocks()) {
    AppendString(&archive, block.name);
    AppendU32(&archive, static_cast<uint32_t>(block.rows));
    AppendU32(&archive, static_cast<uint32_t>(block.cols));
  }
  for (double v : params->values()) AppendF64(&archive, v);

  nlohmann::ordered_json sidecar;
  sidecar["schema_version"] = kCheckpointVersion;
  sidecar["dim"] = config.dim;
  sidecar["backbone_spec"] = config.backbone_spec;
  sidecar["marker_tokens"] = nlohmann::json::array();
  for (std::string_view marker : MarkerTokens()) {
    sidecar["marker_tokens"].push_back(std::string(marker));
  }
  sidecar["vocabulary_spec"] = config.vocabulary_spec;
  sidecar["max_sequence_length"] = config.max_sequence_length;
  sidecar["checkpoint_id"] = encoder.CheckpointId();
  sidecar["seed"] = seed;

  WriteFileAtomic(path, archive);
  WriteFileAtomic(SidecarPath(path), sidecar.dump(2) + "\n");
}

Encoder LoadCheckpoint(const std::string &path) {
  const std::string archive = ReadFile(path);
  ByteReader reader(archive);
  if (reader.Bytes(kMagic.size()) != kMagic) {
    throw RuntimeFailure(path + " is not a checkpoint archive");
  }
  const uint32_t version = reader.U32();
  if (version != kCheckpointVersion) {
    throw RuntimeFailure(path + " has unsupported checkpoint version " +
                         std::to_string(version));
  }
  EncoderConfig config;
  config.backbone_spec = reader.String();
  config.vocabulary_spec = reader.String();
  config.dim = static_cast<int>(reader.U32());
  config.max_sequence_length = static_cast<int>(reader.U32());
  const uint32_t vocab_size = reader.U32();
  std::vector<std::string> words;
  words.reserve(vocab_size);
  for (uint32_t i = 0; i < vocab_size; ++i) words.push_back(reader.String());

  Encoder encoder = [&] {
    try {
      return Encoder::Create(config, Vocabulary::FromWords(std::move(words)), 0);
    } catch (const ValidationError &e) {
      throw RuntimeFailure(path + ": " + e.what());
    }
  }();

  const ParameterSet &params = *encoder.backbone().parameters();
  const uint32_t block_count = reader.U32();
  if (block_count != params.blocks().size()) {
    throw RuntimeFailure(path + ": parameter layout mismatch");
  }
  for (const auto &block : params.blocks()) {
    const std::string name = reader.String();
    const int rows = static_cast<int>(reader.U32());
    const int cols = static_cast<int>(reader.U32());
    if (name != block.name || rows != block.rows || cols != block.cols) {
      throw RuntimeFailure(path + ": parameter block '" + name +
                           "' does not match backbone layout");
    }
  }
  std::span<double> values = encoder.parameter_values();
  for (double &v : values) v = reader.F64();
  if (reader.remaining() != 0) {
    throw RuntimeFailure(path + ": trailing bytes after parameters");
  }
  return encoder;
}

}  // namespace semtype
