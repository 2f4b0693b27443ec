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

#include "semtype/encoder.h"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <mutex>

#include "semtype/errors.h"
#include "semtype/formatting.h"

namespace semtype {
namespace {

std::mutex warning_mutex;
WarningHandler warning_handler;

void Warn(const std::string &message) {
  std::lock_guard<std::mutex> lock(warning_mutex);
  if (warning_handler) {
    warning_handler(message);
  } else {
    std::clog << "warning: " << message << "\n";
  }
}

std::string Hash(const std::string &data) {
  uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace

void SetWarningHandler(WarningHandler handler) {
  std::lock_guard<std::mutex> lock(warning_mutex);
  warning_handler = std::move(handler);
}

Embedding::Embedding(Eigen::VectorXd values) : values_(std::move(values)) {
  if (values_.size() == 0) throw ValidationError("embedding must be non-empty");
  if (!values_.allFinite()) {
    throw ValidationError("embedding has non-finite entries");
  }
}

CosineGradient CosineWithGradient(const Eigen::VectorXd &u,
                                  const Eigen::VectorXd &v) {
  if (u.size() != v.size()) {
    throw ValidationError("cosine similarity of vectors with dimensions " +
                          std::to_string(u.size()) + " and " +
                          std::to_string(v.size()));
  }
  const double norm_u = u.norm();
  const double norm_v = v.norm();
  if (norm_u == 0.0 || norm_v == 0.0) {
    throw ValidationError("cosine similarity of an all-zero vector");
  }
  CosineGradient out;
  const double inverse = 1.0 / (norm_u * norm_v);
  out.value = u.dot(v) * inverse;
  out.d_u = v * inverse - u * (out.value / (norm_u * norm_u));
  out.d_v = u * inverse - v * (out.value / (norm_v * norm_v));
  return out;
}

double CosineSimilarity(const Eigen::VectorXd &u, const Eigen::VectorXd &v) {
  if (u.size() != v.size()) {
    throw ValidationError("cosine similarity of vectors with dimensions " +
                          std::to_string(u.size()) + " and " +
                          std::to_string(v.size()));
  }
  const double norm_u = u.norm();
  const double norm_v = v.norm();
  if (norm_u == 0.0 || norm_v == 0.0) {
    throw ValidationError("cosine similarity of an all-zero vector");
  }
  return std::clamp(u.dot(v) / (norm_u * norm_v), -1.0, 1.0);
}

double CosineSimilarity(const Embedding &u, const Embedding &v) {
  return CosineSimilarity(u.values(), v.values());
}

Encoder::Encoder(EncoderConfig config, Vocabulary vocab,
                 std::unique_ptr<Backbone> backbone)
    : config_(std::move(config)),
      vocab_(std::move(vocab)),
      backbone_(std::move(backbone)) {
  if (!backbone_) throw ValidationError("encoder needs a backbone");
  if (config_.dim < 1 || config_.max_sequence_length < 1) {
    throw ValidationError("encoder dim and max_sequence_length must be positive");
  }
  if (backbone_->dim() != config_.dim) {
    throw ValidationError("backbone dim " + std::to_string(backbone_->dim()) +
                          " differs from configured dim " +
                          std::to_string(config_.dim));
  }
  if (config_.vocabulary_spec != Vocabulary::kSpec) {
    throw ValidationError("unsupported vocabulary spec '" +
                          config_.vocabulary_spec + "'");
  }
  for (std::string_view marker : MarkerTokens()) {
    if (vocab_.Lookup(marker) == Vocabulary::kUnknownId) {
      throw ValidationError("vocabulary lacks marker token " +
                            std::string(marker));
    }
  }
  config_.backbone_spec = backbone_->spec();
}

Encoder Encoder::Create(EncoderConfig config, Vocabulary vocab, uint64_t seed) {
  auto backbone =
      MakeBackbone(config.backbone_spec, vocab.size(), config.dim, seed);
  return Encoder(std::move(config), std::move(vocab), std::move(backbone));
}

Encoder::Encoder(const Encoder &other)
    : config_(other.config_),
      vocab_(other.vocab_),
      backbone_(other.backbone_->Clone()) {}

Encoder &Encoder::operator=(const Encoder &other) {
  if (this != &other) {
    config_ = other.config_;
    vocab_ = other.vocab_;
    backbone_ = other.backbone_->Clone();
  }
  return *this;
}

std::vector<int> Encoder::TokenIds(const std::string &text) const {
  TokenizedText tokens = Tokenize(vocab_, text, config_.max_sequence_length);
  if (!tokens.truncated.empty()) {
    const bool cut_description =
        text.find("Describe the ") != std::string::npos;
    Warn(std::string(cut_description ? "task description truncated"
                                     : "input truncated") +
         ": dropped " + std::to_string(tokens.truncated.size()) +
         " pieces beyond max_sequence_length " +
         std::to_string(config_.max_sequence_length));
  }
  return std::move(tokens.ids);
}

EncodedBatch Encoder::EncodeBatch(std::span<const std::string> texts,
                                  EncodeMode mode) const {
  if (texts.empty()) throw ValidationError("encode_batch needs at least one text");
  if (mode == EncodeMode::kTrain && !backbone_->trainable()) {
    throw ValidationError("backbone '" + backbone_->spec() +
                          "' cannot encode in train mode");
  }
  EncodedBatch batch;
  batch.mode = mode;
  batch.embeddings.reserve(texts.size());
  for (const std::string &text : texts) {
    const std::vector<int> ids = TokenIds(text);
    if (mode == EncodeMode::kTrain) {
      std::unique_ptr<BackboneTape> tape;
      batch.embeddings.emplace_back(backbone_->ForwardStart(ids, &tape));
      batch.tapes.push_back(std::move(tape));
    } else {
      batch.embeddings.emplace_back(backbone_->ForwardStart(ids, nullptr));
    }
  }
  return batch;
}

std::vector<Embedding> Encoder::Encode(std::span<const std::string> texts) const {
  return EncodeBatch(texts, EncodeMode::kEval).embeddings;
}

Embedding Encoder::Encode(const std::string &text) const {
  return std::move(
      EncodeBatch(std::span<const std::string>(&text, 1), EncodeMode::kEval)
          .embeddings.front());
}

void Encoder::Backward(const EncodedBatch &batch,
                       std::span<const Eigen::VectorXd> grad_embeddings,
                       std::span<double> param_grads) const {
  if (batch.mode != EncodeMode::kTrain) {
    throw ValidationError("backward needs a train-mode batch");
  }
  if (grad_embeddings.size() != batch.embeddings.size()) {
    throw ValidationError("one gradient per embedding is required");
  }
  if (param_grads.size() != parameter_count()) {
    throw ValidationError("gradient buffer has the wrong size");
  }
  for (size_t i = 0; i < grad_embeddings.size(); ++i) {
    if (grad_embeddings[i].isZero(0.0)) continue;
    backbone_->BackwardStart(*batch.tapes[i], grad_embeddings[i], param_grads);
  }
}

std::span<double> Encoder::parameter_values() {
  ParameterSet *params = backbone_->parameters();
  return params ? params->values() : std::span<double>();
}

std::span<const double> Encoder::parameter_values() const {
  const ParameterSet *params = backbone_->parameters();
  return params ? params->values() : std::span<const double>();
}

size_t Encoder::parameter_count() const { return parameter_values().size(); }

std::string Encoder::CheckpointId() const {
  std::string data = backbone_->spec();
  data += '\n';
  for (const std::string &word : vocab_.words()) {
    data += word;
    data += '\n';
  }
  if (const ParameterSet *params = backbone_->parameters()) {
    data += params->Fingerprint();
  }
  return Hash(data);
}

}  // namespace semtype
