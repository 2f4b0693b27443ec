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

#include "semtype/parameters.h"

#include <cstring>
#include <cstdio>

namespace semtype {
namespace {

constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr uint64_t kFnvPrime = 0x100000001b3ULL;

void Mix(uint64_t *hash, const void *data, size_t size) {
  const auto *bytes = static_cast<const unsigned char *>(data);
  for (size_t i = 0; i < size; ++i) {
    *hash ^= bytes[i];
    *hash *= kFnvPrime;
  }
}

}  // namespace

int ParameterSet::AddBlock(std::string name, int rows, int cols) {
  Block block{std::move(name), values_.size(), rows, cols};
  values_.resize(values_.size() + block.size(), 0.0);
  blocks_.push_back(std::move(block));
  return static_cast<int>(blocks_.size()) - 1;
}

void ParameterSet::InitNormal(int block, double stddev, std::mt19937_64 &rng) {
  std::normal_distribution<double> normal(0.0, stddev);
  const Block &b = blocks_.at(block);
  for (size_t i = 0; i < b.size(); ++i) values_[b.offset + i] = normal(rng);
}

RowMatrixMap ParameterSet::Matrix(int block) {
  const Block &b = blocks_.at(block);
  return RowMatrixMap(values_.data() + b.offset, b.rows, b.cols);
}

ConstRowMatrixMap ParameterSet::Matrix(int block) const {
  const Block &b = blocks_.at(block);
  return ConstRowMatrixMap(values_.data() + b.offset, b.rows, b.cols);
}

RowMatrixMap ParameterSet::Matrix(int block, std::span<double> buffer) const {
  const Block &b = blocks_.at(block);
  return RowMatrixMap(buffer.data() + b.offset, b.rows, b.cols);
}

std::string ParameterSet::Fingerprint() const {
  uint64_t hash = kFnvOffset;
  for (const Block &b : blocks_) {
    Mix(&hash, b.name.data(), b.name.size());
    Mix(&hash, &b.rows, sizeof(b.rows));
    Mix(&hash, &b.cols, sizeof(b.cols));
  }
  Mix(&hash, values_.data(), values_.size() * sizeof(double));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace semtype
