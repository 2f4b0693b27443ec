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

#ifndef SEMTYPE_PARAMETERS_H_
#define SEMTYPE_PARAMETERS_H_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace semtype {

using RowMatrixMap =
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                             Eigen::RowMajor>>;
using ConstRowMatrixMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>;

// Named row-major matrices stored back to back in one flat buffer, so the
// optimizer, clipping, checkpointing and gradient checks can treat the whole
// model as a single vector.
class ParameterSet {
 public:
  struct Block {
    std::string name;
    size_t offset = 0;
    int rows = 0;
    int cols = 0;
    size_t size() const { return static_cast<size_t>(rows) * cols; }
  };

  // Returns the block index.
  int AddBlock(std::string name, int rows, int cols);

  // Fills the named block with N(0, stddev^2) draws.
  void InitNormal(int block, double stddev, std::mt19937_64 &rng);

  RowMatrixMap Matrix(int block);
  ConstRowMatrixMap Matrix(int block) const;
  // Gradient buffers share the layout of the parameter buffer.
  RowMatrixMap Matrix(int block, std::span<double> buffer) const;

  const std::vector<Block> &blocks() const { return blocks_; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  size_t size() const { return values_.size(); }

  // 64-bit FNV-1a over layout and parameter bytes, as 16 hex digits.
  std::string Fingerprint() const;

 private:
  std::vector<Block> blocks_;
  std::vector<double> values_;
};

}  // namespace semtype

#endif  // SEMTYPE_PARAMETERS_H_
