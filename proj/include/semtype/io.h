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

#ifndef SEMTYPE_IO_H_
#define SEMTYPE_IO_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace semtype {

// Writes to a sibling temp file, then renames over `path`. Throws
// RuntimeFailure on I/O errors.
void WriteFileAtomic(const std::string &path, std::string_view contents);

// Throws RuntimeFailure when the file cannot be read.
std::string ReadFile(const std::string &path);

// Little-endian encoders for binary artifacts.
void AppendU32(std::string *out, uint32_t value);
void AppendU64(std::string *out, uint64_t value);
void AppendF32(std::string *out, float value);
void AppendF64(std::string *out, double value);
void AppendString(std::string *out, std::string_view value);

// Cursor over a binary buffer. Reads past the end throw RuntimeFailure.
class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  uint32_t U32();
  uint64_t U64();
  float F32();
  double F64();
  std::string String();
  std::string_view Bytes(size_t n);
  size_t remaining() const { return data_.size() - pos_; }

 private:
  std::string_view data_;
  size_t pos_ = 0;
};

}  // namespace semtype

#endif  // SEMTYPE_IO_H_
