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

#include "semtype/io.h"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "semtype/errors.h"

namespace semtype {
namespace {

template <typename T>
T ToLittle(T value) {
  if constexpr (std::endian::native == std::endian::big) {
    auto *bytes = reinterpret_cast<unsigned char *>(&value);
    std::reverse(bytes, bytes + sizeof(T));
  }
  return value;
}

template <typename T>
void AppendRaw(std::string *out, T value) {
  value = ToLittle(value);
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out->append(buf, sizeof(T));
}

}  // namespace

void WriteFileAtomic(const std::string &path, std::string_view contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  fs::path temp = target;
  temp += ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeFailure("cannot open " + temp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw RuntimeFailure("write to " + temp.string() + " failed");
  }
  std::error_code ec;
  fs::rename(temp, target, ec);
  if (ec) {
    throw RuntimeFailure("cannot rename " + temp.string() + " to " + path +
                         ": " + ec.message());
  }
}

std::string ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuntimeFailure("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void AppendU32(std::string *out, uint32_t value) { AppendRaw(out, value); }
void AppendU64(std::string *out, uint64_t value) { AppendRaw(out, value); }
void AppendF32(std::string *out, float value) { AppendRaw(out, value); }
void AppendF64(std::string *out, double value) { AppendRaw(out, value); }

void AppendString(std::string *out, std::string_view value) {
  AppendU32(out, static_cast<uint32_t>(value.size()));
  out->append(value);
}

std::string_view ByteReader::Bytes(size_t n) {
  if (remaining() < n) throw RuntimeFailure("unexpected end of binary data");
  std::string_view out = data_.substr(pos_, n);
  pos_ += n;
  return out;
}

template <typename T>
static T ReadRaw(ByteReader *reader) {
  std::string_view bytes = reader->Bytes(sizeof(T));
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return ToLittle(value);
}

uint32_t ByteReader::U32() { return ReadRaw<uint32_t>(this); }
uint64_t ByteReader::U64() { return ReadRaw<uint64_t>(this); }
float ByteReader::F32() { return ReadRaw<float>(this); }
double ByteReader::F64() { return ReadRaw<double>(this); }

std::string ByteReader::String() {
  const uint32_t size = U32();
  return std::string(Bytes(size));
}

}  // namespace semtype
