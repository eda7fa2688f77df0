// src/binary_io.cpp

// Copyright 2026  The alsed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "alsed/binary_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fcntl.h>
#include <unistd.h>

#include "alsed/error.hpp"

namespace alsed {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

void put_u32(std::string& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

void put_f32(std::string& out, float v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

void put_bytes(std::string& out, std::string_view bytes) { out.append(bytes); }

std::uint32_t ByteReader::u32() {
  auto b = bytes(4);
  std::uint32_t v;
  std::memcpy(&v, b.data(), 4);
  return v;
}

float ByteReader::f32() {
  auto b = bytes(4);
  float v;
  std::memcpy(&v, b.data(), 4);
  return v;
}

std::string_view ByteReader::bytes(std::size_t n) {
  if (n > remaining()) throw InputError("unexpected end of binary data");
  auto out = data_.substr(pos_, n);
  pos_ += n;
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw InputError("cannot read " + path.string());
  return std::move(ss).str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view data) {
  auto tmp = path;
  tmp += ".tmp";
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw Error("cannot create " + tmp.string());
  std::size_t written = 0;
  while (written < data.size()) {
    auto n = ::write(fd, data.data() + written, data.size() - written);
    if (n <= 0) {
      ::close(fd);
      throw Error("write failed: " + tmp.string());
    }
    written += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
  std::filesystem::rename(tmp, path);
}

void append_file_durable(const std::filesystem::path& path, std::string_view data) {
  int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd < 0) throw Error("cannot open " + path.string());
  std::size_t written = 0;
  while (written < data.size()) {
    auto n = ::write(fd, data.data() + written, data.size() - written);
    if (n <= 0) {
      ::close(fd);
      throw Error("append failed: " + path.string());
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) {
    ::close(fd);
    throw Error("fsync failed: " + path.string());
  }
  ::close(fd);
}

std::string encode_matrix_file(std::string_view magic, const RowMatrixXf& m) {
  std::string out;
  out.reserve(12 + 4 * static_cast<std::size_t>(m.size()));
  put_bytes(out, magic);
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  out.append(reinterpret_cast<const char*>(m.data()),
             4 * static_cast<std::size_t>(m.size()));
  return out;
}

RowMatrixXf decode_matrix_file(std::string_view magic, std::string_view data,
                               const std::string& what) {
  ByteReader r(data);
  if (r.remaining() < 12 || r.bytes(4) != magic)
    throw InputError(what + ": bad magic, expected " + std::string(magic));
  auto rows = r.u32();
  auto cols = r.u32();
  std::size_t n = static_cast<std::size_t>(rows) * cols;
  if (r.remaining() != 4 * n)
    throw InputError(what + ": payload size does not match header");
  RowMatrixXf m(rows, cols);
  auto payload = r.bytes(4 * n);
  std::memcpy(m.data(), payload.data(), 4 * n);
  if (!m.allFinite()) throw InputError(what + ": non-finite values");
  return m;
}

}  // namespace alsed
