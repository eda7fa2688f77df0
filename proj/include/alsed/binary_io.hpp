// include/alsed/binary_io.hpp

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

#ifndef ALSED_BINARY_IO_HPP_
#define ALSED_BINARY_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace alsed {

using RowMatrixXf =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Little-endian byte helpers. The host is assumed little-endian; a static
// check in binary_io.cpp enforces it.
void put_u32(std::string& out, std::uint32_t v);
void put_f32(std::string& out, float v);
void put_bytes(std::string& out, std::string_view bytes);

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}
  std::uint32_t u32();
  float f32();
  std::string_view bytes(std::size_t n);
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path);

/// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);

/// Appends `data` and fsyncs before returning.
void append_file_durable(const std::filesystem::path& path, std::string_view data);

/// Shared layout of the LMEL and EMB1 matrix files:
/// magic, u32 rows, u32 cols, rows*cols float32 row-major.
std::string encode_matrix_file(std::string_view magic, const RowMatrixXf& m);
RowMatrixXf decode_matrix_file(std::string_view magic, std::string_view data,
                               const std::string& what);

}  // namespace alsed

#endif  // ALSED_BINARY_IO_HPP_
