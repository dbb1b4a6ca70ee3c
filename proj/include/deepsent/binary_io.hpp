// Copyright 2026 The deepsent Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DEEPSENT_BINARY_IO_HPP_
#define DEEPSENT_BINARY_IO_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace deepsent {

// Appends little-endian scalars to a growing byte buffer.
class ByteWriter {
 public:
  void put_bytes(std::span<const std::uint8_t> bytes);
  void put_magic(std::string_view magic);
  void put_u8(std::uint8_t v) { buffer_.push_back(v); }
  void put_u16(std::uint16_t v) { put_le(v, 2); }
  void put_u32(std::uint32_t v) { put_le(v, 4); }
  void put_u64(std::uint64_t v) { put_le(v, 8); }
  void put_i32(std::int32_t v) { put_u32(static_cast<std::uint32_t>(v)); }
  void put_f32(float v);
  void put_f64(double v);
  void put_f32s(std::span<const float> values);

  const std::vector<std::uint8_t>& bytes() const { return buffer_; }
  std::vector<std::uint8_t> release() { return std::move(buffer_); }

 private:
  void put_le(std::uint64_t v, int width);
  std::vector<std::uint8_t> buffer_;
};

// Cursor over an immutable byte buffer. Every read past the end throws
// TruncatedError carrying the supplied context string.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8(std::string_view what);
  std::uint16_t u16(std::string_view what);
  std::uint32_t u32(std::string_view what);
  std::uint64_t u64(std::string_view what);
  std::int32_t i32(std::string_view what);
  float f32(std::string_view what);
  double f64(std::string_view what);
  std::string text(std::size_t length, std::string_view what);
  void f32s(std::span<float> out, std::string_view what);

  // Throws BadMagicError when the next bytes differ from `magic`.
  void expect_magic(std::string_view magic);

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  std::uint64_t get_le(int width, std::string_view what);
  void require(std::size_t n, std::string_view what) const;

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

// Whole-file helpers. read_file throws InputError when the file cannot be
// opened. write_file_atomic writes a sibling temp file then renames it over
// `path`, so readers never observe a partial file.
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path,
                       std::span<const std::uint8_t> bytes);
void write_text_file_atomic(const std::filesystem::path& path,
                            std::string_view text);

}  // namespace deepsent

#endif  // DEEPSENT_BINARY_IO_HPP_
