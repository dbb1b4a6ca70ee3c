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

#include "deepsent/binary_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <system_error>
#include <unistd.h>

#include "deepsent/errors.hpp"

namespace deepsent {

void ByteWriter::put_bytes(std::span<const std::uint8_t> bytes) {
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

void ByteWriter::put_magic(std::string_view magic) {
  for (char c : magic) buffer_.push_back(static_cast<std::uint8_t>(c));
}

void ByteWriter::put_le(std::uint64_t v, int width) {
  for (int i = 0; i < width; ++i) {
    buffer_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

void ByteWriter::put_f32(float v) { put_u32(std::bit_cast<std::uint32_t>(v)); }

void ByteWriter::put_f64(double v) { put_u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::put_f32s(std::span<const float> values) {
  buffer_.reserve(buffer_.size() + values.size() * 4);
  for (float v : values) put_f32(v);
}

void ByteReader::require(std::size_t n, std::string_view what) const {
  if (remaining() < n) {
    throw TruncatedError("truncated input while reading " + std::string(what) +
                         ": need " + std::to_string(n) + " bytes at offset " +
                         std::to_string(pos_) + ", have " +
                         std::to_string(remaining()));
  }
}

std::uint64_t ByteReader::get_le(int width, std::string_view what) {
  require(static_cast<std::size_t>(width), what);
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) {
    v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
  }
  pos_ += static_cast<std::size_t>(width);
  return v;
}

std::uint8_t ByteReader::u8(std::string_view what) {
  return static_cast<std::uint8_t>(get_le(1, what));
}
std::uint16_t ByteReader::u16(std::string_view what) {
  return static_cast<std::uint16_t>(get_le(2, what));
}
std::uint32_t ByteReader::u32(std::string_view what) {
  return static_cast<std::uint32_t>(get_le(4, what));
}
std::uint64_t ByteReader::u64(std::string_view what) { return get_le(8, what); }
std::int32_t ByteReader::i32(std::string_view what) {
  return static_cast<std::int32_t>(u32(what));
}
float ByteReader::f32(std::string_view what) {
  return std::bit_cast<float>(u32(what));
}
double ByteReader::f64(std::string_view what) {
  return std::bit_cast<double>(u64(what));
}

std::string ByteReader::text(std::size_t length, std::string_view what) {
  require(length, what);
  std::string out(reinterpret_cast<const char*>(bytes_.data() + pos_), length);
  pos_ += length;
  return out;
}

void ByteReader::f32s(std::span<float> out, std::string_view what) {
  require(out.size() * 4, what);
  const std::uint8_t* p = bytes_.data() + pos_;
  for (std::size_t i = 0; i < out.size(); ++i, p += 4) {
    const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                               static_cast<std::uint32_t>(p[1]) << 8 |
                               static_cast<std::uint32_t>(p[2]) << 16 |
                               static_cast<std::uint32_t>(p[3]) << 24;
    out[i] = std::bit_cast<float>(bits);
  }
  pos_ += out.size() * 4;
}

void ByteReader::expect_magic(std::string_view magic) {
  if (remaining() < magic.size() ||
      std::memcmp(bytes_.data() + pos_, magic.data(), magic.size()) != 0) {
    throw BadMagicError("bad magic: expected '" + std::string(magic) + "'");
  }
  pos_ += magic.size();
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw InputError("error reading '" + path.string() + "'");
  return bytes;
}

std::string read_text_file(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_file_atomic(const std::filesystem::path& path,
                       std::span<const std::uint8_t> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot create '" + tmp.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw InputError("error writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw InputError("cannot rename onto '" + path.string() + "'");
  }
}

void write_text_file_atomic(const std::filesystem::path& path,
                            std::string_view text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(
                                        text.data()),
                                    text.size()));
}

}  // namespace deepsent
