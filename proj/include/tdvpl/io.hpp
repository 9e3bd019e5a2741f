// Copyright 2026 The tdvp-langevin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TDVPL_IO_HPP
#define TDVPL_IO_HPP

#include <bit>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tdvpl/errors.hpp"
#include "tdvpl/hashing.hpp"
#include "tdvpl/mps.hpp"

namespace tdvpl::io {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

inline constexpr char kSnapshotMagic[8] = {'T', 'D', 'V', 'P', 'L', 'M', 'P', 'S'};
inline constexpr std::uint32_t kSnapshotVersion = 1;

/// Append-only byte buffer with a running FNV-1a hash.
class BinaryWriter {
 public:
  void bytes(const void* data, std::size_t n);
  template <typename T>
  void value(const T& v) {
    bytes(&v, sizeof(T));
  }
  void string(std::string_view s);
  /// Appends the hash of everything written so far.
  void seal();
  const std::string& buffer() const { return buffer_; }

 private:
  std::string buffer_;
};

/// Bounds-checked reader; truncation or a bad checksum raises IntegrityError
/// naming `source`.
class BinaryReader {
 public:
  BinaryReader(std::string data, std::string source);
  void bytes(void* out, std::size_t n);
  template <typename T>
  T value() {
    T v;
    bytes(&v, sizeof(T));
    return v;
  }
  std::string string();
  /// Checks the trailing hash against everything read so far.
  void verify_seal();
  bool at_end() const { return pos_ == data_.size(); }
  const std::string& source() const { return source_; }
  [[noreturn]] void fail(const std::string& what) const;

 private:
  std::string data_;
  std::string source_;
  std::size_t pos_ = 0;
};

void write_snapshot(BinaryWriter& out, const MpsState& state);
MpsState read_snapshot(BinaryReader& in);

/// Standalone snapshot file: header, tensors and trailing checksum.
void save_snapshot(const std::filesystem::path& path, const MpsState& state);
MpsState load_snapshot(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Round-trip text form (%.17g); NaN prints as "nan".
std::string format_number(double value);
/// Inverse of format_number; throws IntegrityError naming `source`.
double parse_number(std::string_view text, const std::string& source);
std::vector<std::string_view> split_csv_line(std::string_view line);

}  // namespace tdvpl::io

#endif  // TDVPL_IO_HPP
