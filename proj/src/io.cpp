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

#include "tdvpl/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <fstream>
#include <sstream>

namespace tdvpl::io {

void BinaryWriter::bytes(const void* data, std::size_t n) { buffer_.append(static_cast<const char*>(data), n); }

void BinaryWriter::string(std::string_view s) {
  value<std::uint64_t>(s.size());
  bytes(s.data(), s.size());
}

void BinaryWriter::seal() {
  Fnv1a hash;
  hash.update(buffer_);
  value<std::uint64_t>(hash.value());
}

BinaryReader::BinaryReader(std::string data, std::string source) : data_(std::move(data)), source_(std::move(source)) {}

void BinaryReader::fail(const std::string& what) const {
  throw IntegrityError(source_ + ": " + what);
}

void BinaryReader::bytes(void* out, std::size_t n) {
  if (n > data_.size() - pos_) fail("truncated (needed " + std::to_string(n) + " more bytes at offset " + std::to_string(pos_) + ")");
  std::memcpy(out, data_.data() + pos_, n);
  pos_ += n;
}

std::string BinaryReader::string() {
  const auto n = value<std::uint64_t>();
  if (n > data_.size() - pos_) fail("truncated string");
  std::string s(data_.data() + pos_, n);
  pos_ += n;
  return s;
}

void BinaryReader::verify_seal() {
  Fnv1a hash;
  hash.update(data_.data(), pos_);
  const auto expected = value<std::uint64_t>();
  if (hash.value() != expected) fail("checksum mismatch");
}

void write_snapshot(BinaryWriter& out, const MpsState& state) {
  out.bytes(kSnapshotMagic, sizeof(kSnapshotMagic));
  out.value<std::uint32_t>(kSnapshotVersion);
  out.value<std::uint32_t>(static_cast<std::uint32_t>(state.length()));
  out.value<std::uint32_t>(kPhysDim);
  out.value<std::int32_t>(state.center() ? *state.center() : -1);
  for (auto d : state.bond_dims()) out.value<std::uint64_t>(static_cast<std::uint64_t>(d));
  for (const auto& t : state.sites()) {
    // [sigma][alpha][beta]: row-major within each physical slice.
    for (const auto& m : t.s) {
      const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
      out.bytes(rm.data(), sizeof(Complex) * static_cast<std::size_t>(rm.size()));
    }
  }
}

MpsState read_snapshot(BinaryReader& in) {
  char magic[sizeof(kSnapshotMagic)];
  in.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kSnapshotMagic, sizeof(magic)) != 0) in.fail("not an MPS snapshot");
  const auto version = in.value<std::uint32_t>();
  if (version != kSnapshotVersion) in.fail("unsupported snapshot version " + std::to_string(version));
  const auto length = in.value<std::uint32_t>();
  const auto d = in.value<std::uint32_t>();
  if (d != kPhysDim) in.fail("physical dimension " + std::to_string(d) + " is not supported");
  if (length == 0 || length > 4096) in.fail("implausible chain length " + std::to_string(length));
  const auto center = in.value<std::int32_t>();
  std::vector<Eigen::Index> dims(length + 1);
  for (auto& x : dims) {
    const auto v = in.value<std::uint64_t>();
    if (v == 0 || v > (1u << 20)) in.fail("implausible bond dimension");
    x = static_cast<Eigen::Index>(v);
  }
  std::vector<SiteTensor> sites;
  for (std::uint32_t n = 0; n < length; ++n) {
    SiteTensor t;
    for (auto& m : t.s) {
      Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(dims[n], dims[n + 1]);
      in.bytes(rm.data(), sizeof(Complex) * static_cast<std::size_t>(rm.size()));
      m = rm;
    }
    sites.push_back(std::move(t));
  }
  try {
    return MpsState(std::move(sites), center >= 0 ? std::optional<int>(center) : std::nullopt);
  } catch (const ContractViolation& e) {
    in.fail(e.what());
  }
}

void save_snapshot(const std::filesystem::path& path, const MpsState& state) {
  BinaryWriter out;
  write_snapshot(out, state);
  out.seal();
  write_file_atomic(path, out.buffer());
}

MpsState load_snapshot(const std::filesystem::path& path) {
  BinaryReader in(read_file(path), path.string());
  MpsState state = read_snapshot(in);
  in.verify_seal();
  if (!in.at_end()) in.fail("trailing bytes");
  return state;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IntegrityError(path.string() + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(tmp.string() + ": cannot open for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error(tmp.string() + ": write failed");
  }
  std::filesystem::rename(tmp, path);
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

double parse_number(std::string_view text, const std::string& source) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  const std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw IntegrityError(source + ": bad number '" + s + "'");
  return v;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace tdvpl::io
