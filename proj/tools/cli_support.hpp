// Copyright 2026 The IBMB Authors.
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

#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ibmb/batch.hpp"
#include "ibmb/error.hpp"

namespace ibmb::cli {

namespace fs = std::filesystem;

/** Raised when verify finds a violation; maps to exit code 1. */
class VerifyFailure : public Error {
  using Error::Error;
};

inline std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

/**
 * Writes through a sibling temporary that is renamed into place, so an
 * interrupted run never leaves a truncated artifact behind.
 */
template <typename Writer>
void save(const fs::path& path, Writer&& writer) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    writer(out);
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
  }
  fs::rename(tmp, path);
}

template <typename Reader>
auto load(const fs::path& path, Reader&& reader) {
  auto in = open_in(path);
  return reader(in);
}

inline std::string read_bytes(const fs::path& path) {
  auto in = open_in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// FNV-1a, 64 bit. Stable across runs and platforms.
class ContentHash {
 public:
  ContentHash& add(std::string_view bytes) {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= 0x100000001b3ULL;
    }
    // Length separator so concatenations do not collide.
    const auto n = bytes.size();
    for (int i = 0; i < 8; ++i) {
      state_ ^= static_cast<unsigned char>(n >> (8 * i));
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }
  ContentHash& add_file(const fs::path& path) { return add(read_bytes(path)); }

  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
    return buf;
  }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::string batch_file_name(std::size_t id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "batch_%05zu.ibmb", id);
  return buf;
}

inline std::vector<fs::path> batch_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a batch directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("batch_", 0) == 0 && entry.path().extension() == ".ibmb") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

inline void save_batches(const fs::path& dir, const std::vector<Batch>& batches) {
  fs::create_directories(dir);
  for (const auto& stale : batch_files(dir)) fs::remove(stale);
  for (const auto& b : batches) {
    save(dir / batch_file_name(b.batch_id), [&](std::ostream& out) { write_batch(out, b); });
  }
}

inline std::vector<Batch> load_batches(const fs::path& dir) {
  std::vector<Batch> batches;
  for (const auto& path : batch_files(dir)) {
    batches.push_back(load(path, [](std::istream& in) { return read_batch(in); }));
    if (batches.back().batch_id != batches.size() - 1) {
      throw FormatError("batch ids in " + dir.string() + " are not 0..b-1");
    }
  }
  if (batches.empty()) throw IoError("no batch files in " + dir.string());
  return batches;
}

inline std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

/** Line-oriented key=value output. */
class Report {
 public:
  explicit Report(std::ostream& out) : out_(out) {}

  template <typename T>
  Report& kv(const std::string& key, const T& value) {
    if constexpr (std::is_floating_point_v<T>) {
      out_ << key << '=' << num(value) << '\n';
    } else {
      out_ << key << '=' << value << '\n';
    }
    return *this;
  }
  Report& line(const std::string& text) {
    out_ << text << '\n';
    return *this;
  }
  std::ostream& stream() { return out_; }

 private:
  std::ostream& out_;
};

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace ibmb::cli
