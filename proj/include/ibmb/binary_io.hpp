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

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string_view>
#include <type_traits>
#include <vector>

#include "ibmb/error.hpp"

// Little-endian primitive readers and writers shared by every binary
// artifact (graphs, features, PPR rows, batches, checkpoints, logits).

namespace ibmb::bin {

void write_magic(std::ostream& out, std::string_view magic);

/** Reads four bytes and throws FormatError unless they equal magic. */
void expect_magic(std::istream& in, std::string_view magic);

/** Throws VersionError unless the stored version equals expected. */
void expect_version(std::istream& in, std::uint32_t expected, std::string_view what);

template <typename T>
void write(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T read(std::istream& in) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(T))) {
    throw FormatError("truncated input");
  }
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

template <typename T>
void write_array(std::ostream& out, std::span<const T> values) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size_bytes()));
  } else {
    for (const T& v : values) write(out, v);
  }
}

/**
 * Reads count values. The count is checked against a sanity cap so that a
 * corrupted header cannot trigger a huge allocation before truncation is seen.
 */
template <typename T>
std::vector<T> read_array(std::istream& in, std::uint64_t count) {
  constexpr std::uint64_t kChunk = std::uint64_t{1} << 20;
  std::vector<T> values;
  values.reserve(static_cast<std::size_t>(std::min(count, kChunk)));
  while (values.size() < count) {
    const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, count - values.size()));
    const std::size_t offset = values.size();
    values.resize(offset + n);
    in.read(reinterpret_cast<char*>(values.data() + offset),
            static_cast<std::streamsize>(n * sizeof(T)));
    if (in.gcount() != static_cast<std::streamsize>(n * sizeof(T))) {
      throw FormatError("truncated array");
    }
  }
  if constexpr (std::endian::native == std::endian::big) {
    for (T& v : values) {
      auto* p = reinterpret_cast<unsigned char*>(&v);
      std::reverse(p, p + sizeof(T));
    }
  }
  return values;
}

/** Throws FormatError if anything follows the current position. */
void expect_eof(std::istream& in);

}  // namespace ibmb::bin
