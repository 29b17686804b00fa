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

#include "ibmb/binary_io.hpp"

#include <string>

namespace ibmb::bin {

void write_magic(std::ostream& out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

void expect_magic(std::istream& in, std::string_view magic) {
  std::string got(magic.size(), '\0');
  in.read(got.data(), static_cast<std::streamsize>(got.size()));
  if (in.gcount() != static_cast<std::streamsize>(magic.size()) || got != magic) {
    throw FormatError("bad magic, expected \"" + std::string(magic) + "\"");
  }
}

void expect_version(std::istream& in, std::uint32_t expected, std::string_view what) {
  const auto version = read<std::uint32_t>(in);
  if (version != expected) {
    throw VersionError(std::string(what) + ": unsupported version " + std::to_string(version) +
                       " (expected " + std::to_string(expected) + ")");
  }
}

void expect_eof(std::istream& in) {
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("trailing bytes after payload");
  }
}

}  // namespace ibmb::bin
