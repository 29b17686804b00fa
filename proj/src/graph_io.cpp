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

#include <algorithm>
#include <charconv>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>

#include "ibmb/binary_io.hpp"
#include "ibmb/error.hpp"
#include "ibmb/graph.hpp"

namespace ibmb {
namespace {

constexpr std::uint32_t kGraphVersion = 1;
constexpr std::uint32_t kFeatureVersion = 1;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool is_skippable(std::string_view line) { return line.empty() || line.front() == '#'; }

// Splits "u v" into two unsigned integers; anything else is a parse error.
std::pair<std::uint64_t, std::uint64_t> parse_pair(std::string_view line, std::size_t line_no) {
  std::uint64_t ids[2];
  const char* p = line.data();
  const char* end = line.data() + line.size();
  for (int i = 0; i < 2; ++i) {
    while (p < end && (*p == ' ' || *p == '\t')) ++p;
    if (p < end && *p == '-') throw ParseError(line_no, "negative node id");
    const auto [next, ec] = std::from_chars(p, end, ids[i]);
    if (ec == std::errc::result_out_of_range) throw RangeError("line " + std::to_string(line_no) + ": node id overflow");
    if (ec != std::errc() || next == p) throw ParseError(line_no, "expected two integer node ids");
    p = next;
    if (i == 0 && (p == end || (*p != ' ' && *p != '\t'))) throw ParseError(line_no, "expected two integer node ids");
  }
  while (p < end && (*p == ' ' || *p == '\t')) ++p;
  if (p != end) throw ParseError(line_no, "unexpected trailing content");
  return {ids[0], ids[1]};
}

}  // namespace

CsrGraph load_edge_list(std::istream& in, const EdgeListOptions& options) {
  constexpr std::uint64_t kMaxId = std::numeric_limits<NodeId>::max() - 1;
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::uint64_t max_id = 0;
  bool any = false;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (is_skippable(line)) continue;
    const auto [u, v] = parse_pair(line, line_no);
    const std::uint64_t hi = std::max(u, v);
    if (hi > kMaxId) {
      throw RangeError("line " + std::to_string(line_no) + ": node id exceeds 32-bit range");
    }
    if (options.num_nodes && hi >= *options.num_nodes) {
      throw RangeError("line " + std::to_string(line_no) + ": node id " + std::to_string(hi) +
                       " >= declared node count " + std::to_string(*options.num_nodes));
    }
    max_id = any ? std::max(max_id, hi) : hi;
    any = true;
    edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  }
  const std::size_t n = options.num_nodes ? *options.num_nodes : (any ? max_id + 1 : 0);
  return CsrGraph::from_edges(n, std::move(edges));
}

RemappedGraph load_edge_list_remapped(std::istream& in) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> raw_edges;
  std::vector<std::uint64_t> ids;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (is_skippable(line)) continue;
    const auto e = parse_pair(line, line_no);
    raw_edges.push_back(e);
    ids.push_back(e.first);
    ids.push_back(e.second);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.size() > std::numeric_limits<NodeId>::max()) throw RangeError("too many distinct node ids");
  auto dense = [&](std::uint64_t id) {
    return static_cast<NodeId>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
  };
  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(raw_edges.size());
  for (const auto& [u, v] : raw_edges) edges.emplace_back(dense(u), dense(v));
  return {CsrGraph::from_edges(ids.size(), std::move(edges)), std::move(ids)};
}

void write_graph(std::ostream& out, const CsrGraph& g) {
  bin::write_magic(out, "IBMG");
  bin::write<std::uint32_t>(out, kGraphVersion);
  bin::write<std::uint64_t>(out, g.num_nodes());
  bin::write<std::uint64_t>(out, g.num_edges());
  bin::write_array<std::uint64_t>(out, g.row_ptr());
  bin::write_array<NodeId>(out, g.col_idx());
  bin::write<std::uint8_t>(out, g.has_weights() ? 1 : 0);
  if (g.has_weights()) bin::write_array<double>(out, *g.edge_weight());
}

CsrGraph read_graph(std::istream& in) {
  bin::expect_magic(in, "IBMG");
  bin::expect_version(in, kGraphVersion, "graph");
  const auto n = bin::read<std::uint64_t>(in);
  const auto e = bin::read<std::uint64_t>(in);
  if (n >= std::numeric_limits<std::uint64_t>::max()) throw FormatError("node count overflow");
  auto row_ptr = bin::read_array<std::uint64_t>(in, n + 1);
  auto col_idx = bin::read_array<NodeId>(in, e);
  const auto flag = bin::read<std::uint8_t>(in);
  std::optional<std::vector<double>> weights;
  if (flag == 1) {
    weights = bin::read_array<double>(in, e);
  } else if (flag != 0) {
    throw FormatError("invalid weight flag");
  }
  return CsrGraph(std::move(row_ptr), std::move(col_idx), std::move(weights));
}

void write_features(std::ostream& out, const FeatureMatrix& x) {
  bin::write_magic(out, "IBMF");
  bin::write<std::uint32_t>(out, kFeatureVersion);
  bin::write<std::uint64_t>(out, static_cast<std::uint64_t>(x.rows()));
  bin::write<std::uint64_t>(out, static_cast<std::uint64_t>(x.cols()));
  const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> narrowed = x.cast<float>();
  bin::write_array<float>(out, std::span<const float>(narrowed.data(), static_cast<std::size_t>(narrowed.size())));
}

FeatureMatrix read_features(std::istream& in) {
  bin::expect_magic(in, "IBMF");
  bin::expect_version(in, kFeatureVersion, "features");
  const auto rows = bin::read<std::uint64_t>(in);
  const auto cols = bin::read<std::uint64_t>(in);
  if (cols != 0 && rows > std::numeric_limits<std::uint64_t>::max() / cols) throw FormatError("feature size overflow");
  const auto values = bin::read_array<float>(in, rows * cols);
  FeatureMatrix x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < values.size(); ++i) x.data()[i] = static_cast<double>(values[i]);
  validate_features(x);
  return x;
}

void write_labels(std::ostream& out, const NodeLabels& labels) {
  for (std::int32_t c : labels.labels) out << c << '\n';
}

NodeLabels read_labels(std::istream& in) {
  NodeLabels result;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    std::int32_t c = 0;
    const auto [next, ec] = std::from_chars(line.data(), line.data() + line.size(), c);
    if (ec != std::errc() || next != line.data() + line.size() || c < NodeLabels::kUnlabeled) {
      throw ParseError(line_no, "expected a class id or -1");
    }
    result.labels.push_back(c);
    result.num_classes = std::max(result.num_classes, c + 1);
  }
  return result;
}

void write_node_set(std::ostream& out, const NodeSet& nodes) {
  for (NodeId v : nodes) out << v << '\n';
}

NodeSet read_node_set(std::istream& in) {
  NodeSet nodes;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (is_skippable(line)) continue;
    std::uint64_t v = 0;
    const auto [next, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc() || next != line.data() + line.size()) throw ParseError(line_no, "expected a node id");
    if (v > std::numeric_limits<NodeId>::max()) throw RangeError("line " + std::to_string(line_no) + ": node id overflow");
    nodes.push_back(static_cast<NodeId>(v));
  }
  canonicalize(nodes);
  return nodes;
}

}  // namespace ibmb
