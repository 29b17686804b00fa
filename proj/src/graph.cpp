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

#include "ibmb/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

#include "ibmb/error.hpp"

namespace ibmb {

CsrGraph::CsrGraph(std::vector<std::uint64_t> row_ptr, std::vector<NodeId> col_idx,
                   std::optional<std::vector<double>> edge_weight)
    : row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)), edge_weight_(std::move(edge_weight)) {
  if (row_ptr_.empty() || row_ptr_.front() != 0) {
    throw FormatError("row_ptr must start at 0");
  }
  if (row_ptr_.back() != col_idx_.size()) {
    throw FormatError("row_ptr must end at the edge count");
  }
  const std::size_t n = row_ptr_.size() - 1;
  if (n > std::size_t{1} << 32) {
    throw RangeError("node count exceeds 32-bit ids");
  }
  for (std::size_t u = 0; u < n; ++u) {
    if (row_ptr_[u + 1] < row_ptr_[u]) {
      throw FormatError("row_ptr must be nondecreasing");
    }
    for (std::uint64_t e = row_ptr_[u]; e < row_ptr_[u + 1]; ++e) {
      if (col_idx_[e] >= n) {
        throw FormatError("column id out of range in row " + std::to_string(u));
      }
      if (e > row_ptr_[u] && col_idx_[e] <= col_idx_[e - 1]) {
        throw FormatError("columns not strictly ascending in row " + std::to_string(u));
      }
    }
  }
  if (edge_weight_) {
    if (edge_weight_->size() != col_idx_.size()) {
      throw FormatError("weight count differs from edge count");
    }
    for (double w : *edge_weight_) {
      if (!std::isfinite(w) || w < 0.0) {
        throw FormatError("edge weights must be finite and nonnegative");
      }
    }
  }
}

CsrGraph CsrGraph::from_edges(std::size_t num_nodes, std::vector<std::pair<NodeId, NodeId>> edges) {
  for (const auto& [u, v] : edges) {
    if (u >= num_nodes || v >= num_nodes) {
      throw RangeError("edge endpoint out of range");
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  std::vector<std::uint64_t> row_ptr(num_nodes + 1, 0);
  std::vector<NodeId> col_idx;
  col_idx.reserve(edges.size());
  for (const auto& [u, v] : edges) {
    ++row_ptr[u + 1];
    col_idx.push_back(v);
  }
  for (std::size_t u = 0; u < num_nodes; ++u) row_ptr[u + 1] += row_ptr[u];
  return CsrGraph(std::move(row_ptr), std::move(col_idx));
}

bool CsrGraph::has_edge(NodeId u, NodeId v) const {
  const auto nbrs = neighbors(u);
  return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

CsrGraph CsrGraph::with_weights(std::vector<double> edge_weight) const {
  return CsrGraph(row_ptr_, col_idx_, std::move(edge_weight));
}

CsrGraph CsrGraph::without_weights() const { return CsrGraph(row_ptr_, col_idx_); }

bool CsrGraph::is_symmetric() const {
  for (NodeId u = 0; u < num_nodes(); ++u) {
    for (NodeId v : neighbors(u)) {
      if (!has_edge(v, u)) return false;
    }
  }
  return true;
}

bool CsrGraph::has_all_self_loops() const {
  for (NodeId u = 0; u < num_nodes(); ++u) {
    if (!has_edge(u, u)) return false;
  }
  return true;
}

void NodeLabels::validate() const {
  if (num_classes < 0) throw RangeError("negative class count");
  for (std::int32_t c : labels) {
    if (c != kUnlabeled && (c < 0 || c >= num_classes)) {
      throw RangeError("label " + std::to_string(c) + " outside [0, " + std::to_string(num_classes) + ")");
    }
  }
}

void validate_features(const FeatureMatrix& x) {
  if (!x.allFinite()) throw DomainError("feature matrix contains NaN or Inf");
}

std::string to_string(NormMode mode) {
  return mode == NormMode::row_stochastic ? "row_stochastic" : "symmetric";
}

NormMode parse_norm_mode(const std::string& text) {
  if (text == "row_stochastic" || text == "row") return NormMode::row_stochastic;
  if (text == "symmetric" || text == "sym") return NormMode::symmetric;
  throw ArgumentError("unknown normalization mode: " + text);
}

CsrGraph preprocess(const CsrGraph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(2 * g.num_edges() + n);
  for (NodeId u = 0; u < n; ++u) {
    edges.emplace_back(u, u);
    for (NodeId v : g.neighbors(u)) {
      edges.emplace_back(u, v);
      edges.emplace_back(v, u);
    }
  }
  return CsrGraph::from_edges(n, std::move(edges));
}

std::vector<double> normalization_weights(const CsrGraph& g, NormMode mode) {
  const std::size_t n = g.num_nodes();
  std::vector<double> inv_sqrt(n);
  for (NodeId u = 0; u < n; ++u) {
    if (g.degree(u) == 0) {
      throw PreconditionError("node " + std::to_string(u) + " has degree 0; preprocess the graph first");
    }
    inv_sqrt[u] = 1.0 / std::sqrt(static_cast<double>(g.degree(u)));
  }
  std::vector<double> w;
  w.reserve(g.num_edges());
  for (NodeId u = 0; u < n; ++u) {
    const double inv_deg = 1.0 / static_cast<double>(g.degree(u));
    for (NodeId v : g.neighbors(u)) {
      w.push_back(mode == NormMode::row_stochastic ? inv_deg : inv_sqrt[u] * inv_sqrt[v]);
    }
  }
  return w;
}

CsrGraph sample_degree(const CsrGraph& g, std::size_t max_deg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t n = g.num_nodes();
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::vector<NodeId> candidates;
  for (NodeId u = 0; u < n; ++u) {
    candidates.clear();
    for (NodeId v : g.neighbors(u)) {
      if (v != u) candidates.push_back(v);
    }
    if (candidates.size() > max_deg) {
      // Partial Fisher-Yates: the first max_deg entries become the sample.
      for (std::size_t i = 0; i < max_deg; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, candidates.size() - 1);
        std::swap(candidates[i], candidates[pick(rng)]);
      }
      candidates.resize(max_deg);
    }
    for (NodeId v : candidates) edges.emplace_back(u, v);
  }
  return preprocess(CsrGraph::from_edges(n, std::move(edges)));
}

NodeSet k_hop_ball(const CsrGraph& g, NodeId root, std::size_t hops) {
  if (root >= g.num_nodes()) throw RangeError("root out of range");
  std::vector<std::size_t> dist(g.num_nodes(), SIZE_MAX);
  std::deque<NodeId> queue{root};
  dist[root] = 0;
  NodeSet ball;
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop_front();
    ball.push_back(u);
    if (dist[u] == hops) continue;
    for (NodeId v : g.neighbors(u)) {
      if (dist[v] == SIZE_MAX) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  std::sort(ball.begin(), ball.end());
  return ball;
}

}  // namespace ibmb
