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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ibmb/types.hpp"

namespace ibmb {

/**
 * Immutable compressed-sparse-row graph with optional per-edge weights.
 *
 * Every constructor validates the CSR invariants: row_ptr starts at 0, ends
 * at the edge count and never decreases; column ids are in range and strictly
 * ascending within a row; weights, when present, are finite and nonnegative.
 * Instances are safe to share read-only between threads.
 */
class CsrGraph {
 public:
  CsrGraph() : row_ptr_{0} {}
  CsrGraph(std::vector<std::uint64_t> row_ptr, std::vector<NodeId> col_idx,
           std::optional<std::vector<double>> edge_weight = std::nullopt);

  /** Builds a graph from an arbitrary directed edge list; duplicates collapse. */
  static CsrGraph from_edges(std::size_t num_nodes, std::vector<std::pair<NodeId, NodeId>> edges);

  std::size_t num_nodes() const { return row_ptr_.size() - 1; }
  std::size_t num_edges() const { return col_idx_.size(); }

  std::span<const NodeId> neighbors(NodeId u) const {
    return {col_idx_.data() + row_ptr_[u], col_idx_.data() + row_ptr_[u + 1]};
  }
  std::span<const double> weights(NodeId u) const {
    return {edge_weight_->data() + row_ptr_[u], edge_weight_->data() + row_ptr_[u + 1]};
  }
  std::size_t degree(NodeId u) const { return row_ptr_[u + 1] - row_ptr_[u]; }

  bool has_edge(NodeId u, NodeId v) const;
  bool has_weights() const { return edge_weight_.has_value(); }

  const std::vector<std::uint64_t>& row_ptr() const { return row_ptr_; }
  const std::vector<NodeId>& col_idx() const { return col_idx_; }
  const std::optional<std::vector<double>>& edge_weight() const { return edge_weight_; }

  /** Copy of this graph carrying the given per-edge weights. */
  CsrGraph with_weights(std::vector<double> edge_weight) const;
  CsrGraph without_weights() const;

  /** Every (u,v) has a matching (v,u). Weights are not compared. */
  bool is_symmetric() const;
  bool has_all_self_loops() const;

  friend bool operator==(const CsrGraph&, const CsrGraph&) = default;

 private:
  std::vector<std::uint64_t> row_ptr_;
  std::vector<NodeId> col_idx_;
  std::optional<std::vector<double>> edge_weight_;
};

/** Per-node class ids; kUnlabeled marks nodes without a label. */
struct NodeLabels {
  static constexpr std::int32_t kUnlabeled = -1;

  std::vector<std::int32_t> labels;
  std::int32_t num_classes = 0;

  std::size_t size() const { return labels.size(); }
  bool is_labeled(NodeId v) const { return labels[v] != kUnlabeled; }

  /** Throws RangeError if a label is outside [0, num_classes). */
  void validate() const;
};

/** Node features, one row per node. */
using FeatureMatrix = MatrixXd;

/** Throws DomainError on NaN or Inf entries. */
void validate_features(const FeatureMatrix& x);

enum class NormMode : std::uint8_t { row_stochastic = 0, symmetric = 1 };

std::string to_string(NormMode mode);
NormMode parse_norm_mode(const std::string& text);

/**
 * Symmetric closure of g with exactly one self-loop per node. Existing
 * weights are dropped. Idempotent.
 */
CsrGraph preprocess(const CsrGraph& g);

/**
 * Normalization coefficient for every edge slot of g: 1/deg(u) in
 * row_stochastic mode, 1/sqrt(deg(u) deg(v)) in symmetric mode.
 * Throws PreconditionError on a zero-degree node.
 */
std::vector<double> normalization_weights(const CsrGraph& g, NormMode mode);

/**
 * Caps each node's non-loop neighbor list at max_deg by uniform sampling
 * without replacement, then re-symmetrizes and re-adds self-loops. A node
 * may end up with more than max_deg neighbors through edges kept by the
 * other endpoint. Deterministic per seed.
 */
CsrGraph sample_degree(const CsrGraph& g, std::size_t max_deg, std::uint64_t seed);

/** Nodes within `hops` steps of root (root included), ascending. */
NodeSet k_hop_ball(const CsrGraph& g, NodeId root, std::size_t hops);

// ---------------------------------------------------------------------------
// Ingestion and persistence

struct EdgeListOptions {
  /** Declared node count; inferred as max id + 1 when absent. */
  std::optional<std::size_t> num_nodes;
};

/**
 * Parses "u v" lines with 0-based ids. Lines starting with '#' and blank
 * lines are skipped. Throws ParseError (with line number) on malformed lines
 * and RangeError when an id does not fit the declared or representable range.
 */
CsrGraph load_edge_list(std::istream& in, const EdgeListOptions& options = {});

/** Edge list whose external ids are arbitrary integers, remapped densely. */
struct RemappedGraph {
  CsrGraph graph;
  /** external_ids[v] is the original id of dense node v; ascending. */
  std::vector<std::uint64_t> external_ids;
};
RemappedGraph load_edge_list_remapped(std::istream& in);

void write_graph(std::ostream& out, const CsrGraph& g);
CsrGraph read_graph(std::istream& in);

void write_features(std::ostream& out, const FeatureMatrix& x);
FeatureMatrix read_features(std::istream& in);

/** One integer per line, -1 for unlabeled. num_classes = max label + 1. */
void write_labels(std::ostream& out, const NodeLabels& labels);
NodeLabels read_labels(std::istream& in);

/** Node id list, one per line, '#' comments allowed. Result is canonical. */
void write_node_set(std::ostream& out, const NodeSet& nodes);
NodeSet read_node_set(std::istream& in);

// ---------------------------------------------------------------------------
// Synthetic graphs

struct SbmParams {
  std::size_t num_nodes = 1000;
  std::size_t num_classes = 4;
  double p_in = 0.02;
  double p_out = 0.002;
  std::size_t feature_dim = 16;
  double noise = 1.0;
  std::uint64_t seed = 0;
};

struct SbmGraph {
  CsrGraph graph;  // preprocessed
  NodeLabels labels;
  FeatureMatrix features;
};

/**
 * Stochastic block model with equal contiguous blocks (node v belongs to
 * block v / (n / num_classes)). Features are the one-hot class centroid
 * (class c sets column c mod feature_dim) plus N(0, noise^2) noise.
 */
SbmGraph generate_sbm(const SbmParams& params);

/** G(n, p) random graph, returned preprocessed. */
CsrGraph generate_erdos_renyi(std::size_t n, double p, std::uint64_t seed);

}  // namespace ibmb
