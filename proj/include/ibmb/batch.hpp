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
#include <variant>
#include <vector>

#include "ibmb/graph.hpp"
#include "ibmb/partition.hpp"
#include "ibmb/ppr.hpp"

namespace ibmb {

/**
 * A precomputed mini-batch: the selected nodes (outputs plus auxiliary
 * nodes, ascending global ids), the local indices of the outputs and the
 * induced subgraph over local indices. When the source graph is weighted the
 * local graph carries the global normalization coefficients unchanged.
 */
struct Batch {
  std::uint64_t batch_id = 0;
  NodeSet nodes;
  std::vector<std::uint32_t> output_mask;
  CsrGraph local_graph;

  std::size_t num_nodes() const { return nodes.size(); }
  std::size_t num_outputs() const { return output_mask.size(); }
  /** Global ids of the output nodes, ascending. */
  NodeSet output_nodes() const;
  /** Per-edge weights of the local graph, if present. */
  const std::optional<std::vector<double>>& global_weights() const { return local_graph.edge_weight(); }

  /** Throws FormatError when any structural invariant fails. */
  void validate() const;

  friend bool operator==(const Batch&, const Batch&) = default;
};

/**
 * Union of topk(row(u), k) over the roots u of group, plus the group itself.
 * Throws LookupError when a root has no row.
 */
NodeSet select_aux_nodewise(const NodeSet& group, const PprRows& ppr_rows, std::size_t k);

/**
 * Top-budget nodes of the topic-sensitive PPR vector teleporting uniformly
 * over group (ties by smaller id), plus the group itself.
 * Throws ArgumentError when budget < |group|.
 */
NodeSet select_aux_batchwise(const CsrGraph& g, const NodeSet& group, const PprConfig& cfg, std::size_t budget);

struct InduceOptions {
  /** Recompute normalization on the subgraph instead of copying global weights. */
  std::optional<NormMode> renormalize;
};

/**
 * Batch over the subgraph of g induced by nodes. outputs must be a subset of
 * nodes (ArgumentError otherwise).
 */
Batch induce_subgraph(const CsrGraph& g, const NodeSet& nodes, const NodeSet& outputs,
                      const InduceOptions& options = {});

struct NodewiseMode {
  std::size_t k = 16;
};

/** Auxiliary budget = ceil(factor * |group|) unless a fixed budget is given. factor must be >= 1. */
struct BatchwiseMode {
  double budget_factor = 1.0;
  std::optional<std::size_t> fixed_budget;

  std::size_t budget_for(std::size_t group_size) const;
};

using AuxMode = std::variant<NodewiseMode, BatchwiseMode>;

struct BuildOptions {
  PprConfig ppr;
  InduceOptions induce;
  /** Precomputed node-wise rows; missing rows are computed with push_ppr. */
  const PprRows* ppr_rows = nullptr;
};

/**
 * One batch per partition group (batch_id = group index). Groups are
 * processed in parallel; output order is fixed by group index.
 */
std::vector<Batch> build_batches(const CsrGraph& g, const Partition& partition, const AuxMode& mode,
                                 const BuildOptions& options = {});

/** "IBMB" binary record. */
void write_batch(std::ostream& out, const Batch& b);
/** Reads one record; throws FormatError and returns nothing on any defect. */
Batch read_batch(std::istream& in);

}  // namespace ibmb
