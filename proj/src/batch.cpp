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

#include "ibmb/batch.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "ibmb/binary_io.hpp"
#include "ibmb/error.hpp"
#include "ibmb/parallel.hpp"

namespace ibmb {
namespace {

constexpr std::uint32_t kBatchVersion = 1;

}  // namespace

NodeSet Batch::output_nodes() const {
  NodeSet out;
  out.reserve(output_mask.size());
  for (std::uint32_t i : output_mask) out.push_back(nodes[i]);
  return out;
}

void Batch::validate() const {
  if (output_mask.empty()) throw FormatError("batch has no outputs");
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (nodes[i] <= nodes[i - 1]) throw FormatError("batch nodes not strictly ascending");
  }
  for (std::size_t i = 0; i < output_mask.size(); ++i) {
    if (output_mask[i] >= nodes.size()) throw FormatError("output index out of range");
    if (i > 0 && output_mask[i] <= output_mask[i - 1]) throw FormatError("output mask not strictly ascending");
  }
  if (local_graph.num_nodes() != nodes.size()) throw FormatError("local graph size differs from node count");
}

NodeSet select_aux_nodewise(const NodeSet& group, const PprRows& ppr_rows, std::size_t k) {
  if (k < 1) throw ArgumentError("k must be >= 1");
  NodeSet selected(group.begin(), group.end());
  for (NodeId u : group) {
    const auto it = ppr_rows.find(u);
    if (it == ppr_rows.end()) throw LookupError("no PPR row for root " + std::to_string(u));
    for (const auto& e : topk(it->second, k).entries) selected.push_back(e.node);
  }
  canonicalize(selected);
  return selected;
}

NodeSet select_aux_batchwise(const CsrGraph& g, const NodeSet& group, const PprConfig& cfg, std::size_t budget) {
  NodeSet outputs = group;
  canonicalize(outputs);
  if (budget < outputs.size()) throw ArgumentError("budget must be at least the group size");
  const ScoreVec pi = topic_ppr_power(g, outputs, cfg);
  NodeSet selected = outputs;
  for (const auto& e : topk(pi, budget).entries) selected.push_back(e.node);
  canonicalize(selected);
  return selected;
}

Batch induce_subgraph(const CsrGraph& g, const NodeSet& nodes_in, const NodeSet& outputs_in, const InduceOptions& options) {
  NodeSet nodes = nodes_in;
  canonicalize(nodes);
  NodeSet outputs = outputs_in;
  canonicalize(outputs);
  if (!nodes.empty() && nodes.back() >= g.num_nodes()) throw RangeError("batch node out of range");
  if (!std::includes(nodes.begin(), nodes.end(), outputs.begin(), outputs.end())) {
    throw ArgumentError("outputs must be a subset of the batch nodes");
  }
  if (outputs.empty()) throw ArgumentError("batch needs at least one output node");

  auto local_of = [&](NodeId v) -> std::int64_t {
    const auto it = std::lower_bound(nodes.begin(), nodes.end(), v);
    return (it != nodes.end() && *it == v) ? it - nodes.begin() : -1;
  };

  std::vector<std::uint64_t> row_ptr{0};
  std::vector<NodeId> col_idx;
  std::optional<std::vector<double>> weights;
  if (g.has_weights() && !options.renormalize) weights.emplace();
  for (NodeId v : nodes) {
    const auto nbrs = g.neighbors(v);
    for (std::size_t j = 0; j < nbrs.size(); ++j) {
      const auto local = local_of(nbrs[j]);
      if (local < 0) continue;
      col_idx.push_back(static_cast<NodeId>(local));
      if (weights) weights->push_back(g.weights(v)[j]);
    }
    row_ptr.push_back(col_idx.size());
  }

  Batch b;
  b.output_mask.reserve(outputs.size());
  for (NodeId u : outputs) b.output_mask.push_back(static_cast<std::uint32_t>(local_of(u)));
  b.nodes = std::move(nodes);
  b.local_graph = CsrGraph(std::move(row_ptr), std::move(col_idx), std::move(weights));
  if (options.renormalize) {
    b.local_graph = b.local_graph.with_weights(normalization_weights(b.local_graph, *options.renormalize));
  }
  return b;
}

std::size_t BatchwiseMode::budget_for(std::size_t group_size) const {
  if (fixed_budget) return *fixed_budget;
  if (!(budget_factor >= 1.0)) throw ArgumentError("batch-wise budget factor must be >= 1");
  return std::max(group_size, static_cast<std::size_t>(std::ceil(budget_factor * static_cast<double>(group_size))));
}

std::vector<Batch> build_batches(const CsrGraph& g, const Partition& partition, const AuxMode& mode,
                                 const BuildOptions& options) {
  partition.validate();
  std::vector<Batch> batches(partition.groups.size());
  parallel_for(partition.groups.size(), [&](std::size_t i) {
    const NodeSet& group = partition.groups[i];
    NodeSet selected;
    if (const auto* nw = std::get_if<NodewiseMode>(&mode)) {
      PprRows rows;
      for (NodeId u : group) {
        if (options.ppr_rows) {
          const auto it = options.ppr_rows->find(u);
          if (it != options.ppr_rows->end()) {
            rows.emplace(u, it->second);
            continue;
          }
        }
        rows.emplace(u, push_ppr(g, u, options.ppr));
      }
      selected = select_aux_nodewise(group, rows, nw->k);
    } else {
      const auto& bw = std::get<BatchwiseMode>(mode);
      selected = select_aux_batchwise(g, group, options.ppr, bw.budget_for(group.size()));
    }
    batches[i] = induce_subgraph(g, selected, group, options.induce);
    batches[i].batch_id = i;
  });
  return batches;
}

void write_batch(std::ostream& out, const Batch& b) {
  const auto& g = b.local_graph;
  bin::write_magic(out, "IBMB");
  bin::write<std::uint32_t>(out, kBatchVersion);
  bin::write<std::uint64_t>(out, b.batch_id);
  bin::write<std::uint64_t>(out, b.nodes.size());
  bin::write<std::uint64_t>(out, b.output_mask.size());
  bin::write<std::uint64_t>(out, g.num_edges());
  bin::write_array<NodeId>(out, b.nodes);
  bin::write_array<std::uint32_t>(out, b.output_mask);
  bin::write_array<std::uint64_t>(out, g.row_ptr());
  bin::write_array<NodeId>(out, g.col_idx());
  bin::write<std::uint8_t>(out, g.has_weights() ? 1 : 0);
  if (g.has_weights()) bin::write_array<double>(out, *g.edge_weight());
}

Batch read_batch(std::istream& in) {
  bin::expect_magic(in, "IBMB");
  bin::expect_version(in, kBatchVersion, "batch");
  Batch b;
  b.batch_id = bin::read<std::uint64_t>(in);
  const auto n_nodes = bin::read<std::uint64_t>(in);
  const auto n_outputs = bin::read<std::uint64_t>(in);
  const auto n_edges = bin::read<std::uint64_t>(in);
  if (n_nodes >= std::numeric_limits<NodeId>::max() || n_outputs > n_nodes) throw FormatError("inconsistent batch header");
  b.nodes = bin::read_array<NodeId>(in, n_nodes);
  b.output_mask = bin::read_array<std::uint32_t>(in, n_outputs);
  auto row_ptr = bin::read_array<std::uint64_t>(in, n_nodes + 1);
  auto col_idx = bin::read_array<NodeId>(in, n_edges);
  const auto flag = bin::read<std::uint8_t>(in);
  std::optional<std::vector<double>> weights;
  if (flag == 1) {
    weights = bin::read_array<double>(in, n_edges);
  } else if (flag != 0) {
    throw FormatError("invalid weight flag");
  }
  b.local_graph = CsrGraph(std::move(row_ptr), std::move(col_idx), std::move(weights));
  b.validate();
  return b;
}

}  // namespace ibmb
