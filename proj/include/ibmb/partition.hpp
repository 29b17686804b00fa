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
#include <vector>

#include "ibmb/graph.hpp"
#include "ibmb/ppr.hpp"

namespace ibmb {

/**
 * Disjoint groups of output nodes. Each group is ascending and groups are
 * ordered by their smallest id, so equal partitions compare equal.
 */
struct Partition {
  std::vector<NodeSet> groups;
  NodeSet universe;
  /** Size bound B; 0 when only a balance tolerance applies. */
  std::size_t max_size = 0;

  std::size_t num_groups() const { return groups.size(); }

  /** Sorts every group and orders groups by first element. */
  void canonicalize();

  /**
   * Throws ArgumentError unless groups are nonempty, pairwise disjoint,
   * cover universe exactly and (when max_size > 0) respect max_size.
   */
  void validate() const;

  friend bool operator==(const Partition&, const Partition&) = default;
};

/**
 * Greedy PPR-distance partition of the output nodes.
 *
 * Starts from singletons, scans all (u, v, score) with u != v both outputs in
 * descending score order (ties by (min id, max id)) and merges the two groups
 * whenever the union stays within max_size. Leftover groups are then merged
 * smallest-first, choosing uniformly among size ties with the given seed,
 * until no two groups fit together.
 */
Partition distance_partition(const PprRows& ppr_rows, const NodeSet& outputs, std::size_t max_size,
                             std::uint64_t seed);

struct MultilevelConfig {
  double imbalance = 1.03;
  std::uint64_t seed = 0;
  /** Number of initial-partition attempts on the coarsest graph. */
  std::size_t initial_tries = 8;
  std::size_t refine_passes = 8;
};

/**
 * Multilevel b-way partition of all nodes of g: heavy-edge matching
 * coarsening, greedy graph growing on the coarsest graph and boundary FM
 * refinement while uncoarsening. Every part is nonempty and holds at most
 * ceil(imbalance * N / b) nodes.
 */
Partition multilevel_partition(const CsrGraph& g, std::size_t num_parts, const MultilevelConfig& cfg = {});

/** Largest part size allowed by the balance constraint. */
std::size_t max_part_size(std::size_t num_nodes, std::size_t num_parts, double imbalance);

/** Intersects every group with outputs and drops empty groups. */
Partition restrict_to_outputs(const Partition& p, const NodeSet& outputs);

/** Number of undirected non-loop edges whose endpoints lie in different parts. */
std::size_t edge_cut(const CsrGraph& g, const Partition& p);

/** Per-node part index for a partition of all nodes; -1 for uncovered nodes. */
std::vector<std::int64_t> part_of(const Partition& p, std::size_t num_nodes);

/** "# ibmb-partition v1 B=<B>" header, then one ascending group per line. */
void write_partition(std::ostream& out, const Partition& p);
Partition read_partition(std::istream& in);

}  // namespace ibmb
