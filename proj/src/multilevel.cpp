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

// Multilevel graph partitioning: heavy-edge matching coarsening, greedy graph
// growing for the initial partition, and k-way boundary FM refinement with
// rollback during uncoarsening.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <random>

#include "ibmb/error.hpp"
#include "ibmb/partition.hpp"

namespace ibmb {
namespace {

using Weight = std::int64_t;

// Undirected weighted graph without self-loops; both directions stored.
struct LevelGraph {
  std::vector<std::size_t> xadj{0};
  std::vector<std::uint32_t> adj;
  std::vector<Weight> edge_w;
  std::vector<Weight> vertex_w;

  std::size_t size() const { return vertex_w.size(); }
  Weight total_weight() const { return std::accumulate(vertex_w.begin(), vertex_w.end(), Weight{0}); }
};

LevelGraph from_csr(const CsrGraph& g) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    for (NodeId v : g.neighbors(u)) {
      if (u == v) continue;
      edges.emplace_back(u, v);
      edges.emplace_back(v, u);
    }
  }
  const CsrGraph sym = CsrGraph::from_edges(g.num_nodes(), std::move(edges));
  LevelGraph lg;
  lg.xadj.assign(sym.row_ptr().begin(), sym.row_ptr().end());
  lg.adj.assign(sym.col_idx().begin(), sym.col_idx().end());
  lg.edge_w.assign(lg.adj.size(), 1);
  lg.vertex_w.assign(g.num_nodes(), 1);
  return lg;
}

struct Level {
  LevelGraph graph;
  std::vector<std::uint32_t> coarse_of;  // fine vertex -> vertex of the next level
};

// One round of heavy-edge matching. Returns the coarse graph and the map.
LevelGraph coarsen(const LevelGraph& g, Weight max_vertex_weight, std::mt19937_64& rng,
                   std::vector<std::uint32_t>& coarse_of) {
  const std::size_t n = g.size();
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  constexpr std::uint32_t kUnmatched = UINT32_MAX;
  std::vector<std::uint32_t> match(n, kUnmatched);
  for (std::uint32_t u : order) {
    if (match[u] != kUnmatched) continue;
    std::uint32_t best = u;
    Weight best_w = -1;
    for (std::size_t e = g.xadj[u]; e < g.xadj[u + 1]; ++e) {
      const std::uint32_t v = g.adj[e];
      if (match[v] != kUnmatched || g.vertex_w[u] + g.vertex_w[v] > max_vertex_weight) continue;
      if (g.edge_w[e] > best_w || (g.edge_w[e] == best_w && g.vertex_w[v] < g.vertex_w[best])) {
        best = v;
        best_w = g.edge_w[e];
      }
    }
    match[u] = best;
    match[best] = u;
  }

  coarse_of.assign(n, kUnmatched);
  std::uint32_t next = 0;
  for (std::uint32_t u = 0; u < n; ++u) {
    if (coarse_of[u] != kUnmatched) continue;
    coarse_of[u] = next;
    coarse_of[match[u]] = next;
    ++next;
  }

  LevelGraph c;
  c.vertex_w.assign(next, 0);
  std::vector<std::vector<std::uint32_t>> members(next);
  for (std::uint32_t u = 0; u < n; ++u) {
    c.vertex_w[coarse_of[u]] += g.vertex_w[u];
    members[coarse_of[u]].push_back(u);
  }
  std::vector<std::int64_t> slot(next, -1);
  c.xadj.assign(1, 0);
  for (std::uint32_t cu = 0; cu < next; ++cu) {
    const std::size_t row_start = c.adj.size();
    for (std::uint32_t u : members[cu]) {
      for (std::size_t e = g.xadj[u]; e < g.xadj[u + 1]; ++e) {
        const std::uint32_t cv = coarse_of[g.adj[e]];
        if (cv == cu) continue;
        if (slot[cv] < 0) {
          slot[cv] = static_cast<std::int64_t>(c.adj.size());
          c.adj.push_back(cv);
          c.edge_w.push_back(0);
        }
        c.edge_w[static_cast<std::size_t>(slot[cv])] += g.edge_w[e];
      }
    }
    for (std::size_t e = row_start; e < c.adj.size(); ++e) slot[c.adj[e]] = -1;
    c.xadj.push_back(c.adj.size());
  }
  return c;
}

Weight cut_of(const LevelGraph& g, const std::vector<std::uint32_t>& part) {
  Weight cut = 0;
  for (std::uint32_t u = 0; u < g.size(); ++u) {
    for (std::size_t e = g.xadj[u]; e < g.xadj[u + 1]; ++e) {
      if (part[u] != part[g.adj[e]]) cut += g.edge_w[e];
    }
  }
  return cut / 2;
}

// Greedy graph growing: parts are grown one at a time from a random seed by
// repeatedly absorbing the frontier vertex with the best cut gain.
std::vector<std::uint32_t> grow_initial(const LevelGraph& g, std::size_t k, Weight max_part, std::mt19937_64& rng) {
  const std::size_t n = g.size();
  constexpr std::uint32_t kFree = UINT32_MAX;
  std::vector<std::uint32_t> part(n, kFree);
  std::vector<Weight> gain(n, 0);
  std::size_t unassigned = n;
  Weight remaining_weight = g.total_weight();

  std::vector<std::uint32_t> free_list(n);
  std::iota(free_list.begin(), free_list.end(), 0);
  std::shuffle(free_list.begin(), free_list.end(), rng);
  auto next_seed = [&]() -> std::uint32_t {
    while (!free_list.empty() && part[free_list.back()] != kFree) free_list.pop_back();
    return free_list.empty() ? kFree : free_list.back();
  };

  for (std::uint32_t p = 0; p + 1 < k; ++p) {
    const Weight target = remaining_weight / static_cast<Weight>(k - p);
    Weight weight = 0;
    using Entry = std::pair<Weight, std::int64_t>;  // (gain, -vertex)
    std::priority_queue<Entry> frontier;
    std::vector<char> in_frontier(n, 0);
    auto absorb = [&](std::uint32_t v) {
      part[v] = p;
      weight += g.vertex_w[v];
      remaining_weight -= g.vertex_w[v];
      --unassigned;
      for (std::size_t e = g.xadj[v]; e < g.xadj[v + 1]; ++e) {
        const std::uint32_t w = g.adj[e];
        if (part[w] != kFree) continue;
        if (!in_frontier[w]) {
          in_frontier[w] = 1;
          gain[w] = 0;
          for (std::size_t f = g.xadj[w]; f < g.xadj[w + 1]; ++f) {
            const std::uint32_t x = g.adj[f];
            if (part[x] == p) gain[w] += g.edge_w[f];
            else if (part[x] == kFree) gain[w] -= g.edge_w[f];
          }
        } else {
          gain[w] += 2 * g.edge_w[e];
        }
        frontier.emplace(gain[w], -static_cast<std::int64_t>(w));
      }
    };
    const std::size_t parts_left = k - p - 1;
    while (unassigned > parts_left && weight < target) {
      std::uint32_t v = kFree;
      while (!frontier.empty()) {
        const auto [gv, negv] = frontier.top();
        frontier.pop();
        const auto cand = static_cast<std::uint32_t>(-negv);
        if (part[cand] == kFree && gain[cand] == gv) {
          v = cand;
          break;
        }
      }
      if (v == kFree) v = next_seed();
      if (v == kFree) break;
      if (weight > 0 && weight + g.vertex_w[v] > max_part) break;
      absorb(v);
    }
  }
  for (auto& q : part) {
    if (q == kFree) q = static_cast<std::uint32_t>(k - 1);
  }
  return part;
}

// k-way boundary FM with rollback to the best prefix of each pass.
class Refiner {
 public:
  Refiner(const LevelGraph& g, std::size_t k, Weight max_part, std::vector<std::uint32_t>& part)
      : g_(g), k_(k), max_part_(max_part), part_(part), part_w_(k, 0), part_n_(k, 0), conn_(k, 0) {
    for (std::uint32_t v = 0; v < g_.size(); ++v) {
      part_w_[part_[v]] += g_.vertex_w[v];
      ++part_n_[part_[v]];
    }
  }

  // Best admissible move of v: (gain, target). target == k when none.
  std::pair<Weight, std::uint32_t> best_move(std::uint32_t v) {
    const std::uint32_t from = part_[v];
    touched_.clear();
    for (std::size_t e = g_.xadj[v]; e < g_.xadj[v + 1]; ++e) {
      const std::uint32_t q = part_[g_.adj[e]];
      if (conn_[q] == 0) touched_.push_back(q);
      conn_[q] += g_.edge_w[e];
    }
    const Weight internal = conn_[from];
    Weight best_gain = 0;
    auto best_to = static_cast<std::uint32_t>(k_);
    if (part_n_[from] > 1) {
      for (std::uint32_t q : touched_) {
        if (q == from || part_w_[q] + g_.vertex_w[v] > max_part_) continue;
        const Weight gain = conn_[q] - internal;
        if (best_to == k_ || gain > best_gain || (gain == best_gain && part_w_[q] < part_w_[best_to])) {
          best_gain = gain;
          best_to = q;
        }
      }
    }
    for (std::uint32_t q : touched_) conn_[q] = 0;
    return {best_gain, best_to};
  }

  void move(std::uint32_t v, std::uint32_t to) {
    const std::uint32_t from = part_[v];
    part_w_[from] -= g_.vertex_w[v];
    --part_n_[from];
    part_w_[to] += g_.vertex_w[v];
    ++part_n_[to];
    part_[v] = to;
  }

  bool is_boundary(std::uint32_t v) const {
    for (std::size_t e = g_.xadj[v]; e < g_.xadj[v + 1]; ++e) {
      if (part_[g_.adj[e]] != part_[v]) return true;
    }
    return false;
  }

  /** Returns the cut improvement achieved by this pass. */
  Weight pass(std::mt19937_64& rng) {
    const std::size_t n = g_.size();
    using Entry = std::tuple<Weight, std::uint64_t, std::uint32_t>;  // gain, tiebreak, vertex
    std::priority_queue<Entry> heap;
    std::uniform_int_distribution<std::uint64_t> tie;
    for (std::uint32_t v = 0; v < n; ++v) {
      if (!is_boundary(v)) continue;
      const auto [gain, to] = best_move(v);
      if (to != k_) heap.emplace(gain, tie(rng), v);
    }
    std::vector<char> locked(n, 0);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> log;  // vertex, previous part
    Weight total = 0;
    Weight best_total = 0;
    std::size_t best_len = 0;
    std::size_t since_best = 0;
    const std::size_t patience = std::max<std::size_t>(25, n / 100);
    while (!heap.empty() && since_best < patience) {
      const auto [gain, _, v] = heap.top();
      heap.pop();
      if (locked[v]) continue;
      const auto [cur_gain, to] = best_move(v);
      if (to == k_) continue;
      if (cur_gain != gain) {
        heap.emplace(cur_gain, tie(rng), v);
        continue;
      }
      locked[v] = 1;
      log.emplace_back(v, part_[v]);
      move(v, to);
      total += cur_gain;
      if (total > best_total) {
        best_total = total;
        best_len = log.size();
        since_best = 0;
      } else {
        ++since_best;
      }
      for (std::size_t e = g_.xadj[v]; e < g_.xadj[v + 1]; ++e) {
        const std::uint32_t w = g_.adj[e];
        if (locked[w]) continue;
        const auto [wg, wto] = best_move(w);
        if (wto != k_) heap.emplace(wg, tie(rng), w);
      }
    }
    while (log.size() > best_len) {
      move(log.back().first, log.back().second);
      log.pop_back();
    }
    return best_total;
  }

  /**
   * Moves vertices out of overweight parts, preferring the smallest cut
   * increase. Only unit-weight levels are guaranteed to end balanced.
   */
  void rebalance() {
    for (std::size_t guard = 0; guard < 4 * g_.size() + 4; ++guard) {
      const auto heavy = static_cast<std::uint32_t>(
          std::max_element(part_w_.begin(), part_w_.end()) - part_w_.begin());
      if (part_w_[heavy] <= max_part_) return;
      Weight best_gain = 0;
      std::uint32_t best_v = UINT32_MAX;
      std::uint32_t best_to = 0;
      for (std::uint32_t v = 0; v < g_.size(); ++v) {
        if (part_[v] != heavy || part_n_[heavy] <= 1) continue;
        touched_.clear();
        for (std::size_t e = g_.xadj[v]; e < g_.xadj[v + 1]; ++e) {
          const std::uint32_t q = part_[g_.adj[e]];
          if (conn_[q] == 0) touched_.push_back(q);
          conn_[q] += g_.edge_w[e];
        }
        for (std::uint32_t q = 0; q < k_; ++q) {
          if (q == heavy || part_w_[q] + g_.vertex_w[v] > max_part_) continue;
          const Weight gain = conn_[q] - conn_[heavy];
          if (best_v == UINT32_MAX || gain > best_gain) {
            best_gain = gain;
            best_v = v;
            best_to = q;
          }
        }
        for (std::uint32_t q : touched_) conn_[q] = 0;
      }
      if (best_v == UINT32_MAX) return;
      move(best_v, best_to);
    }
  }

  /** Gives every empty part one vertex taken from the most populated part. */
  void fill_empty_parts() {
    for (std::uint32_t q = 0; q < k_; ++q) {
      if (part_n_[q] > 0) continue;
      const auto donor = static_cast<std::uint32_t>(
          std::max_element(part_n_.begin(), part_n_.end()) - part_n_.begin());
      std::uint32_t pick = UINT32_MAX;
      Weight best_internal = 0;
      for (std::uint32_t v = 0; v < g_.size(); ++v) {
        if (part_[v] != donor) continue;
        Weight internal = 0;
        for (std::size_t e = g_.xadj[v]; e < g_.xadj[v + 1]; ++e) {
          if (part_[g_.adj[e]] == donor) internal += g_.edge_w[e];
        }
        if (pick == UINT32_MAX || internal < best_internal) {
          pick = v;
          best_internal = internal;
        }
      }
      move(pick, q);
    }
  }

  Weight heaviest() const { return *std::max_element(part_w_.begin(), part_w_.end()); }

 private:
  const LevelGraph& g_;
  std::size_t k_;
  Weight max_part_;
  std::vector<std::uint32_t>& part_;
  std::vector<Weight> part_w_;
  std::vector<std::size_t> part_n_;
  std::vector<Weight> conn_;
  std::vector<std::uint32_t> touched_;
};

void refine(const LevelGraph& g, std::size_t k, Weight max_part, std::vector<std::uint32_t>& part,
            std::size_t passes, std::mt19937_64& rng) {
  Refiner r(g, k, max_part, part);
  r.rebalance();
  for (std::size_t i = 0; i < passes; ++i) {
    if (r.pass(rng) <= 0) break;
  }
}

}  // namespace

std::size_t max_part_size(std::size_t num_nodes, std::size_t num_parts, double imbalance) {
  const double bound = std::ceil(imbalance * static_cast<double>(num_nodes) / static_cast<double>(num_parts) - 1e-9);
  return std::max<std::size_t>(1, static_cast<std::size_t>(bound));
}

Partition multilevel_partition(const CsrGraph& g, std::size_t num_parts, const MultilevelConfig& cfg) {
  const std::size_t n = g.num_nodes();
  if (num_parts < 1) throw ArgumentError("part count must be >= 1");
  if (num_parts > n) throw ArgumentError("part count exceeds node count");
  if (!(cfg.imbalance >= 1.0)) throw ArgumentError("imbalance must be >= 1.0");

  const std::size_t max_size = max_part_size(n, num_parts, cfg.imbalance);
  const auto max_part = static_cast<Weight>(max_size);
  std::mt19937_64 rng(cfg.seed);

  std::vector<Level> levels;
  levels.push_back({from_csr(g), {}});
  const std::size_t coarsen_to = std::max<std::size_t>(100, 20 * num_parts);
  const Weight max_vertex_weight =
      std::max<Weight>(1, static_cast<Weight>(1.5 * static_cast<double>(n) / static_cast<double>(coarsen_to)));
  while (levels.back().graph.size() > coarsen_to) {
    std::vector<std::uint32_t> map;
    LevelGraph coarse = coarsen(levels.back().graph, max_vertex_weight, rng, map);
    if (coarse.size() * 10 > levels.back().graph.size() * 9) break;  // matching stalled
    levels.back().coarse_of = std::move(map);
    levels.push_back({std::move(coarse), {}});
  }

  // Initial partition: best of several grown partitions after refinement.
  const LevelGraph& coarsest = levels.back().graph;
  std::vector<std::uint32_t> part;
  Weight best_cut = 0;
  bool best_balanced = false;
  for (std::size_t t = 0; t < std::max<std::size_t>(1, cfg.initial_tries); ++t) {
    auto candidate = grow_initial(coarsest, num_parts, max_part, rng);
    refine(coarsest, num_parts, max_part, candidate, cfg.refine_passes, rng);
    Refiner check(coarsest, num_parts, max_part, candidate);
    const bool balanced = check.heaviest() <= max_part;
    const Weight cut = cut_of(coarsest, candidate);
    if (part.empty() || (balanced && !best_balanced) || (balanced == best_balanced && cut < best_cut)) {
      part = std::move(candidate);
      best_cut = cut;
      best_balanced = balanced;
    }
  }

  for (std::size_t li = levels.size() - 1; li-- > 0;) {
    const auto& fine = levels[li];
    std::vector<std::uint32_t> projected(fine.graph.size());
    for (std::size_t v = 0; v < projected.size(); ++v) projected[v] = part[fine.coarse_of[v]];
    part = std::move(projected);
    refine(fine.graph, num_parts, max_part, part, cfg.refine_passes, rng);
  }

  {
    Refiner final_pass(levels.front().graph, num_parts, max_part, part);
    final_pass.fill_empty_parts();
    final_pass.rebalance();
    final_pass.pass(rng);
  }

  Partition result;
  result.groups.resize(num_parts);
  for (NodeId v = 0; v < n; ++v) result.groups[part[v]].push_back(v);
  result.universe.resize(n);
  std::iota(result.universe.begin(), result.universe.end(), NodeId{0});
  result.max_size = max_size;
  result.canonicalize();
  return result;
}

}  // namespace ibmb
