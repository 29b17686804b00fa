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

#include "ibmb/partition.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "ibmb/error.hpp"

namespace ibmb {
namespace {

struct ScoredPair {
  NodeId lo;
  NodeId hi;
  double score;
};

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  std::size_t size(std::size_t x) { return size_[find(x)]; }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

std::size_t index_of(const NodeSet& outputs, NodeId v) {
  const auto it = std::lower_bound(outputs.begin(), outputs.end(), v);
  return (it != outputs.end() && *it == v) ? static_cast<std::size_t>(it - outputs.begin()) : SIZE_MAX;
}

}  // namespace

void Partition::canonicalize() {
  for (auto& g : groups) ibmb::canonicalize(g);
  std::sort(groups.begin(), groups.end(), [](const NodeSet& a, const NodeSet& b) {
    if (a.empty() || b.empty()) return a.size() < b.size();
    return a.front() < b.front();
  });
  ibmb::canonicalize(universe);
}

void Partition::validate() const {
  std::vector<NodeId> seen;
  for (const auto& g : groups) {
    if (g.empty()) throw ArgumentError("partition contains an empty group");
    if (max_size > 0 && g.size() > max_size) {
      throw ArgumentError("group of size " + std::to_string(g.size()) + " exceeds bound " + std::to_string(max_size));
    }
    for (std::size_t i = 1; i < g.size(); ++i) {
      if (g[i] <= g[i - 1]) throw ArgumentError("group is not strictly ascending");
    }
    seen.insert(seen.end(), g.begin(), g.end());
  }
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) throw ArgumentError("groups overlap");
  if (seen != universe) throw ArgumentError("groups do not cover the universe exactly");
}

Partition distance_partition(const PprRows& ppr_rows, const NodeSet& outputs_in, std::size_t max_size,
                             std::uint64_t seed) {
  if (max_size < 1) throw ArgumentError("maximum batch size must be >= 1");
  NodeSet outputs = outputs_in;
  canonicalize(outputs);

  std::vector<ScoredPair> pairs;
  for (NodeId u : outputs) {
    const auto it = ppr_rows.find(u);
    if (it == ppr_rows.end()) throw LookupError("no PPR row for output node " + std::to_string(u));
    for (const auto& e : it->second.entries) {
      if (e.node == u || index_of(outputs, e.node) == SIZE_MAX) continue;
      pairs.push_back({std::min(u, e.node), std::max(u, e.node), e.score});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const ScoredPair& a, const ScoredPair& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.lo != b.lo) return a.lo < b.lo;
    return a.hi < b.hi;
  });

  DisjointSets sets(outputs.size());
  for (const auto& pr : pairs) {
    const std::size_t a = sets.find(index_of(outputs, pr.lo));
    const std::size_t b = sets.find(index_of(outputs, pr.hi));
    if (a != b && sets.size(a) + sets.size(b) <= max_size) sets.unite(a, b);
  }

  std::vector<NodeSet> groups;
  {
    std::vector<std::size_t> slot(outputs.size(), SIZE_MAX);
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      const std::size_t r = sets.find(i);
      if (slot[r] == SIZE_MAX) {
        slot[r] = groups.size();
        groups.emplace_back();
      }
      groups[slot[r]].push_back(outputs[i]);
    }
  }

  // Leftover merging: always try the two smallest groups; stop once they do
  // not fit together, since then no pair fits.
  std::mt19937_64 rng(seed);
  std::map<std::size_t, std::vector<std::size_t>> by_size;
  for (std::size_t i = 0; i < groups.size(); ++i) by_size[groups[i].size()].push_back(i);
  auto take_random = [&](std::map<std::size_t, std::vector<std::size_t>>::iterator bucket) {
    auto& ids = bucket->second;
    std::uniform_int_distribution<std::size_t> pick(0, ids.size() - 1);
    const std::size_t i = pick(rng);
    const std::size_t id = ids[i];
    ids[i] = ids.back();
    ids.pop_back();
    if (ids.empty()) by_size.erase(bucket);
    return id;
  };
  std::size_t live = groups.size();
  while (live >= 2) {
    auto first = by_size.begin();
    const std::size_t s1 = first->first;
    const std::size_t s2 = first->second.size() >= 2 ? s1 : std::next(first)->first;
    if (s1 + s2 > max_size) break;
    const std::size_t a = take_random(by_size.begin());
    const std::size_t b = take_random(by_size.begin());
    groups[a].insert(groups[a].end(), groups[b].begin(), groups[b].end());
    groups[b].clear();
    by_size[groups[a].size()].push_back(a);
    --live;
  }
  groups.erase(std::remove_if(groups.begin(), groups.end(), [](const NodeSet& g) { return g.empty(); }), groups.end());

  Partition p{std::move(groups), std::move(outputs), max_size};
  p.canonicalize();
  return p;
}

Partition restrict_to_outputs(const Partition& p, const NodeSet& outputs_in) {
  NodeSet outputs = outputs_in;
  canonicalize(outputs);
  Partition out;
  out.max_size = p.max_size;
  for (const auto& g : p.groups) {
    NodeSet kept;
    std::set_intersection(g.begin(), g.end(), outputs.begin(), outputs.end(), std::back_inserter(kept));
    if (!kept.empty()) out.groups.push_back(std::move(kept));
  }
  out.universe = std::move(outputs);
  out.canonicalize();
  return out;
}

std::vector<std::int64_t> part_of(const Partition& p, std::size_t num_nodes) {
  std::vector<std::int64_t> part(num_nodes, -1);
  for (std::size_t i = 0; i < p.groups.size(); ++i) {
    for (NodeId v : p.groups[i]) {
      if (v >= num_nodes) throw RangeError("partition node out of range");
      part[v] = static_cast<std::int64_t>(i);
    }
  }
  return part;
}

std::size_t edge_cut(const CsrGraph& g, const Partition& p) {
  const auto part = part_of(p, g.num_nodes());
  std::size_t cut = 0;
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    for (NodeId v : g.neighbors(u)) {
      if (u < v && part[u] != part[v]) ++cut;
      // A directed edge without its reverse still counts once.
      if (u > v && part[u] != part[v] && !g.has_edge(v, u)) ++cut;
    }
  }
  return cut;
}

void write_partition(std::ostream& out, const Partition& p) {
  out << "# ibmb-partition v1 B=" << p.max_size << '\n';
  for (const auto& g : p.groups) {
    for (std::size_t i = 0; i < g.size(); ++i) out << (i ? " " : "") << g[i];
    out << '\n';
  }
}

Partition read_partition(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty partition file");
  const std::string prefix = "# ibmb-partition v";
  if (line.rfind(prefix, 0) != 0) throw FormatError("missing partition header");
  Partition p;
  {
    std::istringstream header(line.substr(prefix.size()));
    unsigned version = 0;
    std::string field;
    if (!(header >> version)) throw FormatError("malformed partition header");
    if (version != 1) throw VersionError("partition: unsupported version " + std::to_string(version));
    if (!(header >> field) || field.rfind("B=", 0) != 0) throw FormatError("partition header lacks B=");
    const auto digits = field.substr(2);
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), p.max_size);
    if (ec != std::errc() || ptr != digits.data() + digits.size()) throw FormatError("malformed B value");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    std::istringstream row(line);
    NodeSet group;
    std::string token;
    while (row >> token) {
      std::uint64_t v = 0;
      const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
      if (ec != std::errc() || ptr != token.data() + token.size() || v > UINT32_MAX) {
        throw ParseError(line_no, "expected node ids");
      }
      group.push_back(static_cast<NodeId>(v));
    }
    p.universe.insert(p.universe.end(), group.begin(), group.end());
    p.groups.push_back(std::move(group));
  }
  p.canonicalize();
  p.validate();
  return p;
}

}  // namespace ibmb
