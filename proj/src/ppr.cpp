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

#include "ibmb/ppr.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <ostream>

#include "ibmb/binary_io.hpp"
#include "ibmb/error.hpp"
#include "ibmb/parallel.hpp"

namespace ibmb {
namespace {

constexpr std::uint32_t kScoreVersion = 1;
constexpr double kPowerTruncation = 1e-12;

// Dense scratch arrays reused across push calls on the same thread. Only the
// touched slots are reset afterwards, so a call costs O(work), not O(N).
struct PushWorkspace {
  std::vector<double> estimate;
  std::vector<double> residual;
  std::vector<char> queued;
  std::vector<char> touched_flag;
  std::vector<NodeId> touched;

  void prepare(std::size_t n) {
    if (estimate.size() < n) {
      estimate.assign(n, 0.0);
      residual.assign(n, 0.0);
      queued.assign(n, 0);
      touched_flag.assign(n, 0);
    }
  }
  void touch(NodeId v) {
    if (!touched_flag[v]) {
      touched_flag[v] = 1;
      touched.push_back(v);
    }
  }
  void reset() {
    for (NodeId v : touched) {
      estimate[v] = 0.0;
      residual[v] = 0.0;
      queued[v] = 0;
      touched_flag[v] = 0;
    }
    touched.clear();
  }
};

void check_teleport(const CsrGraph& g, const NodeSet& teleport_set) {
  if (teleport_set.empty()) throw ArgumentError("teleport set must not be empty");
  for (NodeId v : teleport_set) {
    if (v >= g.num_nodes()) throw RangeError("teleport node out of range");
  }
}

VectorXd uniform_teleport(const CsrGraph& g, const NodeSet& teleport_set) {
  NodeSet nodes = teleport_set;
  canonicalize(nodes);
  VectorXd t = VectorXd::Zero(static_cast<Eigen::Index>(g.num_nodes()));
  for (NodeId v : nodes) t[v] = 1.0 / static_cast<double>(nodes.size());
  return t;
}

// x P for the row vector x, with P = D^{-1} A.
VectorXd step_row(const CsrGraph& g, const VectorXd& x) {
  VectorXd next = VectorXd::Zero(x.size());
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (x[v] == 0.0) continue;
    const double share = x[v] / static_cast<double>(g.degree(v));
    for (NodeId w : g.neighbors(v)) next[w] += share;
  }
  return next;
}

}  // namespace

double ScoreVec::sum() const {
  double s = 0.0;
  for (const auto& e : entries) s += e.score;
  return s;
}

double ScoreVec::at(NodeId v) const {
  const auto it = std::lower_bound(entries.begin(), entries.end(), v,
                                   [](const ScoreEntry& e, NodeId id) { return e.node < id; });
  return (it != entries.end() && it->node == v) ? it->score : 0.0;
}

VectorXd ScoreVec::to_dense(std::size_t n) const {
  VectorXd dense = VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (const auto& e : entries) {
    if (e.node >= n) throw RangeError("score entry beyond dense length");
    dense[e.node] = e.score;
  }
  return dense;
}

ScoreVec ScoreVec::from_dense(const VectorXd& dense, double threshold) {
  ScoreVec v;
  for (Eigen::Index i = 0; i < dense.size(); ++i) {
    if (dense[i] > threshold) v.entries.push_back({static_cast<NodeId>(i), dense[i]});
  }
  return v;
}

void ScoreVec::validate() const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!(entries[i].score > 0.0) || !std::isfinite(entries[i].score)) {
      throw FormatError("score entries must be finite and positive");
    }
    if (i > 0 && entries[i].node <= entries[i - 1].node) {
      throw FormatError("score entries must be strictly ascending by node");
    }
  }
  if (!(residual_mass >= 0.0) || !std::isfinite(residual_mass)) throw FormatError("residual mass must be finite and >= 0");
}

void PprConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ArgumentError("alpha must lie in (0, 1]");
  if (!(epsilon > 0.0)) throw ArgumentError("epsilon must be positive");
  if (power_iters < 1) throw ArgumentError("power_iters must be >= 1");
  if (max_sweeps && *max_sweeps < 1) throw ArgumentError("max_sweeps must be >= 1");
}

ScoreVec push_ppr(const CsrGraph& g, NodeId root, const PprConfig& cfg, PushStats* stats) {
  cfg.validate();
  if (root >= g.num_nodes()) throw RangeError("root " + std::to_string(root) + " out of range");

  thread_local PushWorkspace ws;
  ws.prepare(g.num_nodes());
  auto& p = ws.estimate;
  auto& r = ws.residual;

  std::deque<NodeId> queue;
  r[root] = 1.0;
  ws.touch(root);
  if (r[root] > cfg.epsilon * static_cast<double>(g.degree(root))) {
    queue.push_back(root);
    ws.queued[root] = 1;
  }

  PushStats local;
  // Sweep boundaries: the nodes queued when a sweep starts form that sweep.
  std::size_t sweep_remaining = queue.size();
  if (!queue.empty()) local.sweeps = 1;
  while (!queue.empty()) {
    if (sweep_remaining == 0) {
      if (cfg.max_sweeps && local.sweeps >= *cfg.max_sweeps) break;
      ++local.sweeps;
      sweep_remaining = queue.size();
    }
    const NodeId v = queue.front();
    queue.pop_front();
    --sweep_remaining;
    ws.queued[v] = 0;

    const double deg = static_cast<double>(g.degree(v));
    const double mass = r[v];
    if (!(mass > cfg.epsilon * deg)) continue;
    ++local.pushes;
    p[v] += cfg.alpha * mass;
    r[v] = 0.0;
    const double share = (1.0 - cfg.alpha) * mass / deg;
    for (NodeId w : g.neighbors(v)) {
      ws.touch(w);
      r[w] += share;
      if (!ws.queued[w] && r[w] > cfg.epsilon * static_cast<double>(g.degree(w))) {
        ws.queued[w] = 1;
        queue.push_back(w);
      }
    }
  }

  ScoreVec out;
  std::sort(ws.touched.begin(), ws.touched.end());
  for (NodeId v : ws.touched) {
    if (p[v] > 0.0) out.entries.push_back({v, p[v]});
    out.residual_mass += r[v];
  }
  ws.reset();
  if (stats) *stats = local;
  return out;
}

std::vector<ScoreVec> push_ppr_many(const CsrGraph& g, const NodeSet& roots, const PprConfig& cfg,
                                    std::vector<PushStats>* stats) {
  cfg.validate();
  std::vector<ScoreVec> rows(roots.size());
  if (stats) stats->assign(roots.size(), {});
  parallel_for(roots.size(), [&](std::size_t i) {
    rows[i] = push_ppr(g, roots[i], cfg, stats ? &(*stats)[i] : nullptr);
  });
  return rows;
}

VectorXd topic_ppr_power_dense(const CsrGraph& g, const VectorXd& teleport, double alpha, std::size_t iters) {
  if (teleport.size() != static_cast<Eigen::Index>(g.num_nodes())) throw ShapeError("teleport length differs from node count");
  VectorXd pi = teleport;
  for (std::size_t k = 0; k < iters; ++k) {
    pi = (1.0 - alpha) * step_row(g, pi) + alpha * teleport;
  }
  return pi;
}

ScoreVec topic_ppr_power(const CsrGraph& g, const NodeSet& teleport_set, const PprConfig& cfg) {
  cfg.validate();
  check_teleport(g, teleport_set);
  const VectorXd pi = topic_ppr_power_dense(g, uniform_teleport(g, teleport_set), cfg.alpha, cfg.power_iters);
  return ScoreVec::from_dense(pi, kPowerTruncation);
}

MatrixXd dense_transition(const CsrGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  MatrixXd p = MatrixXd::Zero(n, n);
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    if (g.degree(u) == 0) throw PreconditionError("transition matrix undefined for a degree-0 node");
    const double inv = 1.0 / static_cast<double>(g.degree(u));
    for (NodeId v : g.neighbors(u)) p(u, v) = inv;
  }
  return p;
}

MatrixXd exact_ppr(const CsrGraph& g, double alpha) {
  if (g.num_nodes() > kDenseOracleLimit) {
    throw SizeError("exact_ppr is limited to " + std::to_string(kDenseOracleLimit) + " nodes");
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ArgumentError("alpha must lie in (0, 1]");
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  const MatrixXd system = MatrixXd::Identity(n, n) - (1.0 - alpha) * dense_transition(g);
  return Eigen::PartialPivLU<MatrixXd>(system).solve(alpha * MatrixXd::Identity(n, n));
}

ScoreVec topk(const ScoreVec& v, std::size_t k) {
  if (k == 0) throw ArgumentError("k must be >= 1");
  if (k >= v.entries.size()) return ScoreVec{v.entries, 0.0};
  std::vector<ScoreEntry> sorted = v.entries;
  std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), sorted.end(),
                    [](const ScoreEntry& a, const ScoreEntry& b) {
                      return a.score != b.score ? a.score > b.score : a.node < b.node;
                    });
  sorted.resize(k);
  std::sort(sorted.begin(), sorted.end(), [](const ScoreEntry& a, const ScoreEntry& b) { return a.node < b.node; });
  return ScoreVec{std::move(sorted), 0.0};
}

ScoreVec heat_kernel_power(const CsrGraph& g, const NodeSet& teleport_set, double t, std::size_t terms) {
  if (!(t > 0.0) || !std::isfinite(t)) throw ArgumentError("diffusion time must be positive");
  check_teleport(g, teleport_set);
  VectorXd x = uniform_teleport(g, teleport_set);
  double coeff = std::exp(-t);
  VectorXd h = coeff * x;
  for (std::size_t k = 1; k <= terms; ++k) {
    x = step_row(g, x);
    coeff *= t / static_cast<double>(k);
    h += coeff * x;
  }
  return ScoreVec::from_dense(h, kPowerTruncation);
}

void write_score_vec(std::ostream& out, const ScoreVec& v, std::uint64_t root) {
  bin::write_magic(out, "IBMP");
  bin::write<std::uint32_t>(out, kScoreVersion);
  bin::write<std::uint64_t>(out, root);
  bin::write<std::uint64_t>(out, v.entries.size());
  for (const auto& e : v.entries) {
    bin::write<std::uint32_t>(out, e.node);
    bin::write<double>(out, e.score);
  }
  bin::write<double>(out, v.residual_mass);
}

std::optional<std::pair<std::uint64_t, ScoreVec>> read_score_vec(std::istream& in) {
  if (in.peek() == std::char_traits<char>::eof()) return std::nullopt;
  bin::expect_magic(in, "IBMP");
  bin::expect_version(in, kScoreVersion, "score vector");
  const auto root = bin::read<std::uint64_t>(in);
  const auto nnz = bin::read<std::uint64_t>(in);
  ScoreVec v;
  v.entries.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(nnz, 1u << 20)));
  for (std::uint64_t i = 0; i < nnz; ++i) {
    const auto node = bin::read<std::uint32_t>(in);
    const auto score = bin::read<double>(in);
    v.entries.push_back({node, score});
  }
  v.residual_mass = bin::read<double>(in);
  v.validate();
  return std::make_pair(root, std::move(v));
}

}  // namespace ibmb
