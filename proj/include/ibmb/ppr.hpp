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
#include <unordered_map>
#include <vector>

#include "ibmb/graph.hpp"

namespace ibmb {

struct ScoreEntry {
  NodeId node;
  double score;
  friend bool operator==(const ScoreEntry&, const ScoreEntry&) = default;
};

/**
 * Sparse nonnegative score vector. Entries are ascending by node id with
 * strictly positive scores; residual_mass is the push leftover (0 for
 * power-iteration and exact results).
 */
struct ScoreVec {
  std::vector<ScoreEntry> entries;
  double residual_mass = 0.0;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  double sum() const;
  /** Score of v, or 0 when v is not stored. */
  double at(NodeId v) const;
  VectorXd to_dense(std::size_t n) const;
  /** Keeps entries strictly above threshold. */
  static ScoreVec from_dense(const VectorXd& dense, double threshold = 0.0);
  /** Throws FormatError if ids are unsorted, duplicated or scores are <= 0. */
  void validate() const;

  friend bool operator==(const ScoreVec&, const ScoreVec&) = default;
};

/** Per-root PPR rows keyed by root id. */
using PprRows = std::unordered_map<NodeId, ScoreVec>;

struct PprConfig {
  double alpha = 0.25;
  double epsilon = 2e-4;
  std::size_t power_iters = 50;
  /** Optional cap on full passes over the push queue (parity experiments). */
  std::optional<std::size_t> max_sweeps;

  /** Throws ArgumentError on alpha outside (0,1], epsilon <= 0, zero iterations. */
  void validate() const;
};

struct PushStats {
  std::size_t pushes = 0;
  std::size_t sweeps = 0;
};

/**
 * Push-flow approximation of the PPR row of root over P = D^{-1} A.
 *
 * Keeps an estimate p and residual r (initially e_root). While some v has
 * r(v) > epsilon * deg(v), v is pushed: p(v) += alpha r(v), every neighbor w
 * of v receives (1 - alpha) r(v) / deg(v), and r(v) = 0. Candidates are
 * processed FIFO starting from root. On a preprocessed (symmetric) graph the
 * result satisfies |p(v) - pi(v)| <= epsilon deg(v) for every v.
 */
ScoreVec push_ppr(const CsrGraph& g, NodeId root, const PprConfig& cfg, PushStats* stats = nullptr);

/** push_ppr for every root, possibly in parallel; result order follows roots. */
std::vector<ScoreVec> push_ppr_many(const CsrGraph& g, const NodeSet& roots, const PprConfig& cfg,
                                    std::vector<PushStats>* stats = nullptr);

/**
 * Topic-sensitive PageRank by power iteration with uniform teleport over
 * teleport_set. Iterates the row-vector recursion
 * pi_{k+1} = (1 - alpha) pi_k P + alpha t from pi_0 = t, i.e. pi is the
 * average PPR row of the teleport nodes. Entries below 1e-12 are dropped.
 */
ScoreVec topic_ppr_power(const CsrGraph& g, const NodeSet& teleport_set, const PprConfig& cfg);

/** Same iteration for an arbitrary dense teleport distribution; no truncation. */
VectorXd topic_ppr_power_dense(const CsrGraph& g, const VectorXd& teleport, double alpha, std::size_t iters);

/** Largest node count accepted by the dense oracles. */
inline constexpr std::size_t kDenseOracleLimit = 2000;

/** alpha (I - (1 - alpha) D^{-1} A)^{-1} by dense LU. Throws SizeError above the oracle limit. */
MatrixXd exact_ppr(const CsrGraph& g, double alpha);

/** Row-stochastic transition matrix D^{-1} A as a dense matrix. */
MatrixXd dense_transition(const CsrGraph& g);

/** k highest-scoring entries, ties by smaller id; result ascending by id. */
ScoreVec topk(const ScoreVec& v, std::size_t k);

/**
 * Heat-kernel diffusion e^{-t} sum_{k=0..terms} t^k / k! * t_hat P^k with
 * t_hat uniform over teleport_set, using the same row-vector convention as
 * topic_ppr_power.
 */
ScoreVec heat_kernel_power(const CsrGraph& g, const NodeSet& teleport_set, double t, std::size_t terms);

/** Sentinel root for vectors that do not belong to a single root. */
inline constexpr std::uint64_t kNoRoot = ~std::uint64_t{0};

/** One "IBMP" record; records may be concatenated in a single stream. */
void write_score_vec(std::ostream& out, const ScoreVec& v, std::uint64_t root = kNoRoot);
/** Reads one record; returns nullopt at a clean end of stream. */
std::optional<std::pair<std::uint64_t, ScoreVec>> read_score_vec(std::istream& in);

}  // namespace ibmb
