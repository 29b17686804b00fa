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

#include <cmath>
#include <limits>
#include <random>

#include "ibmb/error.hpp"
#include "ibmb/graph.hpp"

namespace ibmb {
namespace {

// Geometric skip length for Bernoulli(p) trials; p in (0, 1].
std::uint64_t skip(std::mt19937_64& rng, double log_q) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r = unit(rng);
  if (log_q == -std::numeric_limits<double>::infinity()) return 0;
  const double s = std::floor(std::log1p(-r) / log_q);
  return s >= 1e18 ? std::uint64_t{1} << 62 : static_cast<std::uint64_t>(s);
}

// All pairs i < j inside [first, first + size) with probability p.
void sample_within(std::mt19937_64& rng, NodeId first, std::uint64_t size, double p,
                   std::vector<std::pair<NodeId, NodeId>>& edges) {
  if (p <= 0.0 || size < 2) return;
  const double log_q = std::log1p(-p);
  // Row-major walk over the strict lower triangle (v > w).
  std::uint64_t v = 1;
  std::uint64_t w = 0;
  bool first_step = true;
  while (v < size) {
    const std::uint64_t s = skip(rng, log_q);
    w += first_step ? s : s + 1;
    first_step = false;
    while (w >= v && v < size) {
      w -= v;
      ++v;
    }
    if (v < size) {
      edges.emplace_back(first + static_cast<NodeId>(w), first + static_cast<NodeId>(v));
    }
  }
}

// All pairs (i, j) with i in block a and j in block b with probability p.
void sample_across(std::mt19937_64& rng, NodeId first_a, std::uint64_t size_a, NodeId first_b,
                   std::uint64_t size_b, double p, std::vector<std::pair<NodeId, NodeId>>& edges) {
  if (p <= 0.0 || size_a == 0 || size_b == 0) return;
  const double log_q = std::log1p(-p);
  const std::uint64_t total = size_a * size_b;
  std::uint64_t k = skip(rng, log_q);
  while (k < total) {
    edges.emplace_back(first_a + static_cast<NodeId>(k / size_b), first_b + static_cast<NodeId>(k % size_b));
    const std::uint64_t s = skip(rng, log_q);
    if (s >= total) break;
    k += s + 1;
  }
}

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw RangeError(std::string(name) + " must lie in [0, 1]");
}

}  // namespace

SbmGraph generate_sbm(const SbmParams& params) {
  check_probability(params.p_in, "p_in");
  check_probability(params.p_out, "p_out");
  if (params.p_out > params.p_in) throw RangeError("p_out must not exceed p_in");
  if (params.num_classes == 0 || params.num_nodes % params.num_classes != 0) {
    throw ArgumentError("num_nodes must be a positive multiple of num_classes");
  }
  if (!(params.noise >= 0.0) || !std::isfinite(params.noise)) throw RangeError("noise must be finite and >= 0");

  const std::size_t n = params.num_nodes;
  const std::size_t block = n / params.num_classes;
  std::mt19937_64 rng(params.seed);
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (std::size_t a = 0; a < params.num_classes; ++a) {
    const auto first_a = static_cast<NodeId>(a * block);
    sample_within(rng, first_a, block, params.p_in, edges);
    for (std::size_t b = a + 1; b < params.num_classes; ++b) {
      sample_across(rng, first_a, block, static_cast<NodeId>(b * block), block, params.p_out, edges);
    }
  }

  SbmGraph out;
  out.graph = preprocess(CsrGraph::from_edges(n, std::move(edges)));
  out.labels.num_classes = static_cast<std::int32_t>(params.num_classes);
  out.labels.labels.resize(n);
  for (std::size_t v = 0; v < n; ++v) out.labels.labels[v] = static_cast<std::int32_t>(v / block);

  std::normal_distribution<double> gauss(0.0, 1.0);
  out.features = FeatureMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(params.feature_dim));
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t j = 0; j < params.feature_dim; ++j) {
      out.features(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(j)) = params.noise * gauss(rng);
    }
    if (params.feature_dim > 0) {
      out.features(static_cast<Eigen::Index>(v),
                   static_cast<Eigen::Index>(static_cast<std::size_t>(out.labels.labels[v]) % params.feature_dim)) += 1.0;
    }
  }
  return out;
}

CsrGraph generate_erdos_renyi(std::size_t n, double p, std::uint64_t seed) {
  check_probability(p, "p");
  std::mt19937_64 rng(seed);
  std::vector<std::pair<NodeId, NodeId>> edges;
  sample_within(rng, 0, n, p, edges);
  return preprocess(CsrGraph::from_edges(n, std::move(edges)));
}

}  // namespace ibmb
