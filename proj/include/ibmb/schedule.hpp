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
#include <string>
#include <vector>

#include "ibmb/batch.hpp"
#include "ibmb/graph.hpp"

namespace ibmb {

/** Symmetric, zero-diagonal, finite and nonnegative b x b batch distances. */
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  /** Throws DomainError unless the invariants hold (symmetry within 1e-12). */
  explicit DistanceMatrix(MatrixXd values);

  std::size_t size() const { return static_cast<std::size_t>(values_.rows()); }
  double operator()(std::size_t a, std::size_t b) const {
    return values_(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  }
  const MatrixXd& values() const { return values_; }
  /** Mean over off-diagonal entries; 0 for b < 2. */
  double mean_off_diagonal() const;

 private:
  MatrixXd values_;
};

/** Smoothed class distribution of the labeled outputs of a batch. */
VectorXd label_distribution(const Batch& batch, const NodeLabels& labels, double smoothing = 1e-6);

/** Symmetrized KL divergence between every pair of distributions. */
DistanceMatrix pairwise_distances(const std::vector<VectorXd>& distributions);

/** KL(p || q). Throws DomainError on a zero entry. */
double kl_divergence(const VectorXd& p, const VectorXd& q);

enum class ScheduleKind { fixed_cycle, weighted_sampling, input_order };

std::string to_string(ScheduleKind kind);
ScheduleKind parse_schedule_kind(const std::string& text);

/** Batch order for training. Every batch id appears exactly once per epoch. */
struct Schedule {
  ScheduleKind kind = ScheduleKind::input_order;
  std::vector<std::size_t> order;
  std::uint64_t seed = 0;

  /** Throws ArgumentError unless order is a permutation of 0..n-1. */
  void validate(std::optional<std::size_t> num_batches = std::nullopt) const;
};

/** Sum of consecutive distances including the wrap-around edge. */
double cycle_objective(const DistanceMatrix& d, const std::vector<std::size_t>& cycle);

struct AnnealConfig {
  /** Iteration count; 0 selects 20,000 * b. */
  std::size_t iters = 0;
  /** Starting temperature; nullopt selects the mean off-diagonal distance. */
  std::optional<double> t0;
  double cooling = 0.999;
  std::uint64_t seed = 0;
};

/**
 * Maximum-distance batch cycle by simulated annealing over cyclic
 * permutations with 2-opt and swap moves. Starts at the identity cycle and
 * returns the best cycle seen, rotated to start at batch 0.
 * Throws ArgumentError when b < 2.
 */
Schedule max_tsp_anneal(const DistanceMatrix& d, const AnnealConfig& cfg = {});

/**
 * One epoch of distance-weighted sampling without replacement: from the
 * current batch a, the next unvisited batch c is drawn with probability
 * proportional to d(a, c), uniformly when all remaining distances are 0.
 */
std::vector<std::size_t> weighted_epoch_order(const DistanceMatrix& d, std::size_t start, std::uint64_t seed);

/** Produces the batch order for each epoch of a schedule. */
class EpochScheduler {
 public:
  EpochScheduler(Schedule schedule, std::optional<DistanceMatrix> distances = std::nullopt);

  std::size_t num_batches() const { return num_batches_; }
  /** Weighted sampling reseeds with seed + epoch and starts at a seeded batch. */
  std::vector<std::size_t> order_for_epoch(std::size_t epoch) const;

 private:
  Schedule schedule_;
  std::optional<DistanceMatrix> distances_;
  std::size_t num_batches_;
};

/** "# ibmb-schedule v1 kind=<kind> seed=<seed>" then one batch id per line. */
void write_schedule(std::ostream& out, const Schedule& s);
Schedule read_schedule(std::istream& in);

}  // namespace ibmb
