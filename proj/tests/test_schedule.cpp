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
#include <random>
#include <sstream>

#include "doctest.h"
#include "ibmb/error.hpp"
#include "ibmb/schedule.hpp"
#include "oracles.hpp"

using namespace ibmb;

namespace {

Batch path_batch(const NodeSet& outputs, std::size_t n) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  const auto g = preprocess(CsrGraph::from_edges(n, std::move(edges)));
  NodeSet all(n);
  std::iota(all.begin(), all.end(), 0);
  return induce_subgraph(g, all, outputs);
}

Eigen::MatrixXd random_distances(std::size_t b, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b));
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < d.cols(); ++j) d(i, j) = d(j, i) = unit(rng);
  }
  return d;
}

bool is_permutation_of(std::vector<std::size_t> order, std::size_t n) {
  std::sort(order.begin(), order.end());
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i] != i) return false;
  }
  return order.size() == n;
}

}  // namespace

TEST_CASE("label distributions") {
  const NodeLabels labels{{0, 1, 0, 1, 2, 2, NodeLabels::kUnlabeled}, 3};
  SUBCASE("balanced counts") {
    const NodeLabels two{{0, 1, 0, 1}, 2};
    const auto p = label_distribution(path_batch({0, 1, 2, 3}, 4), two, 0.0);
    CHECK(p(0) == 0.5);
    CHECK(p(1) == 0.5);
  }
  SUBCASE("single class") {
    const NodeLabels three{{0, 0, 0}, 3};
    const auto p = label_distribution(path_batch({0, 1, 2}, 3), three, 0.0);
    CHECK(p(0) == 1.0);
    CHECK(p(1) == 0.0);
    CHECK(p(2) == 0.0);
  }
  SUBCASE("smoothing") {
    const NodeLabels two{{0, 1}, 2};
    const double s = 1e-6;
    const auto p = label_distribution(path_batch({0}, 2), two, s);
    CHECK(p(0) == doctest::Approx((1 + s) / (1 + 2 * s)).epsilon(1e-14));
    CHECK(p(1) == doctest::Approx(s / (1 + 2 * s)).epsilon(1e-14));
    CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
  }
  SUBCASE("only outputs count") {
    // Node 0 is auxiliary; the batch outputs {4, 5} are both class 2.
    const auto p = label_distribution(path_batch({4, 5}, 7), labels, 0.0);
    CHECK(p(2) == 1.0);
  }
  SUBCASE("no labeled outputs") {
    CHECK_THROWS_AS(label_distribution(path_batch({6}, 7), labels, 0.0), DegenerateInputError);
    const auto p = label_distribution(path_batch({6}, 7), labels, 1e-6);
    CHECK(p(0) == doctest::Approx(1.0 / 3.0));
  }
}

TEST_CASE("pairwise distances") {
  Eigen::VectorXd p(2), q(2);
  p << 0.75, 0.25;
  q << 0.25, 0.75;
  const auto d = pairwise_distances({p, q, p});
  CHECK(d(0, 1) == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(d(0, 2) == 0.0);
  CHECK(d(0, 0) == 0.0);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.01, 1.0);
  std::vector<Eigen::VectorXd> dists;
  for (int i = 0; i < 6; ++i) {
    Eigen::VectorXd v(5);
    for (int c = 0; c < 5; ++c) v(c) = unit(rng);
    dists.push_back(v / v.sum());
  }
  const auto base = pairwise_distances(dists);
  CHECK(base.values().isApprox(base.values().transpose()));
  std::vector<Eigen::Index> perm{3, 0, 4, 1, 2};
  std::vector<Eigen::VectorXd> permuted;
  for (const auto& v : dists) {
    Eigen::VectorXd w(5);
    for (int c = 0; c < 5; ++c) w(c) = v(perm[static_cast<std::size_t>(c)]);
    permuted.push_back(w);
  }
  CHECK((pairwise_distances(permuted).values() - base.values()).cwiseAbs().maxCoeff() <= 1e-12);

  Eigen::VectorXd zero(2);
  zero << 1.0, 0.0;
  CHECK_THROWS_AS(pairwise_distances({zero, p}), DomainError);
  CHECK_THROWS_AS(kl_divergence(p, zero), DomainError);

  Eigen::MatrixXd asym = Eigen::MatrixXd::Zero(2, 2);
  asym(0, 1) = 1.0;
  CHECK_THROWS_AS(DistanceMatrix{asym}, DomainError);
  Eigen::MatrixXd diag = Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(DistanceMatrix{diag}, DomainError);
}

TEST_CASE("maximum-distance cycle") {
  std::mt19937_64 rng(9);
  SUBCASE("two batches") {
    Eigen::MatrixXd m(2, 2);
    m << 0, 0.4, 0.4, 0;
    const DistanceMatrix d{m};
    const auto s = max_tsp_anneal(d);
    CHECK(s.kind == ScheduleKind::fixed_cycle);
    CHECK(s.order == std::vector<std::size_t>{0, 1});
    CHECK(cycle_objective(d, s.order) == doctest::Approx(0.8));
  }
  SUBCASE("three batches") {
    const DistanceMatrix d{random_distances(3, rng)};
    const auto s = max_tsp_anneal(d);
    CHECK(cycle_objective(d, s.order) == doctest::Approx(d(0, 1) + d(1, 2) + d(0, 2)));
  }
  SUBCASE("close to the exhaustive optimum") {
    for (std::size_t b = 4; b <= 8; ++b) {
      for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const DistanceMatrix d{random_distances(b, rng)};
        const auto s = max_tsp_anneal(d, {0, std::nullopt, 0.999, seed});
        CHECK(is_permutation_of(s.order, b));
        CHECK(s.order.front() == 0);
        std::vector<std::size_t> identity(b);
        std::iota(identity.begin(), identity.end(), 0);
        const double got = cycle_objective(d, s.order);
        CHECK(got >= cycle_objective(d, identity));
        CHECK(got >= 0.95 * oracle::max_cycle_bruteforce(d.values()));
      }
    }
  }
  SUBCASE("deterministic per seed") {
    const DistanceMatrix d{random_distances(12, rng)};
    CHECK(max_tsp_anneal(d, {5000, std::nullopt, 0.999, 4}).order ==
          max_tsp_anneal(d, {5000, std::nullopt, 0.999, 4}).order);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(max_tsp_anneal(DistanceMatrix{Eigen::MatrixXd::Zero(1, 1)}), ArgumentError);
  }
}

TEST_CASE("distance-weighted sampling") {
  SUBCASE("single batch") {
    CHECK(weighted_epoch_order(DistanceMatrix{Eigen::MatrixXd::Zero(1, 1)}, 0, 1) == std::vector<std::size_t>{0});
  }
  SUBCASE("first transition frequency") {
    Eigen::MatrixXd m(3, 3);
    m << 0, 1, 3, 1, 0, 2, 3, 2, 0;
    const DistanceMatrix d{m};
    int to_two = 0;
    const int draws = 10000;
    for (int seed = 0; seed < draws; ++seed) {
      const auto order = weighted_epoch_order(d, 0, static_cast<std::uint64_t>(seed));
      REQUIRE(order.size() == 3);
      CHECK(order[0] == 0);
      to_two += order[1] == 2;
    }
    CHECK(std::abs(to_two / static_cast<double>(draws) - 0.75) <= 0.03);
  }
  SUBCASE("zero distances fall back to uniform") {
    const DistanceMatrix d{Eigen::MatrixXd::Zero(4, 4)};
    std::vector<int> seen(4, 0);
    for (int seed = 0; seed < 400; ++seed) {
      const auto order = weighted_epoch_order(d, 2, static_cast<std::uint64_t>(seed));
      CHECK(is_permutation_of(order, 4));
      ++seen[order[1]];
    }
    CHECK(seen[2] == 0);
    CHECK(seen[0] > 80);
    CHECK(seen[1] > 80);
    CHECK(seen[3] > 80);
  }
}

TEST_CASE("every schedule visits each batch once per epoch") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t b = 1 + rng() % 15;
    const DistanceMatrix d{random_distances(b, rng)};
    std::vector<std::size_t> identity(b);
    std::iota(identity.begin(), identity.end(), 0);

    const EpochScheduler input({ScheduleKind::input_order, identity, 0});
    const EpochScheduler weighted({ScheduleKind::weighted_sampling, identity, static_cast<std::uint64_t>(trial)}, d);
    std::optional<EpochScheduler> cycle;
    if (b >= 2) cycle.emplace(max_tsp_anneal(d, {2000, std::nullopt, 0.999, 1}));
    for (std::size_t epoch = 0; epoch < 5; ++epoch) {
      CHECK(input.order_for_epoch(epoch) == identity);
      CHECK(is_permutation_of(weighted.order_for_epoch(epoch), b));
      CHECK(weighted.order_for_epoch(epoch) == weighted.order_for_epoch(epoch));
      if (cycle) CHECK(cycle->order_for_epoch(epoch) == cycle->order_for_epoch(0));
    }
  }
  CHECK_THROWS_AS(EpochScheduler({ScheduleKind::weighted_sampling, {0, 1}, 0}), ArgumentError);
  CHECK_THROWS_AS(EpochScheduler({ScheduleKind::fixed_cycle, {0, 0}, 0}), ArgumentError);
}

TEST_CASE("schedule persistence") {
  const Schedule s{ScheduleKind::fixed_cycle, {0, 3, 1, 2}, 17};
  std::stringstream buf;
  write_schedule(buf, s);
  CHECK(buf.str() == "# ibmb-schedule v1 kind=fixed_cycle seed=17\n0\n3\n1\n2\n");
  const auto back = read_schedule(buf);
  CHECK(back.kind == s.kind);
  CHECK(back.order == s.order);
  CHECK(back.seed == s.seed);

  for (auto kind : {ScheduleKind::fixed_cycle, ScheduleKind::weighted_sampling, ScheduleKind::input_order}) {
    CHECK(parse_schedule_kind(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(parse_schedule_kind("random"), ArgumentError);

  std::istringstream v2("# ibmb-schedule v2 kind=fixed_cycle seed=0\n0\n");
  CHECK_THROWS_AS(read_schedule(v2), VersionError);
  std::istringstream dup("# ibmb-schedule v1 kind=fixed_cycle seed=0\n0\n0\n");
  CHECK_THROWS_AS(read_schedule(dup), ArgumentError);
  std::istringstream junk("# ibmb-schedule v1 kind=fixed_cycle seed=0\nx\n");
  CHECK_THROWS_AS(read_schedule(junk), ParseError);
}
