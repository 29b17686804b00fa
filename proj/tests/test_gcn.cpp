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

#include <random>
#include <sstream>

#include "doctest.h"
#include "ibmb/error.hpp"
#include "ibmb/gcn.hpp"
#include "oracles.hpp"

using namespace ibmb;

namespace {

FeatureMatrix random_features(std::size_t n, Eigen::Index f, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  FeatureMatrix x(static_cast<Eigen::Index>(n), f);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
  return x;
}

NodeSet iota_set(std::size_t n) {
  NodeSet s(n);
  std::iota(s.begin(), s.end(), 0);
  return s;
}

Batch whole_graph_batch(const CsrGraph& g) {
  const auto all = iota_set(g.num_nodes());
  return induce_subgraph(g, all, all);
}

double loss_at(const GcnModel<double>& m, const CsrGraph& g, const MatrixXd& x, const std::vector<std::uint32_t>& rows,
               const std::vector<std::int32_t>& targets) {
  return gcn_backward(m, g, x, rows, targets).loss;
}

}  // namespace

TEST_CASE("forward pass") {
  SUBCASE("neighborhood averages") {
    const auto g = normalized_graph(preprocess(CsrGraph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}})), NormMode::row_stochastic);
    GcnModel<double> m{{MatrixXd::Identity(2, 2)}, Activation::identity, NormMode::row_stochastic};
    FeatureMatrix x(4, 2);
    x << 1, 0, 2, 1, 3, 0, 4, 1;
    const auto out = gcn_forward(m, g, x);
    CHECK(out(0, 0) == doctest::Approx(1.5));
    CHECK(out(1, 0) == doctest::Approx(2.0));
    CHECK(out(3, 1) == doctest::Approx(0.5));
    CHECK(out(2, 1) == doctest::Approx(2.0 / 3.0));
  }
  SUBCASE("whole-graph batch equals the full graph") {
    for (auto mode : {NormMode::row_stochastic, NormMode::symmetric}) {
      const auto g = normalized_graph(preprocess(generate_erdos_renyi(60, 0.08, 1)), mode);
      const auto x = random_features(60, 5, 2);
      const auto m = GcnModel<double>::random({5, 8, 3}, Activation::relu, mode, 3);
      const MatrixXd diff = gcn_forward(m, whole_graph_batch(g), x) - gcn_forward(m, g, x);
      CHECK(diff.cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
  SUBCASE("zero features give zero logits") {
    const auto g = normalized_graph(preprocess(generate_erdos_renyi(20, 0.2, 1)), NormMode::symmetric);
    const auto m = GcnModel<double>::random({4, 6, 6, 3}, Activation::relu, NormMode::symmetric, 1);
    CHECK(gcn_forward(m, g, FeatureMatrix::Zero(20, 4)).isZero(0.0));
  }
  SUBCASE("batch forward returns output rows only") {
    const auto g = normalized_graph(preprocess(generate_erdos_renyi(30, 0.1, 5)), NormMode::symmetric);
    const auto b = induce_subgraph(g, {1, 2, 5, 9, 20}, {2, 20});
    const auto m = GcnModel<double>::random({3, 2}, Activation::relu, NormMode::symmetric, 1);
    CHECK(gcn_forward(m, b, random_features(30, 3, 1)).rows() == 2);
  }
  SUBCASE("shape errors") {
    const auto g = normalized_graph(preprocess(generate_erdos_renyi(10, 0.3, 1)), NormMode::symmetric);
    const auto m = GcnModel<double>::random({4, 3}, Activation::relu, NormMode::symmetric, 1);
    CHECK_THROWS_AS(gcn_forward(m, g, FeatureMatrix::Zero(10, 5)), ShapeError);
    CHECK_THROWS_AS(gcn_forward(m, g, FeatureMatrix::Zero(9, 4)), ShapeError);
    GcnModel<double> broken{{MatrixXd::Zero(4, 3), MatrixXd::Zero(2, 2)}, Activation::relu, NormMode::symmetric};
    CHECK_THROWS_AS(gcn_forward(broken, g, FeatureMatrix::Zero(10, 4)), ShapeError);
    CHECK_THROWS_AS(gcn_forward(m, preprocess(generate_erdos_renyi(10, 0.3, 1)), FeatureMatrix::Zero(10, 4)),
                    PreconditionError);
  }
  SUBCASE("single precision") {
    const auto g = normalized_graph(preprocess(generate_erdos_renyi(40, 0.1, 7)), NormMode::symmetric);
    const auto x = random_features(40, 4, 7);
    const auto m = GcnModel<double>::random({4, 8, 3}, Activation::relu, NormMode::symmetric, 7);
    const MatrixX<float> low = gcn_forward(m.cast<float>(), g, x);
    CHECK((low.cast<double>() - gcn_forward(m, g, x)).cwiseAbs().maxCoeff() <= 1e-4);
  }
}

TEST_CASE("backward pass matches finite differences") {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto mode = seed % 2 ? NormMode::symmetric : NormMode::row_stochastic;
    const auto g = normalized_graph(preprocess(generate_erdos_renyi(20, 0.15, seed)), mode);
    const MatrixXd x = random_features(20, 4, seed + 100);
    const auto layers = 2 + seed % 2;
    std::vector<std::size_t> dims{4};
    for (std::size_t l = 1; l < layers; ++l) dims.push_back(6);
    dims.push_back(3);
    auto m = GcnModel<double>::random(dims, Activation::relu, mode, seed);
    std::mt19937_64 rng(seed);
    std::vector<std::uint32_t> rows;
    std::vector<std::int32_t> targets;
    for (std::uint32_t r = 0; r < 20; r += 2) {
      rows.push_back(r);
      targets.push_back(r % 6 == 0 ? NodeLabels::kUnlabeled : static_cast<std::int32_t>(rng() % 3));
    }
    const auto lg = gcn_backward(m, g, x, rows, targets);
    CHECK(lg.count == 6);
    const double step = 1e-5;
    for (std::size_t l = 0; l < m.num_layers(); ++l) {
      for (Eigen::Index i = 0; i < m.layers[l].size(); ++i) {
        const double saved = m.layers[l].data()[i];
        m.layers[l].data()[i] = saved + step;
        const double plus = loss_at(m, g, x, rows, targets);
        m.layers[l].data()[i] = saved - step;
        const double minus = loss_at(m, g, x, rows, targets);
        m.layers[l].data()[i] = saved;
        const double fd = (plus - minus) / (2 * step);
        const double an = lg.grads[l].data()[i];
        const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6});
        worst = std::max(worst, rel);
      }
    }
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("loss properties") {
  const auto g = normalized_graph(preprocess(CsrGraph::from_edges(3, {})), NormMode::row_stochastic);
  const MatrixXd x = MatrixXd::Identity(3, 3);
  const std::vector<std::uint32_t> rows{0, 1, 2};
  const std::vector<std::int32_t> targets{0, 1, 2};
  double previous = std::numeric_limits<double>::infinity();
  for (double scale : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0}) {
    GcnModel<double> m{{scale * MatrixXd::Identity(3, 3)}, Activation::identity, NormMode::row_stochastic};
    const double loss = loss_at(m, g, x, rows, targets);
    CHECK(loss < previous);
    previous = loss;
  }
  CHECK(previous < 1e-12);

  GcnModel<double> m{{MatrixXd::Identity(3, 3)}, Activation::identity, NormMode::row_stochastic};
  const auto a = gcn_backward(m, g, x, rows, targets);
  const auto b = gcn_backward(m, g, x, rows, targets);
  CHECK(a.loss == b.loss);
  CHECK(a.grads == b.grads);

  const std::vector<std::int32_t> none(3, NodeLabels::kUnlabeled);
  CHECK_THROWS_AS(gcn_backward(m, g, x, rows, none), DegenerateInputError);
}

TEST_CASE("training") {
  const auto sbm = generate_sbm({120, 3, 0.1, 0.01, 6, 0.5, 4});
  const auto g = normalized_graph(sbm.graph, NormMode::symmetric);
  const auto all = iota_set(120);
  Partition parts{{{}, {}, {}, {}}, all, 0};
  for (NodeId v = 0; v < 120; ++v) parts.groups[v % 4].push_back(v);
  parts.canonicalize();
  const auto batches = build_batches(g, parts, NodewiseMode{8});
  const EpochScheduler order({ScheduleKind::input_order, {0, 1, 2, 3}, 0});
  const auto initial = GcnModel<double>::random({6, 8, 3}, Activation::relu, NormMode::symmetric, 1);

  SUBCASE("zero learning rate") {
    auto m = initial;
    AdamState<double> adam;
    adam.learning_rate = 0.0;
    train(m, batches, order, adam, sbm.features, sbm.labels, {3, 1});
    CHECK(m == initial);
  }
  SUBCASE("deterministic and loss decreases") {
    auto a = initial;
    auto b = initial;
    AdamState<double> adam_a;
    AdamState<double> adam_b;
    adam_a.learning_rate = adam_b.learning_rate = 0.01;
    const auto trace = train(a, batches, order, adam_a, sbm.features, sbm.labels, {30, 1}, &batches);
    train(b, batches, order, adam_b, sbm.features, sbm.labels, {30, 1});
    CHECK(a == b);
    CHECK(trace.size() == 30);
    CHECK(trace.back().train_loss < trace.front().train_loss);
    REQUIRE(trace.back().val_accuracy.has_value());
    CHECK(*trace.back().val_accuracy > 0.8);
  }
  SUBCASE("accumulation takes one step per group") {
    auto m = initial;
    AdamState<double> adam;
    train(m, batches, order, adam, sbm.features, sbm.labels, {5, 3});
    CHECK(adam.step_count == 10);
    train(m, batches, order, adam, sbm.features, sbm.labels, {1, 4});
    CHECK(adam.step_count == 11);
  }
  SUBCASE("single whole-graph batch equals full-batch Adam") {
    const std::vector<Batch> one{whole_graph_batch(g)};
    const EpochScheduler single({ScheduleKind::input_order, {0}, 0});
    auto m = initial;
    AdamState<double> adam;
    const auto trace = train(m, one, single, adam, sbm.features, sbm.labels, {5, 1});

    auto ref = initial;
    AdamState<double> ref_adam;
    std::vector<std::uint32_t> rows(120);
    std::iota(rows.begin(), rows.end(), 0);
    for (std::size_t e = 0; e < 5; ++e) {
      const auto lg = gcn_backward(ref, g, MatrixXd(sbm.features), rows, sbm.labels.labels);
      CHECK(trace[e].train_loss == doctest::Approx(lg.loss).epsilon(1e-12));
      ref_adam.step(ref, lg.grads);
    }
    CHECK(m == ref);
  }
  SUBCASE("errors") {
    auto m = initial;
    AdamState<double> adam;
    const EpochScheduler short_order({ScheduleKind::input_order, {0, 1}, 0});
    CHECK_THROWS_AS(train(m, batches, short_order, adam, sbm.features, sbm.labels, {1, 1}), ArgumentError);
    CHECK_THROWS_AS(train(m, {}, order, adam, sbm.features, sbm.labels, {1, 1}), ArgumentError);
    CHECK_THROWS_AS(train(m, batches, order, adam, sbm.features, sbm.labels, {1, 0}), ArgumentError);
  }
}

TEST_CASE("chunked inference") {
  const auto g = normalized_graph(preprocess(generate_erdos_renyi(100, 0.05, 3)), NormMode::symmetric);
  const auto x = random_features(100, 5, 3);
  const auto m = GcnModel<double>::random({5, 16, 16, 4}, Activation::relu, NormMode::symmetric, 3);
  const MatrixXd full = gcn_forward(m, g, x);
  CHECK((full_inference_chunked(m, g, x, 1) - full).cwiseAbs().maxCoeff() == 0.0);
  for (std::size_t chunks : {2u, 7u, 100u, 150u}) {
    const MatrixXd chunked = full_inference_chunked(m, g, x, chunks);
    CHECK((chunked - full).cwiseAbs().maxCoeff() <= 1e-10);
    for (Eigen::Index r = 0; r < full.rows(); ++r) {
      Eigen::Index a = 0;
      Eigen::Index b = 0;
      full.row(r).maxCoeff(&a);
      chunked.row(r).maxCoeff(&b);
      CHECK(a == b);
    }
  }
  CHECK_THROWS_AS(full_inference_chunked(m, g, x, 0), ArgumentError);
}

TEST_CASE("influence scores") {
  SUBCASE("zero outside the receptive field") {
    std::vector<std::pair<NodeId, NodeId>> path;
    for (NodeId i = 0; i + 1 < 8; ++i) path.emplace_back(i, i + 1);
    const auto g = normalized_graph(preprocess(CsrGraph::from_edges(8, std::move(path))), NormMode::symmetric);
    const auto x = random_features(8, 3, 1);
    const auto m = GcnModel<double>::random({3, 4, 2}, Activation::relu, NormMode::symmetric, 2);
    CHECK(influence_fd(m, g, x, 0, 3) <= 1e-9);
    CHECK(influence_fd(m, g, x, 0, 7) <= 1e-9);
    CHECK(influence_fd(m, g, x, 0, 2) > 0.0);
    const auto row = influence_fd_row(m, g, x, 0);
    for (const auto& e : row.entries) CHECK(e.node <= 2);
  }
  SUBCASE("feature sign flips leave influence unchanged") {
    const auto g = normalized_graph(preprocess(generate_erdos_renyi(30, 0.1, 8)), NormMode::row_stochastic);
    auto x = random_features(30, 3, 8);
    // Linear models keep the Jacobian independent of the features.
    const auto m = GcnModel<double>::random({3, 5, 2}, Activation::identity, NormMode::row_stochastic, 8);
    const double before = influence_fd(m, g, x, 4, 4);
    x.col(1) *= -1.0;
    CHECK(influence_fd(m, g, x, 4, 4) == doctest::Approx(before).epsilon(1e-9));
  }
  SUBCASE("linear model matches the closed form") {
    const auto base = preprocess(generate_erdos_renyi(30, 0.12, 5));
    const auto g = normalized_graph(base, NormMode::row_stochastic);
    const auto x = random_features(30, 3, 5);
    const auto m = GcnModel<double>::random({3, 4, 2}, Activation::identity, NormMode::row_stochastic, 5);
    for (NodeId u : {0u, 11u, 29u}) {
      const auto analytic = influence_linear_analytic(base, m, u);
      const auto numeric = influence_fd_row(m, g, x, u);
      for (NodeId v = 0; v < 30; ++v) {
        const double a = analytic.at(v);
        const double f = numeric.at(v);
        CHECK(std::abs(a - f) <= 1e-6 * std::max(a, 1e-12) + 1e-12);
      }
      const MatrixXd prod = m.layers[0] * m.layers[1];
      CHECK(analytic.sum() == doctest::Approx(prod.cwiseAbs().sum()).epsilon(1e-12));
    }
  }
  SUBCASE("two-cycle without self loops") {
    const auto g = CsrGraph::from_edges(2, {{0, 1}, {1, 0}});
    const auto m = GcnModel<double>::random({2, 2}, Activation::identity, NormMode::row_stochastic, 1);
    const auto row = influence_linear_analytic(g, m, 0);
    CHECK(row.at(0) == 0.0);
    CHECK(row.at(1) == doctest::Approx(row.sum()));
  }
  SUBCASE("closed form needs a linear row-stochastic model") {
    const auto g = preprocess(generate_erdos_renyi(10, 0.3, 1));
    const auto relu = GcnModel<double>::random({2, 2}, Activation::relu, NormMode::row_stochastic, 1);
    CHECK_THROWS_AS(influence_linear_analytic(g, relu, 0), ArgumentError);
    const auto sym = GcnModel<double>::random({2, 2}, Activation::identity, NormMode::symmetric, 1);
    CHECK_THROWS_AS(influence_linear_analytic(g, sym, 0), ArgumentError);
  }
}

TEST_CASE("model and logits persistence") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = GcnModel<double>::random({3 + seed, 7, 2 + seed % 3}, seed % 2 ? Activation::relu : Activation::identity,
                                            seed % 3 ? NormMode::symmetric : NormMode::row_stochastic, seed);
    std::stringstream buf;
    write_model(buf, m);
    const std::string bytes = buf.str();
    const auto back = read_model(buf);
    CHECK(back == m);
    std::stringstream again;
    write_model(again, back);
    CHECK(again.str() == bytes);

    const MatrixXd logits = random_features(5 + seed, 3, seed);
    std::stringstream lbuf;
    write_logits(lbuf, logits);
    CHECK(read_logits(lbuf) == logits);
  }
  std::istringstream junk("IBMX....");
  CHECK_THROWS_AS(read_model(junk), FormatError);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_logits(empty), FormatError);
}
