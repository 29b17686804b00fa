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
#include "ibmb/graph.hpp"

using namespace ibmb;

namespace {

CsrGraph parse(const std::string& text, EdgeListOptions options = {}) {
  std::istringstream in(text);
  return load_edge_list(in, options);
}

CsrGraph random_directed(std::size_t n, std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<NodeId> node(0, static_cast<NodeId>(n - 1));
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (std::size_t i = 0; i < m; ++i) edges.emplace_back(node(rng), node(rng));
  return CsrGraph::from_edges(n, std::move(edges));
}

std::string graph_bytes(const CsrGraph& g) {
  std::ostringstream out;
  write_graph(out, g);
  return out.str();
}

}  // namespace

TEST_CASE("edge list parsing") {
  SUBCASE("minimal symmetric pair") {
    const auto g = parse("0 1\n1 0");
    CHECK(g.num_nodes() == 2);
    CHECK(g.num_edges() == 2);
  }
  SUBCASE("duplicates collapse") {
    const auto g = parse("0 1\n0 1");
    CHECK(g.num_edges() == 1);
  }
  SUBCASE("comment line and inferred node count") {
    const auto g = parse("# c\n2 0");
    CHECK(g.num_nodes() == 3);
    CHECK(g.num_edges() == 1);
    CHECK(g.has_edge(2, 0));
  }
  SUBCASE("declared node count keeps isolated nodes") {
    const auto g = parse("0 1\n", {5});
    CHECK(g.num_nodes() == 5);
  }
  SUBCASE("rows are sorted") {
    const auto g = parse("0 3\n0 1\n0 2\n");
    const auto nbrs = g.neighbors(0);
    CHECK(std::vector<NodeId>(nbrs.begin(), nbrs.end()) == std::vector<NodeId>{1, 2, 3});
  }
  SUBCASE("malformed line reports its number") {
    try {
      parse("0 1\n\n# ok\n1 x\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 4);
    }
    CHECK_THROWS_AS(parse("0 1 2\n"), ParseError);
    CHECK_THROWS_AS(parse("0\n"), ParseError);
    CHECK_THROWS_AS(parse("-1 2\n"), ParseError);
  }
  SUBCASE("id overflow") {
    CHECK_THROWS_AS(parse("0 4294967295\n"), RangeError);
    CHECK_THROWS_AS(parse("0 99999999999999999999999\n"), RangeError);
    CHECK_THROWS_AS(parse("0 5\n", {3}), RangeError);
  }
  SUBCASE("sparse external ids are remapped densely") {
    std::istringstream in("100 7\n7 123456789012\n");
    const auto r = load_edge_list_remapped(in);
    CHECK(r.graph.num_nodes() == 3);
    CHECK(r.external_ids == std::vector<std::uint64_t>{7, 100, 123456789012ULL});
    CHECK(r.graph.has_edge(1, 0));
    CHECK(r.graph.has_edge(0, 2));
  }
}

TEST_CASE("csr invariants are enforced on construction") {
  CHECK_THROWS_AS(CsrGraph({1, 1}, {0}), FormatError);
  CHECK_THROWS_AS(CsrGraph({0, 2}, {0}), FormatError);
  CHECK_THROWS_AS(CsrGraph({0, 2}, {0, 0}), FormatError);
  CHECK_THROWS_AS(CsrGraph({0, 1}, {3}), FormatError);
  CHECK_THROWS_AS(CsrGraph({0, 1}, {0}, std::vector<double>{-1.0}), FormatError);
  CHECK_NOTHROW(CsrGraph({0, 1}, {0}, std::vector<double>{0.5}));
}

TEST_CASE("preprocess") {
  SUBCASE("single directed edge") {
    const auto g = preprocess(CsrGraph::from_edges(2, {{0, 1}}));
    CHECK(g.num_edges() == 4);
    for (NodeId u : {0u, 1u}) {
      for (NodeId v : {0u, 1u}) CHECK(g.has_edge(u, v));
    }
  }
  SUBCASE("star into the hub") {
    const auto g = preprocess(CsrGraph::from_edges(3, {{1, 0}, {2, 0}}));
    CHECK(g.num_edges() == 7);
  }
  SUBCASE("idempotent and invariant-preserving on random graphs") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto g = random_directed(1 + seed % 17, 3 * seed, seed);
      const auto once = preprocess(g);
      CHECK(once.is_symmetric());
      CHECK(once.has_all_self_loops());
      CHECK(preprocess(once) == once);
      for (NodeId u = 0; u < g.num_nodes(); ++u) {
        for (NodeId v : g.neighbors(u)) CHECK(once.has_edge(u, v));
      }
    }
  }
  SUBCASE("drops weights") {
    const auto g = CsrGraph::from_edges(2, {{0, 1}});
    CHECK_FALSE(preprocess(g.with_weights({1.0})).has_weights());
  }
}

TEST_CASE("normalization weights") {
  const auto cycle = preprocess(CsrGraph::from_edges(2, {{0, 1}}));
  for (double w : normalization_weights(cycle, NormMode::row_stochastic)) CHECK(w == 0.5);
  for (double w : normalization_weights(cycle, NormMode::symmetric)) CHECK(w == doctest::Approx(0.5));

  const auto path = preprocess(CsrGraph::from_edges(3, {{0, 1}, {1, 2}}));
  const auto sym = path.with_weights(normalization_weights(path, NormMode::symmetric));
  // Row 0 is [0, 1]; slot 1 is edge (0,1).
  CHECK(sym.weights(0)[1] == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-15));

  SUBCASE("row sums and symmetry on random graphs") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto g = preprocess(random_directed(40, 120, seed));
      const auto row = g.with_weights(normalization_weights(g, NormMode::row_stochastic));
      const auto s = g.with_weights(normalization_weights(g, NormMode::symmetric));
      for (NodeId u = 0; u < g.num_nodes(); ++u) {
        double sum = 0.0;
        for (double w : row.weights(u)) sum += w;
        CHECK(std::abs(sum - 1.0) <= 1e-12);
        const auto nbrs = s.neighbors(u);
        for (std::size_t e = 0; e < nbrs.size(); ++e) {
          const auto back = s.neighbors(nbrs[e]);
          const auto pos = std::lower_bound(back.begin(), back.end(), u) - back.begin();
          CHECK(s.weights(nbrs[e])[static_cast<std::size_t>(pos)] == s.weights(u)[e]);
        }
      }
    }
  }
  SUBCASE("degree-zero node") {
    CHECK_THROWS_AS(normalization_weights(CsrGraph::from_edges(2, {{0, 0}}), NormMode::symmetric), PreconditionError);
  }
}

TEST_CASE("binary graph cache round trip") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto g = preprocess(random_directed(1 + seed * 3, seed * 10, seed));
    if (seed % 2) g = g.with_weights(normalization_weights(g, NormMode::symmetric));
    const auto bytes = graph_bytes(g);
    std::istringstream in(bytes);
    const auto back = read_graph(in);
    CHECK(back == g);
    CHECK(graph_bytes(back) == bytes);
  }
  SUBCASE("header layout") {
    const auto bytes = graph_bytes(CsrGraph::from_edges(2, {{0, 1}}));
    CHECK(bytes.substr(0, 4) == "IBMG");
    CHECK(bytes.size() == 4 + 4 + 8 + 8 + 3 * 8 + 1 * 4 + 1);
  }
  SUBCASE("corruption") {
    auto bytes = graph_bytes(CsrGraph::from_edges(2, {{0, 1}}));
    std::istringstream truncated(bytes.substr(0, bytes.size() - 2));
    CHECK_THROWS_AS(read_graph(truncated), FormatError);
    bytes[4] = 9;
    std::istringstream versioned(bytes);
    CHECK_THROWS_AS(read_graph(versioned), VersionError);
  }
}

TEST_CASE("features and labels persistence") {
  FeatureMatrix x(3, 2);
  x << 1.0, -2.5, 0.25, 3.0, 1e-3, 7.0;
  std::stringstream buf;
  write_features(buf, x);
  const auto back = read_features(buf);
  CHECK(back.rows() == 3);
  CHECK((back - x).cwiseAbs().maxCoeff() < 1e-6);

  NodeLabels labels{{0, -1, 2, 1}, 3};
  std::stringstream lb;
  write_labels(lb, labels);
  const auto lback = read_labels(lb);
  CHECK(lback.labels == labels.labels);
  CHECK(lback.num_classes == 3);
  std::istringstream bad("0\n-2\n");
  CHECK_THROWS_AS(read_labels(bad), ParseError);
  NodeLabels invalid{{0, 5}, 2};
  CHECK_THROWS_AS(invalid.validate(), RangeError);

  FeatureMatrix nan = FeatureMatrix::Zero(1, 1);
  nan(0, 0) = std::nan("");
  CHECK_THROWS_AS(validate_features(nan), DomainError);
}

TEST_CASE("stochastic block model") {
  SUBCASE("degenerate probabilities give disjoint cliques") {
    const auto sbm = generate_sbm({4, 2, 1.0, 0.0, 2, 0.0, 1});
    const auto& g = sbm.graph;
    CHECK(g.num_edges() == 8);
    CHECK(g.has_edge(0, 1));
    CHECK(g.has_edge(2, 3));
    CHECK_FALSE(g.has_edge(1, 2));
    CHECK(g.has_all_self_loops());
    CHECK(sbm.labels.labels == std::vector<std::int32_t>{0, 0, 1, 1});
    CHECK(sbm.features(2, 1) == 1.0);
  }
  SUBCASE("deterministic per seed") {
    const SbmParams params{200, 4, 0.1, 0.01, 8, 0.5, 42};
    const auto a = generate_sbm(params);
    const auto b = generate_sbm(params);
    CHECK(graph_bytes(a.graph) == graph_bytes(b.graph));
    CHECK(a.features == b.features);
    auto other = params;
    other.seed = 43;
    CHECK_FALSE(graph_bytes(generate_sbm(other).graph) == graph_bytes(a.graph));
  }
  SUBCASE("empirical densities") {
    const auto sbm = generate_sbm({1000, 4, 0.02, 0.002, 4, 1.0, 7});
    std::size_t intra = 0, inter = 0;
    for (NodeId u = 0; u < 1000; ++u) {
      for (NodeId v : sbm.graph.neighbors(u)) {
        if (u >= v) continue;
        (u / 250 == v / 250 ? intra : inter) += 1;
      }
    }
    const double intra_pairs = 4.0 * 250.0 * 249.0 / 2.0;
    const double inter_pairs = 6.0 * 250.0 * 250.0;
    CHECK(std::abs(intra / intra_pairs - 0.02) <= 0.2 * 0.02);
    CHECK(std::abs(inter / inter_pairs - 0.002) <= 0.2 * 0.002);
  }
  SUBCASE("argument checks") {
    CHECK_THROWS_AS(generate_sbm({10, 2, 0.1, 0.2, 2, 1.0, 0}), RangeError);
    CHECK_THROWS_AS(generate_sbm({10, 2, 1.5, 0.2, 2, 1.0, 0}), RangeError);
    CHECK_THROWS_AS(generate_sbm({10, 3, 0.5, 0.2, 2, 1.0, 0}), ArgumentError);
  }
  SUBCASE("erdos renyi density") {
    const auto g = generate_erdos_renyi(400, 0.05, 3);
    const double edges = static_cast<double>(g.num_edges() - 400) / 2.0;
    CHECK(std::abs(edges / (400.0 * 399.0 / 2.0) - 0.05) < 0.01);
  }
}

TEST_CASE("degree downsampling") {
  const auto g = generate_erdos_renyi(300, 0.2, 5);
  const auto s = sample_degree(g, 8, 11);
  CHECK(s == sample_degree(g, 8, 11));
  CHECK(s.is_symmetric());
  CHECK(s.has_all_self_loops());
  CHECK(s.num_edges() <= 300 + 2 * 300 * 8);
  for (NodeId u = 0; u < s.num_nodes(); ++u) {
    for (NodeId v : s.neighbors(u)) CHECK(g.has_edge(u, v));
  }
}

TEST_CASE("k-hop ball") {
  const auto path = preprocess(CsrGraph::from_edges(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}));
  CHECK(k_hop_ball(path, 0, 0) == NodeSet{0});
  CHECK(k_hop_ball(path, 2, 1) == NodeSet{1, 2, 3});
  CHECK(k_hop_ball(path, 0, 3) == NodeSet{0, 1, 2, 3});
}
