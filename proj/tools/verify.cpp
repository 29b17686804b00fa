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

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <set>

#include "commands.hpp"
#include "ibmb/batch.hpp"
#include "ibmb/gcn.hpp"
#include "ibmb/partition.hpp"
#include "ibmb/schedule.hpp"

namespace ibmb::cli {

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool condition, const std::string& what) {
    if (!condition && ok) {
      ok = false;
      detail = what;
    }
  }
};

class Battery {
 public:
  explicit Battery(Report& r) : report_(r) {}

  void run(const std::string& name, const std::function<void(Check&)>& body) {
    Check c;
    try {
      body(c);
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    ++total_;
    failed_ += !c.ok;
    report_.stream() << "check." << name << '=' << (c.ok ? "pass" : "fail");
    if (!c.detail.empty()) report_.stream() << ' ' << c.detail;
    report_.stream() << '\n';
  }

  std::size_t total() const { return total_; }
  std::size_t failed() const { return failed_; }

 private:
  Report& report_;
  std::size_t total_ = 0;
  std::size_t failed_ = 0;
};

NodeSet random_subset(std::size_t n, double keep, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(keep);
  NodeSet s;
  for (NodeId v = 0; v < n; ++v) {
    if (coin(rng)) s.push_back(v);
  }
  if (s.empty()) s.push_back(0);
  return s;
}

std::set<std::pair<NodeId, NodeId>> scanned_edges(const CsrGraph& g, const NodeSet& nodes) {
  std::set<std::pair<NodeId, NodeId>> edges;
  for (NodeId i = 0; i < nodes.size(); ++i) {
    for (NodeId j = 0; j < nodes.size(); ++j) {
      if (g.has_edge(nodes[i], nodes[j])) edges.emplace(i, j);
    }
  }
  return edges;
}

std::set<std::pair<NodeId, NodeId>> local_edges(const CsrGraph& g) {
  std::set<std::pair<NodeId, NodeId>> edges;
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    for (NodeId j : g.neighbors(i)) edges.emplace(i, j);
  }
  return edges;
}

double best_cycle(const DistanceMatrix& d) {
  std::vector<std::size_t> perm(d.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = 0.0;
  do {
    best = std::max(best, cycle_objective(d, perm));
  } while (std::next_permutation(perm.begin() + 1, perm.end()));
  return best;
}

std::size_t best_bisection(const CsrGraph& g) {
  const auto n = g.num_nodes();
  std::size_t best = std::numeric_limits<std::size_t>::max();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != n / 2) continue;
    std::size_t cut = 0;
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v : g.neighbors(u)) cut += u < v && ((mask >> u) & 1) != ((mask >> v) & 1);
    }
    best = std::min(best, cut);
  }
  return best;
}

template <typename T, typename W, typename R>
bool byte_stable(const T& value, W write, R read) {
  std::stringstream a;
  write(a, value);
  const std::string bytes = a.str();
  const auto back = read(a);
  std::stringstream b;
  write(b, back);
  return b.str() == bytes;
}

void builtin_checks(Battery& battery, std::uint64_t seed) {
  std::mt19937_64 rng(seed);

  battery.run("ppr_push_bound", [&](Check& c) {
    const PprConfig cfg{0.25, 2e-4, 50, std::nullopt};
    const auto bound = static_cast<std::uint64_t>(std::ceil(1.0 / (cfg.alpha * cfg.epsilon)));
    for (const auto& g : {generate_erdos_renyi(80, 0.08, seed), generate_sbm({80, 4, 0.2, 0.02, 1, 0.0, seed}).graph}) {
      const MatrixXd exact = exact_ppr(g, cfg.alpha);
      for (NodeId root = 0; root < g.num_nodes(); ++root) {
        PushStats stats;
        const VectorXd p = push_ppr(g, root, cfg, &stats).to_dense(g.num_nodes());
        c.require(stats.pushes <= bound, "push count above 1/(alpha*eps) at root " + std::to_string(root));
        for (NodeId v = 0; v < g.num_nodes(); ++v) {
          c.require(std::abs(p[v] - exact(root, v)) <= cfg.epsilon * static_cast<double>(g.degree(v)),
                    "error above eps*deg(v) at root " + std::to_string(root));
        }
      }
    }
  });

  battery.run("topic_ppr_convergence", [&](Check& c) {
    const auto g = generate_erdos_renyi(60, 0.1, seed + 1);
    const MatrixXd exact_rows = exact_ppr(g, 0.25);
    VectorXd t = VectorXd::Zero(60);
    for (int i = 0; i < 5; ++i) t[static_cast<Eigen::Index>(rng() % 60)] = 1.0;
    t /= t.sum();
    const VectorXd exact = (t.transpose() * exact_rows).transpose();
    for (std::size_t k : {10u, 25u, 50u}) {
      const double gap = (topic_ppr_power_dense(g, t, 0.25, k) - exact).lpNorm<1>();
      c.require(gap <= 2.0 * std::pow(0.75, static_cast<double>(k)), "L1 gap above 2(1-alpha)^k at k=" + std::to_string(k));
    }
  });

  battery.run("partition_legality", [&](Check& c) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 2 + rng() % 60;
      const NodeSet outputs = random_subset(n, 0.5, rng);
      PprRows rows;
      for (NodeId u : outputs) {
        ScoreVec v;
        for (NodeId w = 0; w < n; ++w) {
          if (unit(rng) < 0.2) v.entries.push_back({w, unit(rng)});
        }
        rows.emplace(u, std::move(v));
      }
      const std::size_t bound = 1 + rng() % 8;
      const auto p = distance_partition(rows, outputs, bound, static_cast<std::uint64_t>(trial));
      p.validate();
      for (const auto& grp : p.groups) c.require(grp.size() <= bound, "distance group above the size bound");
    }
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 4 + rng() % 150;
      const auto g = generate_erdos_renyi(n, std::min(1.0, 5.0 / static_cast<double>(n)), seed + trial);
      const std::size_t b = 1 + rng() % std::min<std::size_t>(n, 12);
      const auto p = multilevel_partition(g, b, {1.03, static_cast<std::uint64_t>(trial), 8, 8});
      p.validate();
      c.require(p.groups.size() == b, "multilevel part count differs from b");
      for (const auto& grp : p.groups) c.require(grp.size() <= max_part_size(n, b, 1.03), "multilevel part above balance bound");
    }
    std::vector<std::pair<NodeId, NodeId>> ring;
    for (NodeId i = 0; i < 16; ++i) ring.emplace_back(i, (i + 1) % 16);
    const auto g = preprocess(CsrGraph::from_edges(16, std::move(ring)));
    c.require(edge_cut(g, multilevel_partition(g, 2)) == best_bisection(g), "ring-of-16 cut differs from the optimum");
  });

  battery.run("induced_subgraph", [&](Check& c) {
    for (int trial = 0; trial < 30; ++trial) {
      const auto g = generate_erdos_renyi(30 + trial, 0.1, seed + trial);
      const auto nodes = random_subset(g.num_nodes(), 0.4, rng);
      const auto b = induce_subgraph(g, nodes, {nodes.front()});
      b.validate();
      c.require(local_edges(b.local_graph) == scanned_edges(g, b.nodes), "induced edges differ from a full scan");
    }
  });

  battery.run("format_round_trips", [&](Check& c) {
    for (int trial = 0; trial < 20; ++trial) {
      auto g = generate_erdos_renyi(5 + trial, 0.3, seed + trial);
      if (trial % 2) g = g.with_weights(normalization_weights(g, NormMode::symmetric));
      c.require(byte_stable(g, write_graph, read_graph), "graph");
      const auto nodes = random_subset(g.num_nodes(), 0.6, rng);
      c.require(byte_stable(induce_subgraph(g, nodes, {nodes.back()}), write_batch, read_batch), "batch");
      const auto m = GcnModel<double>::random({3, 4, 2}, Activation::relu, NormMode::symmetric, seed + trial);
      c.require(byte_stable(m, write_model, read_model), "model");
      c.require(byte_stable(MatrixXd(MatrixXd::Random(4, 3)), write_logits, read_logits), "logits");
      Schedule s{ScheduleKind::fixed_cycle, {2, 0, 1}, seed};
      c.require(byte_stable(s, write_schedule, read_schedule), "schedule");
    }
  });

  battery.run("gradient_check", [&](Check& c) {
    const auto g = normalized_graph(generate_erdos_renyi(20, 0.15, seed), NormMode::symmetric);
    MatrixXd x = MatrixXd::Random(20, 4);
    auto m = GcnModel<double>::random({4, 6, 3}, Activation::relu, NormMode::symmetric, seed);
    std::vector<std::uint32_t> rows{0, 3, 7, 11, 19};
    std::vector<std::int32_t> targets{0, 1, 2, 0, 1};
    const auto lg = gcn_backward(m, g, x, rows, targets);
    const double h = 1e-5;
    for (std::size_t l = 0; l < m.num_layers(); ++l) {
      for (Eigen::Index i = 0; i < m.layers[l].size(); ++i) {
        const double saved = m.layers[l].data()[i];
        m.layers[l].data()[i] = saved + h;
        const double plus = gcn_backward(m, g, x, rows, targets).loss;
        m.layers[l].data()[i] = saved - h;
        const double minus = gcn_backward(m, g, x, rows, targets).loss;
        m.layers[l].data()[i] = saved;
        const double fd = (plus - minus) / (2 * h);
        const double an = lg.grads[l].data()[i];
        c.require(std::abs(fd - an) <= 1e-4 * std::max({std::abs(fd), std::abs(an), 1e-6}),
                  "analytic gradient differs from finite differences");
      }
    }
  });

  battery.run("inference_equivalence", [&](Check& c) {
    const auto g = normalized_graph(generate_erdos_renyi(100, 0.05, seed), NormMode::symmetric);
    const MatrixXd x = MatrixXd::Random(100, 5);
    const auto m = GcnModel<double>::random({5, 8, 8, 3}, Activation::relu, NormMode::symmetric, seed);
    const MatrixXd full = gcn_forward(m, g, x);
    NodeSet all(100);
    std::iota(all.begin(), all.end(), 0);
    c.require((gcn_forward(m, induce_subgraph(g, all, all), x) - full).cwiseAbs().maxCoeff() <= 1e-12,
              "whole-graph batch differs from full forward");
    c.require((full_inference_chunked(m, g, x, 7) - full).cwiseAbs().maxCoeff() <= 1e-10,
              "chunked inference differs from full forward");
  });

  battery.run("schedule_anneal", [&](Check& c) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t b = 2; b <= 7; ++b) {
      for (int trial = 0; trial < 5; ++trial) {
        MatrixXd d = MatrixXd::Zero(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b));
        for (Eigen::Index i = 0; i < d.rows(); ++i) {
          for (Eigen::Index j = i + 1; j < d.cols(); ++j) d(i, j) = d(j, i) = unit(rng);
        }
        const DistanceMatrix dm{d};
        const auto s = max_tsp_anneal(dm, {0, std::nullopt, 0.999, seed + trial});
        c.require(cycle_objective(dm, s.order) >= 0.95 * best_cycle(dm), "annealed cycle below 0.95 of the optimum");
      }
    }
  });
}

void artifact_checks(Battery& battery, const VerifyArgs& a) {
  std::optional<CsrGraph> graph;
  if (!a.graph.empty()) {
    battery.run("artifact.graph", [&](Check& c) {
      graph = load(a.graph, [](std::istream& in) { return read_graph(in); });
      c.require(graph->is_symmetric(), "graph is not symmetric");
      c.require(graph->has_all_self_loops(), "graph lacks self-loops");
      c.detail = c.ok ? "N=" + std::to_string(graph->num_nodes()) + " E=" + std::to_string(graph->num_edges()) : c.detail;
    });
  }

  std::optional<std::vector<Batch>> batches;
  if (!a.batches.empty()) {
    battery.run("artifact.batches", [&](Check& c) {
      batches = load_batches(a.batches);
      NodeSet outputs;
      for (const auto& b : *batches) {
        b.validate();
        const auto outs = b.output_nodes();
        outputs.insert(outputs.end(), outs.begin(), outs.end());
        if (!graph) continue;
        c.require(b.nodes.back() < graph->num_nodes(), "batch node beyond the graph");
        if (!c.ok) return;
        c.require(local_edges(b.local_graph) == scanned_edges(*graph, b.nodes),
                  "batch " + std::to_string(b.batch_id) + " is not the induced subgraph");
      }
      const std::size_t total = outputs.size();
      canonicalize(outputs);
      c.require(outputs.size() == total, "a node is an output of more than one batch");
      if (c.ok) c.detail = "batches=" + std::to_string(batches->size());
    });
  }

  if (!a.partition.empty()) {
    battery.run("artifact.partition", [&](Check& c) {
      const auto p = load(a.partition, [](std::istream& in) { return read_partition(in); });
      p.validate();
      if (batches) {
        c.require(batches->size() == p.groups.size(), "batch count differs from group count");
        for (std::size_t i = 0; c.ok && i < p.groups.size(); ++i) {
          c.require((*batches)[i].output_nodes() == p.groups[i], "batch outputs differ from partition group");
        }
      }
    });
  }

  if (!a.schedule.empty()) {
    battery.run("artifact.schedule", [&](Check& c) {
      const auto s = load(a.schedule, [](std::istream& in) { return read_schedule(in); });
      s.validate(batches ? std::optional<std::size_t>(batches->size()) : std::nullopt);
      c.detail = "kind=" + to_string(s.kind);
    });
  }

  if (!a.model.empty()) {
    battery.run("artifact.model", [&](Check& c) {
      const auto m = load(a.model, [](std::istream& in) { return read_model(in); });
      m.validate();
      if (!a.features.empty()) {
        const auto x = load(a.features, [](std::istream& in) { return read_features(in); });
        c.require(x.cols() == m.input_dim(), "feature width differs from model input dim");
      }
    });
  }
}

}  // namespace

void run_verify(const VerifyArgs& a, Report& r) {
  Battery battery(r);
  if (!a.skip_builtin) builtin_checks(battery, a.seed);
  artifact_checks(battery, a);
  r.line("# summary");
  r.kv("checks", battery.total()).kv("failed", battery.failed());
  if (battery.failed() > 0) throw VerifyFailure(std::to_string(battery.failed()) + " check(s) failed");
}

}  // namespace ibmb::cli
