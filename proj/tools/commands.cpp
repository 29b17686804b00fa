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

#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ibmb/batch.hpp"
#include "ibmb/gcn.hpp"
#include "ibmb/parallel.hpp"
#include "ibmb/partition.hpp"
#include "ibmb/schedule.hpp"

namespace ibmb::cli {

namespace {

CsrGraph load_graph(const fs::path& p) {
  return load(p, [](std::istream& in) { return read_graph(in); });
}
NodeSet load_nodes(const fs::path& p) {
  return load(p, [](std::istream& in) { return read_node_set(in); });
}
NodeLabels load_labels(const fs::path& p) {
  return load(p, [](std::istream& in) { return read_labels(in); });
}
FeatureMatrix load_features(const fs::path& p) {
  return load(p, [](std::istream& in) { return read_features(in); });
}

std::optional<NormMode> parse_optional_norm(const std::string& text) {
  if (text == "none") return std::nullopt;
  return parse_norm_mode(text);
}

Activation parse_activation(const std::string& text) {
  if (text == "relu") return Activation::relu;
  if (text == "identity") return Activation::identity;
  throw ArgumentError("unknown activation: " + text);
}

void degree_report(const CsrGraph& g, Report& r) {
  std::size_t lo = g.num_nodes() ? std::numeric_limits<std::size_t>::max() : 0;
  std::size_t hi = 0;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    lo = std::min(lo, g.degree(v));
    hi = std::max(hi, g.degree(v));
  }
  r.kv("N", g.num_nodes()).kv("E", g.num_edges());
  r.kv("degree_min", lo).kv("degree_max", hi);
  r.kv("degree_mean", g.num_nodes() ? static_cast<double>(g.num_edges()) / static_cast<double>(g.num_nodes()) : 0.0);
}

std::size_t count_components(const CsrGraph& g) {
  std::vector<char> seen(g.num_nodes(), 0);
  std::vector<NodeId> stack;
  std::size_t components = 0;
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    if (seen[s]) continue;
    ++components;
    seen[s] = 1;
    stack.push_back(s);
    while (!stack.empty()) {
      const NodeId u = stack.back();
      stack.pop_back();
      for (NodeId v : g.neighbors(u)) {
        if (!seen[v]) {
          seen[v] = 1;
          stack.push_back(v);
        }
      }
    }
  }
  return components;
}

PprRows compute_rows(const CsrGraph& g, const NodeSet& roots, const PprConfig& cfg, PushStats* stats = nullptr) {
  std::vector<PushStats> per_root;
  auto vecs = push_ppr_many(g, roots, cfg, stats ? &per_root : nullptr);
  if (stats) {
    for (const auto& s : per_root) {
      stats->pushes += s.pushes;
      stats->sweeps = std::max(stats->sweeps, s.sweeps);
    }
  }
  PprRows rows;
  for (std::size_t i = 0; i < roots.size(); ++i) rows.emplace(roots[i], std::move(vecs[i]));
  return rows;
}

Partition make_partition(const CsrGraph& g, const NodeSet& outputs, const std::string& method, std::size_t max_size,
                         std::size_t parts, double imbalance, std::uint64_t seed, const PprRows* rows) {
  if (method == "distance") {
    if (!rows) throw ArgumentError("distance partitioning needs PPR rows");
    return distance_partition(*rows, outputs, max_size, seed);
  }
  if (method == "metis" || method == "multilevel") {
    if (parts == 0) throw ArgumentError("graph partitioning needs --parts");
    return restrict_to_outputs(multilevel_partition(g, parts, {imbalance, seed, 8, 8}), outputs);
  }
  throw ArgumentError("unknown partition method: " + method);
}

AuxMode make_mode(const std::string& mode, std::size_t k, double budget_factor, std::optional<std::size_t> budget) {
  if (mode == "nodewise") {
    if (k < 1) throw ArgumentError("--k must be >= 1");
    return NodewiseMode{k};
  }
  if (mode == "batchwise") return BatchwiseMode{budget_factor, budget};
  throw ArgumentError("unknown auxiliary mode: " + mode);
}

DistanceMatrix batch_distances(const std::vector<Batch>& batches, const NodeLabels& labels, double smoothing) {
  std::vector<VectorXd> dists;
  dists.reserve(batches.size());
  for (const auto& b : batches) dists.push_back(label_distribution(b, labels, smoothing));
  return pairwise_distances(dists);
}

Schedule make_schedule(const std::vector<Batch>& batches, const NodeLabels& labels, const std::string& kind_text,
                       std::uint64_t seed, std::size_t iters, std::optional<double> t0, double cooling,
                       double smoothing) {
  const auto kind = parse_schedule_kind(kind_text);
  Schedule s{kind, std::vector<std::size_t>(batches.size()), seed};
  std::iota(s.order.begin(), s.order.end(), 0);
  if (kind == ScheduleKind::fixed_cycle && batches.size() >= 2) {
    s = max_tsp_anneal(batch_distances(batches, labels, smoothing), {iters, t0, cooling, seed});
  }
  return s;
}

EpochScheduler make_scheduler(const Schedule& s, const std::vector<Batch>& batches, const NodeLabels& labels,
                              double smoothing) {
  if (s.kind == ScheduleKind::weighted_sampling) return EpochScheduler(s, batch_distances(batches, labels, smoothing));
  return EpochScheduler(s);
}

void batch_report(const std::vector<Batch>& batches, Report& r) {
  std::size_t total = 0;
  std::size_t largest = 0;
  std::size_t outputs = 0;
  NodeSet all;
  for (const auto& b : batches) {
    total += b.num_nodes();
    outputs += b.num_outputs();
    largest = std::max(largest, b.num_nodes());
    all.insert(all.end(), b.nodes.begin(), b.nodes.end());
  }
  canonicalize(all);
  r.kv("num_batches", batches.size()).kv("num_outputs", outputs);
  r.kv("batch_nodes_total", total).kv("batch_nodes_unique", all.size()).kv("batch_nodes_max", largest);
  r.kv("overlap_ratio", all.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(all.size()));
  for (const auto& b : batches) {
    r.stream() << "batch=" << b.batch_id << " nodes=" << b.num_nodes() << " outputs=" << b.num_outputs()
               << " edges=" << b.local_graph.num_edges() << '\n';
  }
}

}  // namespace

PprRows load_ppr_rows(const fs::path& path) {
  auto in = open_in(path);
  PprRows rows;
  while (auto entry = read_score_vec(in)) {
    if (entry->first == kNoRoot) throw FormatError("PPR row without a root in " + path.string());
    rows.insert_or_assign(entry->first, std::move(entry->second));
  }
  return rows;
}

void save_ppr_rows(const fs::path& path, const NodeSet& roots, const PprRows& rows) {
  save(path, [&](std::ostream& out) {
    for (NodeId u : roots) write_score_vec(out, rows.at(u), u);
  });
}

NodeLabels masked_labels(const NodeLabels& labels, const NodeSet& keep) {
  NodeLabels out{std::vector<std::int32_t>(labels.labels.size(), NodeLabels::kUnlabeled), labels.num_classes};
  for (NodeId v : keep) {
    if (v >= labels.labels.size()) throw RangeError("node id beyond the label file");
    out.labels[v] = labels.labels[v];
  }
  return out;
}

// ---------------------------------------------------------------------------

void run_gen_sbm(const GenSbmArgs& a, Report& r) {
  if (a.train_fraction < 0 || a.val_fraction < 0 || a.train_fraction + a.val_fraction > 1) {
    throw ArgumentError("train and validation fractions must be in [0, 1] and sum to at most 1");
  }
  const auto data = generate_sbm(a.sbm);
  const auto norm = parse_optional_norm(a.norm);
  const CsrGraph g = norm ? data.graph.with_weights(normalization_weights(data.graph, *norm)) : data.graph;

  std::vector<NodeId> perm(a.sbm.num_nodes);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(a.sbm.seed ^ 0x73706c6974ULL);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto n = static_cast<double>(perm.size());
  const auto n_train = static_cast<std::size_t>(std::llround(a.train_fraction * n));
  const auto n_val = static_cast<std::size_t>(std::llround(a.val_fraction * n));
  NodeSet train(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  NodeSet val(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
              perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  NodeSet test(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), perm.end());
  canonicalize(train);
  canonicalize(val);
  canonicalize(test);

  save(a.out / "graph.ibmg", [&](std::ostream& out) { write_graph(out, g); });
  save(a.out / "features.ibmf", [&](std::ostream& out) { write_features(out, data.features); });
  save(a.out / "labels.txt", [&](std::ostream& out) { write_labels(out, data.labels); });
  save(a.out / "train.nodes", [&](std::ostream& out) { write_node_set(out, train); });
  save(a.out / "val.nodes", [&](std::ostream& out) { write_node_set(out, val); });
  save(a.out / "test.nodes", [&](std::ostream& out) { write_node_set(out, test); });
  degree_report(g, r);
  r.kv("classes", a.sbm.num_classes).kv("feature_dim", a.sbm.feature_dim);
  r.kv("train", train.size()).kv("val", val.size()).kv("test", test.size());
}

void run_preprocess(const PreprocessArgs& a, Report& r) {
  auto in = open_in(a.input);
  CsrGraph raw;
  if (a.remap) {
    auto remapped = load_edge_list_remapped(in);
    raw = std::move(remapped.graph);
    if (!a.ids_out.empty()) {
      save(a.ids_out, [&](std::ostream& out) {
        for (auto id : remapped.external_ids) out << id << '\n';
      });
    }
  } else {
    raw = load_edge_list(in, {a.num_nodes});
  }
  const auto g = preprocess(raw);
  const auto norm = parse_optional_norm(a.norm);
  const CsrGraph out_graph = norm ? g.with_weights(normalization_weights(g, *norm)) : g;
  save(a.out, [&](std::ostream& out) { write_graph(out, out_graph); });
  r.kv("input_edges", raw.num_edges());
  degree_report(out_graph, r);
}

void run_stats(const StatsArgs& a, Report& r) {
  const auto g = load_graph(a.graph);
  degree_report(g, r);
  r.kv("weighted", g.has_weights() ? 1 : 0);
  r.kv("symmetric", g.is_symmetric() ? 1 : 0);
  r.kv("self_loops", g.has_all_self_loops() ? 1 : 0);
  r.kv("components", count_components(g));
}

void run_ppr(const PprArgs& a, Report& r) {
  const auto g = load_graph(a.graph);
  NodeSet roots = load_nodes(a.roots);
  canonicalize(roots);
  PushStats stats;
  const auto rows = compute_rows(g, roots, a.ppr.config(), &stats);
  save_ppr_rows(a.out, roots, rows);
  std::size_t support = 0;
  for (const auto& [root, v] : rows) support += v.entries.size();
  r.kv("roots", roots.size()).kv("pushes", stats.pushes);
  r.kv("mean_support", roots.empty() ? 0.0 : static_cast<double>(support) / static_cast<double>(roots.size()));
}

void run_partition(const PartitionArgs& a, Report& r) {
  const auto g = load_graph(a.graph);
  NodeSet outputs = load_nodes(a.outputs);
  canonicalize(outputs);
  std::optional<PprRows> rows;
  if (a.method == "distance") rows = a.ppr_rows.empty() ? compute_rows(g, outputs, a.ppr.config()) : load_ppr_rows(a.ppr_rows);
  const auto p = make_partition(g, outputs, a.method, a.max_size, a.parts, a.imbalance, a.seed, rows ? &*rows : nullptr);
  save(a.out, [&](std::ostream& out) { write_partition(out, p); });
  std::size_t largest = 0;
  for (const auto& grp : p.groups) largest = std::max(largest, grp.size());
  r.kv("outputs", outputs.size()).kv("groups", p.groups.size()).kv("largest_group", largest);
}

void run_batches(const BatchesArgs& a, Report& r) {
  const auto g = load_graph(a.graph);
  const auto partition = load(a.partition, [](std::istream& in) { return read_partition(in); });
  std::optional<PprRows> rows;
  if (!a.ppr_rows.empty()) rows = load_ppr_rows(a.ppr_rows);
  const BuildOptions opts{a.ppr.config(), {parse_optional_norm(a.renormalize)}, rows ? &*rows : nullptr};
  const auto batches = build_batches(g, partition, make_mode(a.mode, a.k, a.budget_factor, a.budget), opts);
  save_batches(a.out, batches);
  batch_report(batches, r);
}

void run_schedule(const ScheduleArgs& a, Report& r) {
  const auto batches = load_batches(a.batches);
  NodeLabels labels = load_labels(a.labels);
  if (!a.train_nodes.empty()) labels = masked_labels(labels, load_nodes(a.train_nodes));
  const auto s = make_schedule(batches, labels, a.kind, a.seed, a.anneal_iters, a.t0, a.cooling, a.smoothing);
  save(a.out, [&](std::ostream& out) { write_schedule(out, s); });
  r.kv("kind", to_string(s.kind)).kv("batches", s.order.size());
  if (s.kind == ScheduleKind::fixed_cycle && batches.size() >= 2) {
    r.kv("cycle_objective", cycle_objective(batch_distances(batches, labels, a.smoothing), s.order));
  }
}

void run_train(const TrainArgs& a, Report& r) {
  const auto batches = load_batches(a.batches);
  const auto schedule = load(a.schedule, [](std::istream& in) { return read_schedule(in); });
  const auto x = load_features(a.features);
  NodeLabels labels = load_labels(a.labels);
  if (!a.train_nodes.empty()) labels = masked_labels(labels, load_nodes(a.train_nodes));
  std::optional<std::vector<Batch>> validation;
  const NodeLabels all_labels = load_labels(a.labels);
  if (!a.val_batches.empty()) validation = load_batches(a.val_batches);

  std::vector<std::size_t> dims{static_cast<std::size_t>(x.cols())};
  dims.insert(dims.end(), a.hidden.begin(), a.hidden.end());
  dims.push_back(static_cast<std::size_t>(labels.num_classes));
  auto model = GcnModel<double>::random(dims, parse_activation(a.activation), parse_norm_mode(a.aggregation), a.seed);

  AdamState<double> adam;
  adam.learning_rate = a.lr;
  const std::size_t accum = a.grad_accum == 0 ? batches.size() : a.grad_accum;
  const auto scheduler = make_scheduler(schedule, batches, labels, a.smoothing);

  // One call per epoch so records are printed as they are produced.
  for (std::size_t epoch = 0; epoch < a.epochs; ++epoch) {
    const auto trace = train(model, batches, scheduler, adam, x, labels, {1, accum, epoch});
    r.stream() << "epoch=" << epoch << " train_loss=" << num(trace.front().train_loss);
    if (validation) r.stream() << " val_accuracy=" << num(evaluate(model, *validation, x, all_labels).accuracy());
    r.stream() << std::endl;
  }
  if (!a.model_out.empty()) save(a.model_out, [&](std::ostream& out) { write_model(out, model); });
  r.line("# summary");
  r.kv("epochs", a.epochs).kv("batches", batches.size()).kv("grad_accum", accum).kv("adam_steps", adam.step_count);
  if (validation) r.kv("val_accuracy", evaluate(model, *validation, x, all_labels).accuracy());
}

void run_infer(const InferArgs& a, Report& r) {
  const auto model = load(a.model, [](std::istream& in) { return read_model(in); });
  const auto x = load_features(a.features);
  if (a.graph.empty() == a.batches.empty()) throw ArgumentError("give exactly one of --graph or --batches");

  MatrixXd logits;
  NodeSet rows;
  if (!a.graph.empty()) {
    const auto g = load_graph(a.graph);
    logits = full_inference_chunked(model, g, x, a.chunks);
    rows.resize(g.num_nodes());
    std::iota(rows.begin(), rows.end(), 0);
    r.kv("mode", "full").kv("chunks", a.chunks);
  } else {
    const auto batches = load_batches(a.batches);
    std::vector<std::pair<NodeId, VectorXd>> collected;
    for (const auto& b : batches) {
      const MatrixXd out = gcn_forward(model, b, x);
      const auto outs = b.output_nodes();
      for (std::size_t i = 0; i < outs.size(); ++i) collected.emplace_back(outs[i], out.row(static_cast<Eigen::Index>(i)).transpose());
    }
    std::sort(collected.begin(), collected.end(), [](const auto& p, const auto& q) { return p.first < q.first; });
    for (std::size_t i = 1; i < collected.size(); ++i) {
      if (collected[i].first == collected[i - 1].first) throw FormatError("node is an output of two batches");
    }
    logits.resize(static_cast<Eigen::Index>(collected.size()), model.output_dim());
    for (std::size_t i = 0; i < collected.size(); ++i) {
      rows.push_back(collected[i].first);
      logits.row(static_cast<Eigen::Index>(i)) = collected[i].second.transpose();
    }
    r.kv("mode", "batches").kv("batches", batches.size());
  }
  if (!a.out.empty()) save(a.out, [&](std::ostream& out) { write_logits(out, logits); });
  if (!a.nodes_out.empty()) save(a.nodes_out, [&](std::ostream& out) { write_node_set(out, rows); });
  r.kv("rows", logits.rows()).kv("classes", logits.cols());

  if (!a.labels.empty()) {
    const auto labels = load_labels(a.labels);
    NodeSet eval = a.nodes.empty() ? rows : load_nodes(a.nodes);
    canonicalize(eval);
    EvalResult res;
    for (NodeId v : eval) {
      const auto it = std::lower_bound(rows.begin(), rows.end(), v);
      if (it == rows.end() || *it != v) throw LookupError("no logits for evaluation node " + std::to_string(v));
      if (!labels.is_labeled(v)) continue;
      Eigen::Index pred = 0;
      logits.row(it - rows.begin()).maxCoeff(&pred);
      res.correct += pred == labels.labels[v];
      ++res.total;
    }
    r.kv("evaluated", res.total).kv("accuracy", res.accuracy());
  }
}

// ---------------------------------------------------------------------------
// Pipeline with content-hash stage caching

namespace {

class Stage {
 public:
  Stage(std::string name, const fs::path& dir, bool force, Report& r)
      : name_(std::move(name)), hash_file_(dir / ".stages" / (name_ + ".hash")), force_(force), report_(r) {
    hash_.add("ibmb-stage-v1").add(name_);
  }

  ContentHash& hash() { return hash_; }

  /** Runs body unless the recorded hash matches and every output exists. */
  template <typename Body>
  void run(const std::vector<fs::path>& outputs, Body&& body) {
    const std::string digest = hash_.hex();
    bool cached = !force_ && fs::exists(hash_file_) && read_bytes(hash_file_) == digest;
    for (const auto& o : outputs) cached = cached && fs::exists(o);
    Stopwatch watch;
    if (!cached) {
      try {
        body();
      } catch (const std::exception& e) {
        throw Error("stage " + name_ + " failed: " + e.what());
      }
      save(hash_file_, [&](std::ostream& out) { out << digest; });
    }
    report_.kv("stage." + name_, cached ? "cached" : "ran");
    report_.kv("stage." + name_ + ".hash", digest);
    report_.kv("stage." + name_ + ".seconds", watch.seconds());
  }

 private:
  std::string name_;
  fs::path hash_file_;
  bool force_;
  Report& report_;
  ContentHash hash_;
};

std::string describe(const PprFlags& p) {
  return "alpha=" + num(p.alpha) + " epsilon=" + num(p.epsilon) + " power_iters=" + std::to_string(p.power_iters);
}

}  // namespace

void run_pipeline(const PipelineArgs& a, Report& r) {
  const fs::path dir = a.out;
  fs::create_directories(dir);
  const fs::path ppr_file = dir / "ppr.ibmp";
  const fs::path partition_file = dir / "partition.txt";
  const fs::path batch_dir = dir / "batches";
  const fs::path schedule_file = dir / "schedule.txt";

  const auto g = load_graph(a.graph);
  NodeSet outputs = load_nodes(a.outputs);
  canonicalize(outputs);
  const bool need_rows = a.method == "distance" || a.mode == "nodewise";

  std::optional<PprRows> rows;
  if (need_rows) {
    Stage stage("ppr", dir, a.force, r);
    stage.hash().add_file(a.graph).add_file(a.outputs).add(describe(a.ppr));
    stage.run({ppr_file}, [&] { save_ppr_rows(ppr_file, outputs, compute_rows(g, outputs, a.ppr.config())); });
    rows = load_ppr_rows(ppr_file);
  }

  {
    Stage stage("partition", dir, a.force, r);
    stage.hash().add_file(a.graph).add_file(a.outputs).add(a.method);
    stage.hash().add("B=" + std::to_string(a.max_size) + " b=" + std::to_string(a.parts) + " imbalance=" +
                     num(a.imbalance) + " seed=" + std::to_string(a.seed));
    if (a.method == "distance") stage.hash().add_file(ppr_file);
    stage.run({partition_file}, [&] {
      const auto p = make_partition(g, outputs, a.method, a.max_size, a.parts, a.imbalance, a.seed, rows ? &*rows : nullptr);
      save(partition_file, [&](std::ostream& out) { write_partition(out, p); });
    });
  }

  {
    Stage stage("batches", dir, a.force, r);
    stage.hash().add_file(a.graph).add_file(partition_file).add(a.mode).add(describe(a.ppr));
    stage.hash().add("k=" + std::to_string(a.k) + " factor=" + num(a.budget_factor) +
                     " budget=" + (a.budget ? std::to_string(*a.budget) : "auto") + " renormalize=" + a.renormalize);
    if (a.mode == "nodewise") stage.hash().add_file(ppr_file);
    std::vector<fs::path> expected{batch_dir};
    if (fs::exists(batch_dir)) {
      const auto files = batch_files(batch_dir);
      if (files.empty()) expected.push_back(batch_dir / batch_file_name(0));
    }
    stage.run(expected, [&] {
      const auto partition = load(partition_file, [](std::istream& in) { return read_partition(in); });
      const BuildOptions opts{a.ppr.config(), {parse_optional_norm(a.renormalize)}, rows ? &*rows : nullptr};
      save_batches(batch_dir, build_batches(g, partition, make_mode(a.mode, a.k, a.budget_factor, a.budget), opts));
    });
  }
  const auto batches = load_batches(batch_dir);

  {
    Stage stage("schedule", dir, a.force, r);
    for (const auto& f : batch_files(batch_dir)) stage.hash().add_file(f);
    if (!a.labels.empty()) stage.hash().add_file(a.labels);
    if (!a.train_nodes.empty()) stage.hash().add_file(a.train_nodes);
    stage.hash().add(a.schedule + " seed=" + std::to_string(a.seed) + " iters=" + std::to_string(a.anneal_iters) +
                     " t0=" + (a.t0 ? num(*a.t0) : "auto") + " cooling=" + num(a.cooling) +
                     " smoothing=" + num(a.smoothing));
    stage.run({schedule_file}, [&] {
      const auto kind = parse_schedule_kind(a.schedule);
      if (kind != ScheduleKind::input_order && a.labels.empty()) throw ArgumentError("this schedule needs --labels");
      NodeLabels labels;
      if (!a.labels.empty()) {
        labels = load_labels(a.labels);
        if (!a.train_nodes.empty()) labels = masked_labels(labels, load_nodes(a.train_nodes));
      }
      const auto s = make_schedule(batches, labels, a.schedule, a.seed, a.anneal_iters, a.t0, a.cooling, a.smoothing);
      save(schedule_file, [&](std::ostream& out) { write_schedule(out, s); });
    });
  }

  r.line("# summary");
  batch_report(batches, r);
}

}  // namespace ibmb::cli
