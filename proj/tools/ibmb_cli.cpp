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

#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "ibmb/parallel.hpp"

using namespace ibmb;
using namespace ibmb::cli;

namespace {

const std::vector<std::string> kNorms{"symmetric", "row_stochastic", "none"};
const std::vector<std::string> kNormsRequired{"symmetric", "row_stochastic"};

void add_ppr_flags(CLI::App* sub, PprFlags& p) {
  sub->add_option("--alpha", p.alpha, "teleport probability")->capture_default_str()->check(CLI::Range(1e-9, 1.0));
  sub->add_option("--epsilon", p.epsilon, "push threshold per unit degree")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--power-iters", p.power_iters, "power iterations for set teleports")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Influence-based mini-batching for graph neural networks"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.set_version_flag("--version", "ibmb 1.0.0");
  bool quiet_config = false;
  app.add_flag("--no-config", quiet_config, "do not echo the effective configuration");

  GenSbmArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-sbm", "generate a stochastic block model dataset");
  gen_cmd->add_option("--nodes", gen.sbm.num_nodes)->capture_default_str();
  gen_cmd->add_option("--classes", gen.sbm.num_classes)->capture_default_str();
  gen_cmd->add_option("--p-in", gen.sbm.p_in)->capture_default_str();
  gen_cmd->add_option("--p-out", gen.sbm.p_out)->capture_default_str();
  gen_cmd->add_option("--feature-dim", gen.sbm.feature_dim)->capture_default_str();
  gen_cmd->add_option("--noise", gen.sbm.noise)->capture_default_str();
  gen_cmd->add_option("--seed", gen.sbm.seed)->capture_default_str();
  gen_cmd->add_option("--train-fraction", gen.train_fraction)->capture_default_str();
  gen_cmd->add_option("--val-fraction", gen.val_fraction)->capture_default_str();
  gen_cmd->add_option("--norm", gen.norm)->capture_default_str()->check(CLI::IsMember(kNorms));
  gen_cmd->add_option("--out", gen.out, "output directory")->required();

  PreprocessArgs pre;
  auto* pre_cmd = app.add_subcommand("preprocess", "edge list to symmetric CSR with self-loops and weights");
  pre_cmd->add_option("--input", pre.input, "edge list")->required()->check(CLI::ExistingFile);
  pre_cmd->add_option("--out", pre.out, "graph file")->required();
  pre_cmd->add_option("--num-nodes", pre.num_nodes);
  pre_cmd->add_flag("--remap", pre.remap, "map arbitrary integer ids to 0..N-1");
  pre_cmd->add_option("--ids-out", pre.ids_out, "original id of each node (with --remap)");
  pre_cmd->add_option("--norm", pre.norm)->capture_default_str()->check(CLI::IsMember(kNorms));

  StatsArgs stats;
  auto* stats_cmd = app.add_subcommand("stats", "graph statistics");
  stats_cmd->add_option("--graph", stats.graph)->required()->check(CLI::ExistingFile);

  PprArgs ppr;
  auto* ppr_cmd = app.add_subcommand("ppr", "approximate PPR rows for a set of roots");
  ppr_cmd->add_option("--graph", ppr.graph)->required()->check(CLI::ExistingFile);
  ppr_cmd->add_option("--roots", ppr.roots, "node set file")->required()->check(CLI::ExistingFile);
  ppr_cmd->add_option("--out", ppr.out)->required();
  add_ppr_flags(ppr_cmd, ppr.ppr);

  PartitionArgs part;
  auto* part_cmd = app.add_subcommand("partition", "group output nodes");
  part_cmd->add_option("--graph", part.graph)->required()->check(CLI::ExistingFile);
  part_cmd->add_option("--outputs", part.outputs, "node set file")->required()->check(CLI::ExistingFile);
  part_cmd->add_option("--method", part.method)->capture_default_str()->check(CLI::IsMember({"distance", "metis", "multilevel"}));
  part_cmd->add_option("--ppr", part.ppr_rows, "precomputed PPR rows")->check(CLI::ExistingFile);
  part_cmd->add_option("--max-size", part.max_size, "group size bound for distance partitioning")->capture_default_str();
  part_cmd->add_option("--parts", part.parts, "number of parts for graph partitioning");
  part_cmd->add_option("--imbalance", part.imbalance)->capture_default_str();
  part_cmd->add_option("--seed", part.seed)->capture_default_str();
  part_cmd->add_option("--out", part.out)->required();
  add_ppr_flags(part_cmd, part.ppr);

  BatchesArgs bat;
  auto* bat_cmd = app.add_subcommand("batches", "select auxiliary nodes and write batch files");
  bat_cmd->add_option("--graph", bat.graph)->required()->check(CLI::ExistingFile);
  bat_cmd->add_option("--partition", bat.partition)->required()->check(CLI::ExistingFile);
  bat_cmd->add_option("--ppr", bat.ppr_rows, "precomputed PPR rows")->check(CLI::ExistingFile);
  bat_cmd->add_option("--mode", bat.mode)->capture_default_str()->check(CLI::IsMember({"nodewise", "batchwise"}));
  bat_cmd->add_option("--k", bat.k, "top-k per output node")->capture_default_str();
  bat_cmd->add_option("--budget-factor", bat.budget_factor)->capture_default_str();
  bat_cmd->add_option("--budget", bat.budget, "fixed auxiliary budget per batch");
  bat_cmd->add_option("--renormalize", bat.renormalize)->capture_default_str()->check(CLI::IsMember(kNorms));
  bat_cmd->add_option("--out", bat.out, "batch directory")->required();
  add_ppr_flags(bat_cmd, bat.ppr);

  ScheduleArgs sch;
  auto* sch_cmd = app.add_subcommand("schedule", "order batches for training");
  sch_cmd->add_option("--batches", sch.batches)->required()->check(CLI::ExistingDirectory);
  sch_cmd->add_option("--labels", sch.labels)->required()->check(CLI::ExistingFile);
  sch_cmd->add_option("--train-nodes", sch.train_nodes)->check(CLI::ExistingFile);
  sch_cmd->add_option("--kind", sch.kind)->capture_default_str()->check(CLI::IsMember({"fixed_cycle", "weighted_sampling", "input_order"}));
  sch_cmd->add_option("--seed", sch.seed)->capture_default_str();
  sch_cmd->add_option("--anneal-iters", sch.anneal_iters, "0 selects 20000 * batches")->capture_default_str();
  sch_cmd->add_option("--t0", sch.t0, "starting temperature (default: mean distance)");
  sch_cmd->add_option("--cooling", sch.cooling)->capture_default_str();
  sch_cmd->add_option("--smoothing", sch.smoothing)->capture_default_str();
  sch_cmd->add_option("--out", sch.out)->required();

  TrainArgs tr;
  auto* tr_cmd = app.add_subcommand("train", "train a GCN on precomputed batches");
  tr_cmd->add_option("--batches", tr.batches)->required()->check(CLI::ExistingDirectory);
  tr_cmd->add_option("--schedule", tr.schedule)->required()->check(CLI::ExistingFile);
  tr_cmd->add_option("--features", tr.features)->required()->check(CLI::ExistingFile);
  tr_cmd->add_option("--labels", tr.labels)->required()->check(CLI::ExistingFile);
  tr_cmd->add_option("--train-nodes", tr.train_nodes, "restrict the loss to these nodes")->check(CLI::ExistingFile);
  tr_cmd->add_option("--val-batches", tr.val_batches)->check(CLI::ExistingDirectory);
  tr_cmd->add_option("--model-out", tr.model_out);
  tr_cmd->add_option("--hidden", tr.hidden, "hidden layer widths")->capture_default_str()->delimiter(',');
  tr_cmd->add_option("--activation", tr.activation)->capture_default_str()->check(CLI::IsMember({"relu", "identity"}));
  tr_cmd->add_option("--aggregation", tr.aggregation, "must match the graph weights")->capture_default_str()->check(CLI::IsMember(kNormsRequired));
  tr_cmd->add_option("--epochs", tr.epochs)->capture_default_str();
  tr_cmd->add_option("--lr", tr.lr)->capture_default_str()->check(CLI::NonNegativeNumber);
  tr_cmd->add_option("--grad-accum", tr.grad_accum, "batches per step; 0 = full epoch")->capture_default_str();
  tr_cmd->add_option("--seed", tr.seed)->capture_default_str();
  tr_cmd->add_option("--smoothing", tr.smoothing)->capture_default_str();

  InferArgs inf;
  auto* inf_cmd = app.add_subcommand("infer", "logits from full-graph or batched inference");
  inf_cmd->add_option("--model", inf.model)->required()->check(CLI::ExistingFile);
  inf_cmd->add_option("--features", inf.features)->required()->check(CLI::ExistingFile);
  inf_cmd->add_option("--graph", inf.graph, "full-graph inference")->check(CLI::ExistingFile);
  inf_cmd->add_option("--batches", inf.batches, "batched inference")->check(CLI::ExistingDirectory);
  inf_cmd->add_option("--chunks", inf.chunks)->capture_default_str()->check(CLI::PositiveNumber);
  inf_cmd->add_option("--out", inf.out, "logits file");
  inf_cmd->add_option("--nodes-out", inf.nodes_out, "node id of each logits row");
  inf_cmd->add_option("--labels", inf.labels)->check(CLI::ExistingFile);
  inf_cmd->add_option("--nodes", inf.nodes, "evaluate accuracy on these nodes")->check(CLI::ExistingFile);

  VerifyArgs ver;
  auto* ver_cmd = app.add_subcommand("verify", "run exact-oracle checks and validate artifacts");
  ver_cmd->add_option("--graph", ver.graph)->check(CLI::ExistingFile);
  ver_cmd->add_option("--batches", ver.batches)->check(CLI::ExistingDirectory);
  ver_cmd->add_option("--partition", ver.partition)->check(CLI::ExistingFile);
  ver_cmd->add_option("--schedule", ver.schedule)->check(CLI::ExistingFile);
  ver_cmd->add_option("--model", ver.model)->check(CLI::ExistingFile);
  ver_cmd->add_option("--features", ver.features)->check(CLI::ExistingFile);
  ver_cmd->add_flag("--artifacts-only", ver.skip_builtin, "skip the built-in oracle battery");
  ver_cmd->add_option("--seed", ver.seed)->capture_default_str();

  PipelineArgs pl;
  auto* pl_cmd = app.add_subcommand("pipeline", "ppr, partition, batches and schedule with stage caching");
  pl_cmd->add_option("--graph", pl.graph)->required()->check(CLI::ExistingFile);
  pl_cmd->add_option("--outputs", pl.outputs, "node set file")->required()->check(CLI::ExistingFile);
  pl_cmd->add_option("--labels", pl.labels)->check(CLI::ExistingFile);
  pl_cmd->add_option("--train-nodes", pl.train_nodes)->check(CLI::ExistingFile);
  pl_cmd->add_option("--out", pl.out, "output directory")->required();
  pl_cmd->add_option("--method", pl.method)->capture_default_str()->check(CLI::IsMember({"distance", "metis", "multilevel"}));
  pl_cmd->add_option("--max-size", pl.max_size)->capture_default_str();
  pl_cmd->add_option("--parts", pl.parts);
  pl_cmd->add_option("--imbalance", pl.imbalance)->capture_default_str();
  pl_cmd->add_option("--mode", pl.mode)->capture_default_str()->check(CLI::IsMember({"nodewise", "batchwise"}));
  pl_cmd->add_option("--k", pl.k)->capture_default_str();
  pl_cmd->add_option("--budget-factor", pl.budget_factor)->capture_default_str();
  pl_cmd->add_option("--budget", pl.budget);
  pl_cmd->add_option("--renormalize", pl.renormalize)->capture_default_str()->check(CLI::IsMember(kNorms));
  pl_cmd->add_option("--schedule", pl.schedule)->capture_default_str()->check(CLI::IsMember({"fixed_cycle", "weighted_sampling", "input_order"}));
  pl_cmd->add_option("--anneal-iters", pl.anneal_iters)->capture_default_str();
  pl_cmd->add_option("--t0", pl.t0);
  pl_cmd->add_option("--cooling", pl.cooling)->capture_default_str();
  pl_cmd->add_option("--smoothing", pl.smoothing)->capture_default_str();
  pl_cmd->add_option("--seed", pl.seed)->capture_default_str();
  pl_cmd->add_flag("--force", pl.force, "ignore cached stages");
  add_ppr_flags(pl_cmd, pl.ppr);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  Report report(std::cout);
  CLI::App* sub = app.get_subcommands().front();
  report.kv("command", sub->get_name()).kv("threads", worker_count());
  if (!quiet_config) {
    report.line("# config");
    std::istringstream cfg(sub->config_to_str(true, false));
    for (std::string line; std::getline(cfg, line);) {
      if (!line.empty() && line.front() != '[') report.line(line);
    }
  }
  try {
    const std::string name = sub->get_name();
    if (name == "gen-sbm") run_gen_sbm(gen, report);
    else if (name == "preprocess") run_preprocess(pre, report);
    else if (name == "stats") run_stats(stats, report);
    else if (name == "ppr") run_ppr(ppr, report);
    else if (name == "partition") run_partition(part, report);
    else if (name == "batches") run_batches(bat, report);
    else if (name == "schedule") run_schedule(sch, report);
    else if (name == "train") run_train(tr, report);
    else if (name == "infer") run_infer(inf, report);
    else if (name == "verify") run_verify(ver, report);
    else if (name == "pipeline") run_pipeline(pl, report);
  } catch (const VerifyFailure& e) {
    std::cout.flush();
    std::cerr << "verify: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cout.flush();
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  report.kv("status", "ok");
  return 0;
}
