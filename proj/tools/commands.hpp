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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cli_support.hpp"
#include "ibmb/graph.hpp"
#include "ibmb/ppr.hpp"

namespace ibmb::cli {

struct PprFlags {
  double alpha = 0.25;
  double epsilon = 2e-4;
  std::size_t power_iters = 50;

  PprConfig config() const { return {alpha, epsilon, power_iters, std::nullopt}; }
};

struct GenSbmArgs {
  SbmParams sbm;
  double train_fraction = 0.1;
  double val_fraction = 0.1;
  std::string norm = "symmetric";
  fs::path out;
};

struct PreprocessArgs {
  fs::path input;
  fs::path out;
  fs::path ids_out;
  std::optional<std::size_t> num_nodes;
  bool remap = false;
  std::string norm = "symmetric";
};

struct StatsArgs {
  fs::path graph;
};

struct PprArgs {
  fs::path graph;
  fs::path roots;
  fs::path out;
  PprFlags ppr;
};

struct PartitionArgs {
  fs::path graph;
  fs::path outputs;
  fs::path ppr_rows;
  fs::path out;
  std::string method = "distance";
  std::size_t max_size = 250;
  std::size_t parts = 0;
  double imbalance = 1.03;
  std::uint64_t seed = 0;
  PprFlags ppr;
};

struct BatchesArgs {
  fs::path graph;
  fs::path partition;
  fs::path ppr_rows;
  fs::path out;
  std::string mode = "nodewise";
  std::size_t k = 16;
  double budget_factor = 1.0;
  std::optional<std::size_t> budget;
  std::string renormalize = "none";
  PprFlags ppr;
};

struct ScheduleArgs {
  fs::path batches;
  fs::path labels;
  fs::path train_nodes;
  fs::path out;
  std::string kind = "fixed_cycle";
  std::uint64_t seed = 0;
  std::size_t anneal_iters = 0;
  std::optional<double> t0;
  double cooling = 0.999;
  double smoothing = 1e-6;
};

struct TrainArgs {
  fs::path batches;
  fs::path schedule;
  fs::path features;
  fs::path labels;
  fs::path train_nodes;
  fs::path val_batches;
  fs::path model_out;
  std::vector<std::size_t> hidden{32};
  std::string activation = "relu";
  std::string aggregation = "symmetric";
  std::size_t epochs = 200;
  double lr = 1e-3;
  std::size_t grad_accum = 1;
  std::uint64_t seed = 0;
  double smoothing = 1e-6;
};

struct InferArgs {
  fs::path model;
  fs::path features;
  fs::path graph;
  fs::path batches;
  fs::path out;
  fs::path labels;
  fs::path nodes;
  fs::path nodes_out;
  std::size_t chunks = 1;
};

struct VerifyArgs {
  fs::path graph;
  fs::path batches;
  fs::path partition;
  fs::path schedule;
  fs::path model;
  fs::path features;
  bool skip_builtin = false;
  std::uint64_t seed = 0;
};

struct PipelineArgs {
  fs::path graph;
  fs::path outputs;
  fs::path labels;
  fs::path train_nodes;
  fs::path out;
  std::string method = "distance";
  std::size_t max_size = 250;
  std::size_t parts = 0;
  double imbalance = 1.03;
  std::string mode = "nodewise";
  std::size_t k = 16;
  double budget_factor = 1.0;
  std::optional<std::size_t> budget;
  std::string renormalize = "none";
  std::string schedule = "fixed_cycle";
  std::size_t anneal_iters = 0;
  std::optional<double> t0;
  double cooling = 0.999;
  double smoothing = 1e-6;
  std::uint64_t seed = 0;
  bool force = false;
  PprFlags ppr;
};

void run_gen_sbm(const GenSbmArgs& a, Report& r);
void run_preprocess(const PreprocessArgs& a, Report& r);
void run_stats(const StatsArgs& a, Report& r);
void run_ppr(const PprArgs& a, Report& r);
void run_partition(const PartitionArgs& a, Report& r);
void run_batches(const BatchesArgs& a, Report& r);
void run_schedule(const ScheduleArgs& a, Report& r);
void run_train(const TrainArgs& a, Report& r);
void run_infer(const InferArgs& a, Report& r);
/** Throws VerifyFailure when any check fails. */
void run_verify(const VerifyArgs& a, Report& r);
void run_pipeline(const PipelineArgs& a, Report& r);

// Shared helpers.
PprRows load_ppr_rows(const fs::path& path);
void save_ppr_rows(const fs::path& path, const NodeSet& roots, const PprRows& rows);
NodeLabels masked_labels(const NodeLabels& labels, const NodeSet& keep);

}  // namespace ibmb::cli
