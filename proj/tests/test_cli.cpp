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

// Drives the ibmb executable end to end. IBMB_CLI, IBMB_TEST_DATA and
// IBMB_CLI_WORK are set by the build.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <sys/wait.h>

#include "doctest.h"
#include "ibmb/batch.hpp"
#include "ibmb/gcn.hpp"
#include "ibmb/graph.hpp"

namespace fs = std::filesystem;
using namespace ibmb;

namespace {

const fs::path kWork = IBMB_CLI_WORK;
const fs::path kData = IBMB_TEST_DATA;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Run run_cli(const std::string& args) {
  const fs::path out = kWork / "stdout.txt";
  const fs::path err = kWork / "stderr.txt";
  const std::string cmd = "cd '" + kWork.string() + "' && '" IBMB_CLI "' " + args + " > '" + out.string() + "' 2> '" +
                          err.string() + "'";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::map<std::string, std::string> records(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find('=');
    if (eq != std::string::npos && line.find(' ') == std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

std::vector<std::string> lines_starting(const std::string& text, const std::string& prefix) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.rfind(prefix, 0) == 0) out.push_back(line);
  }
  return out;
}

struct Workspace {
  Workspace() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
    const auto gen = run_cli("gen-sbm --nodes 1000 --classes 4 --seed 3 --out sbm");
    REQUIRE(gen.code == 0);
  }
};

Workspace& workspace() {
  static Workspace w;
  return w;
}

template <typename T, typename F>
T read_file(const fs::path& p, F reader) {
  std::ifstream in(p, std::ios::binary);
  return reader(in);
}

}  // namespace

TEST_CASE("preprocess") {
  workspace();
  std::ofstream(kWork / "cycle.txt") << "0 1\n1 0\n";
  const auto r = run_cli("preprocess --input cycle.txt --out cycle.ibmg");
  REQUIRE(r.code == 0);
  CHECK(records(r.out)["E"] == "4");
  CHECK(records(r.out)["N"] == "2");

  REQUIRE(run_cli("preprocess --input " + (kData / "tiny_edges.txt").string() + " --out a.ibmg").code == 0);
  REQUIRE(run_cli("preprocess --input " + (kData / "tiny_edges.txt").string() + " --out b.ibmg").code == 0);
  CHECK(slurp(kWork / "a.ibmg") == slurp(kWork / "b.ibmg"));

  const auto missing = run_cli("preprocess --input nowhere.txt --out x.ibmg");
  CHECK(missing.code == 2);
  CHECK_FALSE(missing.err.empty());

  std::ofstream(kWork / "junk.txt") << "1 two\n";
  const auto junk = run_cli("preprocess --input junk.txt --out x.ibmg");
  CHECK(junk.code == 2);
  CHECK(junk.err.find("line 1") != std::string::npos);
  CHECK_FALSE(fs::exists(kWork / "x.ibmg"));
}

TEST_CASE("stats and usage errors") {
  workspace();
  const auto r = run_cli("stats --graph sbm/graph.ibmg");
  REQUIRE(r.code == 0);
  auto kv = records(r.out);
  CHECK(kv["N"] == "1000");
  CHECK(kv["symmetric"] == "1");
  CHECK(kv["self_loops"] == "1");
  CHECK(kv["weighted"] == "1");
  CHECK(run_cli("stats").code == 2);
  CHECK(run_cli("no-such-command").code == 2);
  CHECK(run_cli("partition --graph sbm/graph.ibmg --outputs sbm/train.nodes --method bogus --out p.txt").code == 2);
  CHECK(run_cli("--help").code == 0);
}

TEST_CASE("pipeline") {
  workspace();
  std::ofstream all(kWork / "all.nodes");
  for (int v = 0; v < 1000; ++v) all << v << '\n';
  all.close();

  const std::string common = "pipeline --graph sbm/graph.ibmg --outputs all.nodes --labels sbm/labels.txt --max-size 250";
  const std::string base = common + " --k 16";
  fs::remove_all(kWork / "p1");
  const auto first = run_cli(base + " --out p1");
  REQUIRE(first.code == 0);
  auto kv = records(first.out);
  const int batches = std::stoi(kv["num_batches"]);
  CHECK(batches >= 3);
  CHECK(batches <= 5);
  CHECK(std::stoul(kv["batch_nodes_max"]) <= 17 * 250);
  CHECK(kv["stage.ppr"] == "ran");

  SUBCASE("cached rerun") {
    const auto again = run_cli(base + " --out p1");
    REQUIRE(again.code == 0);
    auto kv2 = records(again.out);
    CHECK(kv2["stage.ppr"] == "cached");
    CHECK(kv2["stage.partition"] == "cached");
    CHECK(kv2["stage.batches"] == "cached");
    CHECK(kv2["stage.schedule"] == "cached");
  }
  SUBCASE("changed parameter reruns downstream stages only") {
    const auto changed = run_cli(common + " --k 8 --out p1");
    auto kv2 = records(changed.out);
    CHECK(kv2["stage.ppr"] == "cached");
    CHECK(kv2["stage.partition"] == "cached");
    CHECK(kv2["stage.batches"] == "ran");
    // Batches with smaller k carry a different hash, so the schedule reruns.
    CHECK(kv2["stage.schedule"] == "ran");
  }
  SUBCASE("deterministic bytes") {
    REQUIRE(run_cli(base + " --out p2").code == 0);
    REQUIRE(run_cli(base + " --out p3 --force").code == 0);
    for (int b = 0; b < batches; ++b) {
      char name[32];
      std::snprintf(name, sizeof name, "batch_%05d.ibmb", b);
      CHECK(slurp(kWork / "p2" / "batches" / name) == slurp(kWork / "p3" / "batches" / name));
    }
    CHECK(slurp(kWork / "p2" / "schedule.txt") == slurp(kWork / "p3" / "schedule.txt"));
    CHECK(slurp(kWork / "p2" / "partition.txt") == slurp(kWork / "p3" / "partition.txt"));
  }
  SUBCASE("stage failure names the stage") {
    const auto bad = run_cli("pipeline --graph sbm/graph.ibmg --outputs all.nodes --method metis --out p4");
    CHECK(bad.code == 2);
    CHECK(bad.err.find("stage partition") != std::string::npos);
  }
}

TEST_CASE("single batch over the reachable graph") {
  workspace();
  REQUIRE(run_cli("preprocess --input " + (kData / "tiny_edges.txt").string() + " --out tiny.ibmg").code == 0);
  const auto r = run_cli("pipeline --graph tiny.ibmg --outputs " + (kData / "tiny_nodes.txt").string() +
                      " --method metis --parts 1 --k 10 --schedule input_order --out tiny");
  REQUIRE(r.code == 0);
  CHECK(records(r.out)["num_batches"] == "1");
  const auto b = read_file<Batch>(kWork / "tiny" / "batches" / "batch_00000.ibmb", read_batch);
  const auto g = read_file<CsrGraph>(kWork / "tiny.ibmg", read_graph);
  CHECK(b.local_graph == g);
}

TEST_CASE("train and infer") {
  workspace();
  REQUIRE(run_cli("pipeline --graph sbm/graph.ibmg --outputs sbm/train.nodes --labels sbm/labels.txt --out tr").code == 0);
  REQUIRE(run_cli("pipeline --graph sbm/graph.ibmg --outputs sbm/val.nodes --schedule input_order --out va").code == 0);

  SUBCASE("zero learning rate gives a flat loss trace") {
    const auto r = run_cli("train --batches tr/batches --schedule tr/schedule.txt --features sbm/features.ibmf "
                        "--labels sbm/labels.txt --epochs 4 --lr 0 --no-config");
    REQUIRE(r.code == 0);
    const auto epochs = lines_starting(r.out, "epoch=");
    REQUIRE(epochs.size() == 4);
    const auto loss = [](const std::string& line) { return line.substr(line.find("train_loss=")); };
    for (const auto& e : epochs) CHECK(loss(e) == loss(epochs.front()));
  }
  SUBCASE("training improves validation accuracy") {
    const auto r = run_cli("train --batches tr/batches --schedule tr/schedule.txt --features sbm/features.ibmf "
                        "--labels sbm/labels.txt --val-batches va/batches --epochs 60 --lr 0.01 --model-out m.ibmw");
    REQUIRE(r.code == 0);
    CHECK(std::stod(records(r.out)["val_accuracy"]) > 0.6);
    const auto again = run_cli("train --batches tr/batches --schedule tr/schedule.txt --features sbm/features.ibmf "
                            "--labels sbm/labels.txt --val-batches va/batches --epochs 60 --lr 0.01 --model-out m2.ibmw");
    CHECK(slurp(kWork / "m.ibmw") == slurp(kWork / "m2.ibmw"));
  }
  SUBCASE("whole-graph batch matches chunked inference") {
    REQUIRE(run_cli("train --batches tr/batches --schedule tr/schedule.txt --features sbm/features.ibmf "
                 "--labels sbm/labels.txt --epochs 5 --model-out m.ibmw")
                .code == 0);
    std::ofstream all(kWork / "all.nodes");
    for (int v = 0; v < 1000; ++v) all << v << '\n';
    all.close();
    REQUIRE(run_cli("pipeline --graph sbm/graph.ibmg --outputs all.nodes --method metis --parts 1 --mode batchwise "
                 "--budget 1000 --schedule input_order --out whole")
                .code == 0);
    REQUIRE(run_cli("infer --model m.ibmw --features sbm/features.ibmf --batches whole/batches --out batch.ibml").code == 0);
    const auto chunked = run_cli("infer --model m.ibmw --features sbm/features.ibmf --graph sbm/graph.ibmg --chunks 7 "
                              "--out full.ibml --labels sbm/labels.txt --nodes sbm/test.nodes");
    REQUIRE(chunked.code == 0);
    CHECK(records(chunked.out)["evaluated"] == "800");
    const auto a = read_file<MatrixXd>(kWork / "batch.ibml", read_logits);
    const auto b = read_file<MatrixXd>(kWork / "full.ibml", read_logits);
    REQUIRE(a.rows() == 1000);
    REQUIRE(b.rows() == 1000);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("verify") {
  workspace();
  REQUIRE(run_cli("preprocess --input " + (kData / "tiny_edges.txt").string() + " --out tiny.ibmg").code == 0);
  REQUIRE(run_cli("pipeline --graph tiny.ibmg --outputs " + (kData / "tiny_nodes.txt").string() + " --labels " +
               (kData / "tiny_labels.txt").string() + " --max-size 4 --out tinyrun")
              .code == 0);
  const auto ok = run_cli("verify --graph tiny.ibmg --batches tinyrun/batches --partition tinyrun/partition.txt "
                       "--schedule tinyrun/schedule.txt");
  CHECK(ok.code == 0);
  CHECK(records(ok.out)["failed"] == "0");

  // Batches checked against a different graph are not induced subgraphs.
  const auto mismatch = run_cli("verify --artifacts-only --graph sbm/graph.ibmg --batches tinyrun/batches");
  CHECK(mismatch.code == 1);

  // A stale format version is reported as an artifact failure.
  std::string bytes = slurp(kWork / "tiny.ibmg");
  bytes[4] = 9;
  std::ofstream(kWork / "stale.ibmg", std::ios::binary) << bytes;
  const auto stale = run_cli("verify --artifacts-only --graph stale.ibmg");
  CHECK(stale.code == 1);
  CHECK(stale.out.find("version") != std::string::npos);
  CHECK(run_cli("stats --graph stale.ibmg").code == 2);
}
