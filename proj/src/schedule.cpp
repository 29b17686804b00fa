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

#include "ibmb/schedule.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "ibmb/error.hpp"

namespace ibmb {

DistanceMatrix::DistanceMatrix(MatrixXd values) : values_(std::move(values)) {
  if (values_.rows() != values_.cols()) throw ShapeError("distance matrix must be square");
  if (!values_.allFinite()) throw DomainError("distance matrix has non-finite entries");
  for (Eigen::Index a = 0; a < values_.rows(); ++a) {
    if (values_(a, a) != 0.0) throw DomainError("distance matrix diagonal must be zero");
    for (Eigen::Index b = 0; b < a; ++b) {
      if (values_(a, b) < 0.0 || std::abs(values_(a, b) - values_(b, a)) > 1e-12) {
        throw DomainError("distance matrix must be symmetric and nonnegative");
      }
    }
  }
}

double DistanceMatrix::mean_off_diagonal() const {
  const auto b = values_.rows();
  if (b < 2) return 0.0;
  return values_.sum() / static_cast<double>(b * (b - 1));
}

VectorXd label_distribution(const Batch& batch, const NodeLabels& labels, double smoothing) {
  if (!(smoothing >= 0.0) || !std::isfinite(smoothing)) throw ArgumentError("smoothing must be finite and >= 0");
  if (labels.num_classes <= 0) throw ArgumentError("labels declare no classes");
  VectorXd counts = VectorXd::Zero(labels.num_classes);
  for (NodeId u : batch.output_nodes()) {
    if (u >= labels.size()) throw RangeError("output node has no label entry");
    if (labels.is_labeled(u)) counts[labels.labels[u]] += 1.0;
  }
  const double total = counts.sum() + smoothing * static_cast<double>(labels.num_classes);
  if (total <= 0.0) throw DegenerateInputError("batch has no labeled outputs and smoothing is 0");
  return (counts.array() + smoothing).matrix() / total;
}

double kl_divergence(const VectorXd& p, const VectorXd& q) {
  if (p.size() != q.size()) throw ShapeError("distributions differ in length");
  double kl = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!(p[i] > 0.0) || !(q[i] > 0.0)) {
      throw DomainError("zero probability in KL divergence; apply label smoothing upstream");
    }
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return kl;
}

DistanceMatrix pairwise_distances(const std::vector<VectorXd>& distributions) {
  const auto b = static_cast<Eigen::Index>(distributions.size());
  MatrixXd d = MatrixXd::Zero(b, b);
  for (Eigen::Index a = 0; a < b; ++a) {
    if (distributions[a].size() != distributions[0].size()) throw ShapeError("distributions differ in length");
    for (Eigen::Index c = a + 1; c < b; ++c) {
      const double v = kl_divergence(distributions[a], distributions[c]) + kl_divergence(distributions[c], distributions[a]);
      d(a, c) = v;
      d(c, a) = v;
    }
  }
  // A lone zero entry in a single distribution would otherwise slip through.
  if (b == 1) kl_divergence(distributions[0], distributions[0]);
  return DistanceMatrix(std::move(d));
}

std::string to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::fixed_cycle: return "fixed_cycle";
    case ScheduleKind::weighted_sampling: return "weighted_sampling";
    case ScheduleKind::input_order: return "input_order";
  }
  return "input_order";
}

ScheduleKind parse_schedule_kind(const std::string& text) {
  if (text == "fixed_cycle" || text == "cycle" || text == "tsp") return ScheduleKind::fixed_cycle;
  if (text == "weighted_sampling" || text == "weighted") return ScheduleKind::weighted_sampling;
  if (text == "input_order" || text == "input") return ScheduleKind::input_order;
  throw ArgumentError("unknown schedule kind: " + text);
}

void Schedule::validate(std::optional<std::size_t> num_batches) const {
  const std::size_t n = num_batches.value_or(order.size());
  if (order.size() != n) throw ArgumentError("schedule length differs from batch count");
  std::vector<char> seen(n, 0);
  for (std::size_t id : order) {
    if (id >= n || seen[id]) throw ArgumentError("schedule is not a permutation of the batch ids");
    seen[id] = 1;
  }
}

double cycle_objective(const DistanceMatrix& d, const std::vector<std::size_t>& cycle) {
  double total = 0.0;
  for (std::size_t i = 0; i < cycle.size(); ++i) total += d(cycle[i], cycle[(i + 1) % cycle.size()]);
  return total;
}

Schedule max_tsp_anneal(const DistanceMatrix& d, const AnnealConfig& cfg) {
  const std::size_t b = d.size();
  if (b < 2) throw ArgumentError("annealing needs at least two batches");
  if (!(cfg.cooling > 0.0 && cfg.cooling <= 1.0)) throw ArgumentError("cooling must lie in (0, 1]");
  const std::size_t iters = cfg.iters > 0 ? cfg.iters : 20000 * b;
  double temperature = cfg.t0.value_or(d.mean_off_diagonal());
  if (!(temperature >= 0.0)) throw ArgumentError("t0 must be >= 0");

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pos(0, b - 1);

  std::vector<std::size_t> cycle(b);
  std::iota(cycle.begin(), cycle.end(), 0);
  double current = cycle_objective(d, cycle);
  std::vector<std::size_t> best = cycle;
  double best_value = current;

  auto edge = [&](std::size_t i) { return d(cycle[i % b], cycle[(i + 1) % b]); };

  for (std::size_t it = 0; it < iters && b > 3; ++it) {
    std::size_t i = pos(rng);
    std::size_t j = pos(rng);
    if (i == j) continue;
    if (i > j) std::swap(i, j);
    const bool two_opt = unit(rng) < 0.5;
    double delta = 0.0;
    if (two_opt) {
      if (j - i + 1 >= b - 1) continue;  // reverses (almost) the whole cycle: no change
      const std::size_t prev = (i + b - 1) % b;
      const std::size_t next = (j + 1) % b;
      delta = d(cycle[prev], cycle[j]) + d(cycle[i], cycle[next]) - d(cycle[prev], cycle[i]) - d(cycle[j], cycle[next]);
    } else {
      // Edges touching positions i and j, each counted once by its left end.
      std::size_t left[4] = {(i + b - 1) % b, i, (j + b - 1) % b, j};
      std::sort(left, left + 4);
      const auto end = std::unique(left, left + 4);
      double before = 0.0;
      for (auto* p = left; p != end; ++p) before += edge(*p);
      std::swap(cycle[i], cycle[j]);
      double after = 0.0;
      for (auto* p = left; p != end; ++p) after += edge(*p);
      std::swap(cycle[i], cycle[j]);
      delta = after - before;
    }
    const bool accept = delta >= 0.0 || (temperature > 0.0 && unit(rng) < std::exp(delta / temperature));
    if (accept) {
      if (two_opt) {
        std::reverse(cycle.begin() + static_cast<std::ptrdiff_t>(i), cycle.begin() + static_cast<std::ptrdiff_t>(j) + 1);
      } else {
        std::swap(cycle[i], cycle[j]);
      }
      current += delta;
      if (current > best_value) {
        // Recompute to keep accumulated rounding out of the comparison.
        current = cycle_objective(d, cycle);
        if (current > best_value) {
          best_value = current;
          best = cycle;
        }
      }
    }
    temperature *= cfg.cooling;
  }

  std::rotate(best.begin(), std::find(best.begin(), best.end(), std::size_t{0}), best.end());
  return Schedule{ScheduleKind::fixed_cycle, std::move(best), cfg.seed};
}

std::vector<std::size_t> weighted_epoch_order(const DistanceMatrix& d, std::size_t start, std::uint64_t seed) {
  const std::size_t b = d.size();
  if (b < 1) throw ArgumentError("no batches to schedule");
  if (start >= b) throw RangeError("start batch out of range");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<std::size_t> order{start};
  std::vector<std::size_t> remaining;
  for (std::size_t c = 0; c < b; ++c) {
    if (c != start) remaining.push_back(c);
  }
  std::size_t current = start;
  while (!remaining.empty()) {
    double total = 0.0;
    for (std::size_t c : remaining) total += d(current, c);
    std::size_t pick = remaining.size() - 1;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < remaining.size(); ++i) {
        acc += d(current, remaining[i]);
        if (target < acc) {
          pick = i;
          break;
        }
      }
      // Rounding can leave target == total; fall back to the last positive weight.
      while (d(current, remaining[pick]) == 0.0 && pick > 0) --pick;
    } else {
      std::uniform_int_distribution<std::size_t> uniform(0, remaining.size() - 1);
      pick = uniform(rng);
    }
    current = remaining[pick];
    order.push_back(current);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return order;
}

EpochScheduler::EpochScheduler(Schedule schedule, std::optional<DistanceMatrix> distances)
    : schedule_(std::move(schedule)), distances_(std::move(distances)), num_batches_(schedule_.order.size()) {
  schedule_.validate();
  if (schedule_.kind == ScheduleKind::weighted_sampling) {
    if (!distances_) throw ArgumentError("weighted sampling needs a distance matrix");
    if (distances_->size() != num_batches_) throw ArgumentError("distance matrix size differs from batch count");
  }
}

std::vector<std::size_t> EpochScheduler::order_for_epoch(std::size_t epoch) const {
  switch (schedule_.kind) {
    case ScheduleKind::fixed_cycle:
      return schedule_.order;
    case ScheduleKind::weighted_sampling: {
      if (num_batches_ == 0) return {};
      const std::uint64_t epoch_seed = schedule_.seed + epoch;
      std::mt19937_64 rng(epoch_seed ^ 0x9e3779b97f4a7c15ULL);
      std::uniform_int_distribution<std::size_t> start(0, num_batches_ - 1);
      return weighted_epoch_order(*distances_, start(rng), epoch_seed);
    }
    case ScheduleKind::input_order:
      break;
  }
  std::vector<std::size_t> order(num_batches_);
  std::iota(order.begin(), order.end(), 0);
  return order;
}

void write_schedule(std::ostream& out, const Schedule& s) {
  out << "# ibmb-schedule v1 kind=" << to_string(s.kind) << " seed=" << s.seed << '\n';
  for (std::size_t id : s.order) out << id << '\n';
}

Schedule read_schedule(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty schedule file");
  const std::string prefix = "# ibmb-schedule v";
  if (line.rfind(prefix, 0) != 0) throw FormatError("missing schedule header");
  Schedule s;
  std::istringstream header(line.substr(prefix.size()));
  unsigned version = 0;
  if (!(header >> version)) throw FormatError("malformed schedule header");
  if (version != 1) throw VersionError("schedule: unsupported version " + std::to_string(version));
  std::string field;
  bool have_kind = false;
  bool have_seed = false;
  while (header >> field) {
    if (field.rfind("kind=", 0) == 0) {
      s.kind = parse_schedule_kind(field.substr(5));
      have_kind = true;
    } else if (field.rfind("seed=", 0) == 0) {
      const auto digits = field.substr(5);
      const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), s.seed);
      if (ec != std::errc() || ptr != digits.data() + digits.size()) throw FormatError("malformed seed");
      have_seed = true;
    }
  }
  if (!have_kind || !have_seed) throw FormatError("schedule header lacks kind= or seed=");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    std::size_t id = 0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), id);
    if (ec != std::errc() || ptr != line.data() + line.size()) throw ParseError(line_no, "expected a batch id");
    s.order.push_back(id);
  }
  s.validate();
  return s;
}

}  // namespace ibmb
