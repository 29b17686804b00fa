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

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <vector>

#include "ibmb/batch.hpp"
#include "ibmb/error.hpp"
#include "ibmb/graph.hpp"
#include "ibmb/ppr.hpp"
#include "ibmb/schedule.hpp"

// Reference GCN: H_{l+1} = act(A_hat H_l W_l) with no activation after the
// last layer, no biases, no dropout. A_hat is given by the edge weights of
// the graph the model runs on (global normalization coefficients for
// batches). All routines are templated on the scalar type.

namespace ibmb {

enum class Activation : std::uint8_t { relu = 0, identity = 1 };

template <typename Scalar = double>
struct GcnModel {
  std::vector<MatrixX<Scalar>> layers;
  Activation activation = Activation::relu;
  NormMode aggregation = NormMode::symmetric;

  std::size_t num_layers() const { return layers.size(); }
  Eigen::Index input_dim() const { return layers.front().rows(); }
  Eigen::Index output_dim() const { return layers.back().cols(); }

  void validate() const {
    if (layers.empty()) throw ShapeError("model has no layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      if (l > 0 && layers[l].rows() != layers[l - 1].cols()) throw ShapeError("consecutive layer dims do not match");
      if (!layers[l].allFinite()) throw DomainError("model weights must be finite");
    }
  }

  /** Glorot-uniform initialization for dims[0] -> dims[1] -> ... -> dims.back(). */
  static GcnModel random(const std::vector<std::size_t>& dims, Activation activation, NormMode aggregation,
                         std::uint64_t seed) {
    if (dims.size() < 2) throw ShapeError("need at least input and output dims");
    std::mt19937_64 rng(seed);
    GcnModel m;
    m.activation = activation;
    m.aggregation = aggregation;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      const double limit = std::sqrt(6.0 / static_cast<double>(dims[l] + dims[l + 1]));
      std::uniform_real_distribution<double> dist(-limit, limit);
      MatrixX<Scalar> w(static_cast<Eigen::Index>(dims[l]), static_cast<Eigen::Index>(dims[l + 1]));
      for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = static_cast<Scalar>(dist(rng));
      m.layers.push_back(std::move(w));
    }
    return m;
  }

  template <typename Other>
  GcnModel<Other> cast() const {
    GcnModel<Other> m;
    m.activation = activation;
    m.aggregation = aggregation;
    for (const auto& w : layers) m.layers.push_back(w.template cast<Other>());
    return m;
  }

  friend bool operator==(const GcnModel& a, const GcnModel& b) {
    if (a.activation != b.activation || a.aggregation != b.aggregation || a.layers.size() != b.layers.size()) return false;
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
      if (a.layers[l].rows() != b.layers[l].rows() || a.layers[l].cols() != b.layers[l].cols()) return false;
      if (a.layers[l] != b.layers[l]) return false;
    }
    return true;
  }
};

template <typename Scalar>
using Gradients = std::vector<MatrixX<Scalar>>;

/** Graph carrying the model's normalization coefficients as edge weights. */
inline CsrGraph normalized_graph(const CsrGraph& g, NormMode mode) {
  return g.with_weights(normalization_weights(g, mode));
}

namespace detail {

inline void require_weights(const CsrGraph& g) {
  if (!g.has_weights()) throw PreconditionError("GCN propagation needs an edge-weighted graph");
}

/** Rows [begin, end) of A_hat H. */
template <typename Scalar>
MatrixX<Scalar> propagate_rows(const CsrGraph& g, const MatrixX<Scalar>& h, NodeId begin, NodeId end) {
  MatrixX<Scalar> out = MatrixX<Scalar>::Zero(end - begin, h.cols());
  for (NodeId u = begin; u < end; ++u) {
    const auto nbrs = g.neighbors(u);
    const auto w = g.weights(u);
    for (std::size_t e = 0; e < nbrs.size(); ++e) {
      out.row(u - begin) += static_cast<Scalar>(w[e]) * h.row(nbrs[e]);
    }
  }
  return out;
}

template <typename Scalar>
MatrixX<Scalar> propagate(const CsrGraph& g, const MatrixX<Scalar>& h) {
  return propagate_rows(g, h, 0, static_cast<NodeId>(g.num_nodes()));
}

/** A_hat^T G. */
template <typename Scalar>
MatrixX<Scalar> propagate_transpose(const CsrGraph& g, const MatrixX<Scalar>& grad) {
  MatrixX<Scalar> out = MatrixX<Scalar>::Zero(grad.rows(), grad.cols());
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    const auto nbrs = g.neighbors(u);
    const auto w = g.weights(u);
    for (std::size_t e = 0; e < nbrs.size(); ++e) {
      out.row(nbrs[e]) += static_cast<Scalar>(w[e]) * grad.row(u);
    }
  }
  return out;
}

template <typename Scalar>
void check_input(const GcnModel<Scalar>& model, const CsrGraph& g, Eigen::Index rows, Eigen::Index cols) {
  model.validate();
  require_weights(g);
  if (rows != static_cast<Eigen::Index>(g.num_nodes())) throw ShapeError("feature rows differ from node count");
  if (cols != model.input_dim()) throw ShapeError("feature width differs from model input dim");
}

template <typename Scalar>
struct ForwardCache {
  std::vector<MatrixX<Scalar>> aggregated;  // A_hat Z_l
  std::vector<MatrixX<Scalar>> pre;         // A_hat Z_l W_l
};

template <typename Scalar>
MatrixX<Scalar> forward_cached(const GcnModel<Scalar>& model, const CsrGraph& g, const MatrixX<Scalar>& x,
                               ForwardCache<Scalar>* cache) {
  MatrixX<Scalar> h = x;
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    MatrixX<Scalar> agg = propagate(g, h);
    MatrixX<Scalar> pre = agg * model.layers[l];
    const bool last = l + 1 == model.num_layers();
    h = (last || model.activation == Activation::identity) ? pre : MatrixX<Scalar>(pre.cwiseMax(Scalar(0)));
    if (cache) {
      cache->aggregated.push_back(std::move(agg));
      cache->pre.push_back(std::move(pre));
    }
  }
  return h;
}

template <typename Scalar>
MatrixX<Scalar> gather_rows(const FeatureMatrix& x, const NodeSet& nodes) {
  MatrixX<Scalar> out(static_cast<Eigen::Index>(nodes.size()), x.cols());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] >= x.rows()) throw ShapeError("batch node beyond feature rows");
    out.row(static_cast<Eigen::Index>(i)) = x.row(nodes[i]).template cast<Scalar>();
  }
  return out;
}

}  // namespace detail

/** Logits for every node of a weighted graph. */
template <typename Scalar>
MatrixX<Scalar> gcn_forward(const GcnModel<Scalar>& model, const CsrGraph& g, const FeatureMatrix& x) {
  detail::check_input(model, g, x.rows(), x.cols());
  return detail::forward_cached<Scalar>(model, g, x.template cast<Scalar>(), nullptr);
}

/** Logits of the batch's output nodes, in output_mask order. x holds global features. */
template <typename Scalar>
MatrixX<Scalar> gcn_forward(const GcnModel<Scalar>& model, const Batch& batch, const FeatureMatrix& x) {
  if (x.cols() != model.input_dim()) throw ShapeError("feature width differs from model input dim");
  const MatrixX<Scalar> local_x = detail::gather_rows<Scalar>(x, batch.nodes);
  detail::check_input(model, batch.local_graph, local_x.rows(), local_x.cols());
  const MatrixX<Scalar> h = detail::forward_cached<Scalar>(model, batch.local_graph, local_x, nullptr);
  MatrixX<Scalar> out(static_cast<Eigen::Index>(batch.output_mask.size()), h.cols());
  for (std::size_t i = 0; i < batch.output_mask.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = h.row(batch.output_mask[i]);
  return out;
}

template <typename Scalar>
struct LossAndGrad {
  double loss = 0.0;
  std::size_t count = 0;  // labeled output rows
  Gradients<Scalar> grads;
};

/**
 * Mean softmax cross-entropy over the labeled rows among output_rows, and
 * its gradient w.r.t. every layer. targets[i] is the class of
 * output_rows[i] or NodeLabels::kUnlabeled to skip it.
 */
template <typename Scalar>
LossAndGrad<Scalar> gcn_backward(const GcnModel<Scalar>& model, const CsrGraph& g, const MatrixX<Scalar>& x,
                                 const std::vector<std::uint32_t>& output_rows, const std::vector<std::int32_t>& targets) {
  detail::check_input(model, g, x.rows(), x.cols());
  if (output_rows.size() != targets.size()) throw ShapeError("one target per output row required");
  std::size_t labeled = 0;
  for (std::int32_t t : targets) {
    if (t == NodeLabels::kUnlabeled) continue;
    if (t < 0 || t >= model.output_dim()) throw RangeError("target class outside model output");
    ++labeled;
  }
  if (labeled == 0) throw DegenerateInputError("no labeled output rows");

  detail::ForwardCache<Scalar> cache;
  const MatrixX<Scalar> logits = detail::forward_cached(model, g, x, &cache);

  LossAndGrad<Scalar> out;
  out.count = labeled;
  MatrixX<Scalar> grad = MatrixX<Scalar>::Zero(logits.rows(), logits.cols());
  const Scalar inv_m = Scalar(1) / static_cast<Scalar>(labeled);
  for (std::size_t i = 0; i < output_rows.size(); ++i) {
    if (targets[i] == NodeLabels::kUnlabeled) continue;
    const auto r = static_cast<Eigen::Index>(output_rows[i]);
    if (r >= logits.rows()) throw RangeError("output row out of range");
    const Scalar max_logit = logits.row(r).maxCoeff();
    const auto shifted = (logits.row(r).array() - max_logit).eval();
    const Scalar log_norm = std::log(shifted.exp().sum());
    out.loss += static_cast<double>(log_norm - shifted(targets[i]));
    grad.row(r) += inv_m * (shifted - log_norm).exp().matrix();
    grad(r, targets[i]) -= inv_m;
  }
  out.loss /= static_cast<double>(labeled);

  out.grads.resize(model.num_layers());
  for (std::size_t l = model.num_layers(); l-- > 0;) {
    out.grads[l] = cache.aggregated[l].transpose() * grad;
    if (l == 0) break;
    MatrixX<Scalar> back = detail::propagate_transpose(g, MatrixX<Scalar>(grad * model.layers[l].transpose()));
    if (model.activation == Activation::relu) {
      back = (cache.pre[l - 1].array() > Scalar(0)).select(back, Scalar(0));
    }
    grad = std::move(back);
  }
  return out;
}

/** gcn_backward on a batch; targets are read from labels at the output nodes. */
template <typename Scalar>
LossAndGrad<Scalar> gcn_backward(const GcnModel<Scalar>& model, const Batch& batch, const FeatureMatrix& x,
                                 const NodeLabels& labels) {
  std::vector<std::int32_t> targets;
  targets.reserve(batch.output_mask.size());
  for (std::uint32_t i : batch.output_mask) {
    const NodeId v = batch.nodes[i];
    if (v >= labels.size()) throw RangeError("output node has no label entry");
    targets.push_back(labels.labels[v]);
  }
  return gcn_backward(model, batch.local_graph, detail::gather_rows<Scalar>(x, batch.nodes), batch.output_mask, targets);
}

/** Adam with bias correction. */
template <typename Scalar>
struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step_count = 0;
  Gradients<Scalar> first_moment;
  Gradients<Scalar> second_moment;

  void step(GcnModel<Scalar>& model, const Gradients<Scalar>& grads) {
    if (grads.size() != model.num_layers()) throw ShapeError("one gradient per layer required");
    if (first_moment.empty()) {
      for (const auto& w : model.layers) {
        first_moment.push_back(MatrixX<Scalar>::Zero(w.rows(), w.cols()));
        second_moment.push_back(MatrixX<Scalar>::Zero(w.rows(), w.cols()));
      }
    }
    ++step_count;
    const auto t = static_cast<double>(step_count);
    const auto c1 = static_cast<Scalar>(1.0 - std::pow(beta1, t));
    const auto c2 = static_cast<Scalar>(1.0 - std::pow(beta2, t));
    const auto b1 = static_cast<Scalar>(beta1);
    const auto b2 = static_cast<Scalar>(beta2);
    for (std::size_t l = 0; l < grads.size(); ++l) {
      if (grads[l].rows() != model.layers[l].rows() || grads[l].cols() != model.layers[l].cols()) {
        throw ShapeError("gradient shape differs from layer shape");
      }
      first_moment[l] = b1 * first_moment[l] + (Scalar(1) - b1) * grads[l];
      second_moment[l] = b2 * second_moment[l] + (Scalar(1) - b2) * grads[l].cwiseAbs2();
      const auto m_hat = (first_moment[l] / c1).array();
      const auto v_hat = (second_moment[l] / c2).array();
      model.layers[l].array() -= static_cast<Scalar>(learning_rate) * m_hat / (v_hat.sqrt() + static_cast<Scalar>(epsilon));
    }
  }
};

struct TrainConfig {
  std::size_t epochs = 1;
  /** Batches per optimizer step; the remainder is flushed at epoch end. */
  std::size_t grad_accum = 1;
  /** Index of the first epoch; lets a run continue where an earlier call stopped. */
  std::size_t first_epoch = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  std::optional<double> val_accuracy;
};

struct EvalResult {
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

/** Row-wise argmax accuracy against labeled targets. */
template <typename Scalar>
EvalResult accuracy_of(const MatrixX<Scalar>& logits, const NodeSet& nodes, const NodeLabels& labels) {
  EvalResult r;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!labels.is_labeled(nodes[i])) continue;
    Eigen::Index arg = 0;
    logits.row(static_cast<Eigen::Index>(i)).maxCoeff(&arg);
    r.correct += arg == labels.labels[nodes[i]];
    ++r.total;
  }
  return r;
}

/** Accuracy over the labeled outputs of every batch (inference through the batch pipeline). */
template <typename Scalar>
EvalResult evaluate(const GcnModel<Scalar>& model, const std::vector<Batch>& batches, const FeatureMatrix& x,
                    const NodeLabels& labels) {
  EvalResult total;
  for (const auto& b : batches) {
    const auto r = accuracy_of(gcn_forward(model, b, x), b.output_nodes(), labels);
    total.correct += r.correct;
    total.total += r.total;
  }
  return total;
}

/**
 * Mini-batch training over fixed batches. Each epoch visits batches in the
 * scheduler's order; gradients of grad_accum consecutive batches are
 * averaged before one Adam step. Batches without labeled outputs are
 * skipped. Records the count-weighted mean training loss per epoch and,
 * when validation batches are given, their accuracy after the epoch.
 */
template <typename Scalar>
std::vector<EpochRecord> train(GcnModel<Scalar>& model, const std::vector<Batch>& batches, const EpochScheduler& scheduler,
                               AdamState<Scalar>& adam, const FeatureMatrix& x, const NodeLabels& labels,
                               const TrainConfig& cfg, const std::vector<Batch>* validation = nullptr) {
  if (batches.empty()) throw ArgumentError("no batches to train on");
  if (scheduler.num_batches() != batches.size()) throw ArgumentError("schedule does not cover the batch ids");
  if (cfg.grad_accum < 1) throw ArgumentError("grad_accum must be >= 1");
  model.validate();

  std::vector<EpochRecord> trace;
  for (std::size_t epoch = cfg.first_epoch; epoch < cfg.first_epoch + cfg.epochs; ++epoch) {
    Gradients<Scalar> acc;
    std::size_t pending = 0;
    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    auto flush = [&] {
      if (pending == 0) return;
      for (auto& g : acc) g /= static_cast<Scalar>(pending);
      adam.step(model, acc);
      acc.clear();
      pending = 0;
    };
    for (std::size_t id : scheduler.order_for_epoch(epoch)) {
      const Batch& b = batches.at(id);
      bool any_label = false;
      for (std::uint32_t i : b.output_mask) any_label |= labels.is_labeled(b.nodes[i]);
      if (!any_label) continue;
      auto lg = gcn_backward(model, b, x, labels);
      loss_sum += lg.loss * static_cast<double>(lg.count);
      loss_count += lg.count;
      if (acc.empty()) {
        acc = std::move(lg.grads);
      } else {
        for (std::size_t l = 0; l < acc.size(); ++l) acc[l] += lg.grads[l];
      }
      if (++pending == cfg.grad_accum) flush();
    }
    flush();
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;
    if (validation) rec.val_accuracy = evaluate(model, *validation, x, labels).accuracy();
    trace.push_back(rec);
  }
  return trace;
}

/**
 * Full-graph inference with every layer computed in num_chunks row blocks.
 * Each row is computed with the same arithmetic as the unchunked forward.
 */
template <typename Scalar>
MatrixX<Scalar> full_inference_chunked(const GcnModel<Scalar>& model, const CsrGraph& g, const FeatureMatrix& x,
                                       std::size_t num_chunks) {
  if (num_chunks < 1) throw ArgumentError("num_chunks must be >= 1");
  detail::check_input(model, g, x.rows(), x.cols());
  const auto n = static_cast<NodeId>(g.num_nodes());
  const std::size_t chunk = (n + num_chunks - 1) / num_chunks;
  MatrixX<Scalar> h = x.template cast<Scalar>();
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    const bool last = l + 1 == model.num_layers();
    MatrixX<Scalar> next(h.rows(), model.layers[l].cols());
    for (std::size_t begin = 0; begin < n; begin += std::max<std::size_t>(chunk, 1)) {
      const auto end = static_cast<NodeId>(std::min<std::size_t>(n, begin + chunk));
      MatrixX<Scalar> pre = detail::propagate_rows(g, h, static_cast<NodeId>(begin), end) * model.layers[l];
      if (!last && model.activation == Activation::relu) pre = pre.cwiseMax(Scalar(0));
      next.middleRows(static_cast<Eigen::Index>(begin), pre.rows()) = pre;
    }
    h = std::move(next);
  }
  return h;
}

/**
 * Influence of input node v on output node u: sum over output dims i and
 * feature dims j of |d h_ui / d X_vj|, by central finite differences.
 * The forward pass runs on the subgraph induced by u's L-hop ball (with the
 * global weights), which reproduces u's output exactly; v outside the ball
 * has influence 0.
 */
template <typename Scalar>
double influence_fd(const GcnModel<Scalar>& model, const CsrGraph& g, const FeatureMatrix& x, NodeId u, NodeId v,
                    double step = 1e-5);

/** influence_fd for every v in u's L-hop ball, as a score vector (zeros omitted). */
template <typename Scalar>
ScoreVec influence_fd_row(const GcnModel<Scalar>& model, const CsrGraph& g, const FeatureMatrix& x, NodeId u,
                          double step = 1e-5);

namespace detail {

template <typename Scalar>
struct LocalView {
  Batch ball;
  MatrixX<Scalar> x;
  std::int64_t local_u = -1;
};

template <typename Scalar>
LocalView<Scalar> local_view(const GcnModel<Scalar>& model, const CsrGraph& g, const FeatureMatrix& x, NodeId u) {
  check_input(model, g, x.rows(), x.cols());
  if (u >= g.num_nodes()) throw RangeError("output node out of range");
  LocalView<Scalar> view;
  view.ball = induce_subgraph(g, k_hop_ball(g, u, model.num_layers()), NodeSet{u});
  view.x = gather_rows<Scalar>(x, view.ball.nodes);
  view.local_u = view.ball.output_mask.front();
  return view;
}

template <typename Scalar>
double local_influence(const GcnModel<Scalar>& model, LocalView<Scalar>& view, Eigen::Index local_v, double step) {
  double total = 0.0;
  const auto h = static_cast<Scalar>(step);
  for (Eigen::Index j = 0; j < view.x.cols(); ++j) {
    const Scalar saved = view.x(local_v, j);
    view.x(local_v, j) = saved + h;
    const MatrixX<Scalar> plus = forward_cached<Scalar>(model, view.ball.local_graph, view.x, nullptr);
    view.x(local_v, j) = saved - h;
    const MatrixX<Scalar> minus = forward_cached<Scalar>(model, view.ball.local_graph, view.x, nullptr);
    view.x(local_v, j) = saved;
    const auto diff = (plus.row(view.local_u) - minus.row(view.local_u)).template cast<double>();
    total += diff.cwiseAbs().sum() / (2.0 * step);
  }
  return total;
}

}  // namespace detail

template <typename Scalar>
double influence_fd(const GcnModel<Scalar>& model, const CsrGraph& g, const FeatureMatrix& x, NodeId u, NodeId v,
                    double step) {
  auto view = detail::local_view(model, g, x, u);
  const auto it = std::lower_bound(view.ball.nodes.begin(), view.ball.nodes.end(), v);
  if (it == view.ball.nodes.end() || *it != v) return 0.0;
  return detail::local_influence(model, view, it - view.ball.nodes.begin(), step);
}

template <typename Scalar>
ScoreVec influence_fd_row(const GcnModel<Scalar>& model, const CsrGraph& g, const FeatureMatrix& x, NodeId u,
                          double step) {
  auto view = detail::local_view(model, g, x, u);
  ScoreVec out;
  for (std::size_t i = 0; i < view.ball.nodes.size(); ++i) {
    const double value = detail::local_influence(model, view, static_cast<Eigen::Index>(i), step);
    if (value > 0.0) out.entries.push_back({view.ball.nodes[i], value});
  }
  return out;
}

/**
 * Closed-form influence for identity-activation, row-stochastic models:
 * I(v, u) = (P^L)_{uv} * sum_ij |(W_1 ... W_L)_{ji}|.
 * Throws ArgumentError for other model configurations.
 */
template <typename Scalar>
ScoreVec influence_linear_analytic(const CsrGraph& g, const GcnModel<Scalar>& model, NodeId u) {
  model.validate();
  if (model.activation != Activation::identity) throw ArgumentError("analytic influence requires identity activation");
  if (model.aggregation != NormMode::row_stochastic) throw ArgumentError("analytic influence requires row-stochastic aggregation");
  if (u >= g.num_nodes()) throw RangeError("output node out of range");
  MatrixXd product = model.layers.front().template cast<double>();
  for (std::size_t l = 1; l < model.num_layers(); ++l) product = product * model.layers[l].template cast<double>();
  const double scale = product.cwiseAbs().sum();
  VectorXd walk = VectorXd::Zero(static_cast<Eigen::Index>(g.num_nodes()));
  walk[u] = 1.0;
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    VectorXd next = VectorXd::Zero(walk.size());
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      if (walk[v] == 0.0) continue;
      const double share = walk[v] / static_cast<double>(g.degree(v));
      for (NodeId w : g.neighbors(v)) next[w] += share;
    }
    walk = std::move(next);
  }
  return ScoreVec::from_dense(scale * walk);
}

// ---------------------------------------------------------------------------
// Persistence (double precision on disk)

/** "IBMW" checkpoint. */
void write_model(std::ostream& out, const GcnModel<double>& model);
GcnModel<double> read_model(std::istream& in);

/** "IBML" logits: u64 N, u64 C, f64 row-major. */
void write_logits(std::ostream& out, const MatrixXd& logits);
MatrixXd read_logits(std::istream& in);

}  // namespace ibmb
