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

#include <istream>
#include <ostream>

#include "ibmb/binary_io.hpp"
#include "ibmb/gcn.hpp"

namespace ibmb {
namespace {

constexpr std::uint32_t kModelVersion = 1;
constexpr std::uint32_t kLogitsVersion = 1;

void write_matrix(std::ostream& out, const MatrixXd& m) {
  bin::write<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  bin::write<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  bin::write_array<double>(out, std::span<const double>(m.data(), static_cast<std::size_t>(m.size())));
}

MatrixXd read_matrix(std::istream& in) {
  const auto rows = bin::read<std::uint64_t>(in);
  const auto cols = bin::read<std::uint64_t>(in);
  if (cols != 0 && rows > (std::uint64_t{1} << 40) / cols) throw FormatError("matrix too large");
  const auto values = bin::read_array<double>(in, rows * cols);
  MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::copy(values.begin(), values.end(), m.data());
  return m;
}

}  // namespace

void write_model(std::ostream& out, const GcnModel<double>& model) {
  bin::write_magic(out, "IBMW");
  bin::write<std::uint32_t>(out, kModelVersion);
  bin::write<std::uint32_t>(out, static_cast<std::uint32_t>(model.num_layers()));
  for (const auto& w : model.layers) write_matrix(out, w);
  bin::write<std::uint8_t>(out, static_cast<std::uint8_t>(model.activation));
  bin::write<std::uint8_t>(out, static_cast<std::uint8_t>(model.aggregation));
}

GcnModel<double> read_model(std::istream& in) {
  bin::expect_magic(in, "IBMW");
  bin::expect_version(in, kModelVersion, "model");
  GcnModel<double> model;
  const auto num_layers = bin::read<std::uint32_t>(in);
  for (std::uint32_t l = 0; l < num_layers; ++l) model.layers.push_back(read_matrix(in));
  const auto act = bin::read<std::uint8_t>(in);
  const auto agg = bin::read<std::uint8_t>(in);
  if (act > 1 || agg > 1) throw FormatError("unknown activation or aggregation code");
  model.activation = static_cast<Activation>(act);
  model.aggregation = static_cast<NormMode>(agg);
  model.validate();
  return model;
}

void write_logits(std::ostream& out, const MatrixXd& logits) {
  bin::write_magic(out, "IBML");
  bin::write<std::uint32_t>(out, kLogitsVersion);
  write_matrix(out, logits);
}

MatrixXd read_logits(std::istream& in) {
  bin::expect_magic(in, "IBML");
  bin::expect_version(in, kLogitsVersion, "logits");
  return read_matrix(in);
}

}  // namespace ibmb
