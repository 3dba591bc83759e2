// Copyright (c) 2026 The listalign Authors. All Rights Reserved.
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

#include "listalign/scorer.h"

#include <cmath>
#include <string>

#include "listalign/errors.h"
#include "listalign/rng.h"

namespace listalign {

namespace {

void check_input(const ScorerParams& p, std::span<const double> x) {
  if (x.size() != p.input_dim()) {
    throw DimensionError("feature length " + std::to_string(x.size()) +
                         " does not match scorer input " + std::to_string(p.input_dim()));
  }
}

}  // namespace

ScorerParams::ScorerParams(std::size_t input_dim, std::size_t hidden)
    : input_dim_(input_dim), hidden_(hidden) {
  if (input_dim == 0 || hidden == 0) throw DimensionError("scorer shapes must be positive");
  data_.assign(hidden * input_dim + 2 * hidden + 1 + 3 * input_dim + 3, 0.0);
}

ScorerParams ScorerParams::initialize(std::size_t input_dim, std::size_t hidden,
                                      std::uint64_t seed, double score_bias) {
  ScorerParams p(input_dim, hidden);
  Rng rng(derive_seed(seed, "init"));
  // Inputs are two unit-norm halves, so |x| is about sqrt(2) whatever the dim.
  const double w1_std = 0.5;
  const double w2_std = 1.0 / std::sqrt(static_cast<double>(hidden));
  const double m_std = 0.1;
  for (double& w : p.w1()) w = w1_std * rng.normal();
  for (double& w : p.w2()) w = w2_std * rng.normal();
  for (double& w : p.mod_w()) w = m_std * rng.normal();
  p.b2() = score_bias;
  return p;
}

void ScorerParams::set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }

bool ScorerParams::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double score(const ScorerParams& p, std::span<const double> x,
             std::vector<double>& activations) {
  check_input(p, x);
  const std::size_t in = p.input_dim();
  const auto w1 = p.w1();
  const auto b1 = p.b1();
  const auto w2 = p.w2();
  activations.resize(p.hidden());
  double s = p.b2();
  for (std::size_t h = 0; h < p.hidden(); ++h) {
    const double* row = w1.data() + h * in;
    double pre = b1[h];
    for (std::size_t i = 0; i < in; ++i) pre += row[i] * x[i];
    activations[h] = std::tanh(pre);
    s += w2[h] * activations[h];
  }
  return s;
}

double score(const ScorerParams& p, std::span<const double> x) {
  std::vector<double> activations;
  return score(p, x, activations);
}

void backprop_score(const ScorerParams& p, std::span<const double> x,
                    std::span<const double> activations, double dscore,
                    ScorerParams& grad) {
  check_input(p, x);
  const std::size_t in = p.input_dim();
  const auto w2 = p.w2();
  auto gw1 = grad.w1();
  auto gb1 = grad.b1();
  auto gw2 = grad.w2();
  grad.b2() += dscore;
  for (std::size_t h = 0; h < p.hidden(); ++h) {
    const double a = activations[h];
    gw2[h] += dscore * a;
    const double dpre = dscore * w2[h] * (1.0 - a * a);
    gb1[h] += dpre;
    double* row = gw1.data() + h * in;
    for (std::size_t i = 0; i < in; ++i) {
      if (x[i] != 0.0) row[i] += dpre * x[i];
    }
  }
}

std::array<double, 3> modality_logits(const ScorerParams& p, std::span<const double> x) {
  check_input(p, x);
  const std::size_t in = p.input_dim();
  const auto mw = p.mod_w();
  const auto mb = p.mod_b();
  std::array<double, 3> logits{};
  for (std::size_t k = 0; k < 3; ++k) {
    double z = mb[k];
    for (std::size_t i = 0; i < in; ++i) z += mw[k * in + i] * x[i];
    logits[k] = z;
  }
  return logits;
}

void backprop_modality(std::span<const double> x, std::span<const double> dlogits,
                       ScorerParams& grad) {
  const std::size_t in = grad.input_dim();
  if (x.size() != in || dlogits.size() != 3) throw DimensionError("modality backprop shape");
  auto gw = grad.mod_w();
  auto gb = grad.mod_b();
  for (std::size_t k = 0; k < 3; ++k) {
    gb[k] += dlogits[k];
    for (std::size_t i = 0; i < in; ++i) gw[k * in + i] += dlogits[k] * x[i];
  }
}

}  // namespace listalign
