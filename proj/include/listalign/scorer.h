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

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace listalign {

/// Parameters of the scalar score head (one tanh hidden layer) and the linear
/// three-way modality head, stored contiguously so the optimizer can treat
/// them as one flat vector. Layout: W1 (hidden x input, row-major), b1,
/// w2, b2, M (3 x input, row-major), m.
class ScorerParams {
 public:
  ScorerParams() = default;
  ScorerParams(std::size_t input_dim, std::size_t hidden);

  /// W1, w2, M ~ N(0, scale^2 / fan_in); biases zero except b2 = score_bias.
  static ScorerParams initialize(std::size_t input_dim, std::size_t hidden,
                                 std::uint64_t seed, double score_bias = 0.0);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t hidden() const { return hidden_; }
  std::size_t size() const { return data_.size(); }

  std::span<double> w1() { return {data_.data(), hidden_ * input_dim_}; }
  std::span<const double> w1() const { return {data_.data(), hidden_ * input_dim_}; }
  std::span<double> b1() { return {data_.data() + b1_offset(), hidden_}; }
  std::span<const double> b1() const { return {data_.data() + b1_offset(), hidden_}; }
  std::span<double> w2() { return {data_.data() + w2_offset(), hidden_}; }
  std::span<const double> w2() const { return {data_.data() + w2_offset(), hidden_}; }
  double& b2() { return data_[b2_offset()]; }
  double b2() const { return data_[b2_offset()]; }
  std::span<double> mod_w() { return {data_.data() + mw_offset(), 3 * input_dim_}; }
  std::span<const double> mod_w() const { return {data_.data() + mw_offset(), 3 * input_dim_}; }
  std::span<double> mod_b() { return {data_.data() + mb_offset(), 3}; }
  std::span<const double> mod_b() const { return {data_.data() + mb_offset(), 3}; }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  void set_zero();
  bool all_finite() const;

  bool operator==(const ScorerParams&) const = default;

 private:
  std::size_t b1_offset() const { return hidden_ * input_dim_; }
  std::size_t w2_offset() const { return b1_offset() + hidden_; }
  std::size_t b2_offset() const { return w2_offset() + hidden_; }
  std::size_t mw_offset() const { return b2_offset() + 1; }
  std::size_t mb_offset() const { return mw_offset() + 3 * input_dim_; }

  std::size_t input_dim_ = 0;
  std::size_t hidden_ = 0;
  std::vector<double> data_;
};

/// s = w2 . tanh(W1 x + b1) + b2. Throws DimensionError on a length mismatch.
double score(const ScorerParams& params, std::span<const double> x);

/// Same as score(), also returning the hidden activations for backprop.
double score(const ScorerParams& params, std::span<const double> x,
             std::vector<double>& activations);

/// grad += dscore * d s / d params, given the activations from score().
void backprop_score(const ScorerParams& params, std::span<const double> x,
                    std::span<const double> activations, double dscore,
                    ScorerParams& grad);

std::array<double, 3> modality_logits(const ScorerParams& params,
                                      std::span<const double> x);

/// grad += d loss / d (M, m) given d loss / d logits.
void backprop_modality(std::span<const double> x, std::span<const double> dlogits,
                       ScorerParams& grad);

}  // namespace listalign
