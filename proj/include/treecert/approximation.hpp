/*
 * Copyright 2026 The treecert Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Output envelopes computed from leaf extremes alone.
//
// Each tree's image is bounded by the componentwise min and max over its
// leaves; the ensemble envelope sums those per-tree bounds in stored tree
// order (the same order and precision as prediction, so float rounding is
// monotone along both paths) and pushes the result through the
// post-processor. Linear in the total leaf count; sound, not complete.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "treecert/geometry.hpp"
#include "treecert/model.hpp"

namespace treecert {

struct TreeBounds {
  std::vector<float> min;
  std::vector<float> max;
};

inline TreeBounds tree_bounds(const Tree& tree) {
  const std::size_t m = tree.outputs();
  TreeBounds bounds{std::vector<float>(m, kInf), std::vector<float>(m, -kInf)};
  for (const Node& nd : tree.nodes()) {
    if (!nd.is_leaf()) continue;
    auto value = tree.leaf_value(nd);
    for (std::size_t j = 0; j < m; ++j) {
      bounds.min[j] = std::min(bounds.min[j], value[j]);
      bounds.max[j] = std::max(bounds.max[j], value[j]);
    }
  }
  return bounds;
}

namespace detail {

// Relative slack covering the float evaluation of softmax: the rounded
// shift `y - peak` perturbs each exponent by at most |y - peak| * 2^-24,
// and any term with |y - peak| > ~104 underflows to zero in float.
inline constexpr double kSoftmaxSlack = 0x1p-12;
// Below this a float softmax term may flush to zero or lose all precision.
inline constexpr double kSoftmaxTiny = 0x1p-120;

/// Interval extension of softmax: numerator [e^lo_i, e^hi_i] over
/// denominator [sum e^lo_j, sum e^hi_j]. Evaluated in double and widened
/// outward so it also encloses the float evaluation of softmax.
inline OutputRange softmax_bounds(std::span<const float> lo,
                                  std::span<const float> hi) {
  const std::size_t m = lo.size();
  const double shift = *std::max_element(hi.begin(), hi.end());
  double sum_lo = 0.0, sum_hi = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    sum_lo += std::exp(lo[j] - shift);
    sum_hi += std::exp(hi[j] - shift);
  }
  OutputRange out(m);
  for (std::size_t i = 0; i < m; ++i) {
    double lower = std::exp(lo[i] - shift) / sum_hi;
    double upper = sum_lo > 0.0 ? std::exp(hi[i] - shift) / sum_lo
                                : std::numeric_limits<double>::infinity();
    lower = lower < kSoftmaxTiny ? 0.0 : lower * (1.0 - kSoftmaxSlack);
    upper = upper * (1.0 + kSoftmaxSlack) + kSoftmaxTiny;
    out[i] = Interval{round_down(lower), round_up(upper)};
  }
  return out;
}

}  // namespace detail

/// Envelope of `post` applied to any sum lying in [lo, hi].
inline OutputRange post_process_bounds(PostProcess post, std::span<const float> lo,
                                       std::span<const float> hi,
                                       std::size_t tree_count) {
  if (post == PostProcess::kSoftmax) return detail::softmax_bounds(lo, hi);
  // Identity and division by a positive constant are monotone per
  // component, and so is their float rounding.
  std::vector<float> a(lo.begin(), lo.end());
  std::vector<float> b(hi.begin(), hi.end());
  apply_post_process(post, a, tree_count);
  apply_post_process(post, b, tree_count);
  OutputRange out(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = Interval{a[j], b[j]};
  return out;
}

inline OutputRange ensemble_bounds(const Ensemble& e) {
  const std::size_t m = e.outputs();
  std::vector<float> lo(m, 0.0f), hi(m, 0.0f);
  for (const Tree& t : e.trees()) {
    const TreeBounds tb = tree_bounds(t);
    for (std::size_t j = 0; j < m; ++j) {
      lo[j] += tb.min[j];
      hi[j] += tb.max[j];
    }
  }
  return post_process_bounds(e.post_process(), lo, hi, e.tree_count());
}

}  // namespace treecert
