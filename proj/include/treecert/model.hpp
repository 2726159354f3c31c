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

// Tree ensembles: univariate hard decision trees whose outputs are summed
// in stored order and then post-processed once.
//
// All numerics are 32-bit floats and accumulation happens in 32-bit, tree by
// tree, so predictions are bit-identical to libraries that evaluate
// `p(t_1(x) + ... + t_B(x))` in single precision.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "treecert/error.hpp"

namespace treecert {

/// One node of a tree in flat preorder storage. Internal nodes route
/// `x[feature] <= threshold` to `left`, everything else to `right`.
struct Node {
  std::int32_t feature = -1;  // negative for leaves
  float threshold = 0.0f;
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  std::uint32_t value = 0;  // offset of the leaf tuple in Tree::values()

  bool is_leaf() const { return feature < 0; }
};

class Tree {
 public:
  /// A tree consisting of a single leaf.
  static Tree leaf(std::vector<float> value) {
    if (value.empty()) {
      throw Error(ErrorKind::kSchema, "leaf value tuple must not be empty");
    }
    for (float v : value) {
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::kSchema, "leaf values must be finite");
      }
    }
    Tree t;
    t.outputs_ = value.size();
    t.nodes_.push_back(Node{});
    t.values_ = std::move(value);
    return t;
  }

  /// A tree whose root tests `x[feature] <= threshold`.
  static Tree split(std::size_t feature, float threshold, const Tree& left,
                    const Tree& right) {
    if (!std::isfinite(threshold)) {
      throw Error(ErrorKind::kSchema, "thresholds must be finite");
    }
    if (left.outputs_ != right.outputs_) {
      throw Error(ErrorKind::kSchema,
                  "subtrees disagree on output arity (" +
                      std::to_string(left.outputs_) + " vs " +
                      std::to_string(right.outputs_) + ")");
    }
    Tree t;
    t.outputs_ = left.outputs_;
    t.nodes_.reserve(1 + left.nodes_.size() + right.nodes_.size());
    t.values_.reserve(left.values_.size() + right.values_.size());
    t.nodes_.push_back(Node{static_cast<std::int32_t>(feature), threshold, 1,
                            static_cast<std::uint32_t>(1 + left.nodes_.size()),
                            0});
    t.append(left);
    t.append(right);
    return t;
  }

  std::size_t outputs() const { return outputs_; }
  std::span<const Node> nodes() const { return nodes_; }
  std::span<const float> values() const { return values_; }
  const Node& node(std::uint32_t index) const { return nodes_[index]; }
  static constexpr std::uint32_t root() { return 0; }

  std::span<const float> leaf_value(const Node& leaf) const {
    return std::span<const float>(values_).subspan(leaf.value, outputs_);
  }

  std::size_t leaf_count() const { return values_.size() / outputs_; }

  /// Number of edges on the longest root-to-leaf path.
  std::size_t depth() const { return depth_from(root()); }

  /// One past the largest feature index tested, i.e. the minimum input arity.
  std::size_t min_inputs() const {
    std::size_t n = 0;
    for (const auto& nd : nodes_) {
      if (!nd.is_leaf()) n = std::max(n, static_cast<std::size_t>(nd.feature) + 1);
    }
    return n;
  }

  /// Leaf tuple reached by `x`.
  std::span<const float> eval(std::span<const float> x) const {
    const Node* nd = &nodes_[root()];
    while (!nd->is_leaf()) {
      auto f = static_cast<std::size_t>(nd->feature);
      if (f >= x.size()) {
        throw Error(ErrorKind::kInputShape,
                    "tree tests feature " + std::to_string(f) +
                        " but input has " + std::to_string(x.size()) +
                        " components");
      }
      nd = &nodes_[x[f] <= nd->threshold ? nd->left : nd->right];
    }
    return leaf_value(*nd);
  }

  /// Structural equality with bitwise comparison of every float.
  friend bool operator==(const Tree& a, const Tree& b) {
    if (a.outputs_ != b.outputs_ || a.nodes_.size() != b.nodes_.size() ||
        a.values_.size() != b.values_.size()) {
      return false;
    }
    for (std::size_t i = 0; i < a.nodes_.size(); ++i) {
      const auto& x = a.nodes_[i];
      const auto& y = b.nodes_[i];
      if (x.feature != y.feature || x.left != y.left || x.right != y.right ||
          x.value != y.value ||
          std::bit_cast<std::uint32_t>(x.threshold) !=
              std::bit_cast<std::uint32_t>(y.threshold)) {
        return false;
      }
    }
    return std::equal(a.values_.begin(), a.values_.end(), b.values_.begin(),
                      [](float x, float y) {
                        return std::bit_cast<std::uint32_t>(x) ==
                               std::bit_cast<std::uint32_t>(y);
                      });
  }

 private:
  Tree() = default;

  void append(const Tree& sub) {
    auto node_offset = static_cast<std::uint32_t>(nodes_.size());
    auto value_offset = static_cast<std::uint32_t>(values_.size());
    for (Node nd : sub.nodes_) {
      if (nd.is_leaf()) {
        nd.value += value_offset;
      } else {
        nd.left += node_offset;
        nd.right += node_offset;
      }
      nodes_.push_back(nd);
    }
    values_.insert(values_.end(), sub.values_.begin(), sub.values_.end());
  }

  std::size_t depth_from(std::uint32_t index) const {
    const Node& nd = nodes_[index];
    if (nd.is_leaf()) return 0;
    return 1 + std::max(depth_from(nd.left), depth_from(nd.right));
  }

  std::vector<Node> nodes_;
  std::vector<float> values_;
  std::size_t outputs_ = 0;
};

enum class PostProcess { kIdentity, kDivideByTreeCount, kSoftmax };

inline const char* to_string(PostProcess post) {
  switch (post) {
    case PostProcess::kIdentity: return "none";
    case PostProcess::kDivideByTreeCount: return "divisor";
    case PostProcess::kSoftmax: return "softmax";
  }
  return "?";
}

inline std::optional<PostProcess> post_process_from_string(std::string_view tag) {
  if (tag == "none") return PostProcess::kIdentity;
  if (tag == "divisor") return PostProcess::kDivideByTreeCount;
  if (tag == "softmax") return PostProcess::kSoftmax;
  return std::nullopt;
}

/// Applies `post` in place to a summed output tuple of an ensemble with
/// `tree_count` trees.
inline void apply_post_process(PostProcess post, std::span<float> sum,
                               std::size_t tree_count) {
  switch (post) {
    case PostProcess::kIdentity:
      return;
    case PostProcess::kDivideByTreeCount: {
      const auto divisor = static_cast<float>(tree_count);
      for (float& v : sum) v /= divisor;
      return;
    }
    case PostProcess::kSoftmax: {
      // Shift by the maximum so exp never overflows.
      const float peak = *std::max_element(sum.begin(), sum.end());
      float total = 0.0f;
      for (float& v : sum) {
        v = std::exp(v - peak);
        total += v;
      }
      for (float& v : sum) v /= total;
      return;
    }
  }
}

/// Index of the largest component; ties go to the lowest index.
inline std::size_t argmax(std::span<const float> y) {
  return static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
}

/// Index of the largest component, or nullopt if another component ties it.
inline std::optional<std::size_t> strict_argmax(std::span<const float> y) {
  const std::size_t best = argmax(y);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (i != best && y[i] == y[best]) return std::nullopt;
  }
  return best;
}

class Ensemble {
 public:
  Ensemble(std::vector<Tree> trees, std::size_t inputs, std::size_t outputs,
           PostProcess post)
      : trees_(std::move(trees)), inputs_(inputs), outputs_(outputs), post_(post) {
    if (trees_.empty()) {
      throw Error(ErrorKind::kSchema, "ensemble needs at least one tree");
    }
    if (inputs_ == 0 || outputs_ == 0) {
      throw Error(ErrorKind::kSchema, "input and output arity must be positive");
    }
    for (std::size_t b = 0; b < trees_.size(); ++b) {
      const std::string where = "trees[" + std::to_string(b) + "]";
      if (trees_[b].outputs() != outputs_) {
        throw Error(ErrorKind::kSchema,
                    where + ": leaf tuples have " +
                        std::to_string(trees_[b].outputs()) +
                        " components, expected " + std::to_string(outputs_));
      }
      if (trees_[b].min_inputs() > inputs_) {
        throw Error(ErrorKind::kSchema,
                    where + ": tests feature " +
                        std::to_string(trees_[b].min_inputs() - 1) +
                        " but the model has " + std::to_string(inputs_) +
                        " inputs");
      }
    }
  }

  std::size_t inputs() const { return inputs_; }
  std::size_t outputs() const { return outputs_; }
  std::size_t tree_count() const { return trees_.size(); }
  PostProcess post_process() const { return post_; }
  std::span<const Tree> trees() const { return trees_; }
  const Tree& tree(std::size_t b) const { return trees_[b]; }

  /// Sums leaf tuples in stored tree order, then post-processes once.
  std::vector<float> eval(std::span<const float> x) const {
    check_arity(x);
    std::vector<float> y(outputs_, 0.0f);
    for (const Tree& t : trees_) {
      auto leaf = t.eval(x);
      for (std::size_t j = 0; j < outputs_; ++j) y[j] += leaf[j];
    }
    apply_post_process(post_, y, trees_.size());
    return y;
  }

  std::size_t classify(std::span<const float> x) const { return argmax(eval(x)); }

  friend bool operator==(const Ensemble& a, const Ensemble& b) {
    return a.inputs_ == b.inputs_ && a.outputs_ == b.outputs_ &&
           a.post_ == b.post_ && a.trees_ == b.trees_;
  }

 private:
  void check_arity(std::span<const float> x) const {
    if (x.size() != inputs_) {
      throw Error(ErrorKind::kInputShape,
                  "input has " + std::to_string(x.size()) +
                      " components, model expects " + std::to_string(inputs_));
    }
    for (float v : x) {
      if (std::isnan(v)) throw Error(ErrorKind::kInvalidArgument, "input contains NaN");
    }
  }

  std::vector<Tree> trees_;
  std::size_t inputs_;
  std::size_t outputs_;
  PostProcess post_;
};

inline std::span<const float> tree_eval(const Tree& tree, std::span<const float> x) {
  return tree.eval(x);
}

inline std::vector<float> ensemble_eval(const Ensemble& e, std::span<const float> x) {
  return e.eval(x);
}

inline std::size_t classify(const Ensemble& e, std::span<const float> x) {
  return e.classify(x);
}

}  // namespace treecert
