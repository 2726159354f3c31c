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

// Equivalence-class enumeration.
//
// The input domain is refined tree by tree: inside tree b every internal
// node splits the current box, each feasible leaf adds its tuple to the
// running sum and hands the box on to tree b + 1. Once the last tree has
// contributed, the post-processor is applied and the (box, output) pair is
// emitted. A child whose box comes out empty is an infeasible path
// combination and is dropped on the spot.
//
// The walk is depth-first with one mutable box and one accumulator row per
// tree, so memory stays O(n + B * m) no matter how many classes exist.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "treecert/error.hpp"
#include "treecert/geometry.hpp"
#include "treecert/model.hpp"

namespace treecert {

/// Order in which the two children of an internal node are explored.
/// Affects visit order only; the set of emitted classes is the same.
enum class Strategy {
  kLeftFirst,
  kRightFirst,
  kLeastPointsFirst,  // the narrower slice on the split axis first
};

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::kLeftFirst: return "left";
    case Strategy::kRightFirst: return "right";
    case Strategy::kLeastPointsFirst: return "least-points";
  }
  return "?";
}

inline std::optional<Strategy> strategy_from_string(std::string_view text) {
  if (text == "left") return Strategy::kLeftFirst;
  if (text == "right") return Strategy::kRightFirst;
  if (text == "least-points" || text == "lpf") return Strategy::kLeastPointsFirst;
  return std::nullopt;
}

/// A region of the input domain together with its outputs. Emitted
/// mappings carry degenerate output intervals: the exact, post-processed
/// ensemble output shared by every point of `region`.
struct Mapping {
  Box region;
  OutputRange outputs;
  std::size_t trees_applied = 0;

  /// Point value of output `j` for an exact mapping.
  float output(std::size_t j) const { return outputs[j].lower; }

  std::vector<float> output_point() const {
    std::vector<float> y(outputs.arity());
    for (std::size_t j = 0; j < y.size(); ++j) y[j] = outputs[j].lower;
    return y;
  }
};

enum class Flow { kContinue, kStop };
enum class Outcome { kCompleted, kStopped };

struct EnumerationStats {
  std::uint64_t classes = 0;        // mappings handed to the consumer
  std::uint64_t nodes_visited = 0;  // tree nodes entered, leaves included
  std::uint64_t infeasible = 0;     // children dropped because their box was empty
};

struct EnumerationResult {
  Outcome outcome = Outcome::kCompleted;
  EnumerationStats stats;
};

struct Verdict {
  bool pass = true;
  std::optional<Mapping> counterexample;  // set iff !pass
  EnumerationStats stats;
};

namespace detail {

template <typename Consumer>
class ClassWalker {
 public:
  ClassWalker(const Ensemble& e, const Box& domain, Strategy strategy,
              Consumer& consumer)
      : e_(e),
        strategy_(strategy),
        consumer_(consumer),
        m_(e.outputs()),
        sums_((e.tree_count() + 1) * e.outputs(), 0.0f) {
    current_.region = domain;
    current_.outputs = OutputRange(m_);
    current_.trees_applied = e.tree_count();
    box_ = domain;
  }

  EnumerationResult run() {
    EnumerationResult result;
    Flow flow = visit(0, Tree::root());
    result.outcome = flow == Flow::kStop ? Outcome::kStopped : Outcome::kCompleted;
    result.stats = stats_;
    return result;
  }

 private:
  float* row(std::size_t b) { return sums_.data() + b * m_; }

  Flow visit(std::size_t b, std::uint32_t index) {
    ++stats_.nodes_visited;
    const Tree& tree = e_.tree(b);
    const Node& nd = tree.node(index);

    if (nd.is_leaf()) {
      auto leaf = tree.leaf_value(nd);
      const float* in = row(b);
      float* out = row(b + 1);
      for (std::size_t j = 0; j < m_; ++j) {
        out[j] = in[j] + leaf[j];
        if (!std::isfinite(out[j])) {
          throw Error(ErrorKind::kOverflow,
                      "partial sum of output " + std::to_string(j) +
                          " is not finite after tree " + std::to_string(b));
        }
      }
      if (b + 1 == e_.tree_count()) return emit();
      return visit(b + 1, Tree::root());
    }

    const auto f = static_cast<std::size_t>(nd.feature);
    const Interval saved = box_[f];
    const Interval left{saved.lower, std::min(saved.upper, nd.threshold)};
    const Interval right{std::max(saved.lower, succ32(nd.threshold)), saved.upper};

    bool right_first = strategy_ == Strategy::kRightFirst;
    if (strategy_ == Strategy::kLeastPointsFirst) {
      auto [left_size, right_size] = side_measure(saved, nd.threshold);
      right_first = right_size < left_size;
    }

    const std::pair<Interval, std::uint32_t> children[2] = {
        {right_first ? right : left, right_first ? nd.right : nd.left},
        {right_first ? left : right, right_first ? nd.left : nd.right},
    };
    for (const auto& [slice, child] : children) {
      if (slice.empty()) {
        ++stats_.infeasible;
        continue;
      }
      box_[f] = slice;
      if (visit(b, child) == Flow::kStop) {
        box_[f] = saved;
        return Flow::kStop;
      }
    }
    box_[f] = saved;
    return Flow::kContinue;
  }

  Flow emit() {
    const float* sum = row(e_.tree_count());
    std::vector<float>& y = scratch_;
    y.assign(sum, sum + m_);
    apply_post_process(e_.post_process(), y, e_.tree_count());
    for (std::size_t j = 0; j < m_; ++j) current_.outputs[j] = Interval::point(y[j]);
    for (std::size_t i = 0; i < box_.arity(); ++i) current_.region[i] = box_[i];
    ++stats_.classes;
    const Mapping& view = current_;
    if constexpr (std::is_same_v<std::invoke_result_t<Consumer&, const Mapping&>, void>) {
      consumer_(view);
      return Flow::kContinue;
    } else {
      return consumer_(view);
    }
  }

  const Ensemble& e_;
  Strategy strategy_;
  Consumer& consumer_;
  std::size_t m_;
  std::vector<float> sums_;  // row b holds the sum of trees [0, b)
  std::vector<float> scratch_;
  Box box_;
  Mapping current_;
  EnumerationStats stats_;
};

inline void check_domain(const Ensemble& e, const Box& domain) {
  if (domain.arity() != e.inputs()) {
    throw Error(ErrorKind::kInputShape,
                "domain has " + std::to_string(domain.arity()) +
                    " dimensions, model expects " + std::to_string(e.inputs()));
  }
  if (domain.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "domain is empty");
  }
}

}  // namespace detail

/// Emits every feasible equivalence class of `e` inside `domain` exactly
/// once. `consumer` takes `const Mapping&` (valid only during the call) and
/// returns either `Flow` or nothing; returning `Flow::kStop` aborts at once.
template <typename Consumer>
EnumerationResult for_each_class(const Ensemble& e, const Box& domain,
                                 Strategy strategy, Consumer&& consumer) {
  detail::check_domain(e, domain);
  detail::ClassWalker<std::remove_reference_t<Consumer>> walker(e, domain, strategy,
                                                                consumer);
  return walker.run();
}

/// Checks `predicate` on every class; stops at the first violation and
/// returns it as the counterexample.
template <typename Predicate>
Verdict forall(const Ensemble& e, const Box& domain, Strategy strategy,
               Predicate&& predicate) {
  Verdict verdict;
  auto result = for_each_class(e, domain, strategy, [&](const Mapping& mapping) {
    if (predicate(mapping)) return Flow::kContinue;
    verdict.pass = false;
    verdict.counterexample = mapping;
    return Flow::kStop;
  });
  verdict.stats = result.stats;
  return verdict;
}

inline std::uint64_t count_classes(const Ensemble& e, const Box& domain,
                                   Strategy strategy = Strategy::kLeastPointsFirst) {
  return for_each_class(e, domain, strategy, [](const Mapping&) {}).stats.classes;
}

/// The unbounded domain (-inf, inf)^n of a model.
inline Box full_domain(const Ensemble& e) { return Box(e.inputs()); }

}  // namespace treecert
