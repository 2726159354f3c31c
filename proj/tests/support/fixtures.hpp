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

#pragma once

#include "treecert/treecert.hpp"

namespace treecert::testing {

/// x <= 0 -> 1, else 2.
inline Tree two_leaf_tree() {
  return Tree::split(0, 0.0f, Tree::leaf({1.0f}), Tree::leaf({2.0f}));
}

/// Tree 1: x <= 0 -> 0 else 1; tree 2: x <= 5 -> 2 else 3.
inline Ensemble two_tree_ensemble(PostProcess post = PostProcess::kIdentity) {
  std::vector<Tree> trees{
      Tree::split(0, 0.0f, Tree::leaf({0.0f}), Tree::leaf({1.0f})),
      Tree::split(0, 5.0f, Tree::leaf({2.0f}), Tree::leaf({3.0f})),
  };
  return Ensemble(std::move(trees), 1, 1, post);
}

/// Two-class stump: x <= 0 -> (1, 0), else (0, 1).
inline Ensemble stump_classifier() {
  return Ensemble({Tree::split(0, 0.0f, Tree::leaf({1.0f, 0.0f}), Tree::leaf({0.0f, 1.0f}))},
                  1, 2, PostProcess::kIdentity);
}

}  // namespace treecert::testing
