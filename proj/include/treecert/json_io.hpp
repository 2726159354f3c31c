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

// JSON model format.
//
//   {
//     "nb_inputs": n, "nb_outputs": m,
//     "post_process": "none" | "divisor" | "softmax",
//     "trees": [ node, ... ]
//   }
//
// where node is {"feature": i, "threshold": t, "left": node, "right": node}
// or {"value": [y_1, ..., y_m]}.
//
// Documents are parsed with a json type whose floating-point member is
// `float`, so every literal goes through strtof and lands on the nearest
// 32-bit value without a detour through double. Serialization writes the
// shortest decimal that reads back to the same float.

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "treecert/error.hpp"
#include "treecert/model.hpp"

namespace treecert {

using FloatJson = nlohmann::basic_json<std::map, std::vector, std::string, bool,
                                       std::int64_t, std::uint64_t, float>;

namespace detail {

inline const FloatJson& require(const FloatJson& obj, const char* key,
                                const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(ErrorKind::kSchema, path + ": missing \"" + key + "\"");
  }
  return *it;
}

inline float to_float(const FloatJson& v, const std::string& path) {
  float out;
  if (v.is_number_float()) {
    out = v.get<float>();
  } else if (v.is_number_integer()) {
    out = static_cast<float>(v.get<std::int64_t>());
  } else if (v.is_number_unsigned()) {
    out = static_cast<float>(v.get<std::uint64_t>());
  } else {
    throw Error(ErrorKind::kSchema, path + ": expected a number");
  }
  if (!std::isfinite(out)) {
    throw Error(ErrorKind::kSchema, path + ": value is not a finite 32-bit float");
  }
  return out;
}

inline std::size_t to_index(const FloatJson& v, const std::string& path) {
  if (!v.is_number_unsigned() &&
      !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw Error(ErrorKind::kSchema, path + ": expected a non-negative integer");
  }
  return static_cast<std::size_t>(v.get<std::uint64_t>());
}

inline Tree read_node(const FloatJson& node, std::size_t n, std::size_t m,
                      const std::string& path) {
  if (!node.is_object()) {
    throw Error(ErrorKind::kSchema, path + ": node must be an object");
  }
  if (node.contains("value")) {
    const auto& value = node["value"];
    if (!value.is_array()) {
      throw Error(ErrorKind::kSchema, path + ".value: expected an array");
    }
    if (value.size() != m) {
      throw Error(ErrorKind::kSchema,
                  path + ".value: has " + std::to_string(value.size()) +
                      " components, expected nb_outputs = " + std::to_string(m));
    }
    std::vector<float> tuple;
    tuple.reserve(m);
    for (std::size_t j = 0; j < value.size(); ++j) {
      tuple.push_back(to_float(value[j], path + ".value[" + std::to_string(j) + "]"));
    }
    return Tree::leaf(std::move(tuple));
  }
  const std::size_t feature = to_index(require(node, "feature", path), path + ".feature");
  if (feature >= n) {
    throw Error(ErrorKind::kSchema,
                path + ".feature: index " + std::to_string(feature) +
                    " out of range for nb_inputs = " + std::to_string(n));
  }
  const float threshold = to_float(require(node, "threshold", path), path + ".threshold");
  Tree left = read_node(require(node, "left", path), n, m, path + ".left");
  Tree right = read_node(require(node, "right", path), n, m, path + ".right");
  return Tree::split(feature, threshold, left, right);
}

inline FloatJson write_node(const Tree& tree, std::uint32_t index) {
  const Node& nd = tree.node(index);
  FloatJson out = FloatJson::object();
  if (nd.is_leaf()) {
    FloatJson value = FloatJson::array();
    for (float v : tree.leaf_value(nd)) value.push_back(v);
    out["value"] = std::move(value);
    return out;
  }
  out["feature"] = nd.feature;
  out["threshold"] = nd.threshold;
  out["left"] = write_node(tree, nd.left);
  out["right"] = write_node(tree, nd.right);
  return out;
}

}  // namespace detail

/// Parses and validates a model document.
inline Ensemble load_model(std::string_view text) {
  FloatJson doc;
  try {
    doc = FloatJson::parse(text.begin(), text.end());
  } catch (const FloatJson::parse_error& e) {
    throw Error(ErrorKind::kParse, std::string("malformed JSON: ") + e.what());
  } catch (const FloatJson::out_of_range& e) {
    // Syntactically valid, but a literal overflows the float number type.
    throw Error(ErrorKind::kSchema, std::string("number outside 32-bit float range: ") + e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorKind::kSchema, "$: model must be a JSON object");
  }
  const std::size_t n = detail::to_index(detail::require(doc, "nb_inputs", "$"), "$.nb_inputs");
  const std::size_t m = detail::to_index(detail::require(doc, "nb_outputs", "$"), "$.nb_outputs");
  if (n == 0 || m == 0) {
    throw Error(ErrorKind::kSchema, "$: nb_inputs and nb_outputs must be positive");
  }
  PostProcess post = PostProcess::kIdentity;
  if (auto it = doc.find("post_process"); it != doc.end()) {
    if (!it->is_string()) {
      throw Error(ErrorKind::kSchema, "$.post_process: expected a string");
    }
    auto parsed = post_process_from_string(it->get<std::string>());
    if (!parsed) {
      throw Error(ErrorKind::kSchema,
                  "$.post_process: unknown tag \"" + it->get<std::string>() + "\"");
    }
    post = *parsed;
  }
  const auto& trees_json = detail::require(doc, "trees", "$");
  if (!trees_json.is_array() || trees_json.empty()) {
    throw Error(ErrorKind::kSchema, "$.trees: expected a non-empty array");
  }
  std::vector<Tree> trees;
  trees.reserve(trees_json.size());
  for (std::size_t b = 0; b < trees_json.size(); ++b) {
    trees.push_back(detail::read_node(trees_json[b], n, m,
                                      "$.trees[" + std::to_string(b) + "]"));
  }
  return Ensemble(std::move(trees), n, m, post);
}

inline Ensemble load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kParse, "cannot open model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_model(buf.str());
}

inline FloatJson model_to_json(const Ensemble& e) {
  FloatJson doc = FloatJson::object();
  doc["nb_inputs"] = e.inputs();
  doc["nb_outputs"] = e.outputs();
  doc["post_process"] = to_string(e.post_process());
  FloatJson trees = FloatJson::array();
  for (const Tree& t : e.trees()) trees.push_back(detail::write_node(t, Tree::root()));
  doc["trees"] = std::move(trees);
  return doc;
}

inline std::string save_model(const Ensemble& e, int indent = -1) {
  return model_to_json(e).dump(indent);
}

}  // namespace treecert
