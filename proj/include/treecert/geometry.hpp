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

// Closed intervals and hyperrectangles over 32-bit floats.
//
// Every bound is a representable float (or an infinity), and both ends are
// inclusive. A strict comparison `x > t` is expressed as `x >= succ32(t)`,
// so splitting a box at a threshold yields two closed boxes that together
// hold exactly the representable points of the parent.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "treecert/error.hpp"

namespace treecert {

inline constexpr float kInf = std::numeric_limits<float>::infinity();

/// Next representable float above `x`.
inline float succ32(float x) { return std::nextafter(x, kInf); }

/// Next representable float below `x`.
inline float pred32(float x) { return std::nextafter(x, -kInf); }

/// Largest float that is <= `x`.
inline float round_down(double x) {
  auto f = static_cast<float>(x);
  if (static_cast<double>(f) > x) f = pred32(f);
  return f;
}

/// Smallest float that is >= `x`.
inline float round_up(double x) {
  auto f = static_cast<float>(x);
  if (static_cast<double>(f) < x) f = succ32(f);
  return f;
}

struct Interval {
  float lower = -kInf;
  float upper = kInf;

  static Interval point(float v) { return {v, v}; }
  static Interval unbounded() { return {}; }

  bool empty() const { return !(lower <= upper); }
  bool contains(float x) const { return lower <= x && x <= upper; }
  bool contains(const Interval& other) const {
    return other.empty() || (lower <= other.lower && other.upper <= upper);
  }
  bool degenerate() const { return lower == upper; }

  Interval intersect(const Interval& other) const {
    return {std::max(lower, other.lower), std::min(upper, other.upper)};
  }
  Interval hull(const Interval& other) const {
    if (empty()) return other;
    if (other.empty()) return *this;
    return {std::min(lower, other.lower), std::max(upper, other.upper)};
  }

  friend bool operator==(const Interval& a, const Interval& b) {
    if (a.empty() && b.empty()) return true;
    return a.lower == b.lower && a.upper == b.upper;
  }
};

/// Widths of the two slices a threshold cuts from `interval`, as used to
/// order children in the least-points-first strategy. Infinite sides are
/// reported as +inf.
inline std::pair<double, double> side_measure(const Interval& interval,
                                              float threshold) {
  double left = static_cast<double>(threshold) - interval.lower;
  double right = static_cast<double>(interval.upper) - threshold;
  return {std::max(0.0, left), std::max(0.0, right)};
}

namespace detail {
struct InputTag {};
struct OutputTag {};
}  // namespace detail

/// An axis-aligned product of intervals. Instantiated twice: `Box` for input
/// regions and `OutputRange` for output envelopes, so the two cannot be
/// mixed up at call sites.
template <typename Tag>
class BasicBox {
 public:
  BasicBox() = default;
  explicit BasicBox(std::size_t arity, Interval fill = Interval::unbounded())
      : dims_(arity, fill) {}
  explicit BasicBox(std::vector<Interval> dims) : dims_(std::move(dims)) {}
  BasicBox(std::initializer_list<Interval> dims) : dims_(dims) {}

  static BasicBox point(std::span<const float> x) {
    BasicBox box(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) box.dims_[i] = Interval::point(x[i]);
    return box;
  }

  std::size_t arity() const { return dims_.size(); }
  const Interval& operator[](std::size_t i) const { return dims_[i]; }
  Interval& operator[](std::size_t i) { return dims_[i]; }
  std::span<const Interval> dims() const { return dims_; }

  auto begin() const { return dims_.begin(); }
  auto end() const { return dims_.end(); }

  bool empty() const {
    return std::any_of(dims_.begin(), dims_.end(),
                       [](const Interval& d) { return d.empty(); });
  }

  /// Componentwise inclusive containment of a point.
  bool contains(std::span<const float> x) const {
    if (x.size() != dims_.size()) {
      throw Error(ErrorKind::kInputShape,
                  "point has " + std::to_string(x.size()) +
                      " components, box has " + std::to_string(dims_.size()));
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!dims_[i].contains(x[i])) return false;
    }
    return true;
  }

  bool contains(const BasicBox& other) const {
    if (other.empty()) return true;
    if (other.arity() != arity()) return false;
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      if (!dims_[i].contains(other.dims_[i])) return false;
    }
    return true;
  }

  BasicBox intersect(const BasicBox& other) const {
    BasicBox out(*this);
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      out.dims_[i] = dims_[i].intersect(other.dims_[i]);
    }
    return out;
  }

  /// Lowest corner; a representable member of the box when it is non-empty.
  std::vector<float> lower_corner() const {
    std::vector<float> x(dims_.size());
    for (std::size_t i = 0; i < dims_.size(); ++i) x[i] = dims_[i].lower;
    return x;
  }

  friend bool operator==(const BasicBox& a, const BasicBox& b) {
    if (a.empty() && b.empty()) return true;
    return a.dims_ == b.dims_;
  }

 private:
  std::vector<Interval> dims_;
};

using Box = BasicBox<detail::InputTag>;
using OutputRange = BasicBox<detail::OutputTag>;

inline bool is_empty(const Box& box) { return box.empty(); }

/// Cuts `box` along `dim`: the left child keeps x[dim] <= threshold, the
/// right child keeps x[dim] >= succ32(threshold). Either child may be empty.
inline std::pair<Box, Box> split(const Box& box, std::size_t dim,
                                 float threshold) {
  if (dim >= box.arity()) {
    throw Error(ErrorKind::kInputShape,
                "split dimension " + std::to_string(dim) +
                    " out of range for box of arity " +
                    std::to_string(box.arity()));
  }
  if (!std::isfinite(threshold)) {
    throw Error(ErrorKind::kInvalidArgument, "split threshold must be finite");
  }
  std::pair<Box, Box> children{box, box};
  children.first[dim].upper = std::min(box[dim].upper, threshold);
  children.second[dim].lower = std::max(box[dim].lower, succ32(threshold));
  return children;
}

// ---------------------------------------------------------------------------
// Text formats

inline std::string format_float(float v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_interval(const Interval& interval) {
  if (interval.empty()) return "empty";
  return "[" + format_float(interval.lower) + ", " +
         format_float(interval.upper) + "]";
}

template <typename Tag>
std::string format_box(const BasicBox<Tag>& box) {
  std::string out;
  for (std::size_t i = 0; i < box.arity(); ++i) {
    if (i) out += " x ";
    out += format_interval(box[i]);
  }
  return out;
}

/// Parses a float literal; accepts `inf`, `+inf`, `-inf`.
inline float parse_float(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  float value = 0.0f;
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || res.ec == std::errc::invalid_argument ||
      res.ptr != text.data() + text.size()) {
    throw Error(ErrorKind::kParse, "not a number: '" + std::string(text) + "'");
  }
  if (res.ec == std::errc::result_out_of_range) {
    // from_chars leaves the value untouched on overflow/underflow.
    value = static_cast<float>(std::strtod(std::string(text).c_str(), nullptr));
  }
  if (std::isnan(value)) {
    throw Error(ErrorKind::kParse, "NaN is not allowed: '" + std::string(text) + "'");
  }
  return value;
}

/// Parses `lo:hi[,lo:hi...]`. A single pair is broadcast to `arity`
/// dimensions; otherwise the pair count must equal `arity`.
inline Box parse_domain(std::string_view text, std::size_t arity) {
  std::vector<Interval> dims;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    auto pair = text.substr(start, end - start);
    auto colon = pair.find(':');
    if (colon == std::string_view::npos) {
      throw Error(ErrorKind::kParse,
                  "domain entry '" + std::string(pair) + "' is not lo:hi");
    }
    Interval interval{parse_float(pair.substr(0, colon)),
                      parse_float(pair.substr(colon + 1))};
    if (interval.empty()) {
      throw Error(ErrorKind::kInvalidArgument,
                  "domain entry '" + std::string(pair) + "' is empty");
    }
    dims.push_back(interval);
    start = end + 1;
  }
  if (dims.size() == 1) return Box(arity, dims.front());
  if (dims.size() != arity) {
    throw Error(ErrorKind::kInputShape,
                "domain has " + std::to_string(dims.size()) +
                    " entries, model expects " + std::to_string(arity));
  }
  return Box(std::move(dims));
}

}  // namespace treecert
