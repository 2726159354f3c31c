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

// Built-in property checkers: plausibility of range and robustness against
// noise (full hypercube and sliding window), plus a batch driver over a
// labelled test set.

#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "treecert/approximation.hpp"
#include "treecert/enumerator.hpp"
#include "treecert/error.hpp"
#include "treecert/geometry.hpp"
#include "treecert/model.hpp"

namespace treecert {

// ---------------------------------------------------------------------------
// Plausibility of range

struct RangeSpec {
  std::vector<double> alpha;
  std::vector<double> beta;

  /// [0, 1]^m, the range every class probability must stay in.
  static RangeSpec probabilities(std::size_t m) {
    return {std::vector<double>(m, 0.0), std::vector<double>(m, 1.0)};
  }

  void validate(std::size_t m) const {
    if (alpha.size() != m || beta.size() != m) {
      throw Error(ErrorKind::kInputShape,
                  "range spec needs " + std::to_string(m) + " bounds per side");
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (!(alpha[j] <= beta[j])) {
        throw Error(ErrorKind::kInvalidArgument,
                    "alpha[" + std::to_string(j) + "] exceeds beta[" +
                        std::to_string(j) + "]");
      }
    }
  }

  bool admits(const OutputRange& y) const {
    for (std::size_t j = 0; j < y.arity(); ++j) {
      if (y[j].lower < alpha[j] || y[j].upper > beta[j]) return false;
    }
    return true;
  }
};

enum class Method { kApproximate, kExact };

inline const char* to_string(Method m) {
  return m == Method::kApproximate ? "approximate" : "exact";
}

struct RangeVerdict {
  Verdict verdict;
  Method method = Method::kApproximate;
  OutputRange bounds;  // the approximate envelope that was tried first
};

/// Tries the leaf-extreme envelope first; enumerates classes only when the
/// envelope leaves [alpha, beta].
inline RangeVerdict check_range(const Ensemble& e, const Box& domain,
                                const RangeSpec& spec,
                                Strategy strategy = Strategy::kLeastPointsFirst) {
  spec.validate(e.outputs());
  detail::check_domain(e, domain);
  RangeVerdict out;
  out.bounds = ensemble_bounds(e);
  if (spec.admits(out.bounds)) {
    out.method = Method::kApproximate;
    return out;
  }
  out.method = Method::kExact;
  out.verdict = forall(e, domain, strategy,
                       [&](const Mapping& mapping) { return spec.admits(mapping.outputs); });
  return out;
}

// ---------------------------------------------------------------------------
// Robustness against noise

struct RobustnessQuery {
  std::vector<float> test_point;
  double epsilon = 0.0;
  std::optional<std::size_t> expected_class;  // defaults to the point's own class
  std::optional<Box> clamp;                   // e.g. the valid feature range
};

/// Closed box [x - eps, x + eps] rounded outward to floats, so it holds
/// every float within eps of the test point on each axis.
inline Box noise_box(std::span<const float> x, double epsilon) {
  Box box(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    box[i] = Interval{round_down(static_cast<double>(x[i]) - epsilon),
                      round_up(static_cast<double>(x[i]) + epsilon)};
  }
  return box;
}

namespace detail {

inline void check_classifier(const Ensemble& e) {
  if (e.outputs() < 2) {
    throw Error(ErrorKind::kInvalidArgument,
                "robustness needs a classifier with at least two outputs");
  }
}

inline std::size_t resolve_class(const Ensemble& e, const RobustnessQuery& q) {
  if (q.test_point.size() != e.inputs()) {
    throw Error(ErrorKind::kInputShape,
                "test point has " + std::to_string(q.test_point.size()) +
                    " components, model expects " + std::to_string(e.inputs()));
  }
  if (!(q.epsilon >= 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "epsilon must be non-negative");
  }
  std::size_t expected = q.expected_class ? *q.expected_class : e.classify(q.test_point);
  if (expected >= e.outputs()) {
    throw Error(ErrorKind::kInvalidArgument,
                "expected class " + std::to_string(expected) + " out of range");
  }
  return expected;
}

inline Verdict robust_on(const Ensemble& e, Box box, std::size_t expected,
                         const std::optional<Box>& clamp, Strategy strategy) {
  if (clamp) {
    box = box.intersect(*clamp);
    // Nothing of the noise region lies in the valid domain.
    if (box.empty()) return Verdict{};
  }
  return forall(e, box, strategy, [&](const Mapping& mapping) {
    auto label = strict_argmax(mapping.output_point());
    return label && *label == expected;
  });
}

}  // namespace detail

/// Passes iff every point of the noise box is classified as the expected
/// class with a strict (untied) argmax.
inline Verdict check_robustness(const Ensemble& e, const RobustnessQuery& q,
                                Strategy strategy = Strategy::kLeastPointsFirst) {
  detail::check_classifier(e);
  const std::size_t expected = detail::resolve_class(e, q);
  return detail::robust_on(e, noise_box(q.test_point, q.epsilon), expected, q.clamp,
                           strategy);
}

struct WindowSpec {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t stride = 1;
};

struct ImageDims {
  std::size_t width = 0;
  std::size_t height = 0;
};

struct WindowResult {
  std::size_t x = 0;  // column offset of the window's top-left pixel
  std::size_t y = 0;  // row offset
  bool pass = true;
};

struct WindowVerdict {
  Verdict verdict;  // first failing window's verdict, or an aggregate pass
  std::vector<WindowResult> windows;
  std::optional<WindowResult> first_failure;
};

inline std::size_t window_positions(std::size_t image, std::size_t window,
                                    std::size_t stride) {
  return (image - window) / stride + 1;
}

inline void validate_window(const Ensemble& e, const WindowSpec& w, const ImageDims& img) {
  if (img.width * img.height != e.inputs()) {
    throw Error(ErrorKind::kInputShape,
                "image " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                    " does not match " + std::to_string(e.inputs()) + " model inputs");
  }
  if (w.width == 0 || w.height == 0 || w.width > img.width || w.height > img.height) {
    throw Error(ErrorKind::kInvalidArgument, "window does not fit inside the image");
  }
  if (w.stride == 0) {
    throw Error(ErrorKind::kInvalidArgument, "stride must be at least 1");
  }
}

/// Box that perturbs only the pixels under a window; pixels are row-major,
/// index = row * width + column.
inline Box window_box(std::span<const float> image, const ImageDims& img,
                      std::size_t x0, std::size_t y0, std::size_t w, std::size_t h,
                      double epsilon) {
  Box box = Box::point(image);
  for (std::size_t r = y0; r < y0 + h; ++r) {
    for (std::size_t c = x0; c < x0 + w; ++c) {
      const std::size_t i = r * img.width + c;
      box[i] = Interval{round_down(static_cast<double>(image[i]) - epsilon),
                        round_up(static_cast<double>(image[i]) + epsilon)};
    }
  }
  return box;
}

/// Runs the robustness check once per window position, scanning rows top
/// to bottom and columns left to right. Every window is checked so the
/// report is complete.
inline WindowVerdict check_robustness_sliding_window(
    const Ensemble& e, const RobustnessQuery& q, const WindowSpec& window,
    const ImageDims& img, Strategy strategy = Strategy::kLeastPointsFirst) {
  detail::check_classifier(e);
  validate_window(e, window, img);
  const std::size_t expected = detail::resolve_class(e, q);
  WindowVerdict out;
  for (std::size_t y = 0; y + window.height <= img.height; y += window.stride) {
    for (std::size_t x = 0; x + window.width <= img.width; x += window.stride) {
      Box box = window_box(q.test_point, img, x, y, window.width, window.height, q.epsilon);
      Verdict v = detail::robust_on(e, std::move(box), expected, q.clamp, strategy);
      out.verdict.stats.classes += v.stats.classes;
      out.verdict.stats.nodes_visited += v.stats.nodes_visited;
      out.verdict.stats.infeasible += v.stats.infeasible;
      WindowResult wr{x, y, v.pass};
      out.windows.push_back(wr);
      if (!v.pass && !out.first_failure) {
        out.first_failure = wr;
        out.verdict.pass = false;
        out.verdict.counterexample = std::move(v.counterexample);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Batch robustness over a labelled test set

struct Sample {
  std::vector<float> features;
  std::size_t label = 0;
};

struct BatchMode {
  std::optional<WindowSpec> window;  // full hypercube when absent
  ImageDims image;
};

enum class SampleStatus { kRobust, kNotRobust, kMisclassified };

struct BatchSummary {
  std::size_t robust_count = 0;
  std::size_t total = 0;
  std::size_t misclassified = 0;
  std::vector<std::size_t> failures;  // sample indices, not robust or misclassified
  std::vector<SampleStatus> status;
  EnumerationStats stats;

  double robustness_percent() const {
    return total == 0 ? 0.0 : 100.0 * static_cast<double>(robust_count) /
                                  static_cast<double>(total);
  }
};

/// Checks one labelled sample. Samples the clean model already gets wrong
/// are reported as misclassified and never enumerated.
inline SampleStatus check_sample(const Ensemble& e, const Sample& s, double epsilon,
                                 const BatchMode& mode, Strategy strategy,
                                 EnumerationStats* stats = nullptr) {
  if (s.label >= e.outputs()) {
    throw Error(ErrorKind::kInvalidArgument,
                "label " + std::to_string(s.label) + " out of range");
  }
  if (e.classify(s.features) != s.label) return SampleStatus::kMisclassified;
  RobustnessQuery q{s.features, epsilon, s.label, std::nullopt};
  Verdict v;
  if (mode.window) {
    v = check_robustness_sliding_window(e, q, *mode.window, mode.image, strategy).verdict;
  } else {
    v = check_robustness(e, q, strategy);
  }
  if (stats) {
    stats->classes += v.stats.classes;
    stats->nodes_visited += v.stats.nodes_visited;
    stats->infeasible += v.stats.infeasible;
  }
  return v.pass ? SampleStatus::kRobust : SampleStatus::kNotRobust;
}

/// Runs the robustness check for every sample. With `jobs > 1` samples are
/// spread over worker threads; results are merged by sample index, so the
/// summary does not depend on the job count.
inline BatchSummary batch_robustness(const Ensemble& e, std::span<const Sample> test_set,
                                     double epsilon, const BatchMode& mode = {},
                                     Strategy strategy = Strategy::kLeastPointsFirst,
                                     std::size_t jobs = 1) {
  detail::check_classifier(e);
  if (mode.window) validate_window(e, *mode.window, mode.image);
  const std::size_t count = test_set.size();
  std::vector<SampleStatus> status(count, SampleStatus::kRobust);
  std::vector<EnumerationStats> stats(count);
  std::vector<std::exception_ptr> errors(count);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        status[i] = check_sample(e, test_set[i], epsilon, mode, strategy, &stats[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  BatchSummary summary;
  summary.total = count;
  for (std::size_t i = 0; i < count; ++i) {
    if (errors[i]) {
      try {
        std::rethrow_exception(errors[i]);
      } catch (const Error& err) {
        throw Error(err.kind(), "sample " + std::to_string(i) + ": " + err.what());
      }
    }
    summary.stats.classes += stats[i].classes;
    summary.stats.nodes_visited += stats[i].nodes_visited;
    summary.stats.infeasible += stats[i].infeasible;
    if (status[i] == SampleStatus::kRobust) {
      ++summary.robust_count;
    } else {
      if (status[i] == SampleStatus::kMisclassified) ++summary.misclassified;
      summary.failures.push_back(i);
    }
  }
  summary.status = std::move(status);
  return summary;
}

// ---------------------------------------------------------------------------
// Test-set CSV: n feature columns then an integer label, header optional.

inline std::vector<Sample> parse_test_set(std::string_view text, std::size_t n) {
  std::vector<Sample> samples;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
      auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    const std::string where = "row " + std::to_string(line_no);
    if (cells.size() != n + 1) {
      throw Error(ErrorKind::kParse, where + ": expected " + std::to_string(n + 1) +
                                         " columns, found " + std::to_string(cells.size()));
    }
    Sample s;
    s.features.reserve(n);
    try {
      for (std::size_t i = 0; i < n; ++i) s.features.push_back(parse_float(cells[i]));
      float label = parse_float(cells[n]);
      if (label < 0 || label != static_cast<float>(static_cast<std::size_t>(label))) {
        throw Error(ErrorKind::kParse, "label must be a non-negative integer");
      }
      s.label = static_cast<std::size_t>(label);
    } catch (const Error& err) {
      // A non-numeric first row is a header.
      if (samples.empty() && line_no == 1) continue;
      throw Error(ErrorKind::kParse, where + ": " + err.what());
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

inline std::vector<Sample> load_test_set(const std::string& path, std::size_t n) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kParse, "cannot open test set '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_test_set(buf.str(), n);
}

}  // namespace treecert
