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

// Command-line front end. Kept in a header so tests can drive `run_cli`
// in-process with captured streams.
//
// Exit codes: 0 verified / completed, 1 property violated, 2 usage or
// input error.

#pragma once

#include <chrono>
#include <cstdio>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "treecert/treecert.hpp"

namespace treecert::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitViolated = 1;
inline constexpr int kExitError = 2;

struct Counterexample {
  std::string region;
  std::string output;
};

struct RunReport {
  bool pass = true;
  std::optional<Method> method;
  std::uint64_t classes_visited = 0;
  double elapsed_seconds = 0.0;
  std::optional<Counterexample> counterexample;  // present iff !pass

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["verdict"] = pass ? "PASS" : "FAIL";
    if (method) j["method"] = to_string(*method);
    j["classes_visited"] = classes_visited;
    j["elapsed_seconds"] = elapsed_seconds;
    if (counterexample) {
      j["counterexample"] = {{"region", counterexample->region},
                             {"output", counterexample->output}};
    }
    return j;
  }

  void print(std::ostream& out) const {
    out << "verdict: " << (pass ? "PASS" : "FAIL") << "\n";
    if (method) out << "method: " << to_string(*method) << "\n";
    out << "classes_visited: " << classes_visited << "\n";
    out << "elapsed: " << format_seconds(elapsed_seconds) << " s\n";
    if (counterexample) {
      out << "counterexample region: " << counterexample->region << "\n";
      out << "counterexample output: " << counterexample->output << "\n";
    }
  }

  static std::string format_seconds(double s) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", s);
    return buf;
  }
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

inline std::string format_tuple(std::span<const float> y) {
  std::string out;
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (j) out += " ";
    out += format_float(y[j]);
  }
  return out;
}

inline std::vector<float> parse_row(const std::string& text) {
  std::vector<float> x;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    x.push_back(parse_float(std::string_view(text).substr(start, end - start)));
    start = end + 1;
  }
  return x;
}

/// A comma list of bounds, or a single value broadcast to `m` outputs.
inline std::vector<double> parse_bounds(const std::string& text, std::size_t m,
                                        const char* name) {
  std::vector<float> raw = parse_row(text);
  if (raw.size() == 1) return std::vector<double>(m, raw.front());
  if (raw.size() != m) {
    throw Error(ErrorKind::kInputShape, std::string("--") + name + " needs 1 or " +
                                            std::to_string(m) + " values");
  }
  return {raw.begin(), raw.end()};
}

inline std::vector<std::size_t> parse_sizes(const std::string& text, std::size_t count,
                                            const char* name) {
  std::vector<std::size_t> out;
  for (float v : parse_row(text)) {
    if (v < 0 || v != static_cast<float>(static_cast<std::size_t>(v))) {
      throw Error(ErrorKind::kParse, std::string("--") + name + " takes non-negative integers");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.size() != count) {
    throw Error(ErrorKind::kParse, std::string("--") + name + " takes " +
                                       std::to_string(count) + " comma-separated integers");
  }
  return out;
}

inline Strategy parse_strategy(const std::string& text) {
  auto s = strategy_from_string(text);
  if (!s) throw Error(ErrorKind::kParse, "unknown strategy '" + text + "'");
  return *s;
}

inline Box domain_for(const Ensemble& e, const std::string& text) {
  return text.empty() ? full_domain(e) : parse_domain(text, e.inputs());
}

inline void fill_counterexample(RunReport& report, const Verdict& v) {
  report.pass = v.pass;
  if (v.counterexample) {
    report.counterexample = Counterexample{format_box(v.counterexample->region),
                                           format_tuple(v.counterexample->output_point())};
  }
}

}  // namespace detail

struct Options {
  std::string model;
  std::string input;
  std::string domain;
  std::string alpha = "0";
  std::string beta = "1";
  std::string strategy = "least-points";
  std::string testset;
  double epsilon = 0.0;
  std::string window;
  std::string image_dims;
  std::size_t jobs = 1;
  bool json = false;
};

inline int cmd_eval(const Options& o, std::ostream& out) {
  Ensemble e = load_model_file(o.model);
  std::vector<float> x = detail::parse_row(o.input);
  std::vector<float> y = e.eval(x);
  if (o.json) {
    out << nlohmann::json{{"output", y}, {"class", argmax(y)}}.dump() << "\n";
  } else {
    out << "output: " << detail::format_tuple(y) << "\n";
    out << "class: " << argmax(y) << "\n";
  }
  return kExitOk;
}

inline int cmd_check_range(const Options& o, std::ostream& out) {
  Ensemble e = load_model_file(o.model);
  Box domain = detail::domain_for(e, o.domain);
  RangeSpec spec{detail::parse_bounds(o.alpha, e.outputs(), "alpha"),
                 detail::parse_bounds(o.beta, e.outputs(), "beta")};
  spec.validate(e.outputs());
  const Strategy strategy = detail::parse_strategy(o.strategy);

  auto start = detail::Clock::now();
  RangeVerdict result = check_range(e, domain, spec, strategy);
  RunReport report;
  report.elapsed_seconds = detail::seconds_since(start);
  report.method = result.method;
  report.classes_visited = result.verdict.stats.classes;
  detail::fill_counterexample(report, result.verdict);

  if (o.json) {
    out << report.to_json().dump() << "\n";
  } else {
    report.print(out);
  }
  return report.pass ? kExitOk : kExitViolated;
}

inline int cmd_check_robustness(const Options& o, std::ostream& out) {
  Ensemble e = load_model_file(o.model);
  BatchMode mode;
  if (!o.window.empty()) {
    if (o.image_dims.empty()) {
      throw Error(ErrorKind::kInvalidArgument, "--window requires --image-dims");
    }
    auto w = detail::parse_sizes(o.window, 3, "window");
    auto d = detail::parse_sizes(o.image_dims, 2, "image-dims");
    mode.window = WindowSpec{w[0], w[1], w[2]};
    mode.image = ImageDims{d[0], d[1]};
  } else if (!o.image_dims.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "--image-dims is only used with --window");
  }
  if (!(o.epsilon >= 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "--epsilon must be non-negative");
  }
  const Strategy strategy = detail::parse_strategy(o.strategy);
  std::vector<Sample> samples = load_test_set(o.testset, e.inputs());

  auto start = detail::Clock::now();
  BatchSummary s = batch_robustness(e, samples, o.epsilon, mode, strategy, o.jobs);
  const double elapsed = detail::seconds_since(start);

  char pct[32];
  std::snprintf(pct, sizeof(pct), "%.1f", s.robustness_percent());
  if (o.json) {
    nlohmann::json j;
    j["robustness_percent"] = s.robustness_percent();
    j["robust"] = s.robust_count;
    j["total"] = s.total;
    j["misclassified"] = s.misclassified;
    j["failures"] = s.failures;
    j["classes_visited"] = s.stats.classes;
    j["elapsed_seconds"] = elapsed;
    out << j.dump() << "\n";
  } else {
    out << "robustness: " << pct << "% (" << s.robust_count << "/" << s.total << ")\n";
    out << "misclassified: " << s.misclassified << "\n";
    out << "failures:";
    for (auto i : s.failures) out << " " << i;
    out << "\n";
    out << "classes_visited: " << s.stats.classes << "\n";
    out << "elapsed: " << RunReport::format_seconds(elapsed) << " s\n";
  }
  return kExitOk;
}

inline int cmd_count_classes(const Options& o, std::ostream& out) {
  Ensemble e = load_model_file(o.model);
  Box domain = detail::domain_for(e, o.domain);
  const Strategy strategy = detail::parse_strategy(o.strategy);
  auto start = detail::Clock::now();
  auto result = for_each_class(e, domain, strategy, [](const Mapping&) {});
  const double elapsed = detail::seconds_since(start);
  if (o.json) {
    out << nlohmann::json{{"classes", result.stats.classes},
                          {"nodes_visited", result.stats.nodes_visited},
                          {"elapsed_seconds", elapsed}}
               .dump()
        << "\n";
  } else {
    out << "classes: " << result.stats.classes << "\n";
    out << "elapsed: " << RunReport::format_seconds(elapsed) << " s\n";
  }
  return kExitOk;
}

/// Parses `args` (without the program name) and runs one subcommand.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err) {
  CLI::App app{"Formal verification of tree ensembles", "treecert"};
  app.require_subcommand(1);
  Options o;

  auto strategy_help = "child order: least-points (default), left, right";

  auto* eval = app.add_subcommand("eval", "Evaluate the model on one input row");
  eval->add_option("model", o.model, "model JSON file")->required();
  eval->add_option("input", o.input, "comma-separated input row")->required();
  eval->add_flag("--json", o.json, "machine-readable output");

  auto* range = app.add_subcommand("check-range", "Check plausibility of range");
  range->add_option("model", o.model, "model JSON file")->required();
  range->add_option("--domain", o.domain, "lo:hi per input, or one pair for all");
  range->add_option("--alpha", o.alpha, "lower bound(s), one or per output")->capture_default_str();
  range->add_option("--beta", o.beta, "upper bound(s), one or per output")->capture_default_str();
  range->add_option("--strategy", o.strategy, strategy_help);
  range->add_flag("--json", o.json, "machine-readable report");

  auto* robust = app.add_subcommand("check-robustness", "Robustness over a labelled test set");
  robust->add_option("model", o.model, "model JSON file")->required();
  robust->add_option("--testset", o.testset, "CSV: features then label")->required();
  robust->add_option("--epsilon", o.epsilon, "noise margin per feature")->required();
  robust->add_option("--strategy", o.strategy, strategy_help);
  robust->add_option("--window", o.window, "W,H,STRIDE sliding window");
  robust->add_option("--image-dims", o.image_dims, "W,H of the input image");
  robust->add_option("--jobs", o.jobs, "worker threads");
  robust->add_flag("--json", o.json, "machine-readable report");

  auto* count = app.add_subcommand("count-classes", "Count equivalence classes");
  count->add_option("model", o.model, "model JSON file")->required();
  count->add_option("--domain", o.domain, "lo:hi per input, or one pair for all");
  count->add_option("--strategy", o.strategy, strategy_help);
  count->add_flag("--json", o.json, "machine-readable report");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }

  try {
    if (eval->parsed()) return cmd_eval(o, out);
    if (range->parsed()) return cmd_check_range(o, out);
    if (robust->parsed()) return cmd_check_robustness(o, out);
    if (count->parsed()) return cmd_count_classes(o, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace treecert::cli
