#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dirgof/core.hpp"
#include "dirgof/goftest.hpp"
#include "dirgof/io.hpp"
#include "dirgof/parfit.hpp"
#include "dirgof/simsuite.hpp"
#include "dirgof/stats.hpp"

namespace dirgof::cli {

struct RunConfig {
  std::string command = "test";
  std::string data;
  /// Empty: S1 for trace/power, QQ for qqcheck.
  std::string scenario;
  std::string family = "linear";
  int q = 1;
  int n = 100;
  int p = 1;
  /// 0: command default.
  double h = 0.0;
  /// Comma list, or lo:hi:count for a log-spaced grid.
  std::string h_grid = "0.1:2.0:20";
  int B = 200;
  int M = 500;
  std::string alpha_list = "0.01,0.05,0.10";
  int quad_res = 0;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out;
  /// Simple null parameter for `test` (comma list); empty selects the composite null.
  std::string theta0;
  /// Deviation coefficient for `power`; NaN selects the scenario's own.
  double delta = std::numeric_limits<double>::quiet_NaN();
};

inline std::string scenario_id(const RunConfig& c) {
  if (!c.scenario.empty()) return c.scenario;
  return c.command == "qqcheck" ? "QQ" : "S1";
}

inline std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  std::size_t k = 0;
  while (std::getline(ss, item, ',')) out.push_back(io::parse_number(item, 1, ++k));
  require(!out.empty(), ErrorCode::invalid_argument, what + " is empty");
  return out;
}

inline std::vector<double> parse_h_grid(const std::string& text) {
  const auto c1 = text.find(':');
  if (c1 == std::string::npos) return parse_list(text, "bandwidth grid");
  const auto c2 = text.find(':', c1 + 1);
  require(c2 != std::string::npos, ErrorCode::invalid_argument, "grid must be lo:hi:count");
  const double lo = io::parse_number(text.substr(0, c1), 1, 1);
  const double hi = io::parse_number(text.substr(c1 + 1, c2 - c1 - 1), 1, 2);
  const double count = io::parse_number(text.substr(c2 + 1), 1, 3);
  require(count >= 2 && count == std::floor(count), ErrorCode::invalid_argument,
          "grid count must be an integer >= 2");
  return log_grid(lo, hi, static_cast<int>(count));
}

inline void validate(const RunConfig& c) {
  const std::vector<std::string> commands{"test", "trace", "power", "qqcheck"};
  require(std::find(commands.begin(), commands.end(), c.command) != commands.end(),
          ErrorCode::invalid_argument, "unknown command '" + c.command + "'");
  require(c.q >= 1, ErrorCode::invalid_argument, "q must be >= 1");
  require(c.n >= 2, ErrorCode::invalid_argument, "n must be >= 2");
  require(c.p == 0 || c.p == 1, ErrorCode::invalid_argument, "p must be 0 or 1");
  require(c.h >= 0.0 && std::isfinite(c.h), ErrorCode::invalid_argument, "h must be positive");
  require(c.B >= 1, ErrorCode::invalid_argument, "B must be >= 1");
  require(c.M >= 1, ErrorCode::invalid_argument, "M must be >= 1");
  require(c.quad_res == 0 || c.quad_res >= 8, ErrorCode::invalid_argument,
          "quad-res must be 0 (auto) or >= 8");
  require(c.workers >= 1, ErrorCode::invalid_argument, "workers must be >= 1");
  if (c.command == "test") {
    require(!c.data.empty(), ErrorCode::invalid_argument, "test needs --data");
    parse_family_kind(c.family);
  } else {
    make_scenario(scenario_id(c), c.q);
    for (double a : parse_list(c.alpha_list, "alpha list")) {
      require(a > 0.0 && a < 1.0, ErrorCode::invalid_argument, "alphas must lie in (0, 1)");
    }
    if (c.command != "qqcheck") {
      TraceConfig tc;
      tc.h_grid = parse_h_grid(c.h_grid);
      tc.validate();
    }
  }
}

inline GofConfig gof_config(const RunConfig& c, double h) {
  GofConfig g;
  g.local.p = c.p;
  g.local.h = h;
  g.quad_resolution = c.quad_res;
  g.B = c.B;
  g.seed = c.seed;
  g.workers = c.workers;
  return g;
}

inline nlohmann::ordered_json config_echo(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["command"] = c.command;
  if (c.command == "test") {
    j["data"] = c.data;
    j["family"] = c.family;
    j["hypothesis"] = c.theta0.empty() ? "composite" : "simple";
    if (!c.theta0.empty()) j["theta0"] = parse_list(c.theta0, "theta0");
  } else {
    j["scenario"] = scenario_id(c);
    j["q"] = c.q;
    j["n"] = c.n;
    j["M"] = c.M;
    if (c.command != "qqcheck") {
      j["h_grid"] = c.h_grid;
      j["alphas"] = c.alpha_list;
    }
  }
  j["p"] = c.p;
  j["kernel"] = "von-mises";
  j["h"] = c.h;
  j["B"] = c.B;
  j["quad_res"] = c.quad_res;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  return j;
}

inline std::string echo_lines(const RunConfig& c) {
  std::string s;
  const auto echo = config_echo(c);
  for (const auto& [key, value] : echo.items()) s += "# " + key + " = " + value.dump() + "\n";
  return s;
}

/// Type-7 sample quantile.
inline double quantile(Vector v, double prob) {
  std::sort(v.data(), v.data() + v.size());
  const double pos = prob * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<Eigen::Index>(std::floor(pos));
  const auto hi = std::min<Eigen::Index>(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// Default test bandwidth when none is given: 0.5 n^{-1/(q+4)}.
inline double default_test_bandwidth(Eigen::Index n, int q) {
  return 0.5 * std::pow(static_cast<double>(n), -1.0 / (q + 4));
}

inline std::string cmd_test(const RunConfig& c) {
  validate(c);
  const DirLinSample sample = io::read_sample_csv(c.data);
  const int q = sample.q();
  const double h = c.h > 0.0 ? c.h : default_test_bandwidth(sample.size(), q);
  GofConfig g = gof_config(c, h);
  const FamilyPtr family = make_family(parse_family_kind(c.family), q, Matrix(0, q + 1));
  if (!c.theta0.empty()) {
    const auto t = parse_list(c.theta0, "theta0");
    g.hypothesis = NullHypothesis::simple;
    g.theta0 = Eigen::Map<const Vector>(t.data(), static_cast<Eigen::Index>(t.size()));
  }
  require(sample.size() >= family->dim_theta(), ErrorCode::data_error,
          "family " + family->name() + " needs at least " + std::to_string(family->dim_theta()) +
              " rows, data has " + std::to_string(sample.size()));
  const GofResult r = bootstrap_test(sample, *family, g);

  nlohmann::ordered_json j;
  RunConfig echo = c;
  echo.h = h;
  j["config"] = config_echo(echo);
  j["config"]["q"] = q;
  j["config"]["n"] = sample.size();
  j["config"]["quad_nodes"] = r.quad_nodes;
  j["statistic"] = r.statistic;
  j["p_value"] = r.p_value;
  j["B"] = r.B;
  j["theta_hat"] = std::vector<double>(r.theta_hat.data(), r.theta_hat.data() + r.theta_hat.size());
  nlohmann::ordered_json qs;
  for (const auto& [key, prob] : {std::pair{"0.5", 0.5}, {"0.9", 0.9}, {"0.95", 0.95}, {"0.99", 0.99}}) {
    qs[key] = quantile(r.boot, prob);
  }
  j["bootstrap_quantiles"] = qs;
  j["flags"] = {{"regularized_nodes", r.regularized_nodes},
                {"empty_nodes", r.empty_nodes},
                {"failed_refits", r.failed_refits},
                {"fit_converged", r.fit_converged}};
  return j.dump(2) + "\n";
}

inline std::string trace_csv(const RunConfig& c, const TraceResult& t) {
  std::string s = echo_lines(c);
  s += "# delta = " + io::format_number(t.delta) + "\n";
  s += "scenario,q,n,h,alpha,rejection_rate,M,B,seed\n";
  for (std::size_t j = 0; j < t.h_grid.size(); ++j) {
    for (std::size_t a = 0; a < t.alphas.size(); ++a) {
      s += t.scenario + "," + std::to_string(t.q) + "," + std::to_string(t.n) + "," +
           io::format_number(t.h_grid[j]) + "," + io::format_number(t.alphas[a]) + "," +
           io::format_number(t.rejection(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(a))) +
           "," + std::to_string(t.M) + "," + std::to_string(t.B) + "," + std::to_string(t.seed) + "\n";
    }
  }
  return s;
}

inline TraceConfig trace_config(const RunConfig& c) {
  TraceConfig tc;
  tc.n = c.n;
  tc.h_grid = parse_h_grid(c.h_grid);
  tc.M = c.M;
  tc.B = c.B;
  tc.alphas = parse_list(c.alpha_list, "alpha list");
  tc.seed = c.seed;
  tc.workers = c.workers;
  tc.test = gof_config(c, tc.h_grid.front());
  return tc;
}

inline std::string cmd_trace(const RunConfig& c) {
  validate(c);
  const Scenario sc = make_scenario(scenario_id(c), c.q).null();
  return trace_csv(c, significance_trace(sc, trace_config(c)));
}

inline std::string cmd_power(const RunConfig& c) {
  validate(c);
  const Scenario base = make_scenario(scenario_id(c), c.q);
  const double d = std::isnan(c.delta) ? base.alt_delta : c.delta;
  require(d != 0.0, ErrorCode::invalid_argument,
          "power needs a nonzero deviation; scenario " + scenario_id(c) + " has none");
  return trace_csv(c, significance_trace(base.with_delta(d), trace_config(c)));
}

inline std::string cmd_qqcheck(const RunConfig& c) {
  validate(c);
  const Scenario sc = make_scenario(scenario_id(c), c.q);
  QqConfig qc;
  qc.n = c.n;
  qc.h = c.h;
  qc.M = c.M;
  qc.seed = c.seed;
  qc.workers = c.workers;
  qc.test = gof_config(c, 1.0);
  const QqResult r = qq_statistics(sc, qc);

  RunConfig echo = c;
  echo.h = r.h;
  std::string s = echo_lines(echo);
  s += "# center = " + io::format_number(r.center_scale.center) + "\n";
  s += "# scale = " + io::format_number(r.center_scale.scale) + "\n";
  s += "rep,t_std\n";
  for (Eigen::Index i = 0; i < r.t_std.size(); ++i) {
    s += std::to_string(i + 1) + "," + io::format_number(r.t_std[i]) + "\n";
  }
  if (r.t_std.size() < 3) {
    s += "# normality tests skipped: need at least 3 replicates, have " +
         std::to_string(r.t_std.size()) + "\n";
    return s;
  }
  const std::vector<double> v(r.t_std.data(), r.t_std.data() + r.t_std.size());
  s += "ks_pvalue," + io::format_number(stats::ks_test_normal(v).p_value) + "\n";
  if (v.size() <= 5000) {
    s += "sw_pvalue," + io::format_number(stats::shapiro_wilk(v).p_value) + "\n";
  } else {
    s += "# Shapiro-Wilk skipped: more than 5000 replicates\n";
  }
  return s;
}

inline std::string run(const RunConfig& c) {
  if (c.command == "test") return cmd_test(c);
  if (c.command == "trace") return cmd_trace(c);
  if (c.command == "power") return cmd_power(c);
  if (c.command == "qqcheck") return cmd_qqcheck(c);
  throw Error(ErrorCode::invalid_argument, "unknown command '" + c.command + "'");
}

/// Exit code for an error: 2 for bad input or configuration, 3 for numerical failure.
inline int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::nonconvergent_quadrature:
    case ErrorCode::rank_deficient:
    case ErrorCode::no_convergence:
      return 3;
    default:
      return 2;
  }
}

}  // namespace dirgof::cli
