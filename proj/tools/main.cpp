// Copyright 2026 The qchannel authors
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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qchannel/maps.hpp"
#include "qchannel/mml.hpp"
#include "qchannel/parallel.hpp"
#include "qchannel/tomography.hpp"
#include "qchannel/version.hpp"

namespace {

using nlohmann::ordered_json;
using namespace qchannel;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string g_command_line;
nlohmann::json g_config = nlohmann::json::object();

std::string quote_arg(const std::string& arg) {
  if (arg.find_first_of(" \"") == std::string::npos) {
    return arg;
  }
  std::string quoted = "\"";
  for (char c : arg) {
    if (c == '"') {
      quoted += '\\';
    }
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::string join_command_line(int argc, char** argv) {
  std::string joined;
  for (int i = 0; i < argc; ++i) {
    if (i > 0) {
      joined += ' ';
    }
    joined += quote_arg(argv[i]);
  }
  return joined;
}

/// Values from --config act as defaults: they are looked up per subcommand
/// section before CLI11 binds the options, so explicit flags always win.
template <typename T>
T cfgv(const std::string& section, const std::string& key, T fallback) {
  if (g_config.contains(section) && g_config[section].is_object() &&
      g_config[section].contains(key)) {
    return g_config[section][key].get<T>();
  }
  return fallback;
}

std::optional<std::uint64_t> config_seed(const std::string& section) {
  if (g_config.contains(section) && g_config[section].is_object() &&
      g_config[section].contains("seed")) {
    return g_config[section]["seed"].get<std::uint64_t>();
  }
  if (g_config.contains("seed") && !g_config["seed"].is_object()) {
    return g_config["seed"].get<std::uint64_t>();
  }
  return std::nullopt;
}

std::optional<unsigned> config_threads(const std::string& section) {
  if (g_config.contains(section) && g_config[section].is_object() &&
      g_config[section].contains("threads")) {
    return g_config[section]["threads"].get<unsigned>();
  }
  if (g_config.contains("threads") && !g_config["threads"].is_object()) {
    return g_config["threads"].get<unsigned>();
  }
  return std::nullopt;
}

void load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw UsageError("cannot read config file " + path);
  }
  try {
    in >> g_config;
  } catch (const nlohmann::json::exception& err) {
    throw UsageError("config file " + path + ": " + err.what());
  }
  if (!g_config.is_object()) {
    throw UsageError("config file " + path + " must hold a JSON object");
  }
}

std::string find_config_arg(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) {
      return argv[i + 1];
    }
    if (arg.rfind("--config=", 0) == 0) {
      return arg.substr(9);
    }
  }
  return {};
}

std::uint64_t entropy_seed() {
  std::random_device device;
  return (static_cast<std::uint64_t>(device()) << 32) ^ device();
}

std::uint64_t resolve_seed(const CLI::Option* opt, std::uint64_t parsed,
                           const std::string& section) {
  if (opt->count() > 0) {
    return parsed;
  }
  if (const auto from_config = config_seed(section)) {
    return *from_config;
  }
  return entropy_seed();
}

unsigned resolve_threads(const CLI::Option* opt, unsigned parsed,
                         const std::string& section) {
  unsigned value = parsed;
  if (opt->count() == 0) {
    if (const auto from_config = config_threads(section)) {
      value = *from_config;
    }
  }
  if (value == 0) {
    throw UsageError("--threads must be positive");
  }
  return value;
}

void write_text_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open " + path + " for writing");
  }
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) {
    throw IoError("failed while writing " + path);
  }
}

std::string format_num(double value, const char* fmt = "%.10g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, value);
  return buf;
}

// ---------------------------------------------------------------------------
// Map specifications

struct MapSpec {
  std::string name;
  bool affine = true;
  AffineChannel channel;
  double npr_theta = 0.0;
};

std::optional<std::vector<double>> parse_number_list(const std::string& text) {
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string token =
        text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    try {
      std::size_t used = 0;
      const double value = std::stod(token, &used);
      if (used != token.size() || !std::isfinite(value)) {
        return std::nullopt;
      }
      values.push_back(value);
    } catch (const std::exception&) {
      return std::nullopt;
    }
    if (comma == std::string::npos) {
      break;
    }
    pos = comma + 1;
  }
  return values;
}

MapSpec parse_map_spec(const std::string& text) {
  MapSpec spec;
  spec.name = text;
  if (text == "identity") {
    spec.channel = AffineChannel();
    return spec;
  }
  if (text == "unot") {
    spec.channel = unot();
    return spec;
  }
  if (text == "unot-optimal" || text == "unot_optimal") {
    spec.name = "unot-optimal";
    spec.channel = unot_optimal();
    return spec;
  }
  if (text == "average") {
    spec.channel = average_channel();
    return spec;
  }
  if (text.rfind("npr:", 0) == 0) {
    const std::string arg = text.substr(4);
    try {
      std::size_t used = 0;
      const double theta = std::stod(arg, &used);
      if (used != arg.size() || !std::isfinite(theta)) {
        throw std::invalid_argument("bad theta");
      }
      spec.affine = false;
      spec.npr_theta = theta;
      return spec;
    } catch (const std::exception&) {
      throw UsageError("invalid rotation strength in map \"" + text + "\"");
    }
  }
  if (const auto values = parse_number_list(text)) {
    if (values->size() == 12) {
      std::vector<double> params(values->begin(), values->end());
      spec.name = "custom";
      spec.channel = unpack_channel(params);
      return spec;
    }
    throw UsageError("channel literals need 12 numbers (t then T row-major), "
                     "got " +
                     std::to_string(values->size()));
  }
  throw UsageError(
      "unknown map \"" + text +
      "\"; expected identity, unot, unot-optimal, average, npr:<theta> or a "
      "12-number channel literal");
}

StateTransform map_transform(const MapSpec& spec) {
  if (spec.affine) {
    return as_transform(spec.channel);
  }
  return npr_transform(spec.npr_theta);
}

AffineChannel require_affine(const MapSpec& spec) {
  if (!spec.affine) {
    throw UsageError("map \"" + spec.name +
                     "\" is nonlinear and has no affine channel form");
  }
  return spec.channel;
}

// ---------------------------------------------------------------------------
// Shared report pieces

// Matrices are emitted as flat arrays in row-major order.
ordered_json matrix_json(const Eigen::MatrixXd& m) {
  ordered_json flat = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      flat.push_back(m(i, j));
    }
  }
  return flat;
}

ordered_json vector_json(const Eigen::Vector3d& v) {
  return ordered_json::array({v(0), v(1), v(2)});
}

ordered_json report_header(std::uint64_t seed) {
  ordered_json report;
  report["version"] = kVersion;
  report["command"] = g_command_line;
  report["seed"] = seed;
  return report;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) {
    throw std::invalid_argument("quantile of empty sample");
  }
  std::sort(values.begin(), values.end());
  const double pos = q * (static_cast<double>(values.size()) - 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - std::floor(pos);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

double sample_mean(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) {
    sum += v;
  }
  return sum / static_cast<double>(values.size());
}

double sample_std(const std::vector<double>& values) {
  if (values.size() < 2) {
    return 0.0;
  }
  const double mean = sample_mean(values);
  double ss = 0.0;
  for (double v : values) {
    ss += (v - mean) * (v - mean);
  }
  return std::sqrt(ss / (static_cast<double>(values.size()) - 1.0));
}

void add_ml_options(CLI::App* cmd, const std::string& section, MlConfig& cfg) {
  cfg.max_iterations = cfgv(section, "max-iterations", cfg.max_iterations);
  cfg.simplex_scale = cfgv(section, "simplex-scale", cfg.simplex_scale);
  cfg.convergence_tol = cfgv(section, "convergence-tol", cfg.convergence_tol);
  cfg.restarts = cfgv(section, "restarts", cfg.restarts);
  cfg.cp_tol = cfgv(section, "cp-tol", cfg.cp_tol);
  cfg.prob_floor = cfgv(section, "prob-floor", cfg.prob_floor);
  cmd->add_option("--max-iterations", cfg.max_iterations,
                  "Simplex iteration cap per start");
  cmd->add_option("--simplex-scale", cfg.simplex_scale,
                  "Initial simplex edge length");
  cmd->add_option("--convergence-tol", cfg.convergence_tol,
                  "Stop when the simplex value spread falls below this");
  cmd->add_option("--restarts", cfg.restarts,
                  "Number of optimizer starts (first is the fully mixed map)");
  cmd->add_option("--cp-tol", cfg.cp_tol,
                  "Allowed Choi eigenvalue slack in the CP constraint");
  cmd->add_option("--prob-floor", cfg.prob_floor,
                  "Lower clamp for cell probabilities inside the likelihood");
}

// ---------------------------------------------------------------------------
// gen-data

struct GenDataArgs {
  std::string map;
  long shots_per_cell = 100;
  long npr_states = 1800;
  std::string out;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* shots_opt = nullptr;
  CLI::Option* states_opt = nullptr;
};

void run_gen_data(GenDataArgs& args) {
  const std::uint64_t seed = resolve_seed(args.seed_opt, args.seed, "gen-data");
  if (args.out.empty()) {
    throw UsageError("gen-data needs --out");
  }
  const MapSpec spec = parse_map_spec(args.map);
  RandomStream rng(seed);
  ClickDataset dataset;
  if (spec.affine) {
    if (args.states_opt->count() > 0) {
      throw UsageError("--npr-states only applies to npr maps");
    }
    if (args.shots_per_cell < 1) {
      throw UsageError("--shots-per-cell must be positive");
    }
    dataset = simulate_clicks(map_transform(spec),
                              standard_plan(args.shots_per_cell), rng,
                              spec.name);
  } else {
    if (args.shots_opt->count() > 0) {
      throw UsageError("--shots-per-cell does not apply to npr maps; use "
                       "--npr-states");
    }
    if (args.npr_states < 1) {
      throw UsageError("--npr-states must be positive");
    }
    dataset = simulate_npr_dataset(spec.npr_theta, args.npr_states, rng);
  }
  save_dataset(dataset, args.out);
  std::cout << "wrote " << args.out << ": N=" << dataset.meta.n_total
            << " seed=" << seed << "\n";
}

// ---------------------------------------------------------------------------
// estimate

struct EstimateArgs {
  std::string data;
  std::string out;
  std::string distance_to;
  long distance_samples = 10000;
  bool raw = false;
  MlConfig cfg;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
};

void run_estimate(EstimateArgs& args) {
  const std::uint64_t seed = resolve_seed(args.seed_opt, args.seed, "estimate");
  const ClickDataset dataset = load_dataset(args.data);

  std::optional<AffineChannel> raw_channel;
  if (args.raw) {
    raw_channel = linear_inversion(dataset);
  }

  RandomStream rng(seed);
  const MlResult result = mml_estimate(dataset, args.cfg, rng);
  const CpCheck cp = is_cp(result.channel, args.cfg.cp_tol);
  const SignedSvd svd = signed_svd(result.channel);

  ordered_json report = report_header(seed);
  report["data"] = {{"path", args.data},
                    {"source_map", dataset.meta.source_map},
                    {"n_clicks", dataset.meta.n_total}};
  report["block_matrix"] = matrix_json(result.channel.block_matrix());
  report["log_likelihood"] = result.log_likelihood;
  report["min_choi_eigenvalue"] = cp.min_eigenvalue;
  report["signed_singular_values"] = vector_json(svd.lambda);
  report["feasible"] = result.feasible;
  report["iterations_used"] = result.iterations_used;
  report["restarts_used"] = result.restarts_used;

  if (!args.distance_to.empty()) {
    if (args.distance_samples < 1) {
      throw UsageError("--distance-samples must be positive");
    }
    const MapSpec reference = parse_map_spec(args.distance_to);
    const DistanceEstimate distance =
        channel_distance(as_transform(result.channel),
                         map_transform(reference), args.distance_samples, rng);
    report["distance_to"] = {{"map", reference.name},
                             {"samples", args.distance_samples},
                             {"mean", distance.mean},
                             {"standard_error", distance.standard_error}};
  }
  if (raw_channel) {
    report["raw"] = {{"block_matrix", matrix_json(raw_channel->block_matrix())}};
  }
  write_text_output(args.out, report.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// unot-convergence

struct UnotConvergenceArgs {
  std::vector<long> n_grid = {18, 90, 180, 900, 1800, 9000, 18000};
  int repeats = 10;
  long distance_samples = 10000;
  std::string out;
  MlConfig cfg;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
};

void run_unot_convergence(UnotConvergenceArgs& args) {
  const std::string section = "unot-convergence";
  const std::uint64_t seed = resolve_seed(args.seed_opt, args.seed, section);
  const unsigned threads =
      resolve_threads(args.threads_opt, args.threads, section);
  if (args.out.empty()) {
    throw UsageError("unot-convergence needs --out");
  }
  if (args.n_grid.empty()) {
    throw UsageError("--n-grid must not be empty");
  }
  for (long n : args.n_grid) {
    if (n < 1) {
      throw UsageError("--n-grid entries must be positive");
    }
  }
  if (args.repeats < 1) {
    throw UsageError("--repeats must be positive");
  }
  if (args.distance_samples < 1) {
    throw UsageError("--distance-samples must be positive");
  }

  const std::size_t n_tasks =
      args.n_grid.size() * static_cast<std::size_t>(args.repeats);
  std::vector<double> dist_unot(n_tasks);
  std::vector<double> dist_opt(n_tasks);
  std::vector<double> min_eigs(n_tasks);
  const RandomStream master(seed);
  const AffineChannel target = unot();
  const AffineChannel optimal = unot_optimal();

  parallel_for(n_tasks, threads, [&](std::size_t task) {
    const long n_clicks =
        args.n_grid[task / static_cast<std::size_t>(args.repeats)];
    RandomStream stream = master.substream(task);
    const ClickDataset dataset =
        simulate_clicks(as_transform(target), standard_plan_total(n_clicks),
                        stream, "unot");
    const MlResult result = mml_estimate(dataset, args.cfg, stream);
    dist_unot[task] =
        channel_distance(result.channel, target, args.distance_samples, stream)
            .mean;
    dist_opt[task] =
        channel_distance(result.channel, optimal, args.distance_samples,
                         stream)
            .mean;
    min_eigs[task] = is_cp(result.channel, args.cfg.cp_tol).min_eigenvalue;
  });

  std::string csv;
  csv += std::string("# qchannel ") + kVersion + "\n";
  csv += "# command: " + g_command_line + "\n";
  csv += "# seed: " + std::to_string(seed) + "\n";
  csv += "N,median_distance_to_unot,q25,q75,median_distance_to_optimal\n";
  for (std::size_t g = 0; g < args.n_grid.size(); ++g) {
    const auto begin = g * static_cast<std::size_t>(args.repeats);
    const auto end = begin + static_cast<std::size_t>(args.repeats);
    const std::vector<double> to_target(dist_unot.begin() + begin,
                                        dist_unot.begin() + end);
    const std::vector<double> to_optimal(dist_opt.begin() + begin,
                                         dist_opt.begin() + end);
    csv += std::to_string(args.n_grid[g]) + "," +
           format_num(quantile(to_target, 0.5)) + "," +
           format_num(quantile(to_target, 0.25)) + "," +
           format_num(quantile(to_target, 0.75)) + "," +
           format_num(quantile(to_optimal, 0.5)) + "\n";
  }
  csv += "# worst_min_choi_eigenvalue: " +
         format_num(*std::min_element(min_eigs.begin(), min_eigs.end()),
                    "%.17g") +
         "\n";
  write_text_output(args.out, csv);
}

// ---------------------------------------------------------------------------
// npr-curve

struct NprCurveArgs {
  std::vector<double> theta_grid = {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
  int repeats = 10;
  long npr_states = 1800;
  int quad_points = 512;
  double lambda_tol = 1e-6;
  double ellipsoid_theta = 0.0;
  std::string out;
  MlConfig cfg;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
  CLI::Option* ellipsoid_opt = nullptr;
};

void run_npr_curve(NprCurveArgs& args) {
  const std::string section = "npr-curve";
  const std::uint64_t seed = resolve_seed(args.seed_opt, args.seed, section);
  const unsigned threads =
      resolve_threads(args.threads_opt, args.threads, section);
  if (args.out.empty()) {
    throw UsageError("npr-curve needs --out");
  }
  if (args.theta_grid.empty()) {
    throw UsageError("--theta-grid must not be empty");
  }
  if (args.repeats < 1) {
    throw UsageError("--repeats must be positive");
  }
  if (args.npr_states < 1) {
    throw UsageError("--npr-states must be positive");
  }
  if (!(args.lambda_tol > 0.0)) {
    throw UsageError("--lambda-tol must be positive");
  }
  if (args.quad_points < 16) {
    throw UsageError("--quad-points must be at least 16");
  }

  std::vector<double> analytic(args.theta_grid.size());
  for (std::size_t i = 0; i < args.theta_grid.size(); ++i) {
    analytic[i] = npr_analytic_lambda(args.theta_grid[i], args.quad_points,
                                      args.lambda_tol);
  }

  const std::size_t n_tasks =
      args.theta_grid.size() * static_cast<std::size_t>(args.repeats);
  std::vector<double> lambda_est(n_tasks);
  std::vector<double> min_eigs(n_tasks);
  const RandomStream master(seed);

  parallel_for(n_tasks, threads, [&](std::size_t task) {
    const double theta =
        args.theta_grid[task / static_cast<std::size_t>(args.repeats)];
    RandomStream stream = master.substream(task);
    const ClickDataset dataset =
        simulate_npr_dataset(theta, args.npr_states, stream);
    const MlResult result = mml_estimate(dataset, args.cfg, stream);
    lambda_est[task] = npr_lambda_from_estimate(result.channel);
    min_eigs[task] = is_cp(result.channel, args.cfg.cp_tol).min_eigenvalue;
  });

  std::string csv;
  csv += std::string("# qchannel ") + kVersion + "\n";
  csv += "# command: " + g_command_line + "\n";
  csv += "# seed: " + std::to_string(seed) + "\n";
  csv += "theta,lambda_analytic,lambda_est_mean,lambda_est_std,repeats\n";
  for (std::size_t g = 0; g < args.theta_grid.size(); ++g) {
    const auto begin = g * static_cast<std::size_t>(args.repeats);
    const auto end = begin + static_cast<std::size_t>(args.repeats);
    const std::vector<double> estimates(lambda_est.begin() + begin,
                                        lambda_est.begin() + end);
    csv += format_num(args.theta_grid[g]) + "," + format_num(analytic[g]) +
           "," + format_num(sample_mean(estimates)) + "," +
           format_num(sample_std(estimates)) + "," +
           std::to_string(args.repeats) + "\n";
  }

  double worst_eig = *std::min_element(min_eigs.begin(), min_eigs.end());

  if (args.ellipsoid_opt->count() > 0) {
    RandomStream stream = master.substream(n_tasks);
    const ClickDataset dataset =
        simulate_npr_dataset(args.ellipsoid_theta, args.npr_states, stream);
    const MlResult result = mml_estimate(dataset, args.cfg, stream);
    const SignedSvd svd = signed_svd(result.channel);
    worst_eig = std::min(
        worst_eig, is_cp(result.channel, args.cfg.cp_tol).min_eigenvalue);
    csv += "# ellipsoid theta=" + format_num(args.ellipsoid_theta) +
           " axes=" + format_num(svd.lambda(0)) + "," +
           format_num(svd.lambda(1)) + "," + format_num(svd.lambda(2)) + "\n";
  }

  csv += "# worst_min_choi_eigenvalue: " + format_num(worst_eig, "%.17g") +
         "\n";
  write_text_output(args.out, csv);
}

// ---------------------------------------------------------------------------
// channel tools

struct ChannelToolArgs {
  std::string map;
  std::string map_b;
  std::string out;
  double tol = 1e-9;
  double k = 1.0;
  long samples = 10000;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
};

void run_channel_choi(ChannelToolArgs& args) {
  const MapSpec spec = parse_map_spec(args.map);
  const AffineChannel channel = require_affine(spec);
  const ChoiMatrix omega = choi(channel);
  ordered_json report;
  report["version"] = kVersion;
  report["command"] = g_command_line;
  report["map"] = spec.name;
  report["choi_real"] = matrix_json(omega.omega.real());
  report["choi_imag"] = matrix_json(omega.omega.imag());
  report["trace"] = omega.omega.trace().real();
  report["min_eigenvalue"] = omega.min_eigenvalue();
  write_text_output(args.out, report.dump(2) + "\n");
}

void run_channel_cp_check(ChannelToolArgs& args) {
  const MapSpec spec = parse_map_spec(args.map);
  const AffineChannel channel = require_affine(spec);
  if (!(args.tol >= 0.0)) {
    throw UsageError("--tol must be non-negative");
  }
  const CpCheck check = is_cp(channel, args.tol);
  ordered_json report;
  report["version"] = kVersion;
  report["command"] = g_command_line;
  report["map"] = spec.name;
  report["tol"] = args.tol;
  report["cp"] = check.cp;
  report["min_eigenvalue"] = check.min_eigenvalue;
  write_text_output(args.out, report.dump(2) + "\n");
}

void run_channel_regularize(ChannelToolArgs& args) {
  const MapSpec spec = parse_map_spec(args.map);
  const AffineChannel channel = require_affine(spec);
  if (!(args.k >= 0.0 && args.k <= 1.0)) {
    throw UsageError("--k must lie in [0, 1]");
  }
  const AffineChannel mixed = regularize_channel(channel, args.k);
  ordered_json report;
  report["version"] = kVersion;
  report["command"] = g_command_line;
  report["map"] = spec.name;
  report["k"] = args.k;
  report["block_matrix"] = matrix_json(mixed.block_matrix());
  report["min_choi_eigenvalue"] = choi(mixed).min_eigenvalue();
  write_text_output(args.out, report.dump(2) + "\n");
}

void run_channel_max_mixing(ChannelToolArgs& args) {
  const MapSpec spec = parse_map_spec(args.map);
  const AffineChannel channel = require_affine(spec);
  if (!(args.tol > 0.0)) {
    throw UsageError("--tol must be positive");
  }
  ordered_json report;
  report["version"] = kVersion;
  report["command"] = g_command_line;
  report["map"] = spec.name;
  report["tol"] = args.tol;
  report["max_mixing"] = max_cp_mixing(channel, args.tol);
  write_text_output(args.out, report.dump(2) + "\n");
}

void run_channel_distance(ChannelToolArgs& args) {
  const std::uint64_t seed =
      resolve_seed(args.seed_opt, args.seed, "channel-distance");
  const MapSpec a = parse_map_spec(args.map);
  const MapSpec b = parse_map_spec(args.map_b);
  if (args.samples < 1) {
    throw UsageError("--samples must be positive");
  }
  RandomStream rng(seed);
  const DistanceEstimate distance =
      channel_distance(map_transform(a), map_transform(b), args.samples, rng);
  ordered_json report = report_header(seed);
  report["a"] = a.name;
  report["b"] = b.name;
  report["samples"] = args.samples;
  report["mean"] = distance.mean;
  report["standard_error"] = distance.standard_error;
  write_text_output(args.out, report.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

int run_cli(int argc, char** argv) {
  g_command_line = join_command_line(argc, argv);
  const std::string config_path = find_config_arg(argc, argv);
  if (!config_path.empty()) {
    load_config_file(config_path);
  }

  CLI::App app{"Qubit channel tomography and approximation toolkit"};
  app.require_subcommand(1);
  std::string config_display;
  app.add_option("--config", config_display,
                 "JSON file with default option values")
      ->expected(1);

  // gen-data
  GenDataArgs gen;
  auto* gen_cmd =
      app.add_subcommand("gen-data", "Simulate a measurement click dataset");
  gen_cmd->fallthrough();
  gen.map = cfgv<std::string>("gen-data", "map", gen.map);
  gen.shots_per_cell = cfgv("gen-data", "shots-per-cell", gen.shots_per_cell);
  gen.npr_states = cfgv("gen-data", "npr-states", gen.npr_states);
  gen.out = cfgv<std::string>("gen-data", "out", gen.out);
  auto* gen_map_opt = gen_cmd->add_option(
      "--map", gen.map, "Source map (identity, unot, unot-optimal, average, "
                        "npr:<theta> or 12-number literal)");
  if (gen.map.empty()) {
    gen_map_opt->required();
  }
  gen.shots_opt = gen_cmd->add_option("--shots-per-cell", gen.shots_per_cell,
                                      "Shots per state/axis cell (18 cells)");
  gen.states_opt = gen_cmd->add_option(
      "--npr-states", gen.npr_states,
      "Random input states for npr maps, one click each");
  gen_cmd->add_option("--out", gen.out, "Output dataset path (JSON lines)");
  gen.seed_opt = gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->callback([&gen]() { run_gen_data(gen); });

  // estimate
  EstimateArgs est;
  auto* est_cmd = app.add_subcommand(
      "estimate", "Maximum-likelihood channel reconstruction from a dataset");
  est_cmd->fallthrough();
  est.data = cfgv<std::string>("estimate", "data", est.data);
  est.out = cfgv<std::string>("estimate", "out", est.out);
  est.distance_to = cfgv<std::string>("estimate", "distance-to",
                                      est.distance_to);
  est.distance_samples =
      cfgv("estimate", "distance-samples", est.distance_samples);
  est.raw = cfgv("estimate", "raw", est.raw);
  auto* est_data_opt =
      est_cmd->add_option("--data", est.data, "Input dataset path");
  if (est.data.empty()) {
    est_data_opt->required();
  }
  est_cmd->add_option("--out", est.out,
                      "Report path (default: standard output)");
  est_cmd->add_option("--distance-to", est.distance_to,
                      "Also report the distance to this map");
  est_cmd->add_option("--distance-samples", est.distance_samples,
                      "Monte Carlo samples for --distance-to");
  est_cmd->add_flag("--raw", est.raw,
                    "Also report the unconstrained least-squares channel");
  add_ml_options(est_cmd, "estimate", est.cfg);
  est.seed_opt = est_cmd->add_option("--seed", est.seed, "Random seed");
  est_cmd->callback([&est]() { run_estimate(est); });

  // unot-convergence
  UnotConvergenceArgs conv;
  auto* conv_cmd = app.add_subcommand(
      "unot-convergence",
      "Reconstruction error of the universal NOT versus dataset size");
  conv_cmd->fallthrough();
  conv.n_grid = cfgv("unot-convergence", "n-grid", conv.n_grid);
  conv.repeats = cfgv("unot-convergence", "repeats", conv.repeats);
  conv.distance_samples =
      cfgv("unot-convergence", "distance-samples", conv.distance_samples);
  conv.out = cfgv<std::string>("unot-convergence", "out", conv.out);
  conv_cmd->add_option("--n-grid", conv.n_grid, "Total click counts to sweep")
      ->delimiter(',');
  conv_cmd->add_option("--repeats", conv.repeats, "Repetitions per grid point");
  conv_cmd->add_option("--distance-samples", conv.distance_samples,
                       "Monte Carlo samples per distance evaluation");
  conv_cmd->add_option("--out", conv.out, "Output CSV path");
  add_ml_options(conv_cmd, "unot-convergence", conv.cfg);
  conv.seed_opt = conv_cmd->add_option("--seed", conv.seed, "Random seed");
  conv.threads = std::max(1u, std::thread::hardware_concurrency());
  conv.threads_opt =
      conv_cmd->add_option("--threads", conv.threads, "Worker threads");
  conv_cmd->callback([&conv]() { run_unot_convergence(conv); });

  // npr-curve
  NprCurveArgs npr;
  auto* npr_cmd = app.add_subcommand(
      "npr-curve",
      "Estimated versus predicted shrinkage of the nonlinear rotation");
  npr_cmd->fallthrough();
  npr.theta_grid = cfgv("npr-curve", "theta-grid", npr.theta_grid);
  npr.repeats = cfgv("npr-curve", "repeats", npr.repeats);
  npr.npr_states = cfgv("npr-curve", "npr-states", npr.npr_states);
  npr.quad_points = cfgv("npr-curve", "quad-points", npr.quad_points);
  npr.lambda_tol = cfgv("npr-curve", "lambda-tol", npr.lambda_tol);
  npr.out = cfgv<std::string>("npr-curve", "out", npr.out);
  npr_cmd->add_option("--theta-grid", npr.theta_grid,
                      "Rotation strengths to sweep")
      ->delimiter(',');
  npr_cmd->add_option("--repeats", npr.repeats, "Repetitions per grid point");
  npr_cmd->add_option("--npr-states", npr.npr_states,
                      "Random input states per dataset");
  npr_cmd->add_option("--quad-points", npr.quad_points,
                      "Quadrature points for the predicted curve");
  npr_cmd->add_option("--lambda-tol", npr.lambda_tol,
                      "Search tolerance for the predicted shrinkage");
  npr.ellipsoid_opt = npr_cmd->add_option(
      "--ellipsoid", npr.ellipsoid_theta,
      "Also reconstruct one channel at this strength and report its axes");
  npr_cmd->add_option("--out", npr.out, "Output CSV path");
  add_ml_options(npr_cmd, "npr-curve", npr.cfg);
  npr.seed_opt = npr_cmd->add_option("--seed", npr.seed, "Random seed");
  npr.threads = std::max(1u, std::thread::hardware_concurrency());
  npr.threads_opt =
      npr_cmd->add_option("--threads", npr.threads, "Worker threads");
  npr_cmd->callback([&npr]() { run_npr_curve(npr); });

  // channel toolbox
  auto* chan_cmd =
      app.add_subcommand("channel", "Inspect and transform affine channels");
  chan_cmd->require_subcommand(1);
  chan_cmd->fallthrough();

  ChannelToolArgs choi_args;
  auto* choi_cmd = chan_cmd->add_subcommand("choi", "Print the Choi matrix");
  choi_cmd->fallthrough();
  choi_cmd->add_option("--map", choi_args.map, "Affine map")->required();
  choi_cmd->add_option("--out", choi_args.out, "Report path");
  choi_cmd->callback([&choi_args]() { run_channel_choi(choi_args); });

  ChannelToolArgs cp_args;
  auto* cp_cmd =
      chan_cmd->add_subcommand("cp-check", "Complete positivity check");
  cp_cmd->fallthrough();
  cp_cmd->add_option("--map", cp_args.map, "Affine map")->required();
  cp_cmd->add_option("--tol", cp_args.tol, "Eigenvalue tolerance");
  cp_cmd->add_option("--out", cp_args.out, "Report path");
  cp_cmd->callback([&cp_args]() { run_channel_cp_check(cp_args); });

  ChannelToolArgs reg_args;
  auto* reg_cmd = chan_cmd->add_subcommand(
      "regularize", "Mix a channel towards the fully depolarizing map");
  reg_cmd->fallthrough();
  reg_cmd->add_option("--map", reg_args.map, "Affine map")->required();
  reg_cmd->add_option("--k", reg_args.k, "Mixing weight in [0, 1]")
      ->required();
  reg_cmd->add_option("--out", reg_args.out, "Report path");
  reg_cmd->callback([&reg_args]() { run_channel_regularize(reg_args); });

  ChannelToolArgs mix_args;
  auto* mix_cmd = chan_cmd->add_subcommand(
      "max-mixing", "Largest CP-preserving mixing weight");
  mix_cmd->fallthrough();
  mix_cmd->add_option("--map", mix_args.map, "Affine map")->required();
  mix_cmd->add_option("--tol", mix_args.tol, "Bisection tolerance");
  mix_cmd->add_option("--out", mix_args.out, "Report path");
  mix_cmd->callback([&mix_args]() { run_channel_max_mixing(mix_args); });

  ChannelToolArgs dist_args;
  auto* dist_cmd = chan_cmd->add_subcommand(
      "distance", "Monte Carlo average distance between two maps");
  dist_cmd->fallthrough();
  dist_cmd->add_option("--a", dist_args.map, "First map")->required();
  dist_cmd->add_option("--b", dist_args.map_b, "Second map")->required();
  dist_args.samples = cfgv("channel-distance", "samples", dist_args.samples);
  dist_cmd->add_option("--samples", dist_args.samples, "Monte Carlo samples");
  dist_args.seed_opt =
      dist_cmd->add_option("--seed", dist_args.seed, "Random seed");
  dist_cmd->add_option("--out", dist_args.out, "Report path");
  dist_cmd->callback([&dist_args]() { run_channel_distance(dist_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const UsageError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const CoverageError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 3;
  } catch (const IoError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "internal error: " << err.what() << "\n";
    return 1;
  }
}
