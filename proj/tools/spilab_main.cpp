// spilab: command-line harness for the safe-policy-improvement laboratory.
//
// Subcommands:
//   solve       evaluate a policy or compute an optimal one
//   improve     iterate the neighborhood-constrained mirror update
//   deepspi     offline loop: fit model, clipped latent update, audit, verify
//   dream-eval  Monte Carlo return inside a latent model vs exact evaluation
//   verify      run the bound verifiers on an environment, files, or a suite
//   pac         sample-based improvement check
//   demo        the two counterexample walkthroughs
//   report      aggregate bound CSVs and run traces
//
// Every run writes into <out-root>/<subcommand>-<digest>/ where the digest
// hashes the resolved semantic settings, so identical configurations land in
// identical directories with byte-identical contents. Exit codes: 0 success,
// 1 a verified inequality failed (implementation bug signal), 2 bad
// configuration or input files.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "spilab/digest.hpp"
#include "spilab/envs.hpp"
#include "spilab/errors.hpp"
#include "spilab/guarantees.hpp"
#include "spilab/io.hpp"
#include "spilab/latent.hpp"
#include "spilab/losses.hpp"
#include "spilab/mdp.hpp"
#include "spilab/neighborhood.hpp"
#include "spilab/parallel.hpp"
#include "spilab/rng.hpp"
#include "spilab/sampling.hpp"
#include "spilab/solve.hpp"
#include "spilab/surrogate.hpp"

namespace fs = std::filesystem;
using namespace spilab;

namespace {

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

struct CommonOpts {
  std::string out_root = "runs";
  int threads = 0;
  std::string config_path;
};

void add_common(CLI::App* sub, CommonOpts& opts) {
  sub->add_option("--out-root", opts.out_root, "Directory receiving run directories")
      ->capture_default_str();
  sub->add_option("--threads", opts.threads,
                  "Cap worker threads; SPI_LAB_THREADS caps them as well");
  sub->add_option("--config", opts.config_path,
                  "key=value file with this subcommand's options; flags override");
}

// Applies a key=value config file to a parsed subcommand. Options the command
// line already set keep their values, so flags override the file. Blank
// lines, # or ; comments, and [section] headers are skipped; values may be
// quoted. Repeated keys accumulate, matching repeatable flags.
void apply_config_file(CLI::App* sub, const std::string& path) {
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::set<std::string> filled;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string text = CLI::detail::trim_copy(line);
    if (text.empty() || text[0] == '#' || text[0] == ';') continue;
    if (text.front() == '[' && text.back() == ']') continue;
    const std::size_t eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config file " + path + " line " + std::to_string(line_no) +
                        ": expected key=value");
    }
    const std::string key = CLI::detail::trim_copy(text.substr(0, eq));
    std::string value = CLI::detail::trim_copy(text.substr(eq + 1));
    if (value.size() >= 2 && ((value.front() == '"' && value.back() == '"') ||
                              (value.front() == '\'' && value.back() == '\''))) {
      value = value.substr(1, value.size() - 2);
    }
    CLI::Option* option = nullptr;
    try {
      option = sub->get_option("--" + key);
    } catch (const CLI::Error&) {
      throw ConfigError("config file " + path + ": unknown option '" + key + "'");
    }
    if (option->count() > 0 && filled.count(key) == 0) continue;
    option->add_result(value);
    option->run_callback();
    filled.insert(key);
  }
}

void apply_thread_cap(int threads) {
  if (threads <= 0) return;
  int cap = threads;
  if (const char* env = std::getenv("SPI_LAB_THREADS")) {
    try {
      cap = std::min(cap, std::max(1, std::stoi(env)));
    } catch (const std::exception&) {
      throw ConfigError("SPI_LAB_THREADS must be an integer");
    }
  }
  setenv("SPI_LAB_THREADS", std::to_string(cap).c_str(), 1);
}

using Settings = std::vector<std::pair<std::string, std::string>>;

std::string canonical_config(const std::string& command, Settings settings) {
  std::sort(settings.begin(), settings.end());
  std::string text = command + "\n";
  for (const auto& [key, value] : settings) text += key + "=" + value + "\n";
  return text;
}

// Creates <out_root>/<command>-<digest>/ and drops the resolved settings
// inside, so a run directory documents exactly what produced it.
fs::path make_run_dir(const CommonOpts& opts, const std::string& command,
                      const Settings& settings) {
  const std::string canonical = canonical_config(command, settings);
  fs::path dir = fs::path(opts.out_root) / (command + "-" + hex64(fnv1a64(canonical)));
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create run directory " + dir.string());
  write_text_file((dir / "config.txt").string(), canonical);
  return dir;
}

std::map<std::string, double> parse_params(const std::vector<std::string>& items) {
  std::map<std::string, double> params;
  for (const std::string& item : items) {
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("--param expects key=value, got '" + item + "'");
    }
    try {
      std::size_t used = 0;
      const double value = std::stod(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument(item);
      params[item.substr(0, eq)] = value;
    } catch (const std::exception&) {
      throw ConfigError("--param value in '" + item + "' is not a number");
    }
  }
  return params;
}

EnvSpec build_env(const std::string& name, const std::map<std::string, double>& params) {
  if (name == "fig1") return build_fig1(params);
  if (name == "fig2") return build_fig2(params);
  if (name == "random") return random_episodic(params);
  throw ConfigError("unknown environment '" + name + "'; expected fig1, fig2, or random");
}

// Environment selection shared by deepspi, dream-eval, verify, pac, demo:
// either a named builder with --param overrides or an explicit file set.
struct EnvOpts {
  std::string env;
  std::vector<std::string> params;
  std::string mdp_path;
  std::string encoder_path;
  std::string latent_path;
  std::string baseline_path;
};

void add_env_opts(CLI::App* sub, EnvOpts& opts) {
  sub->add_option("--env", opts.env, "Built-in environment: fig1, fig2, or random");
  sub->add_option("--param", opts.params, "Environment parameter override, key=value")
      ->take_all();
  sub->add_option("--mdp", opts.mdp_path, "Ground MDP JSON file");
  sub->add_option("--encoder", opts.encoder_path, "Encoder JSON file");
  sub->add_option("--latent", opts.latent_path,
                  "Latent model JSON file; omitted, the model is fit from the baseline");
  sub->add_option("--baseline", opts.baseline_path, "Baseline latent policy JSON file");
}

EnvSpec resolve_env(const EnvOpts& opts) {
  if (!opts.env.empty()) return build_env(opts.env, parse_params(opts.params));
  if (opts.mdp_path.empty() || opts.encoder_path.empty() || opts.baseline_path.empty()) {
    throw ConfigError("provide --env, or all of --mdp, --encoder, and --baseline");
  }
  EnvSpec env;
  env.name = "files";
  env.mdp = load_mdp(opts.mdp_path);
  env.encoder = load_encoder(opts.encoder_path);
  env.encoder.validate(env.mdp.n_states);
  env.baseline_latent = load_policy(opts.baseline_path);
  env.baseline = compose(env.baseline_latent, env.encoder);
  env.latent = opts.latent_path.empty()
                   ? fit_latent_model(env.mdp, env.encoder,
                                      stationary_distribution(env.mdp, env.baseline))
                   : load_latent(opts.latent_path);
  return env;
}

Settings env_settings(const EnvOpts& opts, const EnvSpec& env) {
  Settings settings;
  if (!opts.env.empty()) {
    settings.emplace_back("env", env.name);
    for (const auto& [key, value] : env.params) {
      settings.emplace_back("param." + key, format_double(value));
    }
  } else {
    settings.emplace_back("mdp", opts.mdp_path);
    settings.emplace_back("encoder", opts.encoder_path);
    settings.emplace_back("latent", opts.latent_path);
    settings.emplace_back("baseline", opts.baseline_path);
  }
  return settings;
}

void check_c(double c) {
  if (!(c > 1.0 && c < 2.0)) {
    throw ConfigError("neighborhood constant c must lie in the open interval (1, 2)");
  }
}

// Largest c the bound preconditions accept at this discount, with a safety
// margin; sup_ir must stay strictly below 1/discount.
double capped_c(double c, double discount) {
  return std::min(c, 1.0 + 0.9 * (std::min(1.0 / discount, 2.0) - 1.0));
}

// ---------------------------------------------------------------------------
// Trace and bound CSV schemas
// ---------------------------------------------------------------------------

constexpr const char* kTraceHeader =
    "iteration,j_ground,j_latent,l_r,l_p,sir_prev,in_nb,max_drift,avd_slack,value_slack,"
    "spi_slack";

struct TraceRow {
  long iteration = 0;
  std::optional<double> j_ground, j_latent, l_r, l_p, sir_prev, in_nb, max_drift, avd_slack,
      value_slack, spi_slack;
};

std::string trace_csv(const std::vector<TraceRow>& rows) {
  const auto cell = [](const std::optional<double>& x) {
    return x ? format_double(*x) : std::string();
  };
  std::string out = std::string(kTraceHeader) + "\n";
  for (const TraceRow& row : rows) {
    out += std::to_string(row.iteration);
    for (const auto* x : {&row.j_ground, &row.j_latent, &row.l_r, &row.l_p, &row.sir_prev,
                          &row.in_nb, &row.max_drift, &row.avd_slack, &row.value_slack,
                          &row.spi_slack}) {
      out += "," + cell(*x);
    }
    out += "\n";
  }
  return out;
}

constexpr const char* kBoundsHeader = "instance,bound,lhs,rhs,slack,holds,vacuous,inputs_digest";

std::string bounds_csv_row(const std::string& instance, const BoundReport& report) {
  return instance + "," + report.name + "," + format_double(report.lhs) + "," +
         format_double(report.rhs) + "," + format_double(report.slack) + "," +
         (report.holds ? "1" : "0") + "," + (report.vacuous ? "1" : "0") + "," +
         report.inputs_digest + "\n";
}

void print_report_line(const BoundReport& report) {
  std::cout << report.name << ": " << (report.holds ? "holds" : "VIOLATED")
            << " (lhs " << format_double(report.lhs) << ", rhs " << format_double(report.rhs)
            << ", slack " << format_double(report.slack) << (report.vacuous ? ", vacuous" : "")
            << ")\n";
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

struct SolveOpts {
  CommonOpts common;
  EnvOpts env;
  std::string policy_path;
  bool episodic = false;
};

int run_solve(const SolveOpts& opts) {
  apply_thread_cap(opts.common.threads);
  EnvSpec env = resolve_env(opts.env);
  Settings settings = env_settings(opts.env, env);
  settings.emplace_back("policy", opts.policy_path);
  settings.emplace_back("episodic", opts.episodic ? "1" : "0");
  const fs::path dir = make_run_dir(opts.common, "solve", settings);

  TabularPolicy policy;
  std::string mode;
  std::vector<double> v;
  if (!opts.policy_path.empty()) {
    policy = load_policy(opts.policy_path);
    v = evaluate_policy(env.mdp, policy, opts.episodic).v;
    mode = "evaluated";
  } else {
    auto [optimal_v, optimal_policy] = solve_optimal(env.mdp);
    v = std::move(optimal_v);
    policy = std::move(optimal_policy);
    mode = "optimal";
  }
  save_policy(policy, (dir / "policy.json").string());
  std::string values = "{\n  \"return\": " + format_double(v[env.mdp.initial_state]) +
                       ",\n  \"v\": [";
  for (std::size_t i = 0; i < v.size(); ++i) {
    values += (i ? ", " : "") + format_double(v[i]);
  }
  values += "]\n}\n";
  write_text_file((dir / "values.json").string(), values);

  std::cout << mode << " return: " << format_double(v[env.mdp.initial_state]) << "\n"
            << "run directory: " << dir.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// improve
// ---------------------------------------------------------------------------

struct ImproveOpts {
  CommonOpts common;
  EnvOpts env;
  std::string policy_path;
  double c = 1.3;
  int iters = 100;
  double tol = 1e-12;
};

int run_improve(const ImproveOpts& opts) {
  apply_thread_cap(opts.common.threads);
  check_c(opts.c);
  if (opts.iters < 1) throw ConfigError("--iters must be positive");
  EnvSpec env = resolve_env(opts.env);
  Settings settings = env_settings(opts.env, env);
  settings.emplace_back("policy", opts.policy_path);
  settings.emplace_back("c", format_double(opts.c));
  settings.emplace_back("iters", std::to_string(opts.iters));
  settings.emplace_back("tol", format_double(opts.tol));
  const fs::path dir = make_run_dir(opts.common, "improve", settings);

  TabularPolicy policy = opts.policy_path.empty()
                             ? TabularPolicy::uniform(env.mdp.n_states, env.mdp.n_actions)
                             : load_policy(opts.policy_path);
  StateDistribution uniform;
  uniform.xi.assign(env.mdp.n_states, 1.0 / env.mdp.n_states);

  std::vector<double> v = evaluate_policy(env.mdp, policy).v;
  std::vector<TraceRow> rows;
  rows.push_back({0, v[env.mdp.initial_state], {}, {}, {}, {}, {}, {}, {}, {}, {}});
  bool violated = false;
  for (int it = 1; it <= opts.iters; ++it) {
    TabularPolicy next = mirror_step(env.mdp, policy, opts.c, uniform, Exec::parallel);
    const std::vector<double> next_v = evaluate_policy(env.mdp, next).v;
    double min_gain = 0.0;
    double max_gain = 0.0;
    for (std::size_t s = 0; s < v.size(); ++s) {
      min_gain = std::min(min_gain, next_v[s] - v[s]);
      max_gain = std::max(max_gain, next_v[s] - v[s]);
    }
    if (min_gain < -1e-10) violated = true;
    TraceRow row;
    row.iteration = it;
    row.j_ground = next_v[env.mdp.initial_state];
    row.sir_prev = extremal_importance_ratios(policy, next).sup_ir;
    row.in_nb = in_neighborhood(policy, next, opts.c) ? 1.0 : 0.0;
    rows.push_back(row);
    policy = std::move(next);
    v = next_v;
    if (max_gain < opts.tol) break;
  }
  write_text_file((dir / "trace.csv").string(), trace_csv(rows));
  save_policy(policy, (dir / "policy.json").string());

  std::cout << "iterations: " << rows.back().iteration << "\n"
            << "final return: " << format_double(v[env.mdp.initial_state]) << "\n";
  if (violated) {
    std::cout << "VIOLATION: a mirror step decreased a state value beyond tolerance\n";
  }
  std::cout << "run directory: " << dir.string() << "\n";
  return violated ? 1 : 0;
}

// ---------------------------------------------------------------------------
// deepspi
// ---------------------------------------------------------------------------

struct DeepSpiOpts {
  CommonOpts common;
  EnvOpts env;
  double c = 1.1;
  int steps = 1;
  int samples = 20000;
  std::uint64_t seed = 0;
  SurrogateConfig surrogate;
};

int run_deepspi(const DeepSpiOpts& opts) {
  apply_thread_cap(opts.common.threads);
  check_c(opts.c);
  if (opts.steps < 1) throw ConfigError("--steps must be positive");
  if (opts.samples < 1) throw ConfigError("--samples must be positive");
  opts.surrogate.validate();
  EnvSpec env = resolve_env(opts.env);
  Settings settings = env_settings(opts.env, env);
  settings.emplace_back("c", format_double(opts.c));
  settings.emplace_back("steps", std::to_string(opts.steps));
  settings.emplace_back("samples", std::to_string(opts.samples));
  settings.emplace_back("seed", std::to_string(opts.seed));
  settings.emplace_back("clip", format_double(opts.surrogate.epsilon_clip));
  settings.emplace_back("alpha_r", format_double(opts.surrogate.alpha_r));
  settings.emplace_back("alpha_p", format_double(opts.surrogate.alpha_p));
  settings.emplace_back("lr", format_double(opts.surrogate.learning_rate));
  settings.emplace_back("epochs", std::to_string(opts.surrogate.epochs));
  settings.emplace_back("minibatches", std::to_string(opts.surrogate.minibatches));
  const fs::path dir = make_run_dir(opts.common, "deepspi", settings);

  TabularPolicy latent_policy = env.baseline_latent;
  LatentMdp model = env.latent;
  std::vector<TraceRow> rows;
  {
    TraceRow start;
    start.iteration = 0;
    start.j_ground = policy_return(env.mdp, compose(latent_policy, env.encoder));
    start.j_latent = policy_return(model.model, latent_policy);
    rows.push_back(start);
  }
  std::vector<BoundReport> verdicts;
  std::vector<std::string> skipped;
  for (int step = 1; step <= opts.steps; ++step) {
    const TabularPolicy ground = compose(latent_policy, env.encoder);
    const StateDistribution xi = stationary_distribution(env.mdp, ground);
    if (step > 1) model = fit_latent_model(env.mdp, env.encoder, xi);
    const LossReport losses =
        exact_losses(env.mdp, env.encoder, model, xi, ground, Exec::parallel);

    const TransitionBatch batch = sample_transitions(env.mdp, ground, opts.samples,
                                                     derive_seed(opts.seed, step), Exec::parallel);
    const SoftmaxLatentPolicy updated =
        clipped_update(env.mdp, env.encoder, model, SoftmaxLatentPolicy::from_policy(latent_policy),
                       batch, opts.surrogate, Exec::parallel);
    const TabularPolicy next = updated.distribution();
    const TabularPolicy next_ground = compose(next, env.encoder);

    TraceRow row;
    row.iteration = step;
    row.j_ground = policy_return(env.mdp, next_ground);
    row.j_latent = policy_return(model.model, next);
    row.l_r = losses.l_r;
    row.l_p = losses.l_p;
    row.sir_prev = extremal_importance_ratios(ground, next_ground).sup_ir;
    row.in_nb = in_neighborhood(latent_policy, next, opts.c) ? 1.0 : 0.0;
    const ValueTables ground_tables = evaluate_policy(env.mdp, ground);
    double max_drift = 0.0;
    for (int s = 0; s < env.mdp.n_states; ++s) {
      max_drift = std::max(
          max_drift, ppo_drift(ground, next_ground, ground_tables, s, opts.surrogate.epsilon_clip));
    }
    row.max_drift = max_drift;

    const auto audit = [&](const char* name, BoundReport (*verifier)(
                                                 const FiniteMdp&, const Encoder&, const LatentMdp&,
                                                 const TabularPolicy&, const TabularPolicy&),
                           std::optional<double>& slot) {
      try {
        BoundReport report = verifier(env.mdp, env.encoder, model, ground, next);
        slot = report.slack;
        if (step == opts.steps) verdicts.push_back(std::move(report));
      } catch (const ConfigError& e) {
        if (step == opts.steps) skipped.push_back(std::string(name) + ": " + e.what());
      }
    };
    audit("avd", verify_avd, row.avd_slack);
    audit("value_bound", verify_value_bound, row.value_slack);
    try {
      BoundReport spi = verify_spi(env.mdp, env.encoder, model, latent_policy, next);
      row.spi_slack = spi.slack;
      if (step == opts.steps) verdicts.push_back(std::move(spi));
    } catch (const ConfigError& e) {
      if (step == opts.steps) skipped.push_back(std::string("spi: ") + e.what());
    }

    rows.push_back(row);
    latent_policy = next;
  }

  write_text_file((dir / "trace.csv").string(), trace_csv(rows));
  save_policy(latent_policy, (dir / "policy_latent.json").string());
  save_policy(compose(latent_policy, env.encoder), (dir / "policy.json").string());
  std::string summary = "{\n  \"j_ground_start\": " + format_double(*rows.front().j_ground) +
                        ",\n  \"j_ground_final\": " + format_double(*rows.back().j_ground) +
                        ",\n  \"verdicts\": [\n";
  bool any_violated = false;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    std::string item = bound_report_json(verdicts[i]);
    item.pop_back();
    summary += "    " + item + (i + 1 < verdicts.size() ? "," : "") + "\n";
    any_violated = any_violated || !verdicts[i].holds;
  }
  summary += "  ],\n  \"skipped\": [";
  for (std::size_t i = 0; i < skipped.size(); ++i) {
    summary += (i ? ", " : "") + std::string("\"") + skipped[i] + "\"";
  }
  summary += "]\n}\n";
  write_text_file((dir / "summary.json").string(), summary);

  std::cout << "ground return: " << format_double(*rows.front().j_ground) << " -> "
            << format_double(*rows.back().j_ground) << "\n";
  for (const BoundReport& report : verdicts) print_report_line(report);
  for (const std::string& reason : skipped) std::cout << "skipped " << reason << "\n";
  std::cout << "run directory: " << dir.string() << "\n";
  return any_violated ? 1 : 0;
}

// ---------------------------------------------------------------------------
// dream-eval
// ---------------------------------------------------------------------------

struct DreamOpts {
  CommonOpts common;
  EnvOpts env;
  std::string policy_path;
  int rollouts = 1000;
  int horizon = 200;
  std::uint64_t seed = 0;
};

int run_dream_eval(const DreamOpts& opts) {
  apply_thread_cap(opts.common.threads);
  if (opts.rollouts < 2) throw ConfigError("--rollouts must be at least 2");
  if (opts.horizon < 1) throw ConfigError("--horizon must be positive");

  LatentMdp latent;
  TabularPolicy policy;
  Settings settings;
  if (!opts.env.env.empty() || !opts.env.mdp_path.empty()) {
    EnvSpec env = resolve_env(opts.env);
    latent = std::move(env.latent);
    policy = opts.policy_path.empty() ? env.baseline_latent : load_policy(opts.policy_path);
    settings = env_settings(opts.env, env);
  } else if (!opts.env.latent_path.empty()) {
    latent = load_latent(opts.env.latent_path);
    if (opts.policy_path.empty()) {
      throw ConfigError("--latent mode needs --policy, the latent policy to evaluate");
    }
    policy = load_policy(opts.policy_path);
    settings.emplace_back("latent", opts.env.latent_path);
  } else {
    throw ConfigError("provide --env, --latent, or the --mdp file set");
  }
  settings.emplace_back("policy", opts.policy_path);
  settings.emplace_back("rollouts", std::to_string(opts.rollouts));
  settings.emplace_back("horizon", std::to_string(opts.horizon));
  settings.emplace_back("seed", std::to_string(opts.seed));
  const fs::path dir = make_run_dir(opts.common, "dream-eval", settings);

  const double exact = policy_return(latent.model, policy);
  const LatentRollouts rollouts =
      imagine_rollouts(latent, policy, opts.rollouts, opts.horizon, opts.seed, Exec::parallel);
  const std::vector<double> returns = rollouts.returns(latent.model.discount);
  const double mc = rollouts.mean_return(latent.model.discount);
  double variance = 0.0;
  for (double g : returns) variance += (g - mc) * (g - mc);
  variance /= returns.size() - 1;
  const double se = std::sqrt(variance / returns.size());
  // Truncating at the horizon biases the estimate by at most the discounted
  // tail of the largest reward.
  const double tail = std::pow(latent.model.discount, opts.horizon) * latent.model.r_max() /
                      (1.0 - latent.model.discount);
  const bool within = std::abs(mc - exact) <= 3.0 * se + tail + kSolveTol;

  std::string json = "{\n  \"exact_return\": " + format_double(exact) +
                     ",\n  \"mc_return\": " + format_double(mc) +
                     ",\n  \"std_error\": " + format_double(se) +
                     ",\n  \"truncation_bias_bound\": " + format_double(tail) +
                     ",\n  \"within_3se\": " + (within ? "true" : "false") + "\n}\n";
  write_text_file((dir / "dream.json").string(), json);

  std::cout << "exact latent return: " << format_double(exact) << "\n"
            << "imagined return: " << format_double(mc) << " (se " << format_double(se)
            << ", truncation bias <= " << format_double(tail) << ")\n"
            << "within 3 se: " << (within ? "yes" : "no") << "\n"
            << "run directory: " << dir.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct VerifyOpts {
  CommonOpts common;
  EnvOpts env;
  std::string suite;
  std::string candidate_path;
  int instances = 100;
  std::uint64_t seed = 42;
  double c = 1.2;
  double rep_epsilon = 0.0;
  int rep_trials = 0;
};

// Bound reports of one baseline/candidate pair; representation quality only
// when rep_epsilon > 0.
std::vector<BoundReport> verify_pair(const EnvSpec& env, const TabularPolicy& candidate,
                                     const VerifyOpts& opts) {
  std::vector<BoundReport> reports;
  const TabularPolicy composed = compose(candidate, env.encoder);
  reports.push_back(verify_avd(env.mdp, env.encoder, env.latent, env.baseline, candidate));
  reports.push_back(verify_value_bound(env.mdp, env.encoder, env.latent, env.baseline, candidate));
  reports.push_back(verify_spi(env.mdp, env.encoder, env.latent, env.baseline_latent, candidate));
  if (opts.rep_epsilon > 0.0) {
    reports.push_back(verify_representation_quality(env.mdp, env.encoder, env.latent, env.baseline,
                                                    candidate, opts.rep_epsilon, opts.rep_trials,
                                                    opts.seed));
  }
  return reports;
}

int run_verify(const VerifyOpts& opts) {
  apply_thread_cap(opts.common.threads);
  check_c(opts.c);
  Settings settings;
  std::vector<std::pair<std::string, std::vector<BoundReport>>> results;

  if (opts.suite == "random") {
    if (opts.instances < 1) throw ConfigError("--instances must be positive");
    settings = {{"suite", "random"},
                {"instances", std::to_string(opts.instances)},
                {"seed", std::to_string(opts.seed)},
                {"c", format_double(opts.c)},
                {"rep_epsilon", format_double(opts.rep_epsilon)},
                {"rep_trials", std::to_string(opts.rep_trials)}};
    const std::size_t count = static_cast<std::size_t>(opts.instances);
    std::vector<std::vector<BoundReport>> slots(count);
    std::vector<std::string> errors(count);
    for_each_index(Exec::parallel, count, [&](std::size_t i) {
      try {
        const double gamma = std::vector<double>{0.9, 0.95, 0.99}[i % 3];
        EnvSpec env = random_episodic({{"n_states", static_cast<double>(6 + i % 13)},
                                       {"n_actions", static_cast<double>(2 + i % 4)},
                                       {"gamma", gamma},
                                       {"seed", static_cast<double>(derive_seed(opts.seed, i))}});
        const TabularPolicy candidate = random_neighborhood_candidate(
            env.baseline_latent, capped_c(opts.c, gamma), derive_seed(opts.seed, count + i));
        slots[i] = verify_pair(env, candidate, opts);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    });
    for (std::size_t i = 0; i < count; ++i) {
      if (!errors[i].empty()) {
        throw ConfigError("suite instance " + std::to_string(i) + ": " + errors[i]);
      }
      results.emplace_back("random-" + std::to_string(i), std::move(slots[i]));
    }
  } else if (!opts.suite.empty() && opts.suite != "fig1" && opts.suite != "fig2") {
    throw ConfigError("unknown suite '" + opts.suite + "'; expected random, fig1, or fig2");
  } else {
    EnvOpts env_opts = opts.env;
    if (!opts.suite.empty()) env_opts.env = opts.suite;
    EnvSpec env = resolve_env(env_opts);
    settings = env_settings(env_opts, env);
    settings.emplace_back("candidate", opts.candidate_path);
    settings.emplace_back("c", format_double(opts.c));
    settings.emplace_back("rep_epsilon", format_double(opts.rep_epsilon));
    settings.emplace_back("rep_trials", std::to_string(opts.rep_trials));
    const TabularPolicy candidate =
        opts.candidate_path.empty()
            ? latent_greedy_candidate(env, capped_c(opts.c, env.mdp.discount))
            : load_policy(opts.candidate_path);
    results.emplace_back(env.name, verify_pair(env, candidate, opts));
  }

  const fs::path dir = make_run_dir(opts.common, "verify", settings);
  std::string csv = std::string(kBoundsHeader) + "\n";
  int violations = 0;
  for (const auto& [instance, reports] : results) {
    for (const BoundReport& report : reports) {
      csv += bounds_csv_row(instance, report);
      if (!report.holds) ++violations;
    }
  }
  write_text_file((dir / "bounds.csv").string(), csv);
  if (results.size() == 1) {
    for (const BoundReport& report : results.front().second) {
      write_text_file((dir / (report.name + ".json")).string(), bound_report_json(report));
      print_report_line(report);
    }
  }

  std::cout << results.size() << " instance(s), "
            << (results.empty() ? 0 : results.front().second.size()) << " bound(s) each, "
            << violations << " violation(s)\n"
            << "run directory: " << dir.string() << "\n";
  return violations > 0 ? 1 : 0;
}

// ---------------------------------------------------------------------------
// pac
// ---------------------------------------------------------------------------

struct PacOpts {
  CommonOpts common;
  EnvOpts env;
  std::string candidate_path;
  double epsilon = 0.05;
  double delta = 0.1;
  double ael_bound = 0.0;
  int trials = 200;
  double c = 1.05;
  std::uint64_t seed = 0;
};

int run_pac(const PacOpts& opts) {
  apply_thread_cap(opts.common.threads);
  check_c(opts.c);
  EnvSpec env = resolve_env(opts.env);
  Settings settings = env_settings(opts.env, env);
  settings.emplace_back("candidate", opts.candidate_path);
  settings.emplace_back("epsilon", format_double(opts.epsilon));
  settings.emplace_back("delta", format_double(opts.delta));
  settings.emplace_back("ael_bound", format_double(opts.ael_bound));
  settings.emplace_back("trials", std::to_string(opts.trials));
  settings.emplace_back("c", format_double(opts.c));
  settings.emplace_back("seed", std::to_string(opts.seed));
  const fs::path dir = make_run_dir(opts.common, "pac", settings);

  const TabularPolicy candidate =
      opts.candidate_path.empty()
          ? latent_greedy_candidate(env, capped_c(opts.c, env.mdp.discount))
          : load_policy(opts.candidate_path);
  PacConfig config;
  config.epsilon = opts.epsilon;
  config.delta = opts.delta;
  if (opts.ael_bound > 0.0) config.ael_upper_bound = opts.ael_bound;
  config.seed = opts.seed;
  const BoundReport report = pac_verify(env.mdp, env.encoder, env.latent, env.baseline_latent,
                                        candidate, config, opts.trials, Exec::parallel);
  write_text_file((dir / "pac.json").string(), bound_report_json(report));
  print_report_line(report);
  std::cout << "run directory: " << dir.string() << "\n";
  return report.holds ? 0 : 1;
}

// ---------------------------------------------------------------------------
// demo
// ---------------------------------------------------------------------------

struct DemoOpts {
  CommonOpts common;
  std::string env = "fig1";
  std::vector<std::string> params;
  double c = 1.1;
};

int run_demo_fig1(const DemoOpts& opts, const fs::path& dir) {
  EnvSpec env = build_fig1(parse_params(opts.params));
  save_mdp(env.mdp, (dir / "mdp.json").string());
  save_encoder(env.encoder, (dir / "encoder.json").string());
  save_latent(env.latent, (dir / "latent.json").string());
  save_policy(env.baseline_latent, (dir / "baseline_latent.json").string());

  const double j_base = policy_return(env.mdp, env.baseline);
  const StateDistribution xi = stationary_distribution(env.mdp, env.baseline);
  const LossReport losses = exact_losses(env.mdp, env.encoder, env.latent, xi, env.baseline);

  auto [model_v, model_optimal] = solve_optimal(env.latent.model);
  const double j_promised = model_v[env.latent.model.initial_state];
  const double j_crash = policy_return(env.mdp, compose(model_optimal, env.encoder));

  const double c_eff = capped_c(opts.c, env.mdp.discount);
  const TabularPolicy safe = latent_greedy_candidate(env, c_eff);
  const double j_safe = policy_return(env.mdp, compose(safe, env.encoder));
  const BoundReport spi =
      verify_spi(env.mdp, env.encoder, env.latent, env.baseline_latent, safe);

  std::cout << "baseline ground return:                     " << format_double(j_base) << "\n"
            << "model losses under the baseline:            l_r " << format_double(losses.l_r)
            << ", l_p " << format_double(losses.l_p) << "\n"
            << "planner's promised return (corrupted model): " << format_double(j_promised) << "\n"
            << "that policy's true ground return:           " << format_double(j_crash) << "\n"
            << "constrained candidate (c " << format_double(c_eff)
            << ") ground return:  " << format_double(j_safe) << "\n";
  print_report_line(spi);

  std::string story = "{\n  \"j_baseline\": " + format_double(j_base) +
                      ",\n  \"l_r\": " + format_double(losses.l_r) +
                      ",\n  \"l_p\": " + format_double(losses.l_p) +
                      ",\n  \"j_promised\": " + format_double(j_promised) +
                      ",\n  \"j_planner_ground\": " + format_double(j_crash) +
                      ",\n  \"j_constrained\": " + format_double(j_safe) + "\n}\n";
  write_text_file((dir / "story.json").string(), story);
  return spi.holds ? 0 : 1;
}

int run_demo_fig2(const DemoOpts& opts, const fs::path& dir) {
  std::map<std::string, double> params = parse_params(opts.params);
  params.erase("split");
  EnvSpec merged = build_fig2(params);
  params["split"] = 1.0;
  EnvSpec split = build_fig2(params);
  save_mdp(merged.mdp, (dir / "mdp.json").string());
  save_encoder(merged.encoder, (dir / "encoder_merged.json").string());
  save_encoder(split.encoder, (dir / "encoder_split.json").string());
  save_latent(merged.latent, (dir / "latent_merged.json").string());
  save_latent(split.latent, (dir / "latent_split.json").string());

  const double j_base = policy_return(merged.mdp, merged.baseline);
  const int branch_latent = merged.encoder(1);
  const double eps = merged.params.at("epsilon");
  const TabularPolicy aggressive = fig2_aggressive_latent(merged);
  const double j_aggressive = policy_return(merged.mdp, compose(aggressive, merged.encoder));
  const TabularPolicy split_greedy = solve_optimal(split.latent.model).second;
  const double j_split = policy_return(split.mdp, compose(split_greedy, split.encoder));

  const double c_eff = capped_c(opts.c, split.mdp.discount);
  const TabularPolicy safe = latent_greedy_candidate(split, c_eff);
  const BoundReport spi =
      verify_spi(split.mdp, split.encoder, split.latent, split.baseline_latent, safe);

  std::cout << "baseline ground return:                    " << format_double(j_base) << "\n"
            << "bet pays +2 with probability " << format_double(1.0 - eps)
            << " per merged-latent visit; its merged average reward is "
            << format_double(merged.latent.model.r(branch_latent, 1)) << "\n"
            << "bet-everywhere ground return:              " << format_double(j_aggressive)
            << "\n";
  try {
    verify_spi(merged.mdp, merged.encoder, merged.latent, merged.baseline_latent, aggressive);
    std::cout << "improvement bound accepted the bet-everywhere update\n";
  } catch (const ConfigError& e) {
    std::cout << "improvement bound declined the bet-everywhere update: " << e.what() << "\n";
  }
  std::cout << "greedy update after splitting the encoder: " << format_double(j_split) << "\n";
  print_report_line(spi);

  std::string story = "{\n  \"j_baseline\": " + format_double(j_base) +
                      ",\n  \"r_bet_merged\": " +
                      format_double(merged.latent.model.r(branch_latent, 1)) +
                      ",\n  \"j_aggressive_ground\": " + format_double(j_aggressive) +
                      ",\n  \"j_split_greedy\": " + format_double(j_split) + "\n}\n";
  write_text_file((dir / "story.json").string(), story);
  return spi.holds ? 0 : 1;
}

int run_demo(const DemoOpts& opts) {
  apply_thread_cap(opts.common.threads);
  Settings settings = {{"env", opts.env}, {"c", format_double(opts.c)}};
  for (const auto& [key, value] : parse_params(opts.params)) {
    settings.emplace_back("param." + key, format_double(value));
  }
  const fs::path dir = make_run_dir(opts.common, "demo", settings);
  if (opts.env == "fig1") return run_demo_fig1(opts, dir);
  if (opts.env == "fig2") return run_demo_fig2(opts, dir);
  throw ConfigError("demo supports fig1 and fig2");
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

struct ReportOpts {
  CommonOpts common;
  std::vector<std::string> inputs;
};

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream fields(line);
    while (std::getline(fields, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

int run_report(const ReportOpts& opts) {
  struct Slacks {
    long count = 0;
    long holds = 0;
    long vacuous = 0;
    std::vector<double> slacks;
  };
  std::map<std::string, Slacks> bounds;
  struct TraceStat {
    std::string path;
    double first = 0.0;
    double last = 0.0;
  };
  std::vector<TraceStat> traces;
  std::string plot = "trace,iteration,j_ground,j_latent,l_r,l_p\n";

  for (const std::string& path : opts.inputs) {
    const auto rows = parse_csv(read_text_file(path));
    if (rows.empty()) throw ConfigError(path + ": empty file");
    const std::string header = [&] {
      std::string h;
      for (std::size_t i = 0; i < rows[0].size(); ++i) h += (i ? "," : "") + rows[0][i];
      return h;
    }();
    if (header == kBoundsHeader) {
      for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 8) throw ConfigError(path + ": malformed bounds row");
        Slacks& entry = bounds[rows[i][1]];
        ++entry.count;
        entry.holds += rows[i][5] == "1";
        entry.vacuous += rows[i][6] == "1";
        entry.slacks.push_back(std::stod(rows[i][4]));
      }
    } else if (header == kTraceHeader) {
      TraceStat stat;
      stat.path = path;
      bool have_first = false;
      for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 11) throw ConfigError(path + ": malformed trace row");
        if (rows[i][1].empty()) continue;
        const double j = std::stod(rows[i][1]);
        if (!have_first) {
          stat.first = j;
          have_first = true;
        }
        stat.last = j;
        plot += path + "," + rows[i][0] + "," + rows[i][1] + "," + rows[i][2] + "," + rows[i][3] +
                "," + rows[i][4] + "\n";
      }
      if (have_first) traces.push_back(std::move(stat));
    } else {
      throw ConfigError(path + ": unrecognized schema; expected a bounds or trace CSV");
    }
  }

  Settings settings;
  for (std::size_t i = 0; i < opts.inputs.size(); ++i) {
    settings.emplace_back("input." + std::to_string(i), opts.inputs[i]);
  }
  const fs::path dir = make_run_dir(opts.common, "report", settings);

  std::string json = "{\n  \"bounds\": {";
  bool first_bound = true;
  for (auto& [name, entry] : bounds) {
    std::sort(entry.slacks.begin(), entry.slacks.end());
    const std::size_t m = entry.slacks.size();
    const double median =
        m % 2 ? entry.slacks[m / 2] : 0.5 * (entry.slacks[m / 2 - 1] + entry.slacks[m / 2]);
    json += std::string(first_bound ? "" : ",") + "\n    \"" + name +
            "\": {\"count\": " + std::to_string(entry.count) +
            ", \"holds\": " + std::to_string(entry.holds) +
            ", \"violations\": " + std::to_string(entry.count - entry.holds) +
            ", \"vacuous\": " + std::to_string(entry.vacuous) +
            ", \"min_slack\": " + format_double(entry.slacks.front()) +
            ", \"median_slack\": " + format_double(median) + "}";
    first_bound = false;
    std::cout << name << ": " << entry.count << " checks, " << entry.count - entry.holds
              << " violations, " << entry.vacuous << " vacuous, min slack "
              << format_double(entry.slacks.front()) << ", median slack " << format_double(median)
              << "\n";
  }
  json += bounds.empty() ? "},\n" : "\n  },\n";
  json += "  \"traces\": [";
  for (std::size_t i = 0; i < traces.size(); ++i) {
    json += std::string(i ? "," : "") + "\n    {\"path\": \"" + traces[i].path +
            "\", \"j_first\": " + format_double(traces[i].first) +
            ", \"j_last\": " + format_double(traces[i].last) +
            ", \"improvement\": " + format_double(traces[i].last - traces[i].first) + "}";
    std::cout << traces[i].path << ": return " << format_double(traces[i].first) << " -> "
              << format_double(traces[i].last) << "\n";
  }
  json += traces.empty() ? "]\n}\n" : "\n  ]\n}\n";
  write_text_file((dir / "summary.json").string(), json);
  write_text_file((dir / "plot.csv").string(), plot);
  std::cout << "run directory: " << dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safe policy improvement with latent world models: a desk-scale laboratory"};
  app.require_subcommand(1);
  int exit_code = 0;

  SolveOpts solve_opts;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Evaluate a policy or compute an optimal one");
  add_common(solve_cmd, solve_opts.common);
  add_env_opts(solve_cmd, solve_opts.env);
  solve_cmd->add_option("--policy", solve_opts.policy_path,
                        "Ground policy to evaluate; omitted, solve for an optimal one");
  solve_cmd->add_flag("--episodic", solve_opts.episodic,
                      "Evaluate per-episode values (reset state pinned to zero)");
  solve_cmd->callback([&] {
    apply_config_file(solve_cmd, solve_opts.common.config_path);
    exit_code = run_solve(solve_opts);
  });

  ImproveOpts improve_opts;
  CLI::App* improve_cmd =
      app.add_subcommand("improve", "Iterate the neighborhood-constrained mirror update");
  add_common(improve_cmd, improve_opts.common);
  add_env_opts(improve_cmd, improve_opts.env);
  improve_cmd->add_option("--policy", improve_opts.policy_path,
                          "Starting ground policy; omitted, the uniform policy");
  improve_cmd->add_option("--c", improve_opts.c, "Neighborhood constant, in (1, 2)")
      ->capture_default_str();
  improve_cmd->add_option("--iters", improve_opts.iters, "Maximum update iterations")
      ->capture_default_str();
  improve_cmd->add_option("--tol", improve_opts.tol, "Stop when no state value gains more")
      ->capture_default_str();
  improve_cmd->callback([&] {
    apply_config_file(improve_cmd, improve_opts.common.config_path);
    exit_code = run_improve(improve_opts);
  });

  DeepSpiOpts deepspi_opts;
  CLI::App* deepspi_cmd = app.add_subcommand(
      "deepspi", "Offline loop: fit world model, clipped latent update, audit, verify");
  add_common(deepspi_cmd, deepspi_opts.common);
  add_env_opts(deepspi_cmd, deepspi_opts.env);
  deepspi_cmd->add_option("--c", deepspi_opts.c, "Neighborhood constant for the audits")
      ->capture_default_str();
  deepspi_cmd->add_option("--steps", deepspi_opts.steps, "Outer collect/fit/update rounds")
      ->capture_default_str();
  deepspi_cmd->add_option("--samples", deepspi_opts.samples, "Transitions sampled per round")
      ->capture_default_str();
  deepspi_cmd->add_option("--seed", deepspi_opts.seed, "Sampling seed")->capture_default_str();
  deepspi_cmd->add_option("--clip", deepspi_opts.surrogate.epsilon_clip, "Clip band half-width")
      ->capture_default_str();
  deepspi_cmd->add_option("--alpha-r", deepspi_opts.surrogate.alpha_r, "Reward-loss weight")
      ->capture_default_str();
  deepspi_cmd->add_option("--alpha-p", deepspi_opts.surrogate.alpha_p, "Transition-loss weight")
      ->capture_default_str();
  deepspi_cmd->add_option("--lr", deepspi_opts.surrogate.learning_rate, "Ascent step size")
      ->capture_default_str();
  deepspi_cmd->add_option("--epochs", deepspi_opts.surrogate.epochs, "Passes over each batch")
      ->capture_default_str();
  deepspi_cmd
      ->add_option("--minibatches", deepspi_opts.surrogate.minibatches,
                   "Contiguous splits per epoch")
      ->capture_default_str();
  deepspi_cmd->callback([&] {
    apply_config_file(deepspi_cmd, deepspi_opts.common.config_path);
    exit_code = run_deepspi(deepspi_opts);
  });

  DreamOpts dream_opts;
  CLI::App* dream_cmd = app.add_subcommand(
      "dream-eval", "Monte Carlo return inside a latent model vs exact evaluation");
  add_common(dream_cmd, dream_opts.common);
  add_env_opts(dream_cmd, dream_opts.env);
  dream_cmd->add_option("--policy", dream_opts.policy_path, "Latent policy to evaluate");
  dream_cmd->add_option("--rollouts", dream_opts.rollouts, "Imagined rollout count")
      ->capture_default_str();
  dream_cmd->add_option("--horizon", dream_opts.horizon, "Steps per rollout")
      ->capture_default_str();
  dream_cmd->add_option("--seed", dream_opts.seed, "Rollout seed")->capture_default_str();
  dream_cmd->callback([&] {
    apply_config_file(dream_cmd, dream_opts.common.config_path);
    exit_code = run_dream_eval(dream_opts);
  });

  VerifyOpts verify_opts;
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "Run the bound verifiers on an environment, files, or a suite");
  add_common(verify_cmd, verify_opts.common);
  add_env_opts(verify_cmd, verify_opts.env);
  verify_cmd->add_option("--suite", verify_opts.suite, "random, fig1, or fig2");
  verify_cmd->add_option("--instances", verify_opts.instances, "Random-suite instance count")
      ->capture_default_str();
  verify_cmd->add_option("--seed", verify_opts.seed, "Suite seed")->capture_default_str();
  verify_cmd->add_option("--c", verify_opts.c, "Candidate neighborhood constant")
      ->capture_default_str();
  verify_cmd->add_option("--candidate", verify_opts.candidate_path,
                         "Candidate latent policy; omitted, a constrained greedy step");
  verify_cmd->add_option("--rep-epsilon", verify_opts.rep_epsilon,
                         "Also check representation quality at this epsilon (> 0 enables)");
  verify_cmd->add_option("--rep-trials", verify_opts.rep_trials,
                         "Sampled pairs for the representation check (0 = exact only)");
  verify_cmd->callback([&] {
    apply_config_file(verify_cmd, verify_opts.common.config_path);
    exit_code = run_verify(verify_opts);
  });

  PacOpts pac_opts;
  CLI::App* pac_cmd = app.add_subcommand("pac", "Sample-based improvement check");
  add_common(pac_cmd, pac_opts.common);
  add_env_opts(pac_cmd, pac_opts.env);
  pac_cmd->add_option("--candidate", pac_opts.candidate_path,
                      "Candidate latent policy; omitted, a constrained greedy step");
  pac_cmd->add_option("--epsilon", pac_opts.epsilon, "Estimation slack")->capture_default_str();
  pac_cmd->add_option("--delta", pac_opts.delta, "Failure probability budget")
      ->capture_default_str();
  pac_cmd->add_option("--ael-bound", pac_opts.ael_bound,
                      "Known episode-length bound (0 = estimate the reset mass instead)")
      ->capture_default_str();
  pac_cmd->add_option("--trials", pac_opts.trials, "Independent trials")->capture_default_str();
  pac_cmd->add_option("--c", pac_opts.c, "Candidate neighborhood constant")
      ->capture_default_str();
  pac_cmd->add_option("--seed", pac_opts.seed, "Sampling seed")->capture_default_str();
  pac_cmd->callback([&] {
    apply_config_file(pac_cmd, pac_opts.common.config_path);
    exit_code = run_pac(pac_opts);
  });

  DemoOpts demo_opts;
  CLI::App* demo_cmd = app.add_subcommand("demo", "The two counterexample walkthroughs");
  add_common(demo_cmd, demo_opts.common);
  demo_cmd->add_option("--env", demo_opts.env, "fig1 or fig2")->capture_default_str();
  demo_cmd->add_option("--param", demo_opts.params, "Environment parameter override, key=value")
      ->take_all();
  demo_cmd->add_option("--c", demo_opts.c, "Constrained-candidate neighborhood constant")
      ->capture_default_str();
  demo_cmd->callback([&] {
    apply_config_file(demo_cmd, demo_opts.common.config_path);
    exit_code = run_demo(demo_opts);
  });

  ReportOpts report_opts;
  CLI::App* report_cmd = app.add_subcommand("report", "Aggregate bound CSVs and run traces");
  add_common(report_cmd, report_opts.common);
  report_cmd->add_option("inputs", report_opts.inputs, "bounds.csv and trace.csv paths");
  report_cmd->callback([&] {
    apply_config_file(report_cmd, report_opts.common.config_path);
    exit_code = run_report(report_opts);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
