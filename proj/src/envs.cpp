#include "spilab/envs.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "spilab/chains.hpp"
#include "spilab/errors.hpp"
#include "spilab/neighborhood.hpp"
#include "spilab/rng.hpp"
#include "spilab/solve.hpp"

namespace spilab {
namespace {

// User parameters overlaid on defaults; unknown keys are typos and rejected.
class Params {
 public:
  Params(std::string env_name, const std::map<std::string, double>& given,
         std::map<std::string, double> defaults)
      : name_(std::move(env_name)), values_(std::move(defaults)) {
    for (const auto& [key, value] : given) {
      auto it = values_.find(key);
      if (it == values_.end()) {
        throw ConfigError(name_ + ": unknown parameter '" + key + "'");
      }
      it->second = value;
    }
  }

  double get(const std::string& key) const { return values_.at(key); }

  int get_int(const std::string& key) const {
    const double x = values_.at(key);
    if (std::floor(x) != x) {
      throw ConfigError(name_ + ": parameter '" + key + "' must be an integer");
    }
    return static_cast<int>(x);
  }

  void set(const std::string& key, double value) { values_.at(key) = value; }

  const std::map<std::string, double>& all() const { return values_; }

 private:
  std::string name_;
  std::map<std::string, double> values_;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

// Fills row(s, a) with the in-region step: stay with probability 1 - drift,
// move to the region's next state (cyclic within [lo, hi)) with probability
// drift * (k - 1) / k, exit to `exit_state` with probability drift / k. The
// encoder image of the row is the same for every s in the region.
void region_step(FiniteMdp& mdp, int s, int a, int lo, int hi, int exit_state, double drift) {
  const int k = hi - lo;
  const int next = lo + (s - lo + 1) % k;
  mdp.p(s, a, s) += 1.0 - drift;
  mdp.p(s, a, next) += drift * (k - 1) / k;
  mdp.p(s, a, exit_state) += drift / k;
}

}  // namespace

EnvSpec build_fig1(const std::map<std::string, double>& params) {
  Params p("fig1", params,
           {{"epsilon", 1e-3},
            {"gamma", 0.9},
            {"k1", 3},
            {"k2", 3},
            {"k3", 4},
            {"k4", 2},
            {"drift", 0.6},
            {"r_bad", -1.0},
            {"r_good", 1.0},
            {"corrupt_reward", 20.0}});
  const double eps = p.get("epsilon");
  const double gamma = p.get("gamma");
  const double drift = p.get("drift");
  const int k1 = p.get_int("k1");
  const int k2 = p.get_int("k2");
  const int k3 = p.get_int("k3");
  const int k4 = p.get_int("k4");
  require(eps > 0.0 && eps < 0.5, "fig1: epsilon must lie in (0, 0.5)");
  require(gamma > 0.0 && gamma < 1.0, "fig1: gamma must lie in (0, 1)");
  require(drift > 0.0 && drift <= 1.0, "fig1: drift must lie in (0, 1]");
  require(k1 >= 1 && k2 >= 1 && k4 >= 1, "fig1: region sizes must be positive");
  require(k3 >= 2, "fig1: k3 must be at least 2, the penalty corridor splits into two halves");

  // Ground layout: start region, corridor to the target, penalty corridor
  // (early half, late half), target corridor, reset.
  const int s1 = 0;
  const int s2 = s1 + k1;
  const int s3 = s2 + k2;
  const int half = (k3 + 1) / 2;
  const int s3_late = s3 + half;
  const int s4 = s3 + k3;
  const int reset = s4 + k4;
  const int n = reset + 1;
  const int kAdvance = 0;  // toward the corridor to the target
  const int kJump = 1;     // into the penalty corridor
  const int kWork = 2;     // toward the target corridor

  FiniteMdp mdp;
  mdp.n_states = n;
  mdp.n_actions = 3;
  mdp.discount = gamma;
  mdp.initial_state = 0;
  mdp.reset_state = reset;
  mdp.transition.assign(static_cast<std::size_t>(n) * 3 * n, 0.0);
  mdp.reward.assign(static_cast<std::size_t>(n) * 3, 0.0);

  for (int s = s1; s < s2; ++s) {
    region_step(mdp, s, kAdvance, s1, s2, s2, drift);
    mdp.p(s, kJump, s3) = 1.0;
    mdp.p(s, kWork, s) = 1.0;
  }
  for (int s = s2; s < s3; ++s) {
    mdp.p(s, kAdvance, s) = 1.0;
    mdp.p(s, kJump, s) = 1.0;
    region_step(mdp, s, kWork, s2, s3, s4, drift);
  }
  for (int s = s3; s < s4; ++s) {
    for (int a = 0; a < 3; ++a) {
      if (s < s3_late) {
        region_step(mdp, s, a, s3, s3_late, s3_late, drift);
      } else {
        region_step(mdp, s, a, s3_late, s4, reset, drift);
      }
      mdp.r(s, a) = p.get("r_bad");
    }
  }
  for (int s = s4; s < reset; ++s) {
    for (int a = 0; a < 3; ++a) {
      region_step(mdp, s, a, s4, reset, reset, drift);
      mdp.r(s, a) = p.get("r_good");
    }
  }
  for (int a = 0; a < 3; ++a) mdp.p(reset, a, mdp.initial_state) = 1.0;
  mdp.validate();

  TabularPolicy baseline;
  baseline.n_states = n;
  baseline.n_actions = 3;
  baseline.probs.assign(static_cast<std::size_t>(n) * 3, 1.0 / 3.0);
  for (int s = s1; s < s2; ++s) {
    baseline.prob(s, kAdvance) = 1.0 - eps;
    baseline.prob(s, kJump) = eps / 2.0;
    baseline.prob(s, kWork) = eps / 2.0;
  }
  for (int s = s2; s < s3; ++s) {
    baseline.prob(s, kAdvance) = eps / 2.0;
    baseline.prob(s, kJump) = eps / 2.0;
    baseline.prob(s, kWork) = 1.0 - eps;
  }
  baseline.validate();

  Encoder encoder;
  encoder.n_latent = 6;
  encoder.mapping.assign(n, 0);
  for (int s = s2; s < s3; ++s) encoder.mapping[s] = 1;
  for (int s = s3; s < s3_late; ++s) encoder.mapping[s] = 2;
  for (int s = s3_late; s < s4; ++s) encoder.mapping[s] = 3;
  for (int s = s4; s < reset; ++s) encoder.mapping[s] = 4;
  encoder.mapping[reset] = 5;
  encoder.validate(n);

  // The model is fit from the baseline's visitation; by the region-uniform
  // construction it reproduces the ground MDP exactly. The corruption then
  // plants a large fake reward at the late penalty latent, which the
  // baseline's data almost never reaches.
  LatentMdp latent = fit_latent_model(mdp, encoder, stationary_distribution(mdp, baseline));
  for (int a = 0; a < 3; ++a) latent.model.r(3, a) = p.get("corrupt_reward");
  latent.validate();

  EnvSpec env;
  env.name = "fig1";
  env.params = p.all();
  env.mdp = std::move(mdp);
  env.encoder = std::move(encoder);
  env.latent = std::move(latent);
  env.baseline_latent = latent_factor(baseline, env.encoder);
  env.baseline = std::move(baseline);
  return env;
}

EnvSpec build_fig2(const std::map<std::string, double>& params) {
  Params p("fig2", params,
           {{"epsilon", 0.1}, {"zeta", 1e-4}, {"gamma", 0.9}, {"split", 0.0}});
  const double eps = p.get("epsilon");
  const double zeta = p.get("zeta");
  const double gamma = p.get("gamma");
  const int split = p.get_int("split");
  require(eps > 0.0 && eps < 0.25, "fig2: epsilon must lie in (0, 1/4)");
  require(zeta > 0.0 && zeta < eps, "fig2: zeta must lie in (0, epsilon)");
  require(gamma > 0.0 && gamma < 1.0, "fig2: gamma must lie in (0, 1)");
  require(split == 0 || split == 1, "fig2: split must be 0 or 1");

  // States: start, safe branch, risky branch, exit, reset.
  // Actions: pass (reward 0) and bet (+2 at safe, -2/epsilon at risky).
  const int kStart = 0, kSafe = 1, kRisky = 2, kExit = 3, kReset = 4;
  const int kBet = 1;

  FiniteMdp mdp;
  mdp.n_states = 5;
  mdp.n_actions = 2;
  mdp.discount = gamma;
  mdp.initial_state = kStart;
  mdp.reset_state = kReset;
  mdp.transition.assign(5 * 2 * 5, 0.0);
  mdp.reward.assign(5 * 2, 0.0);
  for (int a = 0; a < 2; ++a) {
    mdp.p(kStart, a, kSafe) = 1.0 - eps;
    mdp.p(kStart, a, kRisky) = eps;
    mdp.p(kSafe, a, kExit) = 1.0;
    mdp.p(kRisky, a, kExit) = 1.0;
    mdp.p(kExit, a, kReset) = 1.0;
    mdp.p(kReset, a, kStart) = 1.0;
  }
  mdp.r(kSafe, kBet) = 2.0;
  mdp.r(kRisky, kBet) = -2.0 / eps;
  mdp.validate();

  Encoder encoder;
  if (split == 1) {
    encoder = Encoder::identity(5);
  } else {
    encoder.n_latent = 4;
    encoder.mapping = {0, 1, 1, 2, 3};
  }
  encoder.validate(5);

  TabularPolicy baseline_latent;
  baseline_latent.n_states = encoder.n_latent;
  baseline_latent.n_actions = 2;
  baseline_latent.probs.assign(static_cast<std::size_t>(encoder.n_latent) * 2, 0.0);
  for (int x = 0; x < encoder.n_latent; ++x) {
    baseline_latent.prob(x, 0) = 1.0 - zeta;
    baseline_latent.prob(x, kBet) = zeta;
  }
  baseline_latent.validate();
  TabularPolicy baseline = compose(baseline_latent, encoder);

  LatentMdp latent = fit_latent_model(mdp, encoder, stationary_distribution(mdp, baseline));

  EnvSpec env;
  env.name = "fig2";
  env.params = p.all();
  env.mdp = std::move(mdp);
  env.encoder = std::move(encoder);
  env.latent = std::move(latent);
  env.baseline = std::move(baseline);
  env.baseline_latent = std::move(baseline_latent);
  return env;
}

TabularPolicy fig2_aggressive_latent(const EnvSpec& env) {
  require(env.name == "fig2", "fig2_aggressive_latent expects a fig2 environment");
  TabularPolicy out = env.baseline_latent;
  // Ground states 1 and 2 are the branch states; merged encoders send both to
  // one latent, split encoders to two.
  for (int ground : {1, 2}) {
    const int x = env.encoder(ground);
    out.prob(x, 0) = 0.0;
    out.prob(x, 1) = 1.0;
  }
  out.validate();
  return out;
}

EnvSpec random_episodic(const std::map<std::string, double>& params) {
  Params p("random_episodic", params,
           {{"n_states", 12.0},
            {"n_actions", 3.0},
            {"gamma", 0.9},
            {"branching", 3.0},
            {"n_latent", 0.0},
            {"reward_scale", 1.0},
            {"seed", 0.0}});
  const int n = p.get_int("n_states");
  const int na = p.get_int("n_actions");
  const double gamma = p.get("gamma");
  const int branching = p.get_int("branching");
  const double scale = p.get("reward_scale");
  require(n >= 2 && n <= 20, "random_episodic: n_states must lie in [2, 20]");
  require(na >= 1 && na <= 5, "random_episodic: n_actions must lie in [1, 5]");
  require(gamma > 0.0 && gamma < 1.0, "random_episodic: gamma must lie in (0, 1)");
  require(branching >= 1 && branching <= n, "random_episodic: branching must lie in [1, n_states]");
  require(scale >= 0.0, "random_episodic: reward_scale must be nonnegative");
  require(p.get("seed") >= 0.0 && std::floor(p.get("seed")) == p.get("seed"),
          "random_episodic: seed must be a nonnegative integer");
  const auto seed = static_cast<std::uint64_t>(p.get("seed"));
  int n_latent = p.get_int("n_latent");
  if (n_latent == 0) n_latent = std::clamp((n - 1) / 2, 1, n - 1);
  require(n_latent >= 1 && n_latent <= n - 1,
          "random_episodic: n_latent must lie in [1, n_states - 1]");
  p.set("n_latent", n_latent);

  const int reset = n - 1;
  constexpr int kMaxAttempts = 64;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng(derive_seed(seed, attempt));

    FiniteMdp mdp;
    mdp.n_states = n;
    mdp.n_actions = na;
    mdp.discount = gamma;
    mdp.initial_state = 0;
    mdp.reset_state = reset;
    mdp.transition.assign(static_cast<std::size_t>(n) * na * n, 0.0);
    mdp.reward.assign(static_cast<std::size_t>(n) * na, 0.0);
    for (int s = 0; s < reset; ++s) {
      for (int a = 0; a < na; ++a) {
        std::set<int> successors;
        while (static_cast<int>(successors.size()) < branching) {
          successors.insert(rng.uniform_int(n));
        }
        // Weights bounded away from zero keep no successor vanishingly rare.
        std::vector<double> weights;
        double total = 0.0;
        for (std::size_t i = 0; i < successors.size(); ++i) {
          weights.push_back(0.1 + rng.uniform());
          total += weights.back();
        }
        std::size_t i = 0;
        for (int s2 : successors) mdp.p(s, a, s2) = weights[i++] / total;
        mdp.r(s, a) = rng.uniform(-scale, scale);
      }
    }
    for (int a = 0; a < na; ++a) mdp.p(reset, a, mdp.initial_state) = 1.0;
    mdp.validate();

    // Accept only instances whose union transition graph is irreducible:
    // then every full-support policy makes the reset state recurrent and
    // gives every latent block positive stationary mass.
    const std::vector<double> chain = induced_transition(mdp, TabularPolicy::uniform(n, na));
    if (analyze_chain(chain, n).classes.size() != 1) continue;

    Encoder encoder;
    encoder.n_latent = n_latent + 1;
    encoder.mapping.assign(n, 0);
    encoder.mapping[reset] = n_latent;
    std::vector<int> perm(reset);
    for (int s = 0; s < reset; ++s) perm[s] = s;
    for (int i = reset - 1; i > 0; --i) {
      std::swap(perm[i], perm[rng.uniform_int(i + 1)]);
    }
    for (int i = 0; i < reset; ++i) {
      encoder.mapping[perm[i]] = i < n_latent ? i : rng.uniform_int(n_latent);
    }
    encoder.validate(n);

    TabularPolicy baseline_latent;
    baseline_latent.n_states = encoder.n_latent;
    baseline_latent.n_actions = na;
    baseline_latent.probs.assign(static_cast<std::size_t>(encoder.n_latent) * na, 0.0);
    for (int x = 0; x < encoder.n_latent; ++x) {
      std::vector<double> weights;
      double total = 0.0;
      for (int a = 0; a < na; ++a) {
        weights.push_back(0.25 + rng.uniform());
        total += weights.back();
      }
      for (int a = 0; a < na; ++a) baseline_latent.prob(x, a) = weights[a] / total;
    }
    baseline_latent.validate();
    TabularPolicy baseline = compose(baseline_latent, encoder);

    EnvSpec env;
    env.name = "random_episodic";
    env.params = p.all();
    env.latent = fit_latent_model(mdp, encoder, stationary_distribution(mdp, baseline));
    env.mdp = std::move(mdp);
    env.encoder = std::move(encoder);
    env.baseline = std::move(baseline);
    env.baseline_latent = std::move(baseline_latent);
    return env;
  }
  throw ConfigError(
      "random_episodic: no irreducible instance in " + std::to_string(kMaxAttempts) +
      " attempts; increase branching or reduce n_states");
}

TabularPolicy random_neighborhood_candidate(const TabularPolicy& base, double c,
                                            std::uint64_t seed) {
  base.validate();
  Rng rng(seed);
  TabularPolicy out = base;
  std::vector<double> values(base.n_actions);
  for (int s = 0; s < base.n_states; ++s) {
    for (double& v : values) v = rng.uniform();
    const std::vector<double> row = constrained_improve_state(values, base.row(s), c);
    for (int a = 0; a < base.n_actions; ++a) out.prob(s, a) = row[a];
  }
  out.validate();
  return out;
}

TabularPolicy latent_greedy_candidate(const EnvSpec& env, double c) {
  StateDistribution uniform;
  uniform.xi.assign(env.latent.n_latent(), 1.0 / env.latent.n_latent());
  return mirror_step(env.latent.model, env.baseline_latent, c, uniform);
}

}  // namespace spilab
