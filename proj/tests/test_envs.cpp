// Tests for the benchmark environments: closed-form returns of the
// counterexample families, exactness of the blind-spot model fit, and the
// randomized suite generator.

#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "spilab/chains.hpp"
#include "spilab/envs.hpp"
#include "spilab/errors.hpp"
#include "spilab/losses.hpp"
#include "spilab/neighborhood.hpp"
#include "spilab/solve.hpp"

using namespace spilab;
using namespace spilab::testing;

TEST_CASE("the blind-spot environment is well formed with its documented layout") {
  const EnvSpec env = build_fig1({});
  CHECK(env.name == "fig1");
  CHECK_NOTHROW(env.mdp.validate());
  CHECK_NOTHROW(env.latent.validate());
  CHECK(env.mdp.n_states == 3 + 3 + 4 + 2 + 1);
  CHECK(env.mdp.n_actions == 3);
  CHECK(env.encoder.n_latent == 6);
  CHECK(env.mdp.episodic());
  CHECK(env.baseline.full_support());
  CHECK(env.params.at("epsilon") == 1e-3);

  // The encoder's blocks follow the region layout, reset alone at the end.
  const auto blocks = env.encoder.blocks();
  REQUIRE(blocks.size() == 6);
  CHECK(blocks[0] == std::vector<int>{0, 1, 2});
  CHECK(blocks[5] == std::vector<int>{12});
}

TEST_CASE("the blind-spot model is exact away from the planted corruption") {
  const EnvSpec env = build_fig1({});
  const LatentMdp refit =
      fit_latent_model(env.mdp, env.encoder, stationary_distribution(env.mdp, env.baseline));
  CHECK(env.latent.model.transition == refit.model.transition);
  for (int x = 0; x < 6; ++x) {
    for (int a = 0; a < 3; ++a) {
      if (x == 3) {
        CHECK(env.latent.model.r(x, a) == env.params.at("corrupt_reward"));
      } else {
        CHECK(env.latent.model.r(x, a) == refit.model.r(x, a));
      }
    }
  }
}

TEST_CASE("planning against the corrupted model promises much and delivers a crash") {
  const EnvSpec env = build_fig1({});
  const double j_baseline = policy_return(env.mdp, env.baseline);

  const auto [latent_v, latent_greedy] = solve_optimal(env.latent.model);
  const double promised = latent_v[env.latent.model.initial_state];
  const double delivered = policy_return(env.mdp, compose(latent_greedy, env.encoder));
  CHECK(promised > 50.0);
  CHECK(delivered < 0.0);
  CHECK(j_baseline > 1.0);

  const StateDistribution xi = stationary_distribution(env.mdp, env.baseline);
  const LossReport losses = exact_losses(env.mdp, env.encoder, env.latent, xi, env.baseline);
  CHECK(losses.l_r < 0.05);
  CHECK(losses.l_p <= 1e-15);
}

TEST_CASE("blind-spot parameters reshape the instance") {
  const EnvSpec env = build_fig1({{"k1", 2.0}, {"k3", 2.0}, {"gamma", 0.95}});
  CHECK(env.mdp.n_states == 2 + 3 + 2 + 2 + 1);
  CHECK(env.mdp.discount == 0.95);
  CHECK(contains(thrown_message([] { build_fig1({{"k3", 1.0}}); }), "k3"));
  CHECK(contains(thrown_message([] { build_fig1({{"bogus", 1.0}}); }), "unknown parameter"));
  CHECK(contains(thrown_message([] { build_fig1({{"k1", 2.5}}); }), "integer"));
}

TEST_CASE("the merged-risk returns match their closed forms") {
  const double epsilon = 0.1;
  const double zeta = 1e-4;
  const double gamma = 0.9;
  const EnvSpec env = build_fig2({});
  CHECK(env.name == "fig2");
  CHECK(env.mdp.n_states == 5);
  CHECK(env.encoder.n_latent == 4);

  const double denom = 1.0 - std::pow(gamma, 4);
  const double j_baseline = policy_return(env.mdp, env.baseline);
  CHECK(j_baseline == doctest::Approx(-2.0 * zeta * epsilon * gamma / denom).epsilon(1e-9));

  const TabularPolicy aggressive = compose(fig2_aggressive_latent(env), env.encoder);
  const double j_aggressive = policy_return(env.mdp, aggressive);
  CHECK(j_aggressive == doctest::Approx(-2.0 * epsilon * gamma / denom).epsilon(1e-9));

  // With the split encoder the greedy policy bets only at the safe state.
  const EnvSpec split = build_fig2({{"split", 1.0}});
  CHECK(split.encoder.n_latent == 5);
  const auto [v_star, greedy] = solve_optimal(split.mdp);
  const double j_split = v_star[split.mdp.initial_state];
  CHECK(j_split == doctest::Approx(2.0 * gamma * (1.0 - epsilon) / denom).epsilon(1e-9));
}

TEST_CASE("the merged model prices the bet at its true average") {
  const EnvSpec env = build_fig2({});
  // At the merged branch latent, the fitted bet reward is the mixture
  // (1 - epsilon) * 2 + epsilon * (-2 / epsilon) = -2 epsilon.
  CHECK(env.latent.model.r(1, 1) == doctest::Approx(-0.2).epsilon(1e-10));
  const LatentMdp refit =
      fit_latent_model(env.mdp, env.encoder, stationary_distribution(env.mdp, env.baseline));
  CHECK(env.latent.model.reward == refit.model.reward);
}

TEST_CASE("merged-risk parameters are range checked") {
  CHECK(contains(thrown_message([] { build_fig2({{"epsilon", 0.3}}); }), "epsilon"));
  CHECK(contains(thrown_message([] { build_fig2({{"zeta", 0.5}}); }), "zeta"));
  CHECK(contains(thrown_message([] { build_fig2({{"split", 2.0}}); }), "split"));
}

TEST_CASE("random instances are deterministic in the seed") {
  const EnvSpec a = random_episodic({{"seed", 31.0}});
  const EnvSpec b = random_episodic({{"seed", 31.0}});
  const EnvSpec c = random_episodic({{"seed", 32.0}});
  CHECK(a.mdp.transition == b.mdp.transition);
  CHECK(a.mdp.reward == b.mdp.reward);
  CHECK(a.encoder.mapping == b.encoder.mapping);
  CHECK(a.baseline.probs == b.baseline.probs);
  CHECK(a.mdp.transition != c.mdp.transition);
}

TEST_CASE("random instances are ergodic, episodic, and latent surjective") {
  for (const double seed : {101.0, 102.0, 103.0, 104.0, 105.0}) {
    const EnvSpec env = random_episodic({{"seed", seed}});
    CHECK_NOTHROW(env.mdp.validate());
    CHECK_NOTHROW(env.latent.validate());
    CHECK(env.mdp.episodic());
    CHECK(env.baseline.full_support());

    const auto chain = analyze_chain(induced_transition(env.mdp, env.baseline), env.mdp.n_states);
    CHECK(chain.classes.size() == 1);

    std::set<int> images(env.encoder.mapping.begin(), env.encoder.mapping.end());
    CHECK(static_cast<int>(images.size()) == env.encoder.n_latent);
    CHECK(env.encoder(*env.mdp.reset_state) == *env.latent.model.reset_state);

    // Every latent block has positive stationary mass, so the fit is sound.
    const StateDistribution xi = stationary_distribution(env.mdp, env.baseline);
    CHECK(xi.covers_all_states());
  }
}

TEST_CASE("random instance shape parameters are honored and validated") {
  const EnvSpec env = random_episodic(
      {{"n_states", 6.0}, {"n_actions", 2.0}, {"n_latent", 3.0}, {"gamma", 0.95}, {"seed", 1.0}});
  CHECK(env.mdp.n_states == 6);
  CHECK(env.mdp.n_actions == 2);
  CHECK(env.encoder.n_latent == 4);
  CHECK(env.mdp.discount == 0.95);
  CHECK(contains(thrown_message([] { random_episodic({{"n_states", 1.0}}); }), "n_states"));
  CHECK(contains(thrown_message([] { random_episodic({{"n_actions", 9.0}}); }), "n_actions"));
}

TEST_CASE("random neighborhood candidates are members by construction") {
  const EnvSpec env = random_episodic({{"seed", 41.0}});
  for (const double c : {1.05, 1.3, 1.7}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const TabularPolicy candidate =
          random_neighborhood_candidate(env.baseline_latent, c, seed);
      CHECK(in_neighborhood(env.baseline_latent, candidate, c));
    }
  }
  const TabularPolicy a = random_neighborhood_candidate(env.baseline_latent, 1.3, 4);
  const TabularPolicy b = random_neighborhood_candidate(env.baseline_latent, 1.3, 4);
  CHECK(a.probs == b.probs);
}

TEST_CASE("the greedy latent candidate improves the latent return inside the neighborhood") {
  const EnvSpec env = build_fig1({});
  const TabularPolicy candidate = latent_greedy_candidate(env, 1.1);
  CHECK(in_neighborhood(env.baseline_latent, candidate, 1.1));
  const double before = policy_return(env.latent.model, env.baseline_latent);
  const double after = policy_return(env.latent.model, candidate);
  CHECK(after > before);
}
