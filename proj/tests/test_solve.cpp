// Tests for the exact MDP solvers against closed forms and independent
// iterative oracles.

#include <cmath>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "spilab/envs.hpp"
#include "spilab/errors.hpp"
#include "spilab/rng.hpp"
#include "spilab/solve.hpp"

using namespace spilab;
using namespace spilab::testing;

TEST_CASE("a self-loop evaluates to reward / (1 - discount)") {
  const FiniteMdp mdp = single_loop(0.5, 1.0);
  const ValueTables tables = evaluate_policy(mdp, TabularPolicy::uniform(1, 1));
  CHECK(tables.v[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(tables.q[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(tables.adv[0] == doctest::Approx(0.0));
  CHECK(policy_return(mdp, TabularPolicy::uniform(1, 1)) == doctest::Approx(2.0));
}

TEST_CASE("induced transition and reward average over the policy") {
  FiniteMdp mdp = geometric_reset(0.25, 0.9);
  mdp.n_actions = 2;
  mdp.transition = {0.75, 0.25, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0};
  mdp.reward = {1.0, 3.0, 0.0, 0.0};
  const TabularPolicy policy = TabularPolicy::uniform(2, 2);
  const auto p = induced_transition(mdp, policy);
  CHECK(p[0] == doctest::Approx(0.875));
  CHECK(p[1] == doctest::Approx(0.125));
  const auto r = induced_reward(mdp, policy);
  CHECK(r[0] == doctest::Approx(2.0));
  CHECK(r[1] == 0.0);
}

TEST_CASE("exact evaluation matches iterative evaluation on a random instance") {
  const EnvSpec env = random_episodic({{"seed", 21.0}});
  const ValueTables exact = evaluate_policy(env.mdp, env.baseline);
  const std::vector<double> iterative = iterative_policy_values(env.mdp, env.baseline);
  REQUIRE(exact.v.size() == iterative.size());
  for (std::size_t s = 0; s < iterative.size(); ++s) {
    CHECK(exact.v[s] == doctest::Approx(iterative[s]).epsilon(1e-9));
  }
  for (int s = 0; s < env.mdp.n_states; ++s) {
    for (int a = 0; a < env.mdp.n_actions; ++a) {
      const double adv = exact.advantage(s, a, env.mdp.n_actions);
      const double q = exact.action_value(s, a, env.mdp.n_actions);
      CHECK(adv == doctest::Approx(q - exact.v[s]).epsilon(1e-12));
    }
  }
}

TEST_CASE("episodic masking pins the reset state to zero") {
  const FiniteMdp mdp = cycle_mdp(4, 0.9, 1.0);
  const TabularPolicy policy = TabularPolicy::uniform(4, 1);
  const ValueTables masked = evaluate_policy(mdp, policy, true);
  CHECK(masked.v[3] == 0.0);
  CHECK(masked.v[0] == doctest::Approx(1.0 + 0.9 + 0.81).epsilon(1e-12));
  CHECK(masked.v[1] == doctest::Approx(1.0 + 0.9).epsilon(1e-12));
  CHECK(masked.v[2] == doctest::Approx(1.0).epsilon(1e-12));

  const ValueTables unmasked = evaluate_policy(mdp, policy, false);
  CHECK(unmasked.v[3] > 0.0);
}

TEST_CASE("episodic masking without a reset state is rejected") {
  const FiniteMdp mdp = single_loop(0.5, 1.0);
  CHECK(contains(thrown_message([&] { evaluate_policy(mdp, TabularPolicy::uniform(1, 1), true); }),
                 "reset"));
}

TEST_CASE("solve_optimal agrees with value iteration") {
  for (const std::uint64_t seed : {3ULL, 4ULL, 5ULL}) {
    const EnvSpec env = random_episodic({{"seed", static_cast<double>(seed)}});
    const auto [v_star, greedy] = solve_optimal(env.mdp);
    const std::vector<double> oracle = value_iteration_optimal(env.mdp);
    for (std::size_t s = 0; s < oracle.size(); ++s) {
      CHECK(v_star[s] == doctest::Approx(oracle[s]).epsilon(1e-8));
    }
    const ValueTables greedy_values = evaluate_policy(env.mdp, greedy);
    for (std::size_t s = 0; s < oracle.size(); ++s) {
      CHECK(greedy_values.v[s] == doctest::Approx(oracle[s]).epsilon(1e-8));
    }
  }
}

TEST_CASE("stationary distribution matches the state-reduction oracle") {
  const EnvSpec env = random_episodic({{"seed", 8.0}});
  const StateDistribution xi = stationary_distribution(env.mdp, env.baseline);
  const auto oracle =
      state_reduction_stationary(induced_transition(env.mdp, env.baseline), env.mdp.n_states);
  double total = 0.0;
  for (int s = 0; s < env.mdp.n_states; ++s) {
    CHECK(xi.mass(s) == doctest::Approx(oracle[s]).epsilon(1e-9));
    total += xi.mass(s);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("stationary distribution zeroes transient states") {
  // State 2 feeds the cycle {0, 1} but nothing returns to it.
  FiniteMdp mdp;
  mdp.n_states = 3;
  mdp.n_actions = 1;
  mdp.discount = 0.9;
  mdp.initial_state = 2;
  mdp.transition = {0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.5, 0.5, 0.0};
  mdp.reward = {0.0, 0.0, 0.0};
  const StateDistribution xi = stationary_distribution(mdp, TabularPolicy::uniform(3, 1));
  CHECK(xi.mass(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(xi.mass(1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(xi.mass(2) == 0.0);
}

TEST_CASE("two closed classes make the stationary distribution ill posed") {
  FiniteMdp mdp;
  mdp.n_states = 2;
  mdp.n_actions = 1;
  mdp.discount = 0.9;
  mdp.transition = {1.0, 0.0, 0.0, 1.0};
  mdp.reward = {0.0, 0.0};
  const std::string msg =
      thrown_message([&] { stationary_distribution(mdp, TabularPolicy::uniform(2, 1)); });
  CHECK(contains(msg, "closed"));
  CHECK(contains(msg, "{0}"));
  CHECK(contains(msg, "{1}"));
}

TEST_CASE("discounted occupancy matches the truncated series") {
  const EnvSpec env = random_episodic({{"seed", 12.0}});
  const StateDistribution mu = discounted_occupancy(env.mdp, env.baseline);
  const auto series = occupancy_by_series(env.mdp, env.baseline);
  double total = 0.0;
  for (int s = 0; s < env.mdp.n_states; ++s) {
    CHECK(mu.mass(s) == doctest::Approx(series[s]).epsilon(1e-8));
    total += mu.mass(s);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("occupancy of a two-state absorbing flip splits evenly") {
  // From state 0 the chain moves to absorbing state 1 immediately; with
  // discount 0.5 the normalized occupancy weights the first step 1/2.
  FiniteMdp mdp;
  mdp.n_states = 2;
  mdp.n_actions = 1;
  mdp.discount = 0.5;
  mdp.transition = {0.0, 1.0, 0.0, 1.0};
  mdp.reward = {0.0, 0.0};
  const StateDistribution mu = discounted_occupancy(mdp, TabularPolicy::uniform(2, 1));
  CHECK(mu.mass(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(mu.mass(1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("a deterministic cycle has episode length equal to its period") {
  const FiniteMdp mdp = cycle_mdp(3, 0.9);
  CHECK(average_episode_length(mdp, TabularPolicy::uniform(3, 1)) ==
        doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("a geometric reset with rate p has episode length 1/p + 1") {
  const FiniteMdp mdp = geometric_reset(0.25, 0.9);
  CHECK(average_episode_length(mdp, TabularPolicy::uniform(2, 1)) ==
        doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("episode length agrees with straight simulation") {
  const FiniteMdp mdp = geometric_reset(0.4, 0.9);
  const TabularPolicy policy = TabularPolicy::uniform(2, 1);
  const double exact = average_episode_length(mdp, policy);
  const double simulated = average_episode_length_mc(mdp, policy, 20000, 99);
  CHECK(std::abs(simulated - exact) < 0.05);
}

TEST_CASE("episode length requires a recurrent reset state") {
  // The induced chain never leaves state 0, so the reset state is starved.
  FiniteMdp mdp;
  mdp.n_states = 2;
  mdp.n_actions = 1;
  mdp.discount = 0.9;
  mdp.initial_state = 0;
  mdp.reset_state = 1;
  mdp.transition = {1.0, 0.0, 1.0, 0.0};
  mdp.reward = {1.0, 0.0};
  const std::string msg =
      thrown_message([&] { average_episode_length(mdp, TabularPolicy::uniform(2, 1)); });
  CHECK(contains(msg, "reset"));
}
