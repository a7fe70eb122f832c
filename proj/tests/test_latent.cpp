// Tests for encoders, latent model fitting, policy composition, and the
// Lipschitz analysis of latent models.

#include <cmath>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "spilab/envs.hpp"
#include "spilab/errors.hpp"
#include "spilab/latent.hpp"
#include "spilab/solve.hpp"

using namespace spilab;
using namespace spilab::testing;

TEST_CASE("encoder blocks partition the ground states") {
  Encoder encoder;
  encoder.n_latent = 3;
  encoder.mapping = {0, 2, 0, 1, 2};
  CHECK_NOTHROW(encoder.validate(5));
  CHECK(encoder(1) == 2);
  CHECK(encoder.n_ground() == 5);
  const auto blocks = encoder.blocks();
  REQUIRE(blocks.size() == 3);
  CHECK(blocks[0] == std::vector<int>{0, 2});
  CHECK(blocks[1] == std::vector<int>{3});
  CHECK(blocks[2] == std::vector<int>{1, 4});
}

TEST_CASE("encoder validation rejects gaps and bad entries") {
  Encoder encoder;
  encoder.n_latent = 3;
  encoder.mapping = {0, 0, 1, 1};
  CHECK(contains(thrown_message([&] { encoder.validate(4); }), "latent state 2"));
  encoder.mapping = {0, 1, 2, 5};
  CHECK(contains(thrown_message([&] { encoder.validate(4); }), "out-of-range"));
  encoder.mapping = {0, 1, 2};
  CHECK(contains(thrown_message([&] { encoder.validate(4); }), "covers"));
  CHECK_NOTHROW(Encoder::identity(4).validate(4));
}

TEST_CASE("pushforward adds up block masses and preserves total mass") {
  Encoder encoder;
  encoder.n_latent = 2;
  encoder.mapping = {0, 1, 0, 1};
  const auto pushed = pushforward(encoder, {0.1, 0.2, 0.3, 0.4});
  REQUIRE(pushed.size() == 2);
  CHECK(pushed[0] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(pushed[1] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(contains(thrown_message([&] { pushforward(encoder, {0.1, -0.2, 0.3, 0.4}); }),
                 "nonnegative"));
}

TEST_CASE("fitting aggregates rewards and pushed transition rows by weight") {
  // Two ground states merge into one latent; weights 0.6 / 0.2 within the
  // block give a 3:1 average. The third state keeps its own block.
  FiniteMdp mdp;
  mdp.n_states = 3;
  mdp.n_actions = 1;
  mdp.discount = 0.9;
  mdp.initial_state = 0;
  mdp.transition = {0.5, 0.5, 0.0, 0.0, 0.5, 0.5, 1.0, 0.0, 0.0};
  mdp.reward = {1.0, 2.0, 3.0};

  Encoder encoder;
  encoder.n_latent = 2;
  encoder.mapping = {0, 0, 1};
  StateDistribution weighting;
  weighting.xi = {0.6, 0.2, 0.2};

  const LatentMdp latent = fit_latent_model(mdp, encoder, weighting);
  CHECK_NOTHROW(latent.validate());
  CHECK(latent.model.n_states == 2);
  CHECK(latent.model.initial_state == 0);
  CHECK(latent.model.r(0, 0) == doctest::Approx(0.75 * 1.0 + 0.25 * 2.0).epsilon(1e-12));
  CHECK(latent.model.r(1, 0) == 3.0);
  // Pushed rows: state 0 -> (1.0, 0.0), state 1 -> (0.5, 0.5); average 3:1.
  CHECK(latent.model.p(0, 0, 0) == doctest::Approx(0.875).epsilon(1e-12));
  CHECK(latent.model.p(0, 0, 1) == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(latent.model.p(1, 0, 0) == 1.0);
  CHECK(latent.d(0, 1) == 1.0);
  CHECK(latent.d(0, 0) == 0.0);
}

TEST_CASE("fitting requires positive weight in every block") {
  const FiniteMdp mdp = cycle_mdp(3, 0.9);
  Encoder encoder;
  encoder.n_latent = 3;
  encoder.mapping = {0, 1, 2};
  StateDistribution weighting;
  weighting.xi = {0.5, 0.0, 0.5};
  CHECK(contains(thrown_message([&] { fit_latent_model(mdp, encoder, weighting); }),
                 "block 1"));
}

TEST_CASE("fitting an episodic ground needs the reset state alone in its block") {
  const FiniteMdp mdp = cycle_mdp(3, 0.9);
  Encoder merged;
  merged.n_latent = 2;
  merged.mapping = {0, 1, 1};
  StateDistribution weighting;
  weighting.xi = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  CHECK(contains(thrown_message([&] { fit_latent_model(mdp, merged, weighting); }), "reset"));
}

TEST_CASE("fitting a block-constant mdp reproduces its dynamics exactly") {
  // Both states of the merged block push to the same latent row, so
  // aggregation loses nothing regardless of the weighting.
  const EnvSpec env = build_fig1({});
  const LatentMdp refit =
      fit_latent_model(env.mdp, env.encoder, stationary_distribution(env.mdp, env.baseline));
  const std::vector<std::vector<int>> blocks = env.encoder.blocks();
  for (int x = 0; x < refit.model.n_states; ++x) {
    for (int a = 0; a < refit.model.n_actions; ++a) {
      for (int y = 0; y < refit.model.n_states; ++y) {
        const double direct = refit.model.p(x, a, y);
        for (int s : blocks[x]) {
          double pushed = 0.0;
          for (int s2 = 0; s2 < env.mdp.n_states; ++s2) {
            if (env.encoder(s2) == y) pushed += env.mdp.p(s, a, s2);
          }
          CHECK(std::abs(pushed - direct) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("compose and latent_factor are inverse on block-constant policies") {
  Encoder encoder;
  encoder.n_latent = 2;
  encoder.mapping = {0, 1, 0};
  TabularPolicy latent_policy;
  latent_policy.n_states = 2;
  latent_policy.n_actions = 2;
  latent_policy.probs = {0.3, 0.7, 0.9, 0.1};

  const TabularPolicy ground = compose(latent_policy, encoder);
  CHECK(ground.n_states == 3);
  CHECK(ground.prob(0, 1) == 0.7);
  CHECK(ground.prob(2, 1) == 0.7);
  CHECK(ground.prob(1, 0) == 0.9);

  const TabularPolicy recovered = latent_factor(ground, encoder);
  CHECK(recovered.probs == latent_policy.probs);
}

TEST_CASE("latent_factor rejects policies that vary within a block") {
  Encoder encoder;
  encoder.n_latent = 1;
  encoder.mapping = {0, 0};
  TabularPolicy ground;
  ground.n_states = 2;
  ground.n_actions = 2;
  ground.probs = {0.5, 0.5, 0.4, 0.6};
  CHECK(contains(thrown_message([&] { latent_factor(ground, encoder); }), "block 0"));
}

TEST_CASE("metric validation enforces the axioms") {
  LatentMdp latent;
  latent.model = single_loop(0.9, 0.0);
  latent.model.n_states = 2;
  latent.model.n_actions = 1;
  latent.model.transition = {1.0, 0.0, 0.0, 1.0};
  latent.model.reward = {0.0, 0.0};

  latent.metric = {0.0, 1.0, 1.0, 0.0};
  CHECK_NOTHROW(latent.validate());

  latent.metric = {0.0, 1.0, 2.0, 0.0};
  CHECK(contains(thrown_message([&] { latent.validate(); }), "symmetric"));

  latent.metric = {0.5, 1.0, 1.0, 0.0};
  CHECK(contains(thrown_message([&] { latent.validate(); }), "diagonal"));

  latent.metric = {0.0, -1.0, -1.0, 0.0};
  CHECK(contains(thrown_message([&] { latent.validate(); }), "nonnegative"));

  LatentMdp triple;
  triple.model = latent.model;
  triple.model.n_states = 3;
  triple.model.transition = {1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0};
  triple.model.reward = {0.0, 0.0, 0.0};
  triple.metric = {0.0, 1.0, 5.0, 1.0, 0.0, 1.0, 5.0, 1.0, 0.0};
  CHECK(contains(thrown_message([&] { triple.validate(); }), "triangle"));
}

TEST_CASE("lipschitz constants on a two-point latent come out by hand") {
  // Rewards differ by 1.2 across distance 2; rows are point masses on the
  // two latents, so the kernel moves by the full distance: k_p = 1.
  LatentMdp latent;
  latent.model.n_states = 2;
  latent.model.n_actions = 1;
  latent.model.discount = 0.5;
  latent.model.transition = {0.0, 1.0, 1.0, 0.0};
  latent.model.reward = {1.2, 0.0};
  latent.metric = {0.0, 2.0, 2.0, 0.0};

  const LipschitzReport report = lipschitz_constants(latent, TabularPolicy::uniform(2, 1));
  CHECK(report.k_r == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(report.k_p == doctest::Approx(1.0).epsilon(1e-12));
  REQUIRE(report.k_v_finite);
  CHECK(report.k_v == doctest::Approx(0.6 / (1.0 - 0.5)).epsilon(1e-12));
}

TEST_CASE("an expansive kernel leaves k_v infinite") {
  // Latents at line coordinates 0, 0.1, 2: states 0 and 1 are close but
  // their successor point masses sit at coordinates 0 and 2, so one step
  // expands the pair by a factor of 20 > 1 / discount.
  LatentMdp latent;
  latent.model.n_states = 3;
  latent.model.n_actions = 1;
  latent.model.discount = 0.9;
  latent.model.transition = {1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0};
  latent.model.reward = {0.0, 0.0, 1.0};
  latent.metric = {0.0, 0.1, 2.0, 0.1, 0.0, 1.9, 2.0, 1.9, 0.0};

  const LipschitzReport report = lipschitz_constants(latent, TabularPolicy::uniform(3, 1));
  CHECK(report.k_p == doctest::Approx(20.0).epsilon(1e-9));
  CHECK_FALSE(report.k_v_finite);
  CHECK(std::isinf(report.k_v));
}

TEST_CASE("zero-distance latents must behave identically") {
  LatentMdp latent;
  latent.model.n_states = 2;
  latent.model.n_actions = 1;
  latent.model.discount = 0.9;
  latent.model.transition = {1.0, 0.0, 0.0, 1.0};
  latent.model.reward = {0.0, 1.0};
  latent.metric = {0.0, 0.0, 0.0, 0.0};
  CHECK_NOTHROW(latent.validate());
  CHECK(contains(
      thrown_message([&] { lipschitz_constants(latent, TabularPolicy::uniform(2, 1)); }),
      "behaviorally distinct"));
}

TEST_CASE("parallel lipschitz analysis matches serial bitwise") {
  const EnvSpec env = random_episodic({{"seed", 33.0}});
  const TabularPolicy latent_policy =
      TabularPolicy::uniform(env.latent.n_latent(), env.mdp.n_actions);
  const LipschitzReport serial = lipschitz_constants(env.latent, latent_policy, Exec::serial);
  const LipschitzReport parallel = lipschitz_constants(env.latent, latent_policy, Exec::parallel);
  CHECK(serial.k_r == parallel.k_r);
  CHECK(serial.k_p == parallel.k_p);
  CHECK(serial.k_v == parallel.k_v);
}

TEST_CASE("reset alignment checks both directions") {
  const EnvSpec env = build_fig1({});
  CHECK_NOTHROW(check_reset_alignment(env.mdp, env.encoder, env.latent));

  Encoder wrong = env.encoder;
  const int reset = *env.mdp.reset_state;
  wrong.mapping[reset] = 0;
  wrong.mapping[0] = wrong.n_latent - 1;
  CHECK(contains(thrown_message([&] { check_reset_alignment(env.mdp, wrong, env.latent); }),
                 "reset"));

  LatentMdp no_reset = env.latent;
  no_reset.model.reset_state.reset();
  CHECK(contains(thrown_message([&] { check_reset_alignment(env.mdp, env.encoder, no_reset); }),
                 "no reset state"));
}
