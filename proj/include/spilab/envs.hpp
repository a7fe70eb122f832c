// Benchmark environments: two hand-built counterexample families showing how
// latent planning can mislead, and a randomized episodic suite generator.
//
// The first family ("blind spot") has four regions: a start region whose
// default action drifts toward a rewarding corridor, plus a penalty corridor
// reachable by a jump action that the baseline almost never takes. Its world
// model is fit exactly, then corrupted with a large fake reward in the late
// penalty corridor, a region the baseline's data barely visits. Local losses
// under the baseline stay tiny, yet planning against the corrupted model
// jumps into the penalty corridor.
//
// The second family ("merged risk") has a start state branching to a safe
// state (probability 1 - epsilon) or a risky state (probability epsilon)
// that an encoder may merge into one latent. The bet action pays +2 at the
// safe state but -2/epsilon at the risky one, so its merged-latent average
// reward is slightly negative; a policy update that commits to the bet at
// the merged latent turns the start state's return negative, while refitting
// with the split encoder recovers the improvement.

#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "spilab/latent.hpp"
#include "spilab/mdp.hpp"

namespace spilab {

/// One fully specified environment: ground MDP, encoder, latent model, and
/// the baseline policy (latent form and its ground composition).
struct EnvSpec {
  std::string name;
  /// Resolved parameter values, defaults included.
  std::map<std::string, double> params;
  FiniteMdp mdp;
  Encoder encoder;
  LatentMdp latent;
  TabularPolicy baseline;
  TabularPolicy baseline_latent;
};

/// Blind-spot environment. Parameters (defaults in parentheses):
///   epsilon (1e-3)        baseline probability mass on the jump action
///   gamma (0.9)           discount
///   k1, k2, k3, k4        region sizes (3, 3, 4, 2); k3 >= 2 so the penalty
///                         corridor splits into early and late latent halves
///   drift (0.6)           per-step region advance probability
///   r_bad (-1)            per-step reward in the penalty corridor
///   r_good (1)            per-step reward in the target corridor
///   corrupt_reward (20)   fake reward planted at the late penalty latent
/// Within a region, each step stays put with probability 1 - drift, moves to
/// the region's next state (cyclically) with probability drift * (k - 1) / k,
/// and exits to the next region with probability drift / k; the encoder image
/// of every row is therefore constant on each region and the fitted model is
/// exact before the corruption.
EnvSpec build_fig1(const std::map<std::string, double>& params = {});

/// Merged-risk environment. Parameters:
///   epsilon (0.1)   risky-branch probability, in (0, 1/4)
///   zeta (1e-4)     baseline probability of the bet action, well below epsilon
///   gamma (0.9)     discount
///   split (0)       0 merges the safe and risky states into one latent,
///                   1 gives them separate latents
EnvSpec build_fig2(const std::map<std::string, double>& params = {});

/// The tempting update at the merged latent: the baseline's latent policy
/// with the branch-states' row replaced by the deterministic bet action.
TabularPolicy fig2_aggressive_latent(const EnvSpec& env);

/// Random ergodic episodic instance. Parameters:
///   n_states (12)      total states including the reset state (2..20)
///   n_actions (3)      actions (1..5)
///   gamma (0.9)        discount
///   branching (3)      successor count per (state, action)
///   n_latent (0)       non-reset latent count; 0 picks max(2, (n-1)/2)
///   reward_scale (1)   rewards drawn uniformly from [-scale, scale]
///   seed (0)           generator seed
/// The instance is redrawn (bounded retries) until the uniform-policy chain
/// is irreducible, so every fitted latent block has positive stationary mass
/// and the reset state is recurrent under any full-support policy.
EnvSpec random_episodic(const std::map<std::string, double>& params = {});

/// Random policy inside the c-neighborhood of a base policy: every state's
/// row is the constrained improvement of the base row under values drawn
/// uniformly from [0, 1). Membership holds by construction.
TabularPolicy random_neighborhood_candidate(const TabularPolicy& base, double c,
                                            std::uint64_t seed);

/// One constrained improvement step of the baseline's latent policy against
/// the environment's (possibly corrupted) latent model: the in-neighborhood
/// candidate a planner limited to the c-neighborhood would pick.
TabularPolicy latent_greedy_candidate(const EnvSpec& env, double c);

}  // namespace spilab
