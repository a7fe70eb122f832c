// Exact solvers on finite MDPs: policy evaluation, optimal values, stationary
// and discounted state distributions, and episode-length statistics.
//
// All linear systems are solved by direct dense factorization; instances are
// tiny and exactness is the point. Ergodicity questions are answered by an
// explicit communicating-class decomposition so failures carry a diagnosis
// instead of a silently averaged answer.

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "spilab/mdp.hpp"

namespace spilab {

/// Row-major n x n transition matrix of the chain induced by the policy:
/// P(s, s') = sum_a pi(a | s) P(s' | s, a).
std::vector<double> induced_transition(const FiniteMdp& mdp, const TabularPolicy& policy);

/// Expected one-step reward per state under the policy.
std::vector<double> induced_reward(const FiniteMdp& mdp, const TabularPolicy& policy);

/// Exact discounted policy evaluation. v solves the Bellman linear system;
/// q(s, a) = r(s, a) + discount * E[v(s')]; adv = q - v.
///
/// With episodic_masking (requires a reset state) the value of the reset state
/// is pinned to zero and successor values through the reset state do not
/// contribute, so v(s) is the expected discounted return of the episode
/// started at s; q and adv are masked the same way.
ValueTables evaluate_policy(const FiniteMdp& mdp, const TabularPolicy& policy,
                            bool episodic_masking = false);

/// Optimal state values and a greedy deterministic optimal policy, by exact
/// policy iteration (greedy switches need a q-advantage above `tol`).
std::pair<std::vector<double>, TabularPolicy> solve_optimal(const FiniteMdp& mdp,
                                                            double tol = 1e-12,
                                                            int max_iterations = 1000000);

/// Discounted return of the policy from the initial state, v(initial_state).
double policy_return(const FiniteMdp& mdp, const TabularPolicy& policy);

/// Unique stationary distribution of the induced chain. The chain may have
/// transient states (their mass is zero) but must have exactly one closed
/// communicating class; otherwise ConfigError names the closed classes.
StateDistribution stationary_distribution(const FiniteMdp& mdp, const TabularPolicy& policy);

/// Normalized discounted state occupancy from the initial state:
/// mu = (1 - discount) * sum_t discount^t P(s_t = s). Solves
/// (I - discount * P^T) mu = (1 - discount) e_init; always well posed.
StateDistribution discounted_occupancy(const FiniteMdp& mdp, const TabularPolicy& policy);

/// Average episode length 1 / xi(reset_state) of an episodic MDP, where xi is
/// the stationary distribution of the induced chain. ConfigError "reset not
/// recurrent" when the reset state has zero stationary mass.
double average_episode_length(const FiniteMdp& mdp, const TabularPolicy& policy);

/// Monte Carlo cross-check of average_episode_length: simulates `episodes`
/// episodes from the initial state and returns the mean count of steps from
/// the initial state through the arrival at the reset state, plus one for the
/// reset-state visit that closes the stationary cycle.
double average_episode_length_mc(const FiniteMdp& mdp, const TabularPolicy& policy,
                                 int episodes, std::uint64_t seed);

}  // namespace spilab
