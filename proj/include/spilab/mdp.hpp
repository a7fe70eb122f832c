// Core tabular types: finite MDPs, stochastic policies, and the value tables
// produced by policy evaluation.
//
// An MDP stores dense row-major tables: transition[(s * n_actions + a) *
// n_states + s'] and reward[s * n_actions + a]. An episodic MDP designates a
// reset state whose rewards are all zero and which moves to the initial state
// with probability one under every action; episodes are the excursions of the
// induced chain between visits to the reset state.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace spilab {

/// Tolerance for validating user-supplied probabilities and rewards.
inline constexpr double kInputTol = 1e-12;
/// Tolerance for comparing solved quantities (values, distributions, bounds).
inline constexpr double kSolveTol = 1e-9;
/// Tolerance for Bellman residuals of solved value functions.
inline constexpr double kBellmanTol = 1e-10;

/// Finite Markov decision process with dense tables.
struct FiniteMdp {
  int n_states = 0;
  int n_actions = 0;
  double discount = 0.0;
  int initial_state = 0;
  /// Present iff the MDP is episodic.
  std::optional<int> reset_state;
  /// Row-major (state, action, next state) transition probabilities.
  std::vector<double> transition;
  /// Row-major (state, action) rewards.
  std::vector<double> reward;

  double p(int s, int a, int s2) const {
    return transition[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2];
  }
  double& p(int s, int a, int s2) {
    return transition[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2];
  }
  double r(int s, int a) const { return reward[static_cast<std::size_t>(s) * n_actions + a]; }
  double& r(int s, int a) { return reward[static_cast<std::size_t>(s) * n_actions + a]; }

  /// One transition row P(. | s, a) of length n_states.
  std::span<const double> row(int s, int a) const {
    return {transition.data() + (static_cast<std::size_t>(s) * n_actions + a) * n_states,
            static_cast<std::size_t>(n_states)};
  }

  bool episodic() const { return reset_state.has_value(); }

  /// Largest absolute reward over all (state, action) pairs.
  double r_max() const;

  /// Checks dimensions, row stochasticity, finite rewards, discount in (0, 1),
  /// state indices in range, and the reset-state structure when episodic.
  /// Throws ConfigError with a specific message on the first violation.
  void validate() const;
};

/// Tabular stochastic policy: probs[s * n_actions + a] = pi(a | s).
struct TabularPolicy {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> probs;

  double prob(int s, int a) const { return probs[static_cast<std::size_t>(s) * n_actions + a]; }
  double& prob(int s, int a) { return probs[static_cast<std::size_t>(s) * n_actions + a]; }

  std::span<const double> row(int s) const {
    return {probs.data() + static_cast<std::size_t>(s) * n_actions,
            static_cast<std::size_t>(n_actions)};
  }

  /// Actions with positive probability at state s, in ascending order.
  std::vector<int> support(int s) const;

  /// True if every action has positive probability at every state.
  bool full_support() const;

  /// Checks dimensions and row stochasticity. Throws ConfigError.
  void validate() const;

  /// Uniform policy over n_actions at each of n_states states.
  static TabularPolicy uniform(int n_states, int n_actions);

  /// Deterministic policy playing action_for_state[s] at state s.
  static TabularPolicy deterministic(int n_actions, const std::vector<int>& action_for_state);
};

/// State values, action values, and advantages for one policy.
/// q and adv are row-major (state, action); adv(s, a) = q(s, a) - v(s).
struct ValueTables {
  std::vector<double> v;
  std::vector<double> q;
  std::vector<double> adv;

  double value(int s) const { return v[s]; }
  double action_value(int s, int a, int n_actions) const {
    return q[static_cast<std::size_t>(s) * n_actions + a];
  }
  double advantage(int s, int a, int n_actions) const {
    return adv[static_cast<std::size_t>(s) * n_actions + a];
  }
};

/// Probability distribution over states.
struct StateDistribution {
  std::vector<double> xi;

  double mass(int s) const { return xi[s]; }
  /// States with positive mass, ascending.
  std::vector<int> support() const;
  bool covers_all_states() const;
};

/// Throws ConfigError unless the policy's shape matches the MDP's.
void check_compatible(const FiniteMdp& mdp, const TabularPolicy& policy);

}  // namespace spilab
