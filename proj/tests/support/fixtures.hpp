// Small hand-built instances and helpers shared across the test binaries.

#pragma once

#include <string>
#include <vector>

#include "spilab/mdp.hpp"

namespace spilab::testing {

/// One state, one self-loop action with the given reward.
inline FiniteMdp single_loop(double discount, double reward) {
  FiniteMdp mdp;
  mdp.n_states = 1;
  mdp.n_actions = 1;
  mdp.discount = discount;
  mdp.transition = {1.0};
  mdp.reward = {reward};
  return mdp;
}

/// Deterministic episodic cycle 0 -> 1 -> ... -> n-1 -> 0 with the last
/// state as the reset state; every non-reset step earns `reward`.
inline FiniteMdp cycle_mdp(int n, double discount, double reward = 0.0) {
  FiniteMdp mdp;
  mdp.n_states = n;
  mdp.n_actions = 1;
  mdp.discount = discount;
  mdp.initial_state = 0;
  mdp.reset_state = n - 1;
  mdp.transition.assign(static_cast<std::size_t>(n) * n, 0.0);
  mdp.reward.assign(n, reward);
  for (int s = 0; s < n; ++s) mdp.p(s, 0, (s + 1) % n) = 1.0;
  mdp.reward[n - 1] = 0.0;
  return mdp;
}

/// Episodic two-state chain: the work state resets with probability p per
/// step, the reset state returns to it.
inline FiniteMdp geometric_reset(double p, double discount, double reward = 0.0) {
  FiniteMdp mdp;
  mdp.n_states = 2;
  mdp.n_actions = 1;
  mdp.discount = discount;
  mdp.initial_state = 0;
  mdp.reset_state = 1;
  mdp.transition = {1.0 - p, p, 1.0, 0.0};
  mdp.reward = {reward, 0.0};
  return mdp;
}

/// e.what() of whatever `f` throws, or "" when it does not throw.
template <class F>
std::string thrown_message(F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

inline bool contains(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

}  // namespace spilab::testing
