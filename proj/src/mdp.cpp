#include "spilab/mdp.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "spilab/errors.hpp"

namespace spilab {
namespace {

void check_distribution_row(std::span<const double> row, const std::string& what) {
  double sum = 0.0;
  for (double p : row) {
    if (!std::isfinite(p)) throw ConfigError(what + ": non-finite probability");
    if (p < -kInputTol) throw ConfigError(what + ": negative probability " + std::to_string(p));
    sum += p;
  }
  if (std::abs(sum - 1.0) > kInputTol) {
    throw ConfigError(what + ": probabilities sum to " + std::to_string(sum) + ", expected 1");
  }
}

}  // namespace

double FiniteMdp::r_max() const {
  double m = 0.0;
  for (double x : reward) m = std::max(m, std::abs(x));
  return m;
}

void FiniteMdp::validate() const {
  if (n_states <= 0) throw ConfigError("mdp: n_states must be positive");
  if (n_actions <= 0) throw ConfigError("mdp: n_actions must be positive");
  if (!(discount > 0.0 && discount < 1.0)) {
    throw ConfigError("mdp: discount must lie in (0, 1), got " + std::to_string(discount));
  }
  if (initial_state < 0 || initial_state >= n_states) {
    throw ConfigError("mdp: initial_state out of range");
  }
  const std::size_t want_t = static_cast<std::size_t>(n_states) * n_actions * n_states;
  const std::size_t want_r = static_cast<std::size_t>(n_states) * n_actions;
  if (transition.size() != want_t) throw ConfigError("mdp: transition table has wrong size");
  if (reward.size() != want_r) throw ConfigError("mdp: reward table has wrong size");
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      check_distribution_row(row(s, a), "mdp: transition row (state " + std::to_string(s) +
                                            ", action " + std::to_string(a) + ")");
      if (!std::isfinite(r(s, a))) {
        throw ConfigError("mdp: non-finite reward at (state " + std::to_string(s) + ", action " +
                          std::to_string(a) + ")");
      }
    }
  }
  if (reset_state) {
    const int reset = *reset_state;
    if (reset < 0 || reset >= n_states) throw ConfigError("mdp: reset_state out of range");
    for (int a = 0; a < n_actions; ++a) {
      if (std::abs(r(reset, a)) > kInputTol) {
        throw ConfigError("mdp: reset state must have zero reward under every action");
      }
      for (int s2 = 0; s2 < n_states; ++s2) {
        const double want = (s2 == initial_state) ? 1.0 : 0.0;
        if (std::abs(p(reset, a, s2) - want) > kInputTol) {
          throw ConfigError(
              "mdp: reset state must move to the initial state with probability one");
        }
      }
    }
  }
}

std::vector<int> TabularPolicy::support(int s) const {
  std::vector<int> acts;
  for (int a = 0; a < n_actions; ++a) {
    if (prob(s, a) > 0.0) acts.push_back(a);
  }
  return acts;
}

bool TabularPolicy::full_support() const {
  for (double p : probs) {
    if (!(p > 0.0)) return false;
  }
  return true;
}

void TabularPolicy::validate() const {
  if (n_states <= 0 || n_actions <= 0) throw ConfigError("policy: empty shape");
  if (probs.size() != static_cast<std::size_t>(n_states) * n_actions) {
    throw ConfigError("policy: probability table has wrong size");
  }
  for (int s = 0; s < n_states; ++s) {
    check_distribution_row(row(s), "policy: row for state " + std::to_string(s));
  }
}

TabularPolicy TabularPolicy::uniform(int n_states, int n_actions) {
  TabularPolicy pi;
  pi.n_states = n_states;
  pi.n_actions = n_actions;
  pi.probs.assign(static_cast<std::size_t>(n_states) * n_actions, 1.0 / n_actions);
  return pi;
}

TabularPolicy TabularPolicy::deterministic(int n_actions, const std::vector<int>& action_for_state) {
  TabularPolicy pi;
  pi.n_states = static_cast<int>(action_for_state.size());
  pi.n_actions = n_actions;
  pi.probs.assign(static_cast<std::size_t>(pi.n_states) * n_actions, 0.0);
  for (int s = 0; s < pi.n_states; ++s) pi.prob(s, action_for_state[s]) = 1.0;
  return pi;
}

std::vector<int> StateDistribution::support() const {
  std::vector<int> states;
  for (int s = 0; s < static_cast<int>(xi.size()); ++s) {
    if (xi[s] > 0.0) states.push_back(s);
  }
  return states;
}

bool StateDistribution::covers_all_states() const {
  for (double m : xi) {
    if (!(m > 0.0)) return false;
  }
  return true;
}

void check_compatible(const FiniteMdp& mdp, const TabularPolicy& policy) {
  if (policy.n_states != mdp.n_states || policy.n_actions != mdp.n_actions) {
    throw ConfigError("policy shape (" + std::to_string(policy.n_states) + " states, " +
                      std::to_string(policy.n_actions) + " actions) does not match mdp (" +
                      std::to_string(mdp.n_states) + " states, " + std::to_string(mdp.n_actions) +
                      " actions)");
  }
}

}  // namespace spilab
