#include "spilab/solve.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "spilab/chains.hpp"
#include "spilab/errors.hpp"
#include "spilab/rng.hpp"

namespace spilab {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMatrix> as_matrix(const std::vector<double>& data, int rows, int cols) {
  return Eigen::Map<const RowMatrix>(data.data(), rows, cols);
}

// Drops solver noise below kInputTol; distributions must be nonnegative.
void clip_tiny_negatives(std::vector<double>& xs) {
  for (double& x : xs) {
    if (x < 0.0 && x > -kInputTol) x = 0.0;
  }
}

}  // namespace

std::vector<double> induced_transition(const FiniteMdp& mdp, const TabularPolicy& policy) {
  check_compatible(mdp, policy);
  const int n = mdp.n_states;
  std::vector<double> out(static_cast<std::size_t>(n) * n, 0.0);
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      const double w = policy.prob(s, a);
      if (w == 0.0) continue;
      for (int s2 = 0; s2 < n; ++s2) {
        out[static_cast<std::size_t>(s) * n + s2] += w * mdp.p(s, a, s2);
      }
    }
  }
  return out;
}

std::vector<double> induced_reward(const FiniteMdp& mdp, const TabularPolicy& policy) {
  check_compatible(mdp, policy);
  std::vector<double> out(mdp.n_states, 0.0);
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      out[s] += policy.prob(s, a) * mdp.r(s, a);
    }
  }
  return out;
}

ValueTables evaluate_policy(const FiniteMdp& mdp, const TabularPolicy& policy,
                            bool episodic_masking) {
  mdp.validate();
  policy.validate();
  check_compatible(mdp, policy);
  if (episodic_masking && !mdp.episodic()) {
    throw ConfigError("episodic masking requires an mdp with a reset state");
  }
  const int n = mdp.n_states;
  const int na = mdp.n_actions;
  const int reset = episodic_masking ? *mdp.reset_state : -1;

  std::vector<double> p_pi = induced_transition(mdp, policy);
  std::vector<double> r_pi = induced_reward(mdp, policy);
  RowMatrix a = RowMatrix::Identity(n, n) - mdp.discount * as_matrix(p_pi, n, n);
  Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(r_pi.data(), n);
  if (episodic_masking) {
    // Successors through the reset state contribute nothing, and the reset
    // state itself has value zero.
    for (int s = 0; s < n; ++s) {
      if (s != reset) a(s, reset) = 0.0;
    }
    a.row(reset).setZero();
    a(reset, reset) = 1.0;
    b(reset) = 0.0;
  }
  Eigen::VectorXd v = a.partialPivLu().solve(b);

  ValueTables out;
  out.v.assign(v.data(), v.data() + n);
  out.q.assign(static_cast<std::size_t>(n) * na, 0.0);
  out.adv.assign(static_cast<std::size_t>(n) * na, 0.0);
  for (int s = 0; s < n; ++s) {
    for (int act = 0; act < na; ++act) {
      double q = 0.0;
      if (!(episodic_masking && s == reset)) {
        double future = 0.0;
        for (int s2 = 0; s2 < n; ++s2) {
          if (episodic_masking && s2 == reset) continue;
          future += mdp.p(s, act, s2) * out.v[s2];
        }
        q = mdp.r(s, act) + mdp.discount * future;
      }
      out.q[static_cast<std::size_t>(s) * na + act] = q;
      out.adv[static_cast<std::size_t>(s) * na + act] = q - out.v[s];
    }
  }
  return out;
}

std::pair<std::vector<double>, TabularPolicy> solve_optimal(const FiniteMdp& mdp, double tol,
                                                            int max_iterations) {
  mdp.validate();
  const int n = mdp.n_states;
  const int na = mdp.n_actions;
  // Exact policy iteration: evaluate, then switch to a strictly better greedy
  // action (threshold tol guards against solver noise). Terminates finitely.
  std::vector<int> greedy(n, 0);
  TabularPolicy pi = TabularPolicy::deterministic(na, greedy);
  std::vector<double> v(n, 0.0);
  for (int it = 0; it < max_iterations; ++it) {
    ValueTables tables = evaluate_policy(mdp, pi);
    v = tables.v;
    bool changed = false;
    for (int s = 0; s < n; ++s) {
      int best = greedy[s];
      double best_q = tables.action_value(s, best, na);
      for (int a = 0; a < na; ++a) {
        const double q = tables.action_value(s, a, na);
        if (q > best_q + tol) {
          best = a;
          best_q = q;
        }
      }
      if (best != greedy[s]) {
        greedy[s] = best;
        changed = true;
      }
    }
    if (!changed) return {v, pi};
    pi = TabularPolicy::deterministic(na, greedy);
  }
  throw std::runtime_error("solve_optimal: policy iteration failed to terminate");
}

double policy_return(const FiniteMdp& mdp, const TabularPolicy& policy) {
  return evaluate_policy(mdp, policy).v[mdp.initial_state];
}

StateDistribution stationary_distribution(const FiniteMdp& mdp, const TabularPolicy& policy) {
  mdp.validate();
  policy.validate();
  check_compatible(mdp, policy);
  const int n = mdp.n_states;
  std::vector<double> p_pi = induced_transition(mdp, policy);
  ChainStructure structure = analyze_chain(p_pi, n);
  const std::vector<int> closed = structure.closed_class_indices();
  if (closed.size() != 1) {
    std::string msg = "induced chain has " + std::to_string(closed.size()) +
                      " closed communicating classes:";
    for (int c : closed) msg += " " + format_state_set(structure.classes[c]);
    msg += "; stationary distribution is not unique";
    throw ConfigError(msg);
  }
  const std::vector<int>& states = structure.classes[closed[0]];
  const int m = static_cast<int>(states.size());
  // Solve xi^T P = xi^T on the closed class, with the last balance equation
  // replaced by the normalization sum(xi) = 1.
  RowMatrix a(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      a(i, j) = p_pi[static_cast<std::size_t>(states[j]) * n + states[i]] - (i == j ? 1.0 : 0.0);
    }
  }
  a.row(m - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  b(m - 1) = 1.0;
  Eigen::VectorXd xi = a.partialPivLu().solve(b);

  StateDistribution out;
  out.xi.assign(n, 0.0);
  for (int i = 0; i < m; ++i) out.xi[states[i]] = xi(i);
  clip_tiny_negatives(out.xi);
  return out;
}

StateDistribution discounted_occupancy(const FiniteMdp& mdp, const TabularPolicy& policy) {
  mdp.validate();
  policy.validate();
  check_compatible(mdp, policy);
  const int n = mdp.n_states;
  std::vector<double> p_pi = induced_transition(mdp, policy);
  RowMatrix a = RowMatrix::Identity(n, n) - mdp.discount * as_matrix(p_pi, n, n).transpose();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(mdp.initial_state) = 1.0 - mdp.discount;
  Eigen::VectorXd mu = a.partialPivLu().solve(b);
  StateDistribution out;
  out.xi.assign(mu.data(), mu.data() + n);
  clip_tiny_negatives(out.xi);
  return out;
}

double average_episode_length(const FiniteMdp& mdp, const TabularPolicy& policy) {
  if (!mdp.episodic()) {
    throw ConfigError("average episode length requires an mdp with a reset state");
  }
  StateDistribution xi = stationary_distribution(mdp, policy);
  const double reset_mass = xi.mass(*mdp.reset_state);
  if (!(reset_mass > 0.0)) {
    throw ConfigError("reset not recurrent: the reset state has zero stationary mass");
  }
  return 1.0 / reset_mass;
}

double average_episode_length_mc(const FiniteMdp& mdp, const TabularPolicy& policy, int episodes,
                                 std::uint64_t seed) {
  if (!mdp.episodic()) {
    throw ConfigError("average episode length requires an mdp with a reset state");
  }
  check_compatible(mdp, policy);
  if (episodes <= 0) throw ConfigError("episode count must be positive");
  const int reset = *mdp.reset_state;
  Rng rng(seed);
  double total_steps = 0.0;
  for (int e = 0; e < episodes; ++e) {
    int s = mdp.initial_state;
    while (s != reset) {
      const int a = rng.categorical(policy.row(s));
      s = rng.categorical(mdp.row(s, a));
      total_steps += 1.0;
    }
  }
  // One extra count per episode for the reset-state visit closing the cycle.
  return total_steps / episodes + 1.0;
}

}  // namespace spilab
