// Transition sampling from the stationary distribution of a policy's chain.

#pragma once

#include <cstdint>
#include <vector>

#include "spilab/mdp.hpp"
#include "spilab/parallel.hpp"

namespace spilab {

/// A batch of independent transition tuples.
struct TransitionBatch {
  struct Row {
    int s;
    int a;
    double r;
    int s_next;
  };
  std::vector<Row> rows;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
};

/// Draws `count` i.i.d. tuples (s, a, r, s') with s from the stationary
/// distribution of the induced chain, a from the policy, s' from the
/// transition kernel, and r = reward(s, a). Deterministic given the seed and
/// independent of the execution mode: each row uses its own stream derived
/// from (seed, row index).
TransitionBatch sample_transitions(const FiniteMdp& mdp, const TabularPolicy& policy, int count,
                                   std::uint64_t seed, Exec mode = Exec::serial);

}  // namespace spilab
