// The importance-ratio neighborhood of a policy and the mirror update that
// maximizes expected advantage inside it.
//
// For 1 < c < 2, a candidate policy lies in the c-neighborhood of a base
// policy when, at every state, the candidate's support equals the base's and
// every importance ratio candidate(a|s) / base(a|s) over the base's support
// lies in [2 - c, c]. Since 2 - c > 0, membership preserves full support.

#pragma once

#include <span>
#include <vector>

#include "spilab/mdp.hpp"
#include "spilab/parallel.hpp"

namespace spilab {

/// Extremes of the importance ratios between two policies.
struct IrSummary {
  /// Largest ratio candidate / base over all states and base-supported actions.
  double sup_ir = 1.0;
  /// Smallest such ratio.
  double inf_ir = 1.0;
  /// True when the candidate's support equals the base's at every state.
  bool support_match = true;
};

/// Scans all states and base-supported actions for the extremal ratios.
IrSummary extremal_importance_ratios(const TabularPolicy& base, const TabularPolicy& candidate);

/// Membership test for the c-neighborhood; c must lie in (1, 2). Boundary
/// ratios count as members (comparisons carry a 1e-12 slack for the rounding
/// of ratio arithmetic).
bool in_neighborhood(const TabularPolicy& base, const TabularPolicy& candidate, double c);

/// Maximizes sum_a row(a) * action_values(a) over rows in the c-neighborhood
/// of base_row (one state's subproblem). The solution floors every supported
/// action at (2 - c) * base_row(a) and pours the remaining (c - 1) mass
/// greedily into actions by descending value (ties: ascending index), capped
/// at c * base_row(a) each.
///
/// Optimality: the feasible set is the box [(2-c) b, c b] intersected with
/// the simplex. Starting from any optimum, moving a unit of mass from a
/// lower-valued action to a higher-valued one with headroom never decreases
/// the objective, so some greedy fill is optimal (a fractional-knapsack
/// exchange argument); the fill is unique up to ties, which the index order
/// resolves deterministically. Adding a constant to all values shifts the
/// objective by that constant (rows sum to one) and leaves the solution
/// unchanged, so advantages and action values are interchangeable here.
std::vector<double> constrained_improve_state(std::span<const double> action_values,
                                              std::span<const double> base_row, double c);

/// One mirror update: evaluates the policy exactly, then solves the per-state
/// subproblem above at every state of the sampling distribution's support.
/// The sampling distribution must cover every state (the update's convergence
/// argument needs it), which also makes the result independent of its actual
/// weights; the per-state subproblems decouple.
TabularPolicy mirror_step(const FiniteMdp& mdp, const TabularPolicy& policy, double c,
                          const StateDistribution& sampling, Exec mode = Exec::serial);

}  // namespace spilab
