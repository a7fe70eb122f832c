// Structural analysis of finite Markov chains: communicating classes and
// reachability over the support graph of a transition matrix.

#pragma once

#include <string>
#include <vector>

namespace spilab {

/// Strongly connected components of a chain's support graph.
struct ChainStructure {
  /// Components in a fixed deterministic order; each is an ascending state list.
  std::vector<std::vector<int>> classes;
  /// class_of[s] = index into classes.
  std::vector<int> class_of;
  /// closed[c] is true when no edge leaves class c (a recurrent class).
  std::vector<bool> closed;

  std::vector<int> closed_class_indices() const;
};

/// Decomposes an n x n row-major transition matrix (entries > 0 are edges)
/// into communicating classes via Tarjan's algorithm.
ChainStructure analyze_chain(const std::vector<double>& matrix, int n);

/// States reachable from `from` in the support graph, including `from`.
std::vector<int> reachable_states(const std::vector<double>& matrix, int n, int from);

/// Formats a state list as e.g. "{0, 3, 4}" for diagnostics.
std::string format_state_set(const std::vector<int>& states);

}  // namespace spilab
