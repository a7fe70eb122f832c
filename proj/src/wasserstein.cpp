#include "spilab/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "spilab/errors.hpp"
#include "spilab/mdp.hpp"

namespace spilab {
namespace {

constexpr double kReducedCostTol = 1e-12;

void check_probability_vector(std::span<const double> p, const char* name) {
  double sum = 0.0;
  for (double x : p) {
    if (!(x >= -kInputTol) || !std::isfinite(x)) {
      throw ConfigError(std::string(name) + ": invalid probability entry");
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError(std::string(name) + ": probabilities sum to " + std::to_string(sum));
  }
}

// Transportation problem state over the reduced supports. The basis is a
// spanning tree on the bipartite graph of m supply and n demand nodes.
struct Transport {
  int m, n;
  std::vector<double> supply, demand;
  std::vector<double> cost;   // m x n
  std::vector<double> flow;   // m x n
  std::vector<char> basic;    // m x n, 1 when the cell is in the basis

  double& c(int i, int j) { return cost[static_cast<std::size_t>(i) * n + j]; }
  double& f(int i, int j) { return flow[static_cast<std::size_t>(i) * n + j]; }
  char& b(int i, int j) { return basic[static_cast<std::size_t>(i) * n + j]; }

  // Northwest-corner start: exactly m + n - 1 basic cells, zero allocations
  // included when a row and column close simultaneously.
  void initial_solution() {
    std::vector<double> s = supply, d = demand;
    int i = 0, j = 0;
    while (i < m && j < n) {
      const double x = std::min(s[i], d[j]);
      f(i, j) = x;
      b(i, j) = 1;
      s[i] -= x;
      d[j] -= x;
      if (i == m - 1 && j == n - 1) break;
      // Advance along one axis only so the basis stays a tree.
      if (s[i] <= d[j] && i < m - 1) {
        ++i;
      } else if (j < n - 1) {
        ++j;
      } else {
        ++i;
      }
    }
  }

  // Node potentials from the basis tree: u[0] = 0, c(i, j) = u[i] + v[j] on
  // basic cells. The tree is connected, so one sweep per settled node works.
  void potentials(std::vector<double>& u, std::vector<double>& v) const {
    u.assign(m, 0.0);
    v.assign(n, 0.0);
    std::vector<char> u_set(m, 0), v_set(n, 0);
    u_set[0] = 1;
    std::vector<int> stack{0};  // encoded: rows are [0, m), cols are m + j
    while (!stack.empty()) {
      const int node = stack.back();
      stack.pop_back();
      if (node < m) {
        const int i = node;
        for (int j = 0; j < n; ++j) {
          if (basic[static_cast<std::size_t>(i) * n + j] && !v_set[j]) {
            v[j] = cost[static_cast<std::size_t>(i) * n + j] - u[i];
            v_set[j] = 1;
            stack.push_back(m + j);
          }
        }
      } else {
        const int j = node - m;
        for (int i = 0; i < m; ++i) {
          if (basic[static_cast<std::size_t>(i) * n + j] && !u_set[i]) {
            u[i] = cost[static_cast<std::size_t>(i) * n + j] - v[j];
            u_set[i] = 1;
            stack.push_back(i);
          }
        }
      }
    }
  }

  // Unique cycle closed by entering cell (ei, ej): the tree path from row ei
  // to column ej, found by depth-first search over basic cells.
  std::vector<std::pair<int, int>> find_cycle(int ei, int ej) const {
    const int nodes = m + n;
    std::vector<int> parent(nodes, -1), order;
    std::vector<char> seen(nodes, 0);
    std::vector<int> stack{ei};
    seen[ei] = 1;
    while (!stack.empty()) {
      const int node = stack.back();
      stack.pop_back();
      if (node == m + ej) break;
      if (node < m) {
        for (int j = 0; j < n; ++j) {
          if (basic[static_cast<std::size_t>(node) * n + j] && !seen[m + j]) {
            seen[m + j] = 1;
            parent[m + j] = node;
            stack.push_back(m + j);
          }
        }
      } else {
        const int j = node - m;
        for (int i = 0; i < m; ++i) {
          if (basic[static_cast<std::size_t>(i) * n + j] && !seen[i]) {
            seen[i] = 1;
            parent[i] = m + j;
            stack.push_back(i);
          }
        }
      }
    }
    // Walk back from column ej to row ei, collecting the path's cells.
    std::vector<int> path;
    for (int node = m + ej; node != -1; node = parent[node]) path.push_back(node);
    std::reverse(path.begin(), path.end());  // now starts at ei, ends at m + ej
    std::vector<std::pair<int, int>> cycle{{ei, ej}};
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      const int a = path[k], b2 = path[k + 1];
      if (a < m) {
        cycle.emplace_back(a, b2 - m);
      } else {
        cycle.emplace_back(b2, a - m);
      }
    }
    return cycle;
  }

  double solve() {
    initial_solution();
    std::vector<double> u, v;
    const int max_pivots = 100000;
    bool optimal = false;
    for (int pivot = 0; pivot < max_pivots && !optimal; ++pivot) {
      potentials(u, v);
      // Bland's rule: first cell (row-major) with negative reduced cost.
      int ei = -1, ej = -1;
      for (int i = 0; i < m && ei < 0; ++i) {
        for (int j = 0; j < n; ++j) {
          if (!b(i, j) && c(i, j) - u[i] - v[j] < -kReducedCostTol) {
            ei = i;
            ej = j;
            break;
          }
        }
      }
      if (ei < 0) {
        optimal = true;
        break;
      }
      std::vector<std::pair<int, int>> cycle = find_cycle(ei, ej);
      // Odd positions along the cycle lose flow; pick the smallest such flow
      // (ties: earliest cell, Bland-style) as the leaving amount.
      double theta = std::numeric_limits<double>::infinity();
      std::size_t leave = 1;
      for (std::size_t k = 1; k < cycle.size(); k += 2) {
        const double x = f(cycle[k].first, cycle[k].second);
        if (x < theta) {
          theta = x;
          leave = k;
        }
      }
      for (std::size_t k = 0; k < cycle.size(); ++k) {
        double& x = f(cycle[k].first, cycle[k].second);
        x += (k % 2 == 0) ? theta : -theta;
      }
      b(ei, ej) = 1;
      b(cycle[leave].first, cycle[leave].second) = 0;
      f(cycle[leave].first, cycle[leave].second) = 0.0;
    }
    if (!optimal) {
      throw std::runtime_error("wasserstein: transportation simplex exceeded its pivot budget");
    }
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        if (f(i, j) != 0.0) total += f(i, j) * c(i, j);
      }
    }
    return total;
  }
};

}  // namespace

double wasserstein(std::span<const double> mu, std::span<const double> nu,
                   const std::vector<double>& cost, int n) {
  if (static_cast<int>(mu.size()) != n || static_cast<int>(nu.size()) != n) {
    throw ConfigError("wasserstein: distribution lengths do not match the metric size");
  }
  if (cost.size() != static_cast<std::size_t>(n) * n) {
    throw ConfigError("wasserstein: cost matrix has wrong size");
  }
  if (n > kMaxWassersteinSupport) {
    throw ConfigError("wasserstein: support size " + std::to_string(n) + " exceeds the cap of " +
                      std::to_string(kMaxWassersteinSupport));
  }
  check_probability_vector(mu, "wasserstein: first distribution");
  check_probability_vector(nu, "wasserstein: second distribution");

  // Reduce to positive-mass supports and normalize so the reduced problem is
  // exactly balanced.
  std::vector<int> rows, cols;
  double mu_sum = 0.0, nu_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    if (mu[i] > 0.0) {
      rows.push_back(i);
      mu_sum += mu[i];
    }
    if (nu[i] > 0.0) {
      cols.push_back(i);
      nu_sum += nu[i];
    }
  }
  if (rows.empty() || cols.empty()) {
    throw ConfigError("wasserstein: distribution has no positive mass");
  }

  Transport t;
  t.m = static_cast<int>(rows.size());
  t.n = static_cast<int>(cols.size());
  t.supply.resize(t.m);
  t.demand.resize(t.n);
  for (int i = 0; i < t.m; ++i) t.supply[i] = mu[rows[i]] / mu_sum;
  for (int j = 0; j < t.n; ++j) t.demand[j] = nu[cols[j]] / nu_sum;
  t.cost.resize(static_cast<std::size_t>(t.m) * t.n);
  for (int i = 0; i < t.m; ++i) {
    for (int j = 0; j < t.n; ++j) {
      t.c(i, j) = cost[static_cast<std::size_t>(rows[i]) * n + cols[j]];
    }
  }
  t.flow.assign(static_cast<std::size_t>(t.m) * t.n, 0.0);
  t.basic.assign(static_cast<std::size_t>(t.m) * t.n, 0);
  return t.solve();
}

double total_variation(std::span<const double> mu, std::span<const double> nu) {
  if (mu.size() != nu.size()) {
    throw ConfigError("total variation: distribution lengths differ");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) acc += std::abs(mu[i] - nu[i]);
  return 0.5 * acc;
}

}  // namespace spilab
