#include "spilab/neighborhood.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "spilab/errors.hpp"
#include "spilab/solve.hpp"

namespace spilab {
namespace {

constexpr double kRatioSlack = 1e-12;

void check_c_range(double c) {
  if (!(c > 1.0 && c < 2.0)) {
    throw ConfigError("neighborhood constant c must lie in the open interval (1, 2), got " +
                      std::to_string(c));
  }
}

}  // namespace

IrSummary extremal_importance_ratios(const TabularPolicy& base, const TabularPolicy& candidate) {
  base.validate();
  candidate.validate();
  if (base.n_states != candidate.n_states || base.n_actions != candidate.n_actions) {
    throw ConfigError("importance ratios: policy shapes differ");
  }
  IrSummary out;
  bool any = false;
  for (int s = 0; s < base.n_states; ++s) {
    for (int a = 0; a < base.n_actions; ++a) {
      const double b = base.prob(s, a);
      const double q = candidate.prob(s, a);
      if (b > 0.0) {
        const double ratio = q / b;
        if (!any) {
          out.sup_ir = out.inf_ir = ratio;
          any = true;
        } else {
          out.sup_ir = std::max(out.sup_ir, ratio);
          out.inf_ir = std::min(out.inf_ir, ratio);
        }
        if (q == 0.0) out.support_match = false;
      } else if (q > 0.0) {
        out.support_match = false;
      }
    }
  }
  return out;
}

bool in_neighborhood(const TabularPolicy& base, const TabularPolicy& candidate, double c) {
  check_c_range(c);
  IrSummary ir = extremal_importance_ratios(base, candidate);
  return ir.support_match && ir.inf_ir >= (2.0 - c) - kRatioSlack && ir.sup_ir <= c + kRatioSlack;
}

std::vector<double> constrained_improve_state(std::span<const double> action_values,
                                              std::span<const double> base_row, double c) {
  check_c_range(c);
  const int na = static_cast<int>(base_row.size());
  if (static_cast<int>(action_values.size()) != na) {
    throw ConfigError("constrained improvement: value and probability lengths differ");
  }
  std::vector<double> row(na, 0.0);
  std::vector<int> order;
  for (int a = 0; a < na; ++a) {
    if (base_row[a] > 0.0) {
      row[a] = (2.0 - c) * base_row[a];
      order.push_back(a);
    }
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return action_values[a] > action_values[b]; });
  double surplus = c - 1.0;
  for (int a : order) {
    if (surplus <= 0.0) break;
    const double headroom = c * base_row[a] - row[a];
    const double poured = std::min(surplus, headroom);
    row[a] += poured;
    surplus -= poured;
  }
  return row;
}

TabularPolicy mirror_step(const FiniteMdp& mdp, const TabularPolicy& policy, double c,
                          const StateDistribution& sampling, Exec mode) {
  check_c_range(c);
  mdp.validate();
  policy.validate();
  check_compatible(mdp, policy);
  if (static_cast<int>(sampling.xi.size()) != mdp.n_states) {
    throw ConfigError("mirror step: sampling distribution length does not match the mdp");
  }
  if (!sampling.covers_all_states()) {
    throw ConfigError("mirror step requires a sampling distribution with support on every state");
  }
  const double mass = std::accumulate(sampling.xi.begin(), sampling.xi.end(), 0.0);
  if (std::abs(mass - 1.0) > 1e-9) {
    throw ConfigError("mirror step: sampling distribution sums to " + std::to_string(mass));
  }

  const ValueTables tables = evaluate_policy(mdp, policy);
  TabularPolicy next = policy;
  for_each_index(mode, static_cast<std::size_t>(mdp.n_states), [&](std::size_t si) {
    const int s = static_cast<int>(si);
    std::span<const double> adv{tables.adv.data() + static_cast<std::size_t>(s) * mdp.n_actions,
                                static_cast<std::size_t>(mdp.n_actions)};
    std::vector<double> row = constrained_improve_state(adv, policy.row(s), c);
    for (int a = 0; a < mdp.n_actions; ++a) next.prob(s, a) = row[a];
  });
  return next;
}

}  // namespace spilab
