#include "spilab/losses.hpp"

#include <cmath>
#include <string>

#include "spilab/errors.hpp"
#include "spilab/wasserstein.hpp"

namespace spilab {
namespace {

// Pushforward of one ground transition row through the encoder.
std::vector<double> pushed_row(const FiniteMdp& mdp, const Encoder& encoder, int s, int a) {
  std::vector<double> out(encoder.n_latent, 0.0);
  for (int s2 = 0; s2 < mdp.n_states; ++s2) out[encoder.mapping[s2]] += mdp.p(s, a, s2);
  return out;
}

// Index of the single support point, or -1 if the distribution is spread.
int point_mass_index(const std::vector<double>& dist) {
  int idx = -1;
  for (int i = 0; i < static_cast<int>(dist.size()); ++i) {
    if (dist[i] > 0.0) {
      if (idx >= 0) return -1;
      idx = i;
    }
  }
  return idx;
}

void check_inputs(const FiniteMdp& mdp, const Encoder& encoder, const LatentMdp& latent,
                  const StateDistribution& weighting) {
  mdp.validate();
  encoder.validate(mdp.n_states);
  latent.validate();
  if (latent.n_latent() != encoder.n_latent) {
    throw ConfigError("latent model has " + std::to_string(latent.n_latent()) +
                      " states but the encoder produces " + std::to_string(encoder.n_latent));
  }
  if (latent.model.n_actions != mdp.n_actions) {
    throw ConfigError("latent model and mdp disagree on the action count");
  }
  if (static_cast<int>(weighting.xi.size()) != mdp.n_states) {
    throw ConfigError("weighting length does not match the mdp");
  }
}

}  // namespace

LossReport exact_losses(const FiniteMdp& mdp, const Encoder& encoder, const LatentMdp& latent,
                        const StateDistribution& weighting, const TabularPolicy& policy,
                        Exec mode) {
  check_inputs(mdp, encoder, latent, weighting);
  policy.validate();
  check_compatible(mdp, policy);

  const int na = mdp.n_actions;
  const std::size_t cells = static_cast<std::size_t>(mdp.n_states) * na;
  struct Cell {
    double r_term = 0.0;
    double p_term = 0.0;
    bool failed = false;
  };
  std::vector<Cell> slots(cells);
  for_each_index(mode, cells, [&](std::size_t i) {
    const int s = static_cast<int>(i) / na;
    const int a = static_cast<int>(i) % na;
    const double w = weighting.xi[s] * policy.prob(s, a);
    if (w == 0.0) return;
    Cell& cell = slots[i];
    try {
      const int x = encoder.mapping[s];
      cell.r_term = w * std::abs(mdp.r(s, a) - latent.model.r(x, a));
      std::vector<double> pushed = pushed_row(mdp, encoder, s, a);
      std::vector<double> model_row(latent.model.row(x, a).begin(), latent.model.row(x, a).end());
      const int pi = point_mass_index(pushed);
      const int mi = point_mass_index(model_row);
      if (pi >= 0 && mi >= 0) {
        cell.p_term = w * latent.d(pi, mi);
      } else {
        cell.p_term = w * wasserstein(pushed, model_row, latent.metric, latent.n_latent());
      }
    } catch (const std::exception&) {
      cell.failed = true;
    }
  });

  LossReport report;
  for (const Cell& cell : slots) {
    if (cell.failed) {
      throw std::runtime_error("exact_losses: transport subproblem failed");
    }
    report.l_r += cell.r_term;
    report.l_p += cell.p_term;
  }
  report.source = LossReport::Source::exact;
  report.sample_count = 0;
  return report;
}

LossReport empirical_losses(const TransitionBatch& batch, const Encoder& encoder,
                            const LatentMdp& latent) {
  if (batch.empty()) {
    throw ConfigError("empirical_losses: batch is empty");
  }
  latent.validate();
  if (latent.n_latent() != encoder.n_latent) {
    throw ConfigError("latent model and encoder disagree on the latent state count");
  }
  const int n_ground = encoder.n_ground();
  const int na = latent.model.n_actions;
  LossReport report;
  for (const TransitionBatch::Row& row : batch.rows) {
    if (row.s < 0 || row.s >= n_ground || row.s_next < 0 || row.s_next >= n_ground ||
        row.a < 0 || row.a >= na || !std::isfinite(row.r)) {
      throw ConfigError("empirical_losses: batch row out of range");
    }
    const int x = encoder.mapping[row.s];
    const int y_obs = encoder.mapping[row.s_next];
    report.l_r += std::abs(row.r - latent.model.r(x, row.a));
    double expected_dist = 0.0;
    for (int y = 0; y < latent.n_latent(); ++y) {
      const double p = latent.model.p(x, row.a, y);
      if (p > 0.0) expected_dist += p * latent.d(y_obs, y);
    }
    report.l_p += expected_dist;
  }
  const double t = static_cast<double>(batch.size());
  report.l_r /= t;
  report.l_p /= t;
  report.source = LossReport::Source::empirical;
  report.sample_count = static_cast<long>(batch.size());
  return report;
}

double crude_transition_bound(const FiniteMdp& mdp, const Encoder& encoder, const LatentMdp& latent,
                              const StateDistribution& weighting, const TabularPolicy& policy) {
  check_inputs(mdp, encoder, latent, weighting);
  policy.validate();
  check_compatible(mdp, policy);
  double total = 0.0;
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      const double w = weighting.xi[s] * policy.prob(s, a);
      if (w == 0.0) continue;
      const int x = encoder.mapping[s];
      std::vector<double> pushed = pushed_row(mdp, encoder, s, a);
      double term = 0.0;
      for (int y_obs = 0; y_obs < latent.n_latent(); ++y_obs) {
        if (pushed[y_obs] == 0.0) continue;
        for (int y = 0; y < latent.n_latent(); ++y) {
          const double p = latent.model.p(x, a, y);
          if (p > 0.0) term += pushed[y_obs] * p * latent.d(y_obs, y);
        }
      }
      total += w * term;
    }
  }
  return total;
}

}  // namespace spilab
