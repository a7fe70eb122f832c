#include "spilab/latent.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "spilab/errors.hpp"
#include "spilab/wasserstein.hpp"

namespace spilab {

std::vector<std::vector<int>> Encoder::blocks() const {
  std::vector<std::vector<int>> out(n_latent);
  for (int s = 0; s < n_ground(); ++s) out[mapping[s]].push_back(s);
  return out;
}

void Encoder::validate(int n_states) const {
  if (n_latent <= 0) throw ConfigError("encoder: n_latent must be positive");
  if (static_cast<int>(mapping.size()) != n_states) {
    throw ConfigError("encoder: mapping covers " + std::to_string(mapping.size()) +
                      " states, expected " + std::to_string(n_states));
  }
  std::vector<char> hit(n_latent, 0);
  for (int s = 0; s < n_states; ++s) {
    const int x = mapping[s];
    if (x < 0 || x >= n_latent) {
      throw ConfigError("encoder: state " + std::to_string(s) + " maps to out-of-range latent " +
                        std::to_string(x));
    }
    hit[x] = 1;
  }
  for (int x = 0; x < n_latent; ++x) {
    if (!hit[x]) {
      throw ConfigError("encoder: latent state " + std::to_string(x) +
                        " has no preimage; the map must be surjective");
    }
  }
}

Encoder Encoder::identity(int n_states) {
  Encoder e;
  e.n_latent = n_states;
  e.mapping.resize(n_states);
  for (int s = 0; s < n_states; ++s) e.mapping[s] = s;
  return e;
}

void LatentMdp::validate() const {
  model.validate();
  const int n = n_latent();
  if (metric.size() != static_cast<std::size_t>(n) * n) {
    throw ConfigError("latent model: metric has wrong size");
  }
  for (int x = 0; x < n; ++x) {
    if (d(x, x) != 0.0) throw ConfigError("latent model: metric diagonal must be zero");
    for (int y = 0; y < n; ++y) {
      const double v = d(x, y);
      if (!std::isfinite(v) || v < 0.0) {
        throw ConfigError("latent model: metric entries must be finite and nonnegative");
      }
      if (std::abs(v - d(y, x)) > kInputTol) {
        throw ConfigError("latent model: metric must be symmetric");
      }
    }
  }
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      for (int z = 0; z < n; ++z) {
        if (d(x, y) > d(x, z) + d(z, y) + kInputTol) {
          throw ConfigError("latent model: metric violates the triangle inequality at (" +
                            std::to_string(x) + ", " + std::to_string(z) + ", " +
                            std::to_string(y) + ")");
        }
      }
    }
  }
}

std::vector<double> discrete_metric(int n) {
  std::vector<double> m(static_cast<std::size_t>(n) * n, 1.0);
  for (int i = 0; i < n; ++i) m[static_cast<std::size_t>(i) * n + i] = 0.0;
  return m;
}

LipschitzReport lipschitz_constants(const LatentMdp& latent, const TabularPolicy& latent_policy,
                                    Exec mode) {
  latent.validate();
  latent_policy.validate();
  check_compatible(latent.model, latent_policy);
  const int n = latent.n_latent();
  const int na = latent.model.n_actions;

  // Policy-mixed reward and transition rows per latent state.
  std::vector<double> mixed_r(n, 0.0);
  std::vector<std::vector<double>> mixed_p(n, std::vector<double>(n, 0.0));
  for (int x = 0; x < n; ++x) {
    for (int a = 0; a < na; ++a) {
      const double w = latent_policy.prob(x, a);
      if (w == 0.0) continue;
      mixed_r[x] += w * latent.model.r(x, a);
      for (int y = 0; y < n; ++y) mixed_p[x][y] += w * latent.model.p(x, a, y);
    }
  }

  struct PairResult {
    double ratio_r = 0.0;
    double ratio_p = 0.0;
    int distinct_x = -1;  // set when a zero-distance pair behaves differently
    int distinct_y = -1;
  };
  std::vector<std::pair<int, int>> pairs;
  for (int x = 0; x < n; ++x) {
    for (int y = x + 1; y < n; ++y) pairs.emplace_back(x, y);
  }
  std::vector<PairResult> slots(pairs.size());
  for_each_index(mode, pairs.size(), [&](std::size_t i) {
    const auto [x, y] = pairs[i];
    const double dr = std::abs(mixed_r[x] - mixed_r[y]);
    const double wp = wasserstein(mixed_p[x], mixed_p[y], latent.metric, n);
    const double dist = latent.d(x, y);
    PairResult& slot = slots[i];
    if (dist > 0.0) {
      slot.ratio_r = dr / dist;
      slot.ratio_p = wp / dist;
    } else if (dr > kSolveTol || wp > kSolveTol) {
      slot.distinct_x = x;
      slot.distinct_y = y;
    }
  });

  LipschitzReport report;
  for (const PairResult& slot : slots) {
    if (slot.distinct_x >= 0) {
      throw ConfigError("metric identifies behaviorally distinct latents " +
                        std::to_string(slot.distinct_x) + " and " +
                        std::to_string(slot.distinct_y) +
                        "; their mixed reward or transition rows differ at distance zero");
    }
    report.k_r = std::max(report.k_r, slot.ratio_r);
    report.k_p = std::max(report.k_p, slot.ratio_p);
  }
  const double gamma = latent.model.discount;
  if (report.k_p < 1.0 / gamma) {
    report.k_v = report.k_r / (1.0 - gamma * report.k_p);
    report.k_v_finite = true;
  } else {
    report.k_v = std::numeric_limits<double>::infinity();
    report.k_v_finite = false;
  }
  return report;
}

std::vector<double> pushforward(const Encoder& encoder, const std::vector<double>& ground_mass) {
  encoder.validate(static_cast<int>(ground_mass.size()));
  std::vector<double> out(encoder.n_latent, 0.0);
  for (int s = 0; s < encoder.n_ground(); ++s) {
    const double m = ground_mass[s];
    if (!std::isfinite(m) || m < 0.0) {
      throw ConfigError("pushforward: mass entries must be finite and nonnegative");
    }
    out[encoder.mapping[s]] += m;
  }
  return out;
}

LatentMdp fit_latent_model(const FiniteMdp& mdp, const Encoder& encoder,
                           const StateDistribution& weighting, const std::vector<double>& metric) {
  mdp.validate();
  encoder.validate(mdp.n_states);
  if (static_cast<int>(weighting.xi.size()) != mdp.n_states) {
    throw ConfigError("fit_latent_model: weighting length does not match the mdp");
  }
  const int k = encoder.n_latent;
  const int na = mdp.n_actions;
  if (mdp.episodic()) {
    const int reset = *mdp.reset_state;
    for (int s = 0; s < mdp.n_states; ++s) {
      if (s != reset && encoder.mapping[s] == encoder.mapping[reset]) {
        throw ConfigError(
            "fit_latent_model: the reset state must occupy its own encoder block; state " +
            std::to_string(s) + " shares the reset block");
      }
    }
  }

  std::vector<std::vector<int>> blocks = encoder.blocks();
  LatentMdp latent;
  latent.model.n_states = k;
  latent.model.n_actions = na;
  latent.model.discount = mdp.discount;
  latent.model.initial_state = encoder(mdp.initial_state);
  if (mdp.episodic()) latent.model.reset_state = encoder(*mdp.reset_state);
  latent.model.transition.assign(static_cast<std::size_t>(k) * na * k, 0.0);
  latent.model.reward.assign(static_cast<std::size_t>(k) * na, 0.0);
  latent.metric = metric.empty() ? discrete_metric(k) : metric;

  for (int x = 0; x < k; ++x) {
    double block_mass = 0.0;
    for (int s : blocks[x]) block_mass += weighting.xi[s];
    if (!(block_mass > 0.0)) {
      throw ConfigError("fit_latent_model: encoder block " + std::to_string(x) +
                        " has zero weighting mass; its latent dynamics are undefined");
    }
    for (int a = 0; a < na; ++a) {
      double r = 0.0;
      std::vector<double> row(k, 0.0);
      for (int s : blocks[x]) {
        const double w = weighting.xi[s] / block_mass;
        if (w == 0.0) continue;
        r += w * mdp.r(s, a);
        for (int s2 = 0; s2 < mdp.n_states; ++s2) {
          row[encoder.mapping[s2]] += w * mdp.p(s, a, s2);
        }
      }
      latent.model.r(x, a) = r;
      for (int y = 0; y < k; ++y) latent.model.p(x, a, y) = row[y];
    }
  }
  latent.validate();
  return latent;
}

TabularPolicy compose(const TabularPolicy& latent_policy, const Encoder& encoder) {
  latent_policy.validate();
  if (latent_policy.n_states != encoder.n_latent) {
    throw ConfigError("compose: latent policy covers " + std::to_string(latent_policy.n_states) +
                      " latents, encoder has " + std::to_string(encoder.n_latent));
  }
  TabularPolicy pi;
  pi.n_states = encoder.n_ground();
  pi.n_actions = latent_policy.n_actions;
  pi.probs.resize(static_cast<std::size_t>(pi.n_states) * pi.n_actions);
  for (int s = 0; s < pi.n_states; ++s) {
    const int x = encoder.mapping[s];
    for (int a = 0; a < pi.n_actions; ++a) pi.prob(s, a) = latent_policy.prob(x, a);
  }
  return pi;
}

TabularPolicy latent_factor(const TabularPolicy& ground_policy, const Encoder& encoder) {
  ground_policy.validate();
  encoder.validate(ground_policy.n_states);
  TabularPolicy out;
  out.n_states = encoder.n_latent;
  out.n_actions = ground_policy.n_actions;
  out.probs.assign(static_cast<std::size_t>(out.n_states) * out.n_actions, 0.0);
  std::vector<std::vector<int>> blocks = encoder.blocks();
  for (int x = 0; x < encoder.n_latent; ++x) {
    const int rep = blocks[x].front();
    for (int s : blocks[x]) {
      for (int a = 0; a < out.n_actions; ++a) {
        if (std::abs(ground_policy.prob(s, a) - ground_policy.prob(rep, a)) > kInputTol) {
          throw ConfigError("latent_factor: ground policy differs within encoder block " +
                            std::to_string(x) + " (states " + std::to_string(rep) + " and " +
                            std::to_string(s) + "); it does not factor through the encoder");
        }
      }
    }
    for (int a = 0; a < out.n_actions; ++a) out.prob(x, a) = ground_policy.prob(rep, a);
  }
  return out;
}

void check_reset_alignment(const FiniteMdp& mdp, const Encoder& encoder, const LatentMdp& latent) {
  if (!mdp.episodic()) return;
  encoder.validate(mdp.n_states);
  if (!latent.model.episodic()) {
    throw ConfigError("encoder-reset alignment: the latent model has no reset state");
  }
  const int reset = *mdp.reset_state;
  const int latent_reset = *latent.model.reset_state;
  if (encoder.mapping[reset] != latent_reset) {
    throw ConfigError("encoder-reset alignment: the ground reset state maps to latent " +
                      std::to_string(encoder.mapping[reset]) + ", not the latent reset state " +
                      std::to_string(latent_reset));
  }
  for (int s = 0; s < mdp.n_states; ++s) {
    if (s != reset && encoder.mapping[s] == latent_reset) {
      throw ConfigError("encoder-reset alignment: non-reset state " + std::to_string(s) +
                        " maps to the latent reset state");
    }
  }
}

}  // namespace spilab
