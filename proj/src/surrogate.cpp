#include "spilab/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spilab/errors.hpp"
#include "spilab/rng.hpp"
#include "spilab/solve.hpp"

namespace spilab {
namespace {

double clip_to_band(double ratio, double epsilon_clip) {
  return std::clamp(ratio, 1.0 - epsilon_clip, 1.0 + epsilon_clip);
}

void check_epsilon_clip(double epsilon_clip) {
  if (!(epsilon_clip > 0.0 && epsilon_clip < 1.0)) {
    throw ConfigError("clip width must lie in (0, 1), got " + std::to_string(epsilon_clip));
  }
}

}  // namespace

TabularPolicy SoftmaxLatentPolicy::distribution() const {
  validate();
  TabularPolicy pi;
  pi.n_states = n_latent;
  pi.n_actions = n_actions;
  pi.probs.resize(static_cast<std::size_t>(n_latent) * n_actions);
  for (int x = 0; x < n_latent; ++x) {
    double top = logit(x, 0);
    for (int a = 1; a < n_actions; ++a) top = std::max(top, logit(x, a));
    double z = 0.0;
    for (int a = 0; a < n_actions; ++a) {
      const double e = std::exp(logit(x, a) - top);
      pi.prob(x, a) = e;
      z += e;
    }
    for (int a = 0; a < n_actions; ++a) pi.prob(x, a) /= z;
  }
  return pi;
}

void SoftmaxLatentPolicy::validate() const {
  if (n_latent <= 0 || n_actions <= 0) throw ConfigError("softmax policy: empty shape");
  if (logits.size() != static_cast<std::size_t>(n_latent) * n_actions) {
    throw ConfigError("softmax policy: logit table has wrong size");
  }
  for (double l : logits) {
    if (!std::isfinite(l)) throw ConfigError("softmax policy: non-finite logit");
  }
}

SoftmaxLatentPolicy SoftmaxLatentPolicy::from_policy(const TabularPolicy& policy, double floor) {
  policy.validate();
  if (!(floor > 0.0)) throw ConfigError("softmax policy: probability floor must be positive");
  SoftmaxLatentPolicy out;
  out.n_latent = policy.n_states;
  out.n_actions = policy.n_actions;
  out.logits.resize(policy.probs.size());
  for (std::size_t i = 0; i < policy.probs.size(); ++i) {
    out.logits[i] = std::log(std::max(policy.probs[i], floor));
  }
  return out;
}

void SurrogateConfig::validate() const {
  check_epsilon_clip(epsilon_clip);
  if (!(alpha_r > 0.0 && alpha_r <= 1.0)) {
    throw ConfigError("reward-loss weight must lie in (0, 1], got " + std::to_string(alpha_r));
  }
  if (!(alpha_p > 0.0 && alpha_p <= 1.0)) {
    throw ConfigError("transition-loss weight must lie in (0, 1], got " + std::to_string(alpha_p));
  }
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (epochs < 1) throw ConfigError("epoch count must be at least 1");
  if (minibatches < 1) throw ConfigError("minibatch count must be at least 1");
}

std::pair<double, double> transition_losses(const TransitionBatch::Row& row,
                                            const Encoder& encoder, const LatentMdp& latent) {
  const int x = encoder.mapping[row.s];
  const int y_obs = encoder.mapping[row.s_next];
  const double reward_loss = std::abs(row.r - latent.model.r(x, row.a));
  double transition_loss = 0.0;
  for (int y = 0; y < latent.n_latent(); ++y) {
    const double p = latent.model.p(x, row.a, y);
    if (p > 0.0) transition_loss += p * latent.d(y_obs, y);
  }
  return {reward_loss, transition_loss};
}

double utility_value(double advantage, double reward_loss, double transition_loss,
                     const SurrogateConfig& config) {
  config.validate();
  return advantage - config.alpha_r * reward_loss - config.alpha_p * transition_loss;
}

double ppo_drift(const TabularPolicy& base, const TabularPolicy& candidate,
                 const ValueTables& base_values, int state, double epsilon_clip) {
  check_epsilon_clip(epsilon_clip);
  if (base.n_states != candidate.n_states || base.n_actions != candidate.n_actions) {
    throw ConfigError("drift: policy shapes differ");
  }
  if (state < 0 || state >= base.n_states) throw ConfigError("drift: state out of range");
  double drift = 0.0;
  for (int a = 0; a < base.n_actions; ++a) {
    const double b = base.prob(state, a);
    if (b == 0.0) continue;
    const double ratio = candidate.prob(state, a) / b;
    const double excess = (ratio - clip_to_band(ratio, epsilon_clip)) *
                          base_values.advantage(state, a, base.n_actions);
    drift += b * std::max(0.0, excess);
  }
  return drift;
}

double surrogate_objective(const std::vector<SurrogateSample>& samples,
                           const SoftmaxLatentPolicy& candidate, double epsilon_clip) {
  check_epsilon_clip(epsilon_clip);
  if (samples.empty()) throw ConfigError("surrogate objective: no samples");
  const TabularPolicy dist = candidate.distribution();
  double total = 0.0;
  for (const SurrogateSample& sample : samples) {
    const double ratio = dist.prob(sample.latent_state, sample.action) / sample.base_prob;
    const double unclipped = ratio * sample.utility;
    const double clipped = clip_to_band(ratio, epsilon_clip) * sample.utility;
    total += std::min(unclipped, clipped);
  }
  return total / static_cast<double>(samples.size());
}

std::vector<double> surrogate_gradient(const std::vector<SurrogateSample>& samples,
                                       const SoftmaxLatentPolicy& candidate, double epsilon_clip,
                                       Exec mode) {
  check_epsilon_clip(epsilon_clip);
  if (samples.empty()) throw ConfigError("surrogate gradient: no samples");
  const TabularPolicy dist = candidate.distribution();
  const int na = candidate.n_actions;

  // Each sample contributes scale * d(log pi(a_t | x_t))-style terms to one
  // logit row only; the scales are computed in parallel, the row updates are
  // accumulated serially in sample order.
  std::vector<double> scales(samples.size(), 0.0);
  for_each_index(mode, samples.size(), [&](std::size_t t) {
    const SurrogateSample& sample = samples[t];
    const double ratio = dist.prob(sample.latent_state, sample.action) / sample.base_prob;
    const double unclipped = ratio * sample.utility;
    const double clipped = clip_to_band(ratio, epsilon_clip) * sample.utility;
    double branch;
    if (unclipped <= clipped) {
      branch = 1.0;  // the min follows the unclipped branch: d/d ratio = U
    } else {
      // Clipped branch selected; its derivative vanishes outside the band.
      const bool in_band = ratio >= 1.0 - epsilon_clip && ratio <= 1.0 + epsilon_clip;
      branch = in_band ? 1.0 : 0.0;
    }
    scales[t] = branch * sample.utility * ratio / static_cast<double>(samples.size());
  });

  std::vector<double> grad(candidate.logits.size(), 0.0);
  for (std::size_t t = 0; t < samples.size(); ++t) {
    if (scales[t] == 0.0) continue;
    const SurrogateSample& sample = samples[t];
    const std::size_t base = static_cast<std::size_t>(sample.latent_state) * na;
    for (int a = 0; a < na; ++a) {
      const double indicator = (a == sample.action) ? 1.0 : 0.0;
      grad[base + a] += scales[t] * (indicator - dist.prob(sample.latent_state, a));
    }
  }
  return grad;
}

SoftmaxLatentPolicy clipped_update(const FiniteMdp& mdp, const Encoder& encoder,
                                   const LatentMdp& latent, const SoftmaxLatentPolicy& old_policy,
                                   const TransitionBatch& batch, const SurrogateConfig& config,
                                   Exec mode) {
  mdp.validate();
  encoder.validate(mdp.n_states);
  latent.validate();
  old_policy.validate();
  config.validate();
  if (old_policy.n_latent != encoder.n_latent || old_policy.n_actions != mdp.n_actions) {
    throw ConfigError("clipped update: latent policy shape does not match encoder and mdp");
  }
  if (batch.empty()) throw ConfigError("clipped update: batch is empty");

  const TabularPolicy old_latent = old_policy.distribution();
  const TabularPolicy composed = compose(old_latent, encoder);
  const ValueTables tables = evaluate_policy(mdp, composed);

  std::vector<SurrogateSample> samples(batch.size());
  for (std::size_t t = 0; t < batch.size(); ++t) {
    const TransitionBatch::Row& row = batch.rows[t];
    if (row.s < 0 || row.s >= mdp.n_states || row.a < 0 || row.a >= mdp.n_actions ||
        row.s_next < 0 || row.s_next >= mdp.n_states) {
      throw ConfigError("clipped update: batch row out of range");
    }
    const auto [l_r, l_p] = transition_losses(row, encoder, latent);
    SurrogateSample& sample = samples[t];
    sample.latent_state = encoder.mapping[row.s];
    sample.action = row.a;
    sample.base_prob = old_latent.prob(sample.latent_state, row.a);
    sample.utility =
        utility_value(tables.advantage(row.s, row.a, mdp.n_actions), l_r, l_p, config);
  }

  SoftmaxLatentPolicy policy = old_policy;
  const std::size_t total = samples.size();
  const std::size_t chunks = std::min<std::size_t>(config.minibatches, total);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t chunk = 0; chunk < chunks; ++chunk) {
      const std::size_t begin = chunk * total / chunks;
      const std::size_t end = (chunk + 1) * total / chunks;
      const std::vector<SurrogateSample> slice(samples.begin() + begin, samples.begin() + end);
      const std::vector<double> grad =
          surrogate_gradient(slice, policy, config.epsilon_clip, mode);
      for (std::size_t i = 0; i < policy.logits.size(); ++i) {
        policy.logits[i] += config.learning_rate * grad[i];
        if (!std::isfinite(policy.logits[i])) {
          throw std::runtime_error(
              "clipped update diverged: non-finite logit during ascent (epoch " +
              std::to_string(epoch) + ")");
        }
      }
    }
  }
  return policy;
}

std::vector<double> LatentRollouts::returns(double discount) const {
  std::vector<double> out(rollouts.size(), 0.0);
  for (std::size_t i = 0; i < rollouts.size(); ++i) {
    double acc = 0.0;
    double scale = 1.0;
    for (const Step& step : rollouts[i]) {
      acc += scale * step.reward;
      scale *= discount;
    }
    out[i] = acc;
  }
  return out;
}

double LatentRollouts::mean_return(double discount) const {
  if (rollouts.empty()) return 0.0;
  const std::vector<double> rs = returns(discount);
  double total = 0.0;
  for (double r : rs) total += r;
  return total / static_cast<double>(rs.size());
}

LatentRollouts imagine_rollouts(const LatentMdp& latent, const TabularPolicy& latent_policy,
                                int count, int horizon, std::uint64_t seed, Exec mode) {
  latent.validate();
  latent_policy.validate();
  check_compatible(latent.model, latent_policy);
  if (count < 0) throw ConfigError("rollout count must be nonnegative");
  if (horizon < 0) throw ConfigError("rollout horizon must be nonnegative");
  LatentRollouts out;
  out.rollouts.resize(count);
  for_each_index(mode, static_cast<std::size_t>(count), [&](std::size_t i) {
    SplitRng rng(derive_seed(seed, i));
    std::vector<LatentRollouts::Step>& rollout = out.rollouts[i];
    rollout.resize(horizon);
    int x = latent.model.initial_state;
    for (int h = 0; h < horizon; ++h) {
      LatentRollouts::Step& step = rollout[h];
      step.state = x;
      step.action = rng.categorical(latent_policy.row(x));
      step.reward = latent.model.r(x, step.action);
      x = rng.categorical(latent.model.row(x, step.action));
    }
  });
  return out;
}

}  // namespace spilab
