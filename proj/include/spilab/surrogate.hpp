// Clipped-surrogate policy optimization on latent policies, driven by ground
// transitions and a latent world model: per-transition model losses, the
// advantage-minus-losses utility, the clip-induced drift penalty, the clipped
// objective with its analytic gradient, and imagined rollouts in the model.

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "spilab/latent.hpp"
#include "spilab/mdp.hpp"
#include "spilab/parallel.hpp"
#include "spilab/sampling.hpp"

namespace spilab {

/// Latent policy parameterized by logits: pi(a | x) = softmax(logits[x, .])_a
/// with the row maximum subtracted before exponentiation.
struct SoftmaxLatentPolicy {
  int n_latent = 0;
  int n_actions = 0;
  std::vector<double> logits;

  double logit(int x, int a) const { return logits[static_cast<std::size_t>(x) * n_actions + a]; }
  double& logit(int x, int a) { return logits[static_cast<std::size_t>(x) * n_actions + a]; }

  /// The softmax action distributions as a tabular policy (full support).
  TabularPolicy distribution() const;

  /// Checks shapes and that every logit is finite. Throws ConfigError.
  void validate() const;

  /// Logits log(max(p, floor)) reproducing a tabular policy's rows up to the
  /// floor on zero or near-zero probabilities.
  static SoftmaxLatentPolicy from_policy(const TabularPolicy& policy, double floor = 1e-8);
};

/// Hyperparameters of the clipped update.
struct SurrogateConfig {
  /// Half-width of the clip band around ratio 1; band [1 - clip, 1 + clip].
  double epsilon_clip = 0.1;
  /// Weight of the per-transition reward-model error in the utility.
  double alpha_r = 0.01;
  /// Weight of the per-transition transition-model error in the utility.
  double alpha_p = 5e-4;
  double learning_rate = 0.1;
  int epochs = 4;
  /// Contiguous equal splits of the batch, visited in order each epoch.
  int minibatches = 4;

  void validate() const;
};

/// Per-transition model errors: reward error |r - Rbar(phi(s), a)| and
/// expected metric distance E_{y ~ Pbar(.|phi(s), a)} d(phi(s'), y).
std::pair<double, double> transition_losses(const TransitionBatch::Row& row,
                                            const Encoder& encoder, const LatentMdp& latent);

/// Utility of a transition: advantage - alpha_r * reward error - alpha_p *
/// transition error.
double utility_value(double advantage, double reward_loss, double transition_loss,
                     const SurrogateConfig& config);

/// Drift penalty of a candidate policy against a base policy at one state:
///   E_{a ~ base(.|s)} max(0, (ratio - clip(ratio, 1 +- epsilon)) * adv(s, a)).
/// Zero whenever every ratio lies inside the clip band; never negative.
double ppo_drift(const TabularPolicy& base, const TabularPolicy& candidate,
                 const ValueTables& base_values, int state, double epsilon_clip);

/// One batch sample prepared for the clipped objective: the encoded state,
/// the taken action, the base policy's probability of it, and its utility.
struct SurrogateSample {
  int latent_state = 0;
  int action = 0;
  double base_prob = 0.0;
  double utility = 0.0;
};

/// Mean clipped surrogate over the samples:
///   mean_t min(ratio_t * U_t, clip(ratio_t, 1 +- epsilon) * U_t),
/// with ratio_t = candidate(a_t | x_t) / base_prob_t. Equals the mean
/// utility under the candidate minus the mean drift penalty (pointwise,
/// min(x, y) = x - max(0, x - y)).
double surrogate_objective(const std::vector<SurrogateSample>& samples,
                           const SoftmaxLatentPolicy& candidate, double epsilon_clip);

/// Analytic gradient of surrogate_objective with respect to the candidate's
/// logits, flattened (latent_state, action) row-major. Samples whose min
/// picks the clipped branch outside the band contribute zero; all others
/// contribute utility * ratio * (indicator(a = a_t) - candidate(a | x_t)) / T.
std::vector<double> surrogate_gradient(const std::vector<SurrogateSample>& samples,
                                       const SoftmaxLatentPolicy& candidate, double epsilon_clip,
                                       Exec mode = Exec::serial);

/// One full clipped-surrogate update of the latent policy from ground
/// transitions: advantages of the composed policy (old policy through the
/// encoder) are computed exactly, per-transition losses and utilities are
/// fixed from the old policy, then the logits take epochs x minibatches
/// ascent steps on the clipped objective. Deterministic; throws
/// std::runtime_error if any logit turns non-finite during the ascent.
SoftmaxLatentPolicy clipped_update(const FiniteMdp& mdp, const Encoder& encoder,
                                   const LatentMdp& latent, const SoftmaxLatentPolicy& old_policy,
                                   const TransitionBatch& batch, const SurrogateConfig& config,
                                   Exec mode = Exec::serial);

/// Rollouts imagined entirely inside the latent model.
struct LatentRollouts {
  struct Step {
    int state = 0;
    int action = 0;
    double reward = 0.0;
  };
  std::vector<std::vector<Step>> rollouts;

  /// Discounted return of each rollout.
  std::vector<double> returns(double discount) const;
  /// Mean discounted return, accumulated in rollout order.
  double mean_return(double discount) const;
};

/// Simulates `count` rollouts of length `horizon` from the latent initial
/// state under the latent policy. Each rollout draws from its own stream
/// derived from (seed, rollout index), so the result is deterministic and
/// independent of the execution mode.
LatentRollouts imagine_rollouts(const LatentMdp& latent, const TabularPolicy& latent_policy,
                                int count, int horizon, std::uint64_t seed,
                                Exec mode = Exec::serial);

}  // namespace spilab
