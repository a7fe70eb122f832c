// Local model-quality losses of a latent world model against the ground MDP:
// expected reward error and expected Wasserstein transition error under a
// state weighting and an action-selecting policy, plus their sample-based
// estimators and a cheap product-coupling upper bound.

#pragma once

#include <vector>

#include "spilab/latent.hpp"
#include "spilab/mdp.hpp"
#include "spilab/parallel.hpp"
#include "spilab/sampling.hpp"

namespace spilab {

/// Reward and transition losses with their provenance.
struct LossReport {
  enum class Source { exact, empirical };
  double l_r = 0.0;
  double l_p = 0.0;
  Source source = Source::exact;
  long sample_count = 0;
};

/// Exact losses by full enumeration:
///   l_r = E_{s ~ weighting, a ~ policy(.|s)} |R(s, a) - Rbar(phi(s), a)|
///   l_p = E_{s, a} W(phi-pushforward of P(.|s, a), Pbar(.|phi(s), a))
/// with W over the latent metric. When both distributions are point masses
/// the Wasserstein term reduces to a single metric lookup (the common case
/// for deterministic dynamics); otherwise the transportation solver runs.
LossReport exact_losses(const FiniteMdp& mdp, const Encoder& encoder, const LatentMdp& latent,
                        const StateDistribution& weighting, const TabularPolicy& policy,
                        Exec mode = Exec::serial);

/// Sample estimators over a transition batch:
///   l_r_hat = mean |r_t - Rbar(phi(s_t), a_t)|
///   l_p_hat = mean E_{y ~ Pbar(.|phi(s_t), a_t)} d(phi(s'_t), y)
/// Under the discrete metric l_p_hat = 1 - mean Pbar(phi(s'_t) | phi(s_t), a_t),
/// which estimates the product-coupling bound rather than l_p itself.
/// ConfigError on an empty batch.
LossReport empirical_losses(const TransitionBatch& batch, const Encoder& encoder,
                            const LatentMdp& latent);

/// Product-coupling upper bound on the transition loss: couples the pushed
/// ground successor and the model successor independently,
///   E_{s, a} E_{s' ~ P} E_{y ~ Pbar} d(phi(s'), y) >= l_p.
double crude_transition_bound(const FiniteMdp& mdp, const Encoder& encoder, const LatentMdp& latent,
                              const StateDistribution& weighting, const TabularPolicy& policy);

}  // namespace spilab
