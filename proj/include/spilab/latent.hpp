// State abstraction: encoders from ground states to latent states, latent
// MDPs (world models) carrying a metric on latent states, model fitting by
// weighted aggregation, and Lipschitz analysis of latent models.

#pragma once

#include <optional>
#include <vector>

#include "spilab/mdp.hpp"
#include "spilab/parallel.hpp"

namespace spilab {

/// Surjective map from ground states onto latent states.
struct Encoder {
  int n_latent = 0;
  /// mapping[s] = latent state of ground state s.
  std::vector<int> mapping;

  int operator()(int s) const { return mapping[s]; }
  int n_ground() const { return static_cast<int>(mapping.size()); }

  /// Ground states of each latent block, ascending within a block.
  std::vector<std::vector<int>> blocks() const;

  /// Checks the map covers [0, n_latent) over n_states ground states.
  /// Throws ConfigError on out-of-range entries or a non-surjective map.
  void validate(int n_states) const;

  static Encoder identity(int n_states);
};

/// MDP over latent states plus a (pseudo)metric on them. The dynamics reuse
/// FiniteMdp, so every solver applies to the latent model directly.
struct LatentMdp {
  FiniteMdp model;
  /// Row-major n_latent x n_latent distances.
  std::vector<double> metric;

  int n_latent() const { return model.n_states; }
  double d(int x, int y) const { return metric[static_cast<std::size_t>(x) * n_latent() + y]; }

  /// Validates the dynamics as an MDP and the metric axioms: correct size,
  /// finite nonnegative entries, zero diagonal, symmetry, triangle
  /// inequality. Zero distances between distinct latents are allowed (the
  /// metric may be a pseudometric); Lipschitz analysis rejects them only when
  /// the identified latents behave differently.
  void validate() const;
};

/// The 0/1 discrete metric on n points.
std::vector<double> discrete_metric(int n);

/// Lipschitz constants of a latent model under a latent policy, over the
/// model's metric: k_r bounds the variation of the policy-mixed reward, k_p
/// bounds the Wasserstein variation of the policy-mixed transition kernel,
/// and k_v = k_r / (1 - discount * k_p) bounds the variation of the latent
/// value function when k_p < 1 / discount.
struct LipschitzReport {
  double k_r = 0.0;
  double k_p = 0.0;
  double k_v = 0.0;
  /// False when k_p >= 1 / discount, in which case k_v is +infinity.
  bool k_v_finite = true;
};

/// Computes the tight constants by maximizing the difference ratios over all
/// latent pairs. Pairs at zero distance must behave identically (same mixed
/// reward, same mixed kernel up to the metric's quotient); otherwise
/// ConfigError "metric identifies behaviorally distinct latents".
LipschitzReport lipschitz_constants(const LatentMdp& latent, const TabularPolicy& latent_policy,
                                    Exec mode = Exec::serial);

/// Distribution over latents induced by pushing a ground distribution
/// through the encoder. Accepts any nonnegative mass vector; mass is
/// preserved exactly (summation in ascending ground-state order).
std::vector<double> pushforward(const Encoder& encoder, const std::vector<double>& ground_mass);

/// Fits a latent model to a ground MDP by weighted aggregation: each latent
/// block's reward and pushed-forward transition rows are averaged with the
/// weighting distribution restricted to the block. Every block needs positive
/// weighting mass. The result carries the given metric (discrete by default),
/// the encoded initial state, and the encoded reset state when the ground MDP
/// is episodic; episodic grounds must place the reset state alone in its
/// block so the reset structure survives aggregation.
LatentMdp fit_latent_model(const FiniteMdp& mdp, const Encoder& encoder,
                           const StateDistribution& weighting,
                           const std::vector<double>& metric = {});

/// Ground policy acting as latent_policy composed with the encoder:
/// pi(a | s) = latent_policy(a | encoder(s)).
TabularPolicy compose(const TabularPolicy& latent_policy, const Encoder& encoder);

/// Inverse of compose on its image: recovers the latent policy from a ground
/// policy that is constant on every encoder block. ConfigError when two
/// states of one block disagree beyond 1e-12.
TabularPolicy latent_factor(const TabularPolicy& ground_policy, const Encoder& encoder);

/// Checks encoder-reset alignment for an episodic ground MDP: the encoder
/// maps the reset state, and only the reset state, to the latent model's
/// reset state. Throws ConfigError with a named diagnostic otherwise.
void check_reset_alignment(const FiniteMdp& mdp, const Encoder& encoder, const LatentMdp& latent);

}  // namespace spilab
