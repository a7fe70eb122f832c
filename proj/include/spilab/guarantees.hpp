// Machine-checked verifiers for the safe-policy-improvement bounds: the
// average value deviation of a latent policy, the return deviation between
// ground and latent returns, the improvement guarantee relating latent
// improvement to ground improvement, the near-Lipschitz property of
// deployed-value functions over encoded states, and the sample-based
// (PAC) variant of the improvement guarantee.
//
// Every verifier computes both sides of its inequality with exact solvers and
// reports them; a false verdict on valid inputs indicates an implementation
// bug, and the test suite treats it as such.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "spilab/latent.hpp"
#include "spilab/mdp.hpp"
#include "spilab/parallel.hpp"

namespace spilab {

/// Absolute tolerance for inequality verdicts; absorbs linear-solver
/// residuals in the exactly computed sides.
inline constexpr double kVerdictTol = 1e-9;

/// Both sides of one verified inequality plus diagnostics.
struct BoundReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  /// lhs <= rhs + kVerdictTol.
  bool holds = false;
  /// rhs - lhs.
  double slack = 0.0;
  /// Stable hash of the verifier inputs, for pairing reports with runs.
  std::string inputs_digest;
  /// Named intermediate quantities (sir, k_v, ael, l_r, l_p, ...).
  std::map<std::string, double> components;
  /// True when the bound cannot discriminate (failure probability >= 1 or a
  /// right side exceeding the attainable value range). Vacuous bounds still
  /// hold; the flag lets suites report how often bounds are informative.
  bool vacuous = false;
};

/// Parameters of the sample-based improvement check.
struct PacConfig {
  /// Estimation slack added to the error term.
  double epsilon = 0.05;
  /// Failure probability budget, in (0, 1).
  double delta = 0.1;
  /// Known upper bound on the baseline's average episode length. With it the
  /// sample size is fixed up front; without it the reset mass is estimated
  /// from the sample itself and the sample size is found by fixed point.
  std::optional<double> ael_upper_bound;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Average value deviation: under the baseline's stationary distribution, the
/// deployed policy's ground values stay close to the latent values at encoded
/// states,
///   E_{s ~ xi_b} |V(s) - Vbar(phi(s))| <= (l_r + gamma k_v l_p) / (1/sir - gamma),
/// where the candidate is latent_policy composed with the encoder, sir is its
/// supremum importance ratio against the baseline, and losses are taken under
/// (xi_b, baseline).
BoundReport verify_avd(const FiniteMdp& mdp, const Encoder& encoder, const LatentMdp& latent,
                       const TabularPolicy& baseline, const TabularPolicy& latent_policy);

/// Return deviation: |ground return of the composed candidate - latent return|
/// <= ael * (l_r / gamma + k_v * l_p) / (1/sir - gamma).
BoundReport verify_value_bound(const FiniteMdp& mdp, const Encoder& encoder,
                               const LatentMdp& latent, const TabularPolicy& baseline,
                               const TabularPolicy& latent_policy);

/// Improvement guarantee: ground improvement of the composed candidate over
/// the composed baseline is at least the latent improvement minus
///   zeta = ael * (l_r / gamma + k_v * l_p) * kappa,
///   kappa = 1 / (1/sir - gamma) + 1 / (1 - gamma).
/// The report's lhs is (latent improvement - ground improvement) and its rhs
/// is zeta. k_v uses the larger constants of the two latent policies so one
/// constant bounds both legs of the argument.
BoundReport verify_spi(const FiniteMdp& mdp, const Encoder& encoder, const LatentMdp& latent,
                       const TabularPolicy& baseline_latent,
                       const TabularPolicy& candidate_latent);

/// Near-Lipschitz property of deployed values: for state pairs drawn
/// independently from the baseline's stationary distribution,
///   |V(s1) - V(s2)| <= k_v * d(phi(s1), phi(s2)) + epsilon
/// except with probability at most
///   delta = 4 (l_r + gamma k_v l_p) / (epsilon (1/sir - gamma)).
/// The violation probability is enumerated exactly (state count is small);
/// when trials > 0 an independent sampled estimate is reported alongside.
/// delta >= 1 sets the vacuous flag.
BoundReport verify_representation_quality(const FiniteMdp& mdp, const Encoder& encoder,
                                          const LatentMdp& latent, const TabularPolicy& baseline,
                                          const TabularPolicy& latent_policy, double epsilon,
                                          int trials = 0, std::uint64_t seed = 0);

/// Sample size for the known-episode-length case:
///   ceil(-r_star * ln(delta / 2) / epsilon^2 * (ael_bound * kappa * (1/discount + k_v))^2).
long long pac_required_samples_with_ael(double ael_bound, double discount, double sup_ir,
                                        double k_v, double r_star, double epsilon, double delta);

/// Sample size for the estimated-reset-mass case:
///   ceil((-r_star * ln(delta / 3) / 2) * max(1 / xi_hat^2, (b / (epsilon * xi_hat))^2)),
///   b = (kappa / xi_hat) * (l_r_hat / discount + k_v * l_p_hat)
///       + epsilon + kappa * (1 / discount + k_v).
long long pac_required_samples_estimated(double xi_reset_hat, double l_r_hat, double l_p_hat,
                                         double discount, double sup_ir, double k_v, double r_star,
                                         double epsilon, double delta);

/// Sample-based improvement check. Runs `trials` independent trials; each
/// draws its required number of stationary transitions, estimates the losses
/// (and the reset mass when no episode-length bound is given, iterating the
/// sample size to a fixed point of its own formula, doubling on an empty
/// reset count, bounded retries), and forms the estimated error term
/// zeta_hat. The report checks that the frequency of {zeta_hat >= zeta}
/// reaches 1 - delta - 3 * sqrt(delta (1 - delta) / trials), with zeta the
/// exact improvement error. lhs = observed failure frequency, rhs = delta +
/// 3 * se.
BoundReport pac_verify(const FiniteMdp& mdp, const Encoder& encoder, const LatentMdp& latent,
                       const TabularPolicy& baseline_latent, const TabularPolicy& candidate_latent,
                       const PacConfig& config, int trials = 200, Exec mode = Exec::serial);

}  // namespace spilab
