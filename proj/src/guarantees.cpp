#include "spilab/guarantees.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "spilab/digest.hpp"
#include "spilab/errors.hpp"
#include "spilab/losses.hpp"
#include "spilab/neighborhood.hpp"
#include "spilab/rng.hpp"
#include "spilab/sampling.hpp"
#include "spilab/solve.hpp"

namespace spilab {
namespace {

// Shared exact quantities behind every verifier: the baseline's stationary
// distribution, the losses under it, the candidate's importance-ratio
// extremes, and the Lipschitz constants.
struct Context {
  TabularPolicy candidate_ground;
  StateDistribution xi_baseline;
  LossReport losses;
  IrSummary ir;
  double ael = 0.0;
  LipschitzReport lipschitz;
};

void check_common(const FiniteMdp& mdp, const Encoder& encoder, const LatentMdp& latent) {
  mdp.validate();
  encoder.validate(mdp.n_states);
  latent.validate();
  if (!mdp.episodic()) {
    throw ConfigError("verifier requires an episodic mdp with a reset state");
  }
  if (!(mdp.discount > 0.5)) {
    throw ConfigError("verifier requires discount > 1/2 so that admissible importance-ratio "
                      "neighborhood constants (1, 1/discount) exist; got discount " +
                      std::to_string(mdp.discount));
  }
  if (latent.model.discount != mdp.discount) {
    throw ConfigError("latent model and mdp disagree on the discount factor");
  }
  check_reset_alignment(mdp, encoder, latent);
}

void check_candidate_neighborhood(const IrSummary& ir, double discount) {
  const double limit = 1.0 / discount;
  if (!ir.support_match) {
    throw ConfigError(
        "candidate policy must keep the baseline's support at every state; it does not");
  }
  if (!(ir.sup_ir < limit)) {
    throw ConfigError("candidate policy's supremum importance ratio " +
                      std::to_string(ir.sup_ir) + " must stay below 1/discount = " +
                      std::to_string(limit));
  }
  if (!(ir.inf_ir > 2.0 - limit)) {
    throw ConfigError("candidate policy's infimum importance ratio " +
                      std::to_string(ir.inf_ir) + " must stay above 2 - 1/discount = " +
                      std::to_string(2.0 - limit));
  }
}

void check_kv_finite(const LipschitzReport& lips, double discount) {
  if (!lips.k_v_finite) {
    throw ConfigError("latent transition Lipschitz constant " + std::to_string(lips.k_p) +
                      " must stay below 1/discount = " + std::to_string(1.0 / discount) +
                      " for a finite value Lipschitz constant");
  }
}

// Dominating constants over both policies so a single k_v bounds both legs
// of the improvement argument.
LipschitzReport dominating_lipschitz(const LatentMdp& latent, const TabularPolicy& a,
                                     const TabularPolicy& b) {
  const LipschitzReport la = lipschitz_constants(latent, a);
  const LipschitzReport lb = lipschitz_constants(latent, b);
  LipschitzReport out;
  out.k_r = std::max(la.k_r, lb.k_r);
  out.k_p = std::max(la.k_p, lb.k_p);
  const double gamma = latent.model.discount;
  if (out.k_p < 1.0 / gamma) {
    out.k_v = out.k_r / (1.0 - gamma * out.k_p);
    out.k_v_finite = true;
  } else {
    out.k_v = std::numeric_limits<double>::infinity();
    out.k_v_finite = false;
  }
  return out;
}

Context build_context(const FiniteMdp& mdp, const Encoder& encoder, const LatentMdp& latent,
                      const TabularPolicy& baseline, const TabularPolicy& latent_policy,
                      const LipschitzReport& lipschitz) {
  Context ctx;
  ctx.candidate_ground = compose(latent_policy, encoder);
  ctx.ir = extremal_importance_ratios(baseline, ctx.candidate_ground);
  check_candidate_neighborhood(ctx.ir, mdp.discount);
  check_kv_finite(lipschitz, mdp.discount);
  ctx.lipschitz = lipschitz;
  ctx.xi_baseline = stationary_distribution(mdp, baseline);
  ctx.ael = average_episode_length(mdp, baseline);
  ctx.losses = exact_losses(mdp, encoder, latent, ctx.xi_baseline, baseline);
  return ctx;
}

double kappa_of(double discount, double sup_ir) {
  return 1.0 / (1.0 / sup_ir - discount) + 1.0 / (1.0 - discount);
}

std::string digest_inputs(const FiniteMdp& mdp, const Encoder& encoder, const LatentMdp& latent,
                          const TabularPolicy& a, const TabularPolicy& b,
                          const std::vector<double>& extras = {}) {
  std::string bytes;
  auto put = [&bytes](double x) {
    bytes += format_double(x);
    bytes += ';';
  };
  put(mdp.n_states);
  put(mdp.n_actions);
  put(mdp.discount);
  put(mdp.initial_state);
  put(mdp.episodic() ? *mdp.reset_state : -1);
  for (double x : mdp.transition) put(x);
  for (double x : mdp.reward) put(x);
  for (int x : encoder.mapping) put(x);
  for (double x : latent.model.transition) put(x);
  for (double x : latent.model.reward) put(x);
  for (double x : latent.metric) put(x);
  for (double x : a.probs) put(x);
  for (double x : b.probs) put(x);
  for (double x : extras) put(x);
  return hex64(fnv1a64(bytes));
}

BoundReport finish_report(std::string name, double lhs, double rhs, std::string digest,
                          std::map<std::string, double> components, bool vacuous = false) {
  BoundReport report;
  report.name = std::move(name);
  report.lhs = lhs;
  report.rhs = rhs;
  report.slack = rhs - lhs;
  report.holds = lhs <= rhs + kVerdictTol;
  report.inputs_digest = std::move(digest);
  report.components = std::move(components);
  report.vacuous = vacuous;
  return report;
}

}  // namespace

void PacConfig::validate() const {
  if (!(epsilon > 0.0)) throw ConfigError("pac: epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("pac: delta must lie in (0, 1)");
  if (ael_upper_bound && !(*ael_upper_bound >= 1.0)) {
    throw ConfigError("pac: an average-episode-length bound below 1 is impossible");
  }
}

BoundReport verify_avd(const FiniteMdp& mdp, const Encoder& encoder, const LatentMdp& latent,
                       const TabularPolicy& baseline, const TabularPolicy& latent_policy) {
  check_common(mdp, encoder, latent);
  const LipschitzReport lips = lipschitz_constants(latent, latent_policy);
  Context ctx = build_context(mdp, encoder, latent, baseline, latent_policy, lips);

  const ValueTables ground = evaluate_policy(mdp, ctx.candidate_ground);
  const ValueTables lat = evaluate_policy(latent.model, latent_policy);
  double lhs = 0.0;
  for (int s = 0; s < mdp.n_states; ++s) {
    lhs += ctx.xi_baseline.mass(s) * std::abs(ground.v[s] - lat.v[encoder.mapping[s]]);
  }
  const double gamma = mdp.discount;
  const double rhs = (ctx.losses.l_r + gamma * ctx.lipschitz.k_v * ctx.losses.l_p) /
                     (1.0 / ctx.ir.sup_ir - gamma);
  return finish_report("avd", lhs, rhs,
                       digest_inputs(mdp, encoder, latent, baseline, latent_policy),
                       {{"sir", ctx.ir.sup_ir},
                        {"k_r", ctx.lipschitz.k_r},
                        {"k_p", ctx.lipschitz.k_p},
                        {"k_v", ctx.lipschitz.k_v},
                        {"l_r", ctx.losses.l_r},
                        {"l_p", ctx.losses.l_p}});
}

BoundReport verify_value_bound(const FiniteMdp& mdp, const Encoder& encoder,
                               const LatentMdp& latent, const TabularPolicy& baseline,
                               const TabularPolicy& latent_policy) {
  check_common(mdp, encoder, latent);
  const LipschitzReport lips = lipschitz_constants(latent, latent_policy);
  Context ctx = build_context(mdp, encoder, latent, baseline, latent_policy, lips);

  const double j_ground = policy_return(mdp, ctx.candidate_ground);
  const double j_latent = policy_return(latent.model, latent_policy);
  const double gamma = mdp.discount;
  const double lhs = std::abs(j_ground - j_latent);
  const double rhs = ctx.ael *
                     (ctx.losses.l_r / gamma + ctx.lipschitz.k_v * ctx.losses.l_p) /
                     (1.0 / ctx.ir.sup_ir - gamma);
  return finish_report("value_bound", lhs, rhs,
                       digest_inputs(mdp, encoder, latent, baseline, latent_policy),
                       {{"sir", ctx.ir.sup_ir},
                        {"k_v", ctx.lipschitz.k_v},
                        {"ael", ctx.ael},
                        {"l_r", ctx.losses.l_r},
                        {"l_p", ctx.losses.l_p},
                        {"j_ground", j_ground},
                        {"j_latent", j_latent}});
}

BoundReport verify_spi(const FiniteMdp& mdp, const Encoder& encoder, const LatentMdp& latent,
                       const TabularPolicy& baseline_latent,
                       const TabularPolicy& candidate_latent) {
  check_common(mdp, encoder, latent);
  const TabularPolicy baseline = compose(baseline_latent, encoder);
  const LipschitzReport lips = dominating_lipschitz(latent, candidate_latent, baseline_latent);
  Context ctx = build_context(mdp, encoder, latent, baseline, candidate_latent, lips);

  const double gamma = mdp.discount;
  const double kappa = kappa_of(gamma, ctx.ir.sup_ir);
  const double zeta =
      ctx.ael * (ctx.losses.l_r / gamma + ctx.lipschitz.k_v * ctx.losses.l_p) * kappa;

  const double j_ground_candidate = policy_return(mdp, ctx.candidate_ground);
  const double j_ground_baseline = policy_return(mdp, baseline);
  const double j_latent_candidate = policy_return(latent.model, candidate_latent);
  const double j_latent_baseline = policy_return(latent.model, baseline_latent);
  const double latent_improvement = j_latent_candidate - j_latent_baseline;
  const double ground_improvement = j_ground_candidate - j_ground_baseline;

  return finish_report("spi", latent_improvement - ground_improvement, zeta,
                       digest_inputs(mdp, encoder, latent, baseline_latent, candidate_latent),
                       {{"sir", ctx.ir.sup_ir},
                        {"k_v", ctx.lipschitz.k_v},
                        {"ael", ctx.ael},
                        {"l_r", ctx.losses.l_r},
                        {"l_p", ctx.losses.l_p},
                        {"kappa", kappa},
                        {"zeta", zeta},
                        {"ground_improvement", ground_improvement},
                        {"latent_improvement", latent_improvement}});
}

BoundReport verify_representation_quality(const FiniteMdp& mdp, const Encoder& encoder,
                                          const LatentMdp& latent, const TabularPolicy& baseline,
                                          const TabularPolicy& latent_policy, double epsilon,
                                          int trials, std::uint64_t seed) {
  if (!(epsilon > 0.0)) throw ConfigError("representation check: epsilon must be positive");
  if (trials < 0) throw ConfigError("representation check: trials must be nonnegative");
  check_common(mdp, encoder, latent);
  const LipschitzReport lips = lipschitz_constants(latent, latent_policy);
  Context ctx = build_context(mdp, encoder, latent, baseline, latent_policy, lips);

  const double gamma = mdp.discount;
  const double delta = 4.0 * (ctx.losses.l_r + gamma * ctx.lipschitz.k_v * ctx.losses.l_p) /
                       (epsilon * (1.0 / ctx.ir.sup_ir - gamma));
  const ValueTables ground = evaluate_policy(mdp, ctx.candidate_ground);
  auto violates = [&](int s1, int s2) {
    const double gap = std::abs(ground.v[s1] - ground.v[s2]);
    const double allowed =
        ctx.lipschitz.k_v * latent.d(encoder.mapping[s1], encoder.mapping[s2]) + epsilon;
    return gap > allowed + kVerdictTol;
  };

  // Exhaustive violation probability under the product coupling.
  double exact_violation = 0.0;
  for (int s1 = 0; s1 < mdp.n_states; ++s1) {
    const double m1 = ctx.xi_baseline.mass(s1);
    if (m1 == 0.0) continue;
    for (int s2 = 0; s2 < mdp.n_states; ++s2) {
      const double m2 = ctx.xi_baseline.mass(s2);
      if (m2 > 0.0 && violates(s1, s2)) exact_violation += m1 * m2;
    }
  }

  std::map<std::string, double> components{{"delta", delta},
                                           {"epsilon", epsilon},
                                           {"sir", ctx.ir.sup_ir},
                                           {"k_v", ctx.lipschitz.k_v},
                                           {"l_r", ctx.losses.l_r},
                                           {"l_p", ctx.losses.l_p},
                                           {"violation_exact", exact_violation}};
  if (trials > 0) {
    Rng rng(seed);
    int violations = 0;
    for (int t = 0; t < trials; ++t) {
      const int s1 = rng.categorical(ctx.xi_baseline.xi);
      const int s2 = rng.categorical(ctx.xi_baseline.xi);
      if (violates(s1, s2)) ++violations;
    }
    components["violation_sampled"] = static_cast<double>(violations) / trials;
    components["trials"] = static_cast<double>(trials);
  }
  return finish_report("representation_quality", exact_violation, delta,
                       digest_inputs(mdp, encoder, latent, baseline, latent_policy, {epsilon}),
                       std::move(components), delta >= 1.0);
}

long long pac_required_samples_with_ael(double ael_bound, double discount, double sup_ir,
                                        double k_v, double r_star, double epsilon, double delta) {
  const double kappa = kappa_of(discount, sup_ir);
  const double factor = ael_bound * kappa * (1.0 / discount + k_v);
  const double t = -r_star * std::log(delta / 2.0) / (epsilon * epsilon) * factor * factor;
  return static_cast<long long>(std::ceil(t));
}

long long pac_required_samples_estimated(double xi_reset_hat, double l_r_hat, double l_p_hat,
                                         double discount, double sup_ir, double k_v, double r_star,
                                         double epsilon, double delta) {
  if (!(xi_reset_hat > 0.0)) {
    throw ConfigError("pac: estimated reset mass must be positive");
  }
  const double kappa = kappa_of(discount, sup_ir);
  const double b = (kappa / xi_reset_hat) * (l_r_hat / discount + k_v * l_p_hat) + epsilon +
                   kappa * (1.0 / discount + k_v);
  const double first = 1.0 / (xi_reset_hat * xi_reset_hat);
  const double second = (b / (epsilon * xi_reset_hat)) * (b / (epsilon * xi_reset_hat));
  const double t = (-r_star * std::log(delta / 3.0) / 2.0) * std::max(first, second);
  return static_cast<long long>(std::ceil(t));
}

BoundReport pac_verify(const FiniteMdp& mdp, const Encoder& encoder, const LatentMdp& latent,
                       const TabularPolicy& baseline_latent, const TabularPolicy& candidate_latent,
                       const PacConfig& config, int trials, Exec mode) {
  config.validate();
  if (trials <= 0) throw ConfigError("pac: trial count must be positive");
  check_common(mdp, encoder, latent);
  for (double entry : latent.metric) {
    if (entry > 1.0 + kInputTol) {
      throw ConfigError("pac verification requires a latent metric bounded by 1; the "
                        "concentration ranges assume it");
    }
  }
  const TabularPolicy baseline = compose(baseline_latent, encoder);
  const LipschitzReport lips = dominating_lipschitz(latent, candidate_latent, baseline_latent);
  Context ctx = build_context(mdp, encoder, latent, baseline, candidate_latent, lips);

  const double gamma = mdp.discount;
  const double kappa = kappa_of(gamma, ctx.ir.sup_ir);
  const double k_v = ctx.lipschitz.k_v;
  const double r_max = std::max(mdp.r_max(), latent.model.r_max());
  const double r_star = std::max(1.0, 4.0 * r_max * r_max);
  const double zeta = ctx.ael * (ctx.losses.l_r / gamma + k_v * ctx.losses.l_p) * kappa;
  const int reset = *mdp.reset_state;

  if (config.ael_upper_bound && *config.ael_upper_bound < ctx.ael - kVerdictTol) {
    throw ConfigError("pac: claimed average-episode-length bound " +
                      std::to_string(*config.ael_upper_bound) + " is below the true value " +
                      std::to_string(ctx.ael));
  }

  struct Trial {
    double zeta_hat = 0.0;
    double t = 0.0;
    double xi_hat = 0.0;
    bool covered = false;
    std::string error;
  };
  std::vector<Trial> slots(trials);
  for_each_index(mode, static_cast<std::size_t>(trials), [&](std::size_t k) {
    Trial& trial = slots[k];
    try {
      const std::uint64_t trial_seed = derive_seed(config.seed, k);
      if (config.ael_upper_bound) {
        const double bound = *config.ael_upper_bound;
        const long long t =
            pac_required_samples_with_ael(bound, gamma, ctx.ir.sup_ir, k_v, r_star,
                                          config.epsilon, config.delta);
        const TransitionBatch batch =
            sample_transitions(mdp, baseline, static_cast<int>(t), trial_seed);
        const LossReport est = empirical_losses(batch, encoder, latent);
        trial.t = static_cast<double>(t);
        trial.zeta_hat = bound * (est.l_r / gamma + k_v * est.l_p) * kappa + config.epsilon;
      } else {
        // The required sample size depends on estimates from the sample
        // itself; iterate until the drawn size satisfies its own formula.
        long long t = static_cast<long long>(
            std::ceil(-r_star * std::log(config.delta / 3.0) /
                      (2.0 * config.epsilon * config.epsilon)));
        const int max_rounds = 20;
        bool settled = false;
        for (int round = 0; round < max_rounds && !settled; ++round) {
          const TransitionBatch batch = sample_transitions(
              mdp, baseline, static_cast<int>(t), derive_seed(trial_seed, round));
          long long reset_count = 0;
          for (const TransitionBatch::Row& row : batch.rows) {
            if (row.s == reset) ++reset_count;
          }
          if (reset_count == 0) {
            t *= 2;
            continue;
          }
          const double xi_hat = static_cast<double>(reset_count) / static_cast<double>(t);
          const LossReport est = empirical_losses(batch, encoder, latent);
          const long long required =
              pac_required_samples_estimated(xi_hat, est.l_r, est.l_p, gamma, ctx.ir.sup_ir,
                                            k_v, r_star, config.epsilon, config.delta);
          if (t >= required) {
            trial.t = static_cast<double>(t);
            trial.xi_hat = xi_hat;
            trial.zeta_hat =
                (1.0 / xi_hat) * (est.l_r / gamma + k_v * est.l_p) * kappa + config.epsilon;
            settled = true;
          } else {
            t = required;
          }
        }
        if (!settled) {
          throw ConfigError("pac: sample size search did not stabilize within its retry budget");
        }
      }
      trial.covered = trial.zeta_hat >= zeta - kVerdictTol;
    } catch (const std::exception& e) {
      trial.error = e.what();
      if (trial.error.empty()) trial.error = "unknown failure";
    }
  });

  int covered = 0;
  double t_mean = 0.0, t_max = 0.0, zeta_hat_mean = 0.0, xi_hat_mean = 0.0;
  for (const Trial& trial : slots) {
    if (!trial.error.empty()) throw ConfigError("pac trial failed: " + trial.error);
    covered += trial.covered ? 1 : 0;
    t_mean += trial.t / trials;
    t_max = std::max(t_max, trial.t);
    zeta_hat_mean += trial.zeta_hat / trials;
    xi_hat_mean += trial.xi_hat / trials;
  }
  const double failure_rate = 1.0 - static_cast<double>(covered) / trials;
  const double se = std::sqrt(config.delta * (1.0 - config.delta) / trials);
  std::map<std::string, double> components{
      {"zeta", zeta},
      {"zeta_hat_mean", zeta_hat_mean},
      {"coverage", static_cast<double>(covered) / trials},
      {"t_mean", t_mean},
      {"t_max", t_max},
      {"kappa", kappa},
      {"r_star", r_star},
      {"epsilon", config.epsilon},
      {"delta", config.delta},
      {"trials", static_cast<double>(trials)},
      {"with_ael_bound", config.ael_upper_bound ? 1.0 : 0.0}};
  if (!config.ael_upper_bound) components["xi_hat_mean"] = xi_hat_mean;
  return finish_report(
      "pac_improvement", failure_rate, config.delta + 3.0 * se,
      digest_inputs(mdp, encoder, latent, baseline_latent, candidate_latent,
                    {config.epsilon, config.delta, static_cast<double>(config.seed),
                     config.ael_upper_bound ? *config.ael_upper_bound : -1.0}),
      std::move(components));
}

}  // namespace spilab
