#include "spilab/sampling.hpp"

#include "spilab/errors.hpp"
#include "spilab/rng.hpp"
#include "spilab/solve.hpp"

namespace spilab {

TransitionBatch sample_transitions(const FiniteMdp& mdp, const TabularPolicy& policy, int count,
                                   std::uint64_t seed, Exec mode) {
  if (count < 0) throw ConfigError("sample count must be nonnegative");
  StateDistribution xi = stationary_distribution(mdp, policy);
  TransitionBatch batch;
  batch.rows.resize(count);
  for_each_index(mode, static_cast<std::size_t>(count), [&](std::size_t i) {
    SplitRng rng(derive_seed(seed, i));
    TransitionBatch::Row& row = batch.rows[i];
    row.s = rng.categorical(xi.xi);
    row.a = rng.categorical(policy.row(row.s));
    row.s_next = rng.categorical(mdp.row(row.s, row.a));
    row.r = mdp.r(row.s, row.a);
  });
  return batch;
}

}  // namespace spilab
