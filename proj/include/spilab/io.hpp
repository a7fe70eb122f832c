// File formats: JSON for MDPs, policies, encoders, and latent models; CSV for
// transition logs; JSON rendering of loss and bound reports.
//
// JSON schemas (all arrays dense, row order matching the in-memory tables):
//   MDP      {"n_states", "n_actions", "discount", "initial_state",
//             "reset_state" (absent when not episodic),
//             "transition": [s][a][s'], "reward": [s][a]}
//   policy   {"n_states", "n_actions", "probs": [s][a]}
//   encoder  {"n_latent", "mapping": [s]}
//   latent   {"model": MDP, "metric": [x][y]}
// Transition CSV: header "s,a,r,s_next", one transition per line.
// Malformed or unreadable input raises ConfigError naming the file.

#pragma once

#include <string>

#include "spilab/guarantees.hpp"
#include "spilab/latent.hpp"
#include "spilab/losses.hpp"
#include "spilab/mdp.hpp"
#include "spilab/sampling.hpp"

namespace spilab {

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

FiniteMdp load_mdp(const std::string& path);
void save_mdp(const FiniteMdp& mdp, const std::string& path);

TabularPolicy load_policy(const std::string& path);
void save_policy(const TabularPolicy& policy, const std::string& path);

Encoder load_encoder(const std::string& path);
void save_encoder(const Encoder& encoder, const std::string& path);

LatentMdp load_latent(const std::string& path);
void save_latent(const LatentMdp& latent, const std::string& path);

TransitionBatch load_transitions_csv(const std::string& path);
void save_transitions_csv(const TransitionBatch& batch, const std::string& path);

/// Two-space-indented JSON text of a report, trailing newline included.
std::string loss_report_json(const LossReport& report);
std::string bound_report_json(const BoundReport& report);

}  // namespace spilab
