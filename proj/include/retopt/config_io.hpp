#pragma once

#include "retopt/mdp.hpp"
#include "retopt/netsim.hpp"
#include "retopt/policies.hpp"
#include "retopt/qnet.hpp"
#include "retopt/spibb.hpp"

#include <cstdint>
#include <string>

namespace retopt {

// Everything one experiment needs, with defaults matching the shipped
// configs/default.cfg. Parsed from flat `key = value` text.
struct RunConfig {
    NetworkConfig network{};
    EvalProtocol protocol{};
    TrainHyper hyper{};
    RuleThresholds rule{};
    CountMode count_mode = CountMode::SimilarityKernel;
    double kernel_d0 = 0.5;
    double n_wedge = 100.0;
    bool greedy_execution = false;
    int collect_steps = 24;        // master dataset length in env steps
    double behavior_eps = 0.2;     // epsilon of the stochastic DQN behavior policy
    int dqn_baseline_steps = 500;  // online training budget for the DQN baseline
    double dqn_train_eps = 0.2;    // exploration epsilon while training it
    double cvar_level = 0.05;
};

void validate(const RunConfig& config);

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

// Canonical `key = value` form: fixed key order, round-trip float formatting.
std::string serialize_config(const RunConfig& config);

// Hash of the canonical serialization minus the RNG seed line, so artifacts
// from different seeds of one setup share it while any setup change splits it.
std::uint64_t config_hash(const RunConfig& config);

SpibbConfig make_spibb_config(const RunConfig& config);

}  // namespace retopt
