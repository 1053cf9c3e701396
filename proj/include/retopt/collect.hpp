#pragma once

#include "retopt/mdp.hpp"
#include "retopt/policies.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace retopt {

struct Transition {
    CellObs s;
    Action a = Action::Keep;
    double r = 0.0;
    CellObs s_next;
    Eigen::Vector3d pi_b = Eigen::Vector3d::Zero();  // behavior probabilities at s
    Eigen::Index cell = 0;
    int t = 0;
    int episode = 0;
};

bool operator==(const Transition& lhs, const Transition& rhs);

struct DatasetMeta {
    std::string baseline;  // "rb", "dqn", ...
    std::uint64_t seed = 0;
    int t_steps = 0;
    Eigen::Index num_cells = 0;
    std::uint64_t config_hash = 0;
};

struct Dataset {
    DatasetMeta meta;
    std::vector<Transition> rows;  // ordered by (t, cell) when collected whole
};

// Roll the behavior policy for t_steps env steps, recording one row per cell
// per step with the behavior probabilities as executed.
Dataset collect(Env& env, const Policy& policy, int t_steps, std::uint64_t seed,
                const std::string& baseline_name, std::uint64_t config_hash);

// Uniform draw of n rows without replacement.
Dataset subsample(const Dataset& dataset, std::size_t n, std::uint64_t seed);

// JSON-lines: one meta header line, then one row per line. Round-trips exactly.
void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace retopt
