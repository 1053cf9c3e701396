#include "retopt/collect.hpp"

#include "retopt/rng.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <stdexcept>

namespace retopt {

namespace {

nlohmann::json vec_to_json(const Eigen::VectorXd& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

template <typename VecT>
VecT vec_from_json(const nlohmann::json& arr) {
    VecT v;
    if (arr.size() != static_cast<std::size_t>(v.size())) {
        throw std::runtime_error("vector length mismatch");
    }
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v[i] = arr.at(static_cast<std::size_t>(i)).get<double>();
    }
    return v;
}

}  // namespace

bool operator==(const Transition& lhs, const Transition& rhs) {
    return (lhs.s.array() == rhs.s.array()).all() && lhs.a == rhs.a && lhs.r == rhs.r &&
           (lhs.s_next.array() == rhs.s_next.array()).all() &&
           (lhs.pi_b.array() == rhs.pi_b.array()).all() && lhs.cell == rhs.cell &&
           lhs.t == rhs.t && lhs.episode == rhs.episode;
}

Dataset collect(Env& env, const Policy& policy, int t_steps, std::uint64_t seed,
                const std::string& baseline_name, std::uint64_t config_hash) {
    if (t_steps < 1) {
        throw std::invalid_argument("collect: t_steps must be at least 1");
    }
    Rng rng(seed);
    Dataset dataset;
    dataset.meta = {baseline_name, seed, t_steps, env.num_cells(), config_hash};
    dataset.rows.reserve(static_cast<std::size_t>(t_steps) *
                         static_cast<std::size_t>(env.num_cells()));
    for (int t = 0; t < t_steps; ++t) {
        const std::vector<CellObs> obs = env.obs();
        const int episode = env.episode();
        const int step_index = env.t();
        std::vector<Action> actions;
        std::vector<Eigen::Vector3d> probs;
        actions.reserve(obs.size());
        probs.reserve(obs.size());
        for (std::size_t c = 0; c < obs.size(); ++c) {
            probs.push_back(policy.probs(obs[c], static_cast<Eigen::Index>(c)));
            actions.push_back(sample_action(probs.back(), rng));
        }
        const EnvStep result = env.step(actions);
        for (std::size_t c = 0; c < obs.size(); ++c) {
            Transition row;
            row.s = obs[c];
            row.a = actions[c];
            row.r = result.rewards[static_cast<Eigen::Index>(c)];
            row.s_next = result.next_obs[c];
            row.pi_b = probs[c];
            row.cell = static_cast<Eigen::Index>(c);
            row.t = step_index;
            row.episode = episode;
            dataset.rows.push_back(std::move(row));
        }
    }
    return dataset;
}

Dataset subsample(const Dataset& dataset, std::size_t n, std::uint64_t seed) {
    if (n > dataset.rows.size()) {
        throw std::invalid_argument("subsample: n exceeds dataset size");
    }
    std::vector<std::size_t> index(dataset.rows.size());
    for (std::size_t i = 0; i < index.size(); ++i) index[i] = i;
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const auto j = static_cast<std::size_t>(
            rng.uniform_int(static_cast<std::int64_t>(i),
                            static_cast<std::int64_t>(index.size()) - 1));
        std::swap(index[i], index[j]);
    }
    Dataset out;
    out.meta = dataset.meta;
    out.rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.rows.push_back(dataset.rows[index[i]]);
    }
    return out;
}

void save_dataset(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("dataset: cannot open for writing: " + path);
    }
    nlohmann::json meta;
    meta["type"] = "dataset-meta-v1";
    meta["baseline"] = dataset.meta.baseline;
    meta["seed"] = dataset.meta.seed;
    meta["t_steps"] = dataset.meta.t_steps;
    meta["num_cells"] = static_cast<std::int64_t>(dataset.meta.num_cells);
    meta["config_hash"] = dataset.meta.config_hash;
    meta["rows"] = dataset.rows.size();
    out << meta.dump() << '\n';
    for (const Transition& row : dataset.rows) {
        nlohmann::json j;
        j["s"] = vec_to_json(row.s);
        j["a"] = static_cast<int>(row.a);
        j["r"] = row.r;
        j["s_next"] = vec_to_json(row.s_next);
        j["pi_b"] = vec_to_json(row.pi_b);
        j["cell"] = static_cast<std::int64_t>(row.cell);
        j["t"] = row.t;
        j["episode"] = row.episode;
        out << j.dump() << '\n';
    }
    if (!out) {
        throw std::runtime_error("dataset: write failed: " + path);
    }
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("dataset: cannot open for reading: " + path);
    }
    Dataset dataset;
    std::string line;
    std::size_t line_no = 0;
    std::size_t declared_rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
            if (line_no == 1) {
                if (j.value("type", "") != "dataset-meta-v1") {
                    throw std::runtime_error("missing dataset meta header");
                }
                dataset.meta.baseline = j.at("baseline").get<std::string>();
                dataset.meta.seed = j.at("seed").get<std::uint64_t>();
                dataset.meta.t_steps = j.at("t_steps").get<int>();
                dataset.meta.num_cells = j.at("num_cells").get<std::int64_t>();
                dataset.meta.config_hash = j.at("config_hash").get<std::uint64_t>();
                declared_rows = j.at("rows").get<std::size_t>();
                continue;
            }
            Transition row;
            row.s = vec_from_json<CellObs>(j.at("s"));
            const int a = j.at("a").get<int>();
            if (a < 0 || a >= kNumActions) {
                throw std::runtime_error("action index out of range");
            }
            row.a = static_cast<Action>(a);
            row.r = j.at("r").get<double>();
            row.s_next = vec_from_json<CellObs>(j.at("s_next"));
            row.pi_b = vec_from_json<Eigen::Vector3d>(j.at("pi_b"));
            row.cell = j.at("cell").get<std::int64_t>();
            row.t = j.at("t").get<int>();
            row.episode = j.at("episode").get<int>();
            dataset.rows.push_back(std::move(row));
        } catch (const std::exception& e) {
            throw std::runtime_error("dataset: parse error at " + path + ":" +
                                     std::to_string(line_no) + ": " + e.what());
        }
    }
    if (line_no == 0) {
        throw std::runtime_error("dataset: empty file: " + path);
    }
    if (dataset.rows.size() != declared_rows) {
        throw std::runtime_error("dataset: row count mismatch in " + path + ": header says " +
                                 std::to_string(declared_rows) + ", found " +
                                 std::to_string(dataset.rows.size()));
    }
    return dataset;
}

}  // namespace retopt
