// Command-line front end: collect datasets, train nets, evaluate policies,
// run the full sweep grid, and aggregate reports.

#include "retopt/pipeline.hpp"
#include "retopt/textio.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace retopt;

// "1-20", "1,2,5", "3", or any comma mix of values and ranges.
std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string item =
            text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        const auto dash = item.find('-');
        if (dash == std::string::npos) {
            seeds.push_back(static_cast<std::uint64_t>(parse_int(item)));
        } else {
            const long long lo = parse_int(item.substr(0, dash));
            const long long hi = parse_int(item.substr(dash + 1));
            if (lo > hi) throw std::invalid_argument("empty seed range: " + item);
            for (long long s = lo; s <= hi; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (seeds.empty()) throw std::invalid_argument("no seeds in: " + text);
    return seeds;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> values;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        values.push_back(static_cast<int>(parse_int(
            text.substr(start, comma == std::string::npos ? std::string::npos : comma - start))));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return values;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> values;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        values.push_back(parse_double(
            text.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return values;
}

int default_workers() {
    if (const char* env = std::getenv("RETOPT_WORKERS")) {
        return static_cast<int>(parse_int(env));
    }
    return 1;
}

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::string seeds_text = "1";
    std::string mode;        // empty = keep config value
    std::string greedy;      // empty = keep config value
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
    auto* opt = cmd->add_option("--config", args.config_path, "run configuration file");
    if (config_required) opt->required();
    cmd->add_option("--out", args.out_dir, "output directory (default: out)");
    cmd->add_option("--seeds,--seed", args.seeds_text,
                    "seed list, e.g. 3 or 1,2,5 or 1-20 (default: 1)");
    cmd->add_option("--mode", args.mode, "pseudo-count mode: kernel|literal")
        ->check(CLI::IsMember({"kernel", "literal"}));
    cmd->add_option("--greedy-exec", args.greedy,
                    "execute the trained policy greedily: true|false")
        ->check(CLI::IsMember({"true", "false", "1", "0"}));
}

RunConfig load_run_config(const CommonArgs& args) {
    RunConfig config = load_config(args.config_path);
    if (!args.mode.empty()) config.count_mode = parse_count_mode(args.mode);
    if (!args.greedy.empty()) config.greedy_execution = parse_bool(args.greedy);
    validate(config);
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Offline tilt-policy training and evaluation pipeline"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string baseline = "rb";
    std::string policy_name;
    std::string n_text;
    std::string n_wedge_text;
    int workers = default_workers();
    int featured_n = 300;
    double featured_n_wedge = 100.0;

    auto* collect_cmd =
        app.add_subcommand("collect", "roll a behavior policy and store the transitions");
    add_common(collect_cmd, args);
    collect_cmd->add_option("--baseline", baseline, "behavior policy: rb|dqn")
        ->check(CLI::IsMember({"rb", "dqn"}));
    collect_cmd->add_option("--n", n_text, "subsample this many rows (default: keep all)");

    auto* dqnbase_cmd = app.add_subcommand(
        "train-dqn-baseline", "train the online behavior net used by the dqn baseline");
    add_common(dqnbase_cmd, args);

    auto* spibb_cmd =
        app.add_subcommand("train-spibb", "train a policy-improvement net from a stored dataset");
    add_common(spibb_cmd, args);
    spibb_cmd->add_option("--baseline", baseline, "behavior policy: rb|dqn")
        ->check(CLI::IsMember({"rb", "dqn"}));
    spibb_cmd->add_option("--n", n_text, "training rows (default: 300)");
    spibb_cmd->add_option("--n-wedge", n_wedge_text, "bootstrapping count threshold");

    auto* eval_cmd = app.add_subcommand("evaluate", "run a policy for one epoch per seed");
    add_common(eval_cmd, args);
    eval_cmd->add_option("--policy", policy_name,
                         "policy to evaluate: spibb|rb|dqn|random|optimal (default: spibb)");
    eval_cmd->add_option("--baseline", baseline, "behavior policy behind spibb: rb|dqn")
        ->check(CLI::IsMember({"rb", "dqn"}));
    eval_cmd->add_option("--n", n_text, "training rows of the evaluated net (default: 300)");
    eval_cmd->add_option("--n-wedge", n_wedge_text, "bootstrapping count threshold");

    std::string baselines_text = "rb,dqn";
    std::string ns_text;
    std::string ws_text;
    auto* sweep_cmd =
        app.add_subcommand("sweep", "full grid: baselines x dataset sizes x thresholds x seeds");
    add_common(sweep_cmd, args);
    sweep_cmd->add_option("--baseline", baselines_text, "comma list of rb,dqn (default: rb,dqn)");
    sweep_cmd->add_option("--n", ns_text, "comma list of dataset sizes (default: full grid)");
    sweep_cmd->add_option("--n-wedge", ws_text, "comma list of thresholds (default: full grid)");
    sweep_cmd->add_option("--workers", workers, "worker threads (default: $RETOPT_WORKERS or 1)");
    sweep_cmd->add_option("--featured-n", featured_n,
                          "grid point whose per-step curves are stored");
    sweep_cmd->add_option("--featured-n-wedge", featured_n_wedge,
                          "grid point whose per-step curves are stored");

    auto* report_cmd =
        app.add_subcommand("report", "aggregate sweep results into summary and panel files");
    report_cmd->add_option("--out", args.out_dir, "sweep output directory (default: out)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (report_cmd->parsed()) {
            write_report(args.out_dir);
            std::cout << "report written to " << args.out_dir << "/report\n";
            return 0;
        }

        const RunConfig config = load_run_config(args);
        const ArtifactPaths paths(args.out_dir, config_hash(config));
        const std::vector<std::uint64_t> seeds = parse_seed_list(args.seeds_text);

        if (collect_cmd->parsed()) {
            for (const std::uint64_t seed : seeds) {
                ensure_master_dataset(config, paths, baseline, seed);
                if (n_text.empty()) {
                    std::cout << "wrote " << paths.master_dataset(baseline, seed) << '\n';
                    continue;
                }
                const int n = static_cast<int>(parse_int(n_text));
                const Dataset subset = training_dataset(config, paths, baseline, n, seed);
                const std::string path = paths.dataset(baseline, n, seed);
                std::filesystem::create_directories(paths.datasets_dir());
                save_dataset(subset, path);
                std::cout << "wrote " << path << '\n';
            }
            return 0;
        }

        if (dqnbase_cmd->parsed()) {
            for (const std::uint64_t seed : seeds) {
                ensure_dqn_baseline_net(config, paths, seed);
                std::cout << "wrote " << paths.dqn_baseline_net(seed) << '\n';
            }
            return 0;
        }

        const int n = n_text.empty() ? 300 : static_cast<int>(parse_int(n_text));
        const double n_wedge = n_wedge_text.empty() ? config.n_wedge : parse_double(n_wedge_text);

        if (spibb_cmd->parsed()) {
            for (const std::uint64_t seed : seeds) {
                ensure_spibb_net(config, paths, baseline, n, n_wedge, seed);
                std::cout << "wrote " << paths.spibb_net(baseline, n, n_wedge, seed) << '\n';
            }
            return 0;
        }

        if (eval_cmd->parsed()) {
            if (policy_name.empty()) policy_name = "spibb";
            PolicyFactory factory;
            std::string rows_path;
            std::string curves_name;
            if (policy_name == "spibb") {
                factory = spibb_policy_factory(config, paths, baseline, n, n_wedge);
                rows_path = paths.point_csv(baseline, n, n_wedge);
                curves_name = "spibb_" + baseline;
            } else {
                factory = base_policy_factory(policy_name, config, paths);
                rows_path = paths.base_csv(policy_name);
                curves_name = policy_name;
            }
            const EvalReport report = evaluate_policy(factory, config.network, seeds,
                                                      config.protocol, config.cvar_level);
            write_file_atomic(rows_path, eval_rows_csv(report, seeds));
            write_file_atomic(paths.curves_csv(curves_name), curves_csv_text(report));
            std::cout << "wrote " << rows_path << '\n'
                      << "wrote " << paths.curves_csv(curves_name) << '\n'
                      << "avg_reward " << format_double(report.avg_reward) << " cvar "
                      << format_double(report.cvar) << " min_cell "
                      << format_double(report.min_cell_avg) << '\n';
            return 0;
        }

        if (sweep_cmd->parsed()) {
            SweepSpec spec;
            spec.config = config;
            spec.out_dir = args.out_dir;
            spec.seeds = seeds;
            spec.workers = workers;
            spec.featured_n = featured_n;
            spec.featured_n_wedge = featured_n_wedge;
            spec.baselines.clear();
            for (std::size_t start = 0, comma = 0; comma != std::string::npos; start = comma + 1) {
                comma = baselines_text.find(',', start);
                spec.baselines.push_back(baselines_text.substr(
                    start, comma == std::string::npos ? std::string::npos : comma - start));
            }
            if (!ns_text.empty()) spec.dataset_sizes = parse_int_list(ns_text);
            if (!ws_text.empty()) spec.n_wedges = parse_double_list(ws_text);
            run_sweep(spec);
            std::cout << "sweep complete; report in " << args.out_dir << "/report\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
