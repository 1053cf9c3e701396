// Acceptance suite: end-to-end checks of the trained-policy orderings, the
// numeric oracles, and the reproducibility guarantees. Prints one PASS/FAIL
// line per criterion and exits nonzero if any fail.
//
// Heavy criteria share one artifact directory (default "acceptance_artifacts",
// override via argv[1]); cached datasets and nets make reruns cheap.

#include "retopt/pipeline.hpp"

#include "retopt/textio.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace retopt;

namespace {

int g_failures = 0;

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void report(int idx, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
    if (!pass) ++g_failures;
    std::printf("criterion %2d  %-28s %s  [%.1fs]  %s\n", idx, name.c_str(),
                pass ? "PASS" : "FAIL", seconds, detail.c_str());
    std::fflush(stdout);
}

void run_criterion(int idx, const std::string& name,
                   const std::function<std::pair<bool, std::string>()>& body) {
    const Timer timer;
    try {
        const auto [pass, detail] = body();
        report(idx, name, pass, detail, timer.seconds());
    } catch (const std::exception& e) {
        report(idx, name, false, std::string("exception: ") + e.what(), timer.seconds());
    }
}

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

std::string fmt_sci(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2e", v);
    return buf;
}

CellObs random_obs(Rng& rng) {
    return CellObs(rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform());
}

Action random_action(Rng& rng) { return static_cast<Action>(rng.uniform_int(0, 2)); }

int argmax3(const Eigen::Vector3d& v) {
    Eigen::Index i = 0;
    v.maxCoeff(&i);
    return static_cast<int>(i);
}

// ---------------------------------------------------------------------------
// 1. Backup-target limit identities: nothing bootstrapped -> plain max target;
//    everything bootstrapped -> behavior expectation. 1e-12 on 1,000 random
//    transitions.
std::pair<bool, std::string> criterion_1() {
    Rng rng(20260817);
    QNet net;
    double max_err = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
        if (rep % 100 == 0) net.init(derive_seed(41, static_cast<std::uint64_t>(rep)));
        Transition tr;
        tr.s = random_obs(rng);
        tr.s_next = random_obs(rng);
        tr.a = random_action(rng);
        tr.r = rng.uniform(0.0, std::log(4.0));
        Eigen::Vector3d pi(rng.uniform() + 1e-3, rng.uniform() + 1e-3, rng.uniform() + 1e-3);
        tr.pi_b = pi / pi.sum();

        // One row per action sitting exactly at the query point, so every
        // pseudo-count is >= 1: threshold 0 empties the bootstrapped set and
        // a huge threshold fills it.
        Dataset ds;
        for (const Action a : kAllActions) {
            Transition row;
            row.s = tr.s_next;
            row.a = a;
            row.s_next = tr.s_next;
            row.pi_b = Eigen::Vector3d::Constant(1.0 / 3.0);
            ds.rows.push_back(row);
        }
        const BootstrapIndex none(ds, CountMode::SimilarityKernel, 0.5, 0.0);
        const BootstrapIndex all(ds, CountMode::SimilarityKernel, 0.5, 1e18);

        const Eigen::Vector3d q = net.values(tr.s_next);
        double q_max = q(0);
        double q_exp = 0.0;
        for (int a = 0; a < 3; ++a) {
            q_max = std::max(q_max, q(a));
            q_exp += tr.pi_b(a) * q(a);
        }
        max_err = std::max(max_err,
                           std::abs(spibb_target(net, none, tr, 0.9) - (tr.r + 0.9 * q_max)));
        max_err = std::max(max_err,
                           std::abs(spibb_target(net, all, tr, 0.9) - (tr.r + 0.9 * q_exp)));
    }
    return {max_err < 1e-12,
            "max |target - reference| " + fmt_sci(max_err) + " over 1000 transitions (tol 1e-12)"};
}

// ---------------------------------------------------------------------------
// 2. Analytic gradients vs central finite differences over 20 random
//    nets/batches, max relative error < 1e-4.
std::pair<bool, std::string> criterion_2() {
    double max_err = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        Rng rng(derive_seed(99, static_cast<std::uint64_t>(rep)));
        const int input_dim = 3 + rep % 5;
        std::vector<int> hidden;
        const int layers = 1 + rep % 2;
        for (int l = 0; l < layers; ++l) {
            hidden.push_back(static_cast<int>(rng.uniform_int(5, 16)));
        }
        QNet net(input_dim, hidden);
        net.init(derive_seed(7, static_cast<std::uint64_t>(rep)));
        const int batch = 4 + rep % 12;
        Eigen::MatrixXd inputs(input_dim, batch);
        for (Eigen::Index i = 0; i < inputs.size(); ++i) {
            inputs.data()[i] = rng.uniform(-1.0, 1.0);
        }
        Eigen::VectorXd targets(batch);
        for (Eigen::Index i = 0; i < batch; ++i) targets(i) = rng.uniform(-2.0, 2.0);
        max_err = std::max(max_err, gradient_check(net, inputs, targets, 60,
                                                   derive_seed(13, static_cast<std::uint64_t>(rep)),
                                                   1e-6));
    }
    return {max_err < 1e-4,
            "max relative gradient error " + fmt_sci(max_err) + " over 20 nets (tol 1e-4)"};
}

// ---------------------------------------------------------------------------
// 3. Indexed pseudo-counts equal a naive loop over the dataset exactly, in
//    both kernel and literal modes, on 1,000 random queries.
std::pair<bool, std::string> criterion_3() {
    Rng rng(5150);
    Dataset ds;
    for (int i = 0; i < 400; ++i) {
        Transition row;
        row.s = random_obs(rng);
        row.a = random_action(rng);
        row.s_next = row.s;
        ds.rows.push_back(row);
    }
    const double d0 = 0.5;
    const BootstrapIndex kernel(ds, CountMode::SimilarityKernel, d0, 100.0);
    const BootstrapIndex literal(ds, CountMode::LiteralDistanceSum, d0, 100.0);

    double max_diff = 0.0;
    for (int q = 0; q < 1000; ++q) {
        CellObs s;
        if (q % 2 == 0) {
            s = random_obs(rng);
        } else {
            const auto& base = ds.rows[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(ds.rows.size()) - 1))];
            s = base.s + 0.3 * CellObs(rng.uniform(-1, 1), rng.uniform(-1, 1),
                                       rng.uniform(-1, 1), rng.uniform(-1, 1));
        }
        const Action a = random_action(rng);
        double naive_kernel = 0.0;
        double naive_literal = 0.0;
        for (const Transition& row : ds.rows) {
            if (row.a != a) continue;
            const double dist = (row.s - s).norm();
            naive_kernel += std::max(0.0, 1.0 - dist / d0);
            naive_literal += dist;
        }
        max_diff = std::max(max_diff, std::abs(kernel.pseudo_count(s, a) - naive_kernel));
        max_diff = std::max(max_diff, std::abs(literal.pseudo_count(s, a) - naive_literal));
    }
    return {max_diff == 0.0,
            "max |indexed - naive| " + fmt_sci(max_diff) +
                " over 1000 queries x 2 modes (tol: exact)"};
}

// ---------------------------------------------------------------------------
// 4. CVaR equals an independent brute force (selection sort, scan for the
//    quantile, average the tail) on 500 random lists, exactly.
std::pair<bool, std::string> criterion_4() {
    Rng rng(8472);
    const double levels[] = {0.05, 0.1, 0.5, 1.0};
    double max_diff = 0.0;
    for (int rep = 0; rep < 500; ++rep) {
        const auto n = static_cast<std::size_t>(rng.uniform_int(1, 100));
        std::vector<double> values(n);
        for (double& v : values) {
            v = rng.uniform(-5.0, 5.0);
            if (rng.uniform() < 0.3) v = std::round(v * 10.0) / 10.0;  // force ties
        }
        const double level = levels[rep % 4];

        // Brute force, written independently of the library implementation.
        std::vector<double> sorted = values;
        for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {  // selection sort
            std::size_t lo = i;
            for (std::size_t j = i + 1; j < sorted.size(); ++j) {
                if (sorted[j] < sorted[lo]) lo = j;
            }
            std::swap(sorted[i], sorted[lo]);
        }
        std::size_t k = n;
        for (std::size_t c = 1; c <= n; ++c) {
            if (static_cast<double>(c) >= level * static_cast<double>(n) - 1e-9) {
                k = c;
                break;
            }
        }
        const double var_ref = sorted[k - 1];
        double tail_sum = 0.0;
        std::size_t tail_n = 0;
        for (const double v : values) {
            if (v <= var_ref) {
                tail_sum += v;
                ++tail_n;
            }
        }
        const double cvar_ref = tail_sum / static_cast<double>(tail_n);

        max_diff = std::max(max_diff, std::abs(value_at_risk(values, level) - var_ref));
        max_diff = std::max(max_diff, std::abs(cvar(values, level) - cvar_ref));
    }
    return {max_diff == 0.0,
            "max |cvar - brute force| " + fmt_sci(max_diff) + " over 500 lists (tol: exact)"};
}

// ---------------------------------------------------------------------------
// Shared state for the trained-policy criteria.
struct PolicyRuns {
    RunConfig config;
    std::vector<std::uint64_t> seeds;
    std::map<std::string, EvalReport> reports;

    EvalReport& eval(const std::string& key, const PolicyFactory& factory) {
        auto it = reports.find(key);
        if (it != reports.end()) return it->second;
        std::fprintf(stderr, "  [acceptance] evaluating %s over %zu seeds...\n", key.c_str(),
                     seeds.size());
        EvalReport report = evaluate_policy(factory, config.network, seeds, config.protocol,
                                            config.cvar_level);
        return reports.emplace(key, std::move(report)).first->second;
    }
};

// 5. Policy ordering on the mean per-run average reward at N=300, threshold
//    100, K=20 seeds: Random < DQN <= SPIBB-DQN, Random < RB <= SPIBB-RB <=
//    Optimal, and each safe policy at least matches its own baseline.
std::pair<bool, std::string> criterion_5(PolicyRuns& runs, const ArtifactPaths& paths) {
    const RunConfig& config = runs.config;
    const EvalReport& random = runs.eval("random", base_policy_factory("random", config, paths));
    const EvalReport& rb = runs.eval("rb", base_policy_factory("rb", config, paths));
    const EvalReport& dqn = runs.eval("dqn", base_policy_factory("dqn", config, paths));
    const EvalReport& optimal = runs.eval("optimal", base_policy_factory("optimal", config, paths));
    const EvalReport& spibb_rb = runs.eval("spibb_rb", spibb_policy_factory(config, paths, "rb", 300, 100.0));
    const EvalReport& spibb_dqn = runs.eval("spibb_dqn", spibb_policy_factory(config, paths, "dqn", 300, 100.0));

    const bool pass = random.avg_reward < dqn.avg_reward &&
                      dqn.avg_reward <= spibb_dqn.avg_reward &&
                      random.avg_reward < rb.avg_reward &&
                      rb.avg_reward <= spibb_rb.avg_reward &&
                      spibb_rb.avg_reward <= optimal.avg_reward &&
                      spibb_dqn.avg_reward - dqn.avg_reward >= 0.0 &&
                      spibb_rb.avg_reward - rb.avg_reward >= 0.0;
    const std::string detail =
        "mean avg reward: random " + fmt(random.avg_reward) + " < dqn " + fmt(dqn.avg_reward) +
        " <= spibb_dqn " + fmt(spibb_dqn.avg_reward) + "; random < rb " + fmt(rb.avg_reward) +
        " <= spibb_rb " + fmt(spibb_rb.avg_reward) + " <= optimal " + fmt(optimal.avg_reward) +
        " (N=300, threshold 100, K=20)";
    return {pass, detail};
}

// 6. Worst-case metrics of SPIBB-RB at least match RB on the same runs.
std::pair<bool, std::string> criterion_6(PolicyRuns& runs) {
    const EvalReport& rb = runs.reports.at("rb");
    const EvalReport& spibb_rb = runs.reports.at("spibb_rb");
    const bool pass = spibb_rb.cvar >= rb.cvar && spibb_rb.min_cell_avg >= rb.min_cell_avg;
    const std::string detail = "cvar5: spibb_rb " + fmt(spibb_rb.cvar) + " >= rb " +
                               fmt(rb.cvar) + "; min-cell: spibb_rb " +
                               fmt(spibb_rb.min_cell_avg) + " >= rb " + fmt(rb.min_cell_avg);
    return {pass, detail};
}

// 7. Sample-efficiency trend over the reduced dataset-size grid {50,200,500}:
//    mean at N=500 >= mean at N=50, and SPIBB-RB >= RB already at N=50.
std::pair<bool, std::string> criterion_7(PolicyRuns& runs, const ArtifactPaths& paths) {
    const RunConfig& config = runs.config;
    std::map<int, double> mean_at;
    for (const int n : {50, 200, 500}) {
        const EvalReport& rep = runs.eval("spibb_rb_n" + std::to_string(n),
                                          spibb_policy_factory(config, paths, "rb", n, 100.0));
        mean_at[n] = rep.avg_reward;
    }
    const double rb_mean = runs.reports.at("rb").avg_reward;
    const bool pass = mean_at[500] >= mean_at[50] && mean_at[50] >= rb_mean;
    const std::string detail = "spibb_rb mean: N=50 " + fmt(mean_at[50]) + ", N=200 " +
                               fmt(mean_at[200]) + ", N=500 " + fmt(mean_at[500]) +
                               "; N=500 >= N=50 and N=50 >= rb " + fmt(rb_mean);
    return {pass, detail};
}

// ---------------------------------------------------------------------------
// 8. Threshold limits. Huge threshold: the greedy policy from a net trained
//    with everything bootstrapped matches the rule-based action on >= 90% of
//    500 held-out states (an unseen network seed's evaluation rollout).
//    Threshold 0 on a dataset with full kernel coverage: training is
//    bit-identical to the plain offline DQN loop under the same seed.
std::pair<bool, std::string> criterion_8(const RunConfig& config, const ArtifactPaths& paths) {
    // Huge-threshold agreement on held-out states.
    const QNet net = ensure_spibb_net(config, paths, "rb", 300, 1e18, 1);
    const DqnPolicy greedy(net, 0.0);
    const RuleBasedPolicy rb(config.rule);
    Env env(config.network, derive_seed(9001, streams::network),
            derive_seed(9001, streams::eval_episode), config.protocol);
    Rng action_rng(derive_seed(9001, streams::eval_actions));
    int agree = 0;
    const int points = 500;
    for (int t = 0; t < points; ++t) {
        const auto cell = static_cast<Eigen::Index>(t % env.num_cells());
        const CellObs& s = env.obs()[static_cast<std::size_t>(cell)];
        agree += argmax3(greedy.probs(s, cell)) == argmax3(rb.probs(s, cell));
        env.step(rb.sample_all(env.obs(), action_rng));
    }
    const double agree_frac = static_cast<double>(agree) / points;

    // Zero-threshold bit-identity on the epsilon-soft behavior dataset.
    const Dataset ds = ensure_master_dataset(config, paths, "dqn", 1);
    const BootstrapIndex cover(ds, config.count_mode, config.kernel_d0, 0.0);
    int uncovered = 0;
    for (const Transition& row : ds.rows) {
        for (const Action a : kAllActions) {
            uncovered += cover.pseudo_count(row.s_next, a) <= 0.0;
        }
    }
    SpibbConfig zero = make_spibb_config(config);
    zero.n_wedge = 0.0;
    const std::uint64_t train_seed = 424242;
    const QNet spibb_net = train_spibb(ds, zero, train_seed);
    const QNet dqn_net = train_offline_dqn(ds, config.hyper, train_seed);
    const bool identical =
        spibb_net.params().size() == dqn_net.params().size() &&
        std::memcmp(spibb_net.params().data(), dqn_net.params().data(),
                    sizeof(double) * static_cast<std::size_t>(spibb_net.params().size())) == 0;

    const bool pass = agree_frac >= 0.9 && uncovered == 0 && identical;
    const std::string detail =
        "huge threshold: greedy agrees with rb on " + fmt(100.0 * agree_frac, 1) +
        "% of 500 held-out states (need >= 90%); zero threshold: " +
        std::to_string(uncovered) + " uncovered next-state pairs, training " +
        (identical ? "bit-identical" : "DIFFERS") + " vs plain offline DQN";
    return {pass, detail};
}

// ---------------------------------------------------------------------------
// 9. Simulator probes: 100 seeds x 100 tilt vectors; KPIs always in [0,1] and
//    a full recomputation reproduces every value bit-identically.
std::pair<bool, std::string> criterion_9(const RunConfig& base_config) {
    const int n_seeds = 100, n_tilts = 100;
    std::vector<double> run[2];
    bool in_bounds = true;
    double lo = 1.0, hi = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
        Rng rng(1234321);
        run[pass].reserve(static_cast<std::size_t>(n_seeds) * n_tilts * 63);
        for (int si = 0; si < n_seeds; ++si) {
            NetworkConfig config = base_config.network;
            config.rng_seed = rng.next_u64();
            NetworkState state = build_network(config);
            const LinkGeometry geom = make_link_geometry(state, config);
            for (int ti = 0; ti < n_tilts; ++ti) {
                for (Eigen::Index c = 0; c < state.tilts_deg.size(); ++c) {
                    state.tilts_deg(c) = rng.uniform(config.tilt_min_deg, config.tilt_max_deg);
                }
                for (const CellKpis& k : compute_kpis(state, config, geom)) {
                    for (const double v : {k.cov, k.cap, k.qual}) {
                        run[pass].push_back(v);
                        if (pass == 0) {
                            in_bounds = in_bounds && v >= 0.0 && v <= 1.0;
                            lo = std::min(lo, v);
                            hi = std::max(hi, v);
                        }
                    }
                }
            }
        }
    }
    const bool identical = run[0].size() == run[1].size() &&
                           std::memcmp(run[0].data(), run[1].data(),
                                       run[0].size() * sizeof(double)) == 0;
    return {in_bounds && identical,
            "10000 probes: KPI range [" + fmt(lo) + ", " + fmt(hi) + "] within [0,1]; repeat " +
                (identical ? "bit-identical" : "DIFFERS")};
}

// ---------------------------------------------------------------------------
// 10. Two from-scratch invocations of the reduced default sweep with the same
//     seed list produce byte-identical summary CSVs.
std::pair<bool, std::string> criterion_10(const RunConfig& config, const std::string& root) {
    SweepSpec spec;
    spec.config = config;
    spec.dataset_sizes = {50};
    spec.n_wedges = {100.0};
    spec.seeds = {1, 2};
    spec.featured_n = 50;
    spec.featured_n_wedge = 100.0;
    spec.workers = 1;

    std::string summaries[2];
    double sweep_secs[2] = {0.0, 0.0};
    for (int i = 0; i < 2; ++i) {
        spec.out_dir = root + "/repro_" + (i == 0 ? "a" : "b");
        fs::remove_all(spec.out_dir);
        std::fprintf(stderr, "  [acceptance] reduced sweep %d/2 into %s...\n", i + 1,
                     spec.out_dir.c_str());
        const Timer timer;
        run_sweep(spec);
        sweep_secs[i] = timer.seconds();
        summaries[i] = read_file(spec.out_dir + "/report/summary.csv");
    }
    const bool identical = !summaries[0].empty() && summaries[0] == summaries[1];
    return {identical, std::string("summary.csv ") +
                           (identical ? "byte-identical" : "DIFFERS") + " across invocations (" +
                           std::to_string(summaries[0].size()) + " bytes; sweeps " +
                           fmt(sweep_secs[0], 0) + "s / " + fmt(sweep_secs[1], 0) + "s)"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::string root = argc > 1 ? argv[1] : "acceptance_artifacts";
    fs::create_directories(root);

    RunConfig config;  // library defaults throughout
    const ArtifactPaths paths(root, config_hash(config));
    PolicyRuns runs{config, SweepSpec::default_seeds(), {}};

    std::printf("acceptance suite: artifacts under %s\n", root.c_str());
    std::fflush(stdout);

    run_criterion(1, "backup-target limits", criterion_1);
    run_criterion(2, "gradient correctness", criterion_2);
    run_criterion(3, "pseudo-count oracle", criterion_3);
    run_criterion(4, "cvar oracle", criterion_4);
    run_criterion(5, "policy ordering", [&] { return criterion_5(runs, paths); });
    run_criterion(6, "worst-case metrics", [&] { return criterion_6(runs); });
    run_criterion(7, "sample-efficiency trend", [&] { return criterion_7(runs, paths); });
    run_criterion(8, "threshold limits", [&] { return criterion_8(config, paths); });
    run_criterion(9, "simulator determinism", [&] { return criterion_9(config); });
    run_criterion(10, "end-to-end reproducibility", [&] { return criterion_10(config, root); });

    std::printf("acceptance: %d/10 criteria passed\n", 10 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
