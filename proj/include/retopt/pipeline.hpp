#pragma once

#include "retopt/collect.hpp"
#include "retopt/config_io.hpp"
#include "retopt/eval.hpp"
#include "retopt/spibb.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace retopt {

struct SweepSpec {
    RunConfig config{};
    std::vector<std::string> baselines = {"rb", "dqn"};
    std::vector<int> dataset_sizes = {25, 50, 100, 200, 300, 400, 500};
    std::vector<double> n_wedges = {5, 10, 20, 30, 40, 50, 100, 150, 200, 300};
    std::vector<std::uint64_t> seeds = default_seeds();
    std::string out_dir = "out";
    int workers = 1;
    int featured_n = 300;          // grid point whose per-step curves are kept
    double featured_n_wedge = 100.0;

    static std::vector<std::uint64_t> default_seeds();
};

// File-name-safe form of an n_wedge value ('.' -> 'p', '-' -> 'm', '+' dropped).
std::string wedge_tag(double n_wedge);

// Canonical artifact locations under one output root; every file name embeds
// whatever identifies its content (baseline, n, n_wedge, seed) plus the
// 16-hex config hash so artifacts from different setups never mix.
class ArtifactPaths {
public:
    ArtifactPaths(std::string root, std::uint64_t config_hash);

    const std::string& root() const { return root_; }
    const std::string& hash_tag() const { return tag_; }

    std::string datasets_dir() const;
    std::string nets_dir() const;
    std::string results_dir() const;
    std::string report_dir() const;

    std::string master_dataset(const std::string& baseline, std::uint64_t seed) const;
    std::string dataset(const std::string& baseline, int n, std::uint64_t seed) const;
    std::string dqn_baseline_net(std::uint64_t seed) const;
    std::string spibb_net(const std::string& baseline, int n, double n_wedge,
                          std::uint64_t seed) const;
    std::string spibb_sidecar(const std::string& baseline, int n, double n_wedge,
                              std::uint64_t seed) const;
    std::string point_csv(const std::string& baseline, int n, double n_wedge) const;
    std::string base_csv(const std::string& policy) const;
    std::string curves_csv(const std::string& policy) const;
    std::string sweep_meta() const;

private:
    std::string root_;
    std::string tag_;
};

// Load-or-compute building blocks; every compute path ends in an atomic write.
QNet ensure_dqn_baseline_net(const RunConfig& config, const ArtifactPaths& paths,
                             std::uint64_t seed);
Dataset ensure_master_dataset(const RunConfig& config, const ArtifactPaths& paths,
                              const std::string& baseline, std::uint64_t seed);
// The exact rows a (baseline, n, seed) training run sees: master -> subsample.
Dataset training_dataset(const RunConfig& config, const ArtifactPaths& paths,
                         const std::string& baseline, int n, std::uint64_t seed);
QNet ensure_spibb_net(const RunConfig& config, const ArtifactPaths& paths,
                      const std::string& baseline, int n, double n_wedge, std::uint64_t seed);

// name in {rb, dqn, random, optimal}
PolicyFactory base_policy_factory(const std::string& name, const RunConfig& config,
                                  const ArtifactPaths& paths);
PolicyFactory spibb_policy_factory(const RunConfig& config, const ArtifactPaths& paths,
                                   const std::string& baseline, int n, double n_wedge);

std::string eval_rows_csv(const EvalReport& report, const std::vector<std::uint64_t>& seeds);
std::string curves_csv_text(const EvalReport& report);

// Full grid: per-seed prerequisites, baseline-policy references, every
// (baseline, n, n_wedge) point, then the report. Existing artifacts are
// trusted and skipped, so interrupted sweeps resume where they stopped.
void run_sweep(const SweepSpec& spec);

// Aggregate results/ into report/: summary.csv plus the nine panel CSVs
// (average, CVaR, worst-cell) x (per step, vs n, vs n_wedge) and SVG charts.
void write_report(const std::string& out_dir);

void parallel_for(int workers, std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace retopt
