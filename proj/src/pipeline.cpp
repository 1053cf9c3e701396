#include "retopt/pipeline.hpp"

#include "retopt/textio.hpp"

#include <nlohmann/json.hpp>

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <utility>

namespace fs = std::filesystem;

namespace retopt {

namespace {

constexpr const char* kPointHeader = "seed,avg_reward,min_cell_avg";
constexpr const char* kCurvesHeader = "t,avg,min_cell,cvar";

std::uint64_t wedge_bits(double n_wedge) {
    std::uint64_t bits = 0;
    static_assert(sizeof(bits) == sizeof(n_wedge));
    std::memcpy(&bits, &n_wedge, sizeof(bits));
    return bits;
}

std::uint64_t spibb_train_stream(int n, double n_wedge) {
    return mix64(streams::spibb_train ^ mix64(static_cast<std::uint64_t>(n)) ^
                 mix64(wedge_bits(n_wedge)));
}

std::uint64_t subsample_stream(int n) {
    return mix64(streams::subsample ^ mix64(static_cast<std::uint64_t>(n)));
}

std::string temp_name(const std::string& path) {
    return path + ".tmp." + std::to_string(::getpid());
}

void save_net_atomic(const QNet& net, const std::string& path) {
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const std::string temp = temp_name(path);
    net.save(temp);
    fs::rename(temp, target);
}

void save_dataset_atomic(const Dataset& dataset, const std::string& path) {
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const std::string temp = temp_name(path);
    save_dataset(dataset, temp);
    fs::rename(temp, target);
}

std::shared_ptr<const Policy> make_behavior_policy(const std::string& baseline,
                                                   const RunConfig& config,
                                                   const ArtifactPaths& paths,
                                                   std::uint64_t seed) {
    if (baseline == "rb") {
        return std::make_shared<RuleBasedPolicy>(config.rule);
    }
    if (baseline == "dqn") {
        return std::make_shared<DqnPolicy>(ensure_dqn_baseline_net(config, paths, seed),
                                           config.behavior_eps);
    }
    throw std::invalid_argument("unknown baseline: " + baseline + " (expected rb|dqn)");
}

struct PointRows {
    std::vector<std::uint64_t> seeds;
    std::vector<double> avg;
    std::vector<double> min_cell;
};

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

PointRows load_rows_csv(const std::string& path) {
    const std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kPointHeader) {
        throw std::runtime_error("unexpected header in " + path);
    }
    PointRows rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 3) {
            throw std::runtime_error("malformed row in " + path + ": " + line);
        }
        rows.seeds.push_back(static_cast<std::uint64_t>(parse_int(fields[0])));
        rows.avg.push_back(parse_double(fields[1]));
        rows.min_cell.push_back(parse_double(fields[2]));
    }
    if (rows.seeds.empty()) {
        throw std::runtime_error("no rows in " + path);
    }
    return rows;
}

double mean_of(const std::vector<double>& v) {
    double sum = 0.0;
    for (const double x : v) sum += x;
    return sum / static_cast<double>(v.size());
}

double pop_std_of(const std::vector<double>& v) {
    const double mean = mean_of(v);
    double sq = 0.0;
    for (const double x : v) sq += (x - mean) * (x - mean);
    return std::sqrt(sq / static_cast<double>(v.size()));
}

struct Curves {
    std::vector<double> t;
    std::vector<double> avg;
    std::vector<double> min_cell;
    std::vector<double> cvar_v;
};

Curves load_curves_csv(const std::string& path) {
    const std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCurvesHeader) {
        throw std::runtime_error("unexpected header in " + path);
    }
    Curves curves;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 4) {
            throw std::runtime_error("malformed row in " + path + ": " + line);
        }
        curves.t.push_back(parse_double(fields[0]));
        curves.avg.push_back(parse_double(fields[1]));
        curves.min_cell.push_back(parse_double(fields[2]));
        curves.cvar_v.push_back(parse_double(fields[3]));
    }
    return curves;
}

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<Series>& series) {
    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b", "#17becf"};
    const double width = 760, height = 440;
    const double left = 78, right = 600, top = 48, bottom = 390;

    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (const Series& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (first) {
                xmin = xmax = s.x[i];
                ymin = ymax = s.y[i];
                first = false;
            } else {
                xmin = std::min(xmin, s.x[i]);
                xmax = std::max(xmax, s.x[i]);
                ymin = std::min(ymin, s.y[i]);
                ymax = std::max(ymax, s.y[i]);
            }
        }
    }
    if (xmax <= xmin) xmax = xmin + 1;
    if (ymax <= ymin) {
        ymax = ymin + 1;
        ymin -= 1;
    } else {
        const double pad = 0.06 * (ymax - ymin);
        ymin -= pad;
        ymax += pad;
    }
    const auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * (right - left); };
    const auto py = [&](double y) { return bottom - (y - ymin) / (ymax - ymin) * (bottom - top); };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << width << ' ' << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << (left + right) / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-size=\"15\">" << title << "</text>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\""
        << bottom << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << bottom
        << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 4.0;
        const double fy = ymin + (ymax - ymin) * i / 4.0;
        out << "<line x1=\"" << fmt2(px(fx)) << "\" y1=\"" << bottom << "\" x2=\"" << fmt2(px(fx))
            << "\" y2=\"" << bottom + 5 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << fmt2(px(fx)) << "\" y=\"" << bottom + 20
            << "\" text-anchor=\"middle\">" << fmt_tick(fx) << "</text>\n";
        out << "<line x1=\"" << left - 5 << "\" y1=\"" << fmt2(py(fy)) << "\" x2=\"" << left
            << "\" y2=\"" << fmt2(py(fy)) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << left - 8 << "\" y=\"" << fmt2(py(fy) + 4)
            << "\" text-anchor=\"end\">" << fmt_tick(fy) << "</text>\n";
    }
    out << "<text x=\"" << (left + right) / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
    out << "<text x=\"20\" y=\"" << (top + bottom) / 2 << "\" text-anchor=\"middle\" "
        << "transform=\"rotate(-90 20 " << (top + bottom) / 2 << ")\">" << y_label
        << "</text>\n";
    for (std::size_t si = 0; si < series.size(); ++si) {
        const char* color = palette[si % 7];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" points=\"";
        for (std::size_t i = 0; i < series[si].x.size(); ++i) {
            if (i) out << ' ';
            out << fmt2(px(series[si].x[i])) << ',' << fmt2(py(series[si].y[i]));
        }
        out << "\"/>\n";
        const double ly = top + 18 * static_cast<double>(si);
        out << "<line x1=\"" << right + 14 << "\" y1=\"" << fmt2(ly) << "\" x2=\"" << right + 38
            << "\" y2=\"" << fmt2(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << right + 44 << "\" y=\"" << fmt2(ly + 4) << "\">" << series[si].name
            << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace

std::vector<std::uint64_t> SweepSpec::default_seeds() {
    std::vector<std::uint64_t> seeds(20);
    for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = i + 1;
    return seeds;
}

std::string wedge_tag(double n_wedge) {
    std::string tag = format_double(n_wedge);
    std::string out;
    for (const char c : tag) {
        if (c == '.') {
            out += 'p';
        } else if (c == '-') {
            out += 'm';
        } else if (c != '+') {
            out += c;
        }
    }
    return out;
}

ArtifactPaths::ArtifactPaths(std::string root, std::uint64_t config_hash)
    : root_(std::move(root)) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(config_hash));
    tag_ = buf;
}

std::string ArtifactPaths::datasets_dir() const { return root_ + "/datasets"; }
std::string ArtifactPaths::nets_dir() const { return root_ + "/nets"; }
std::string ArtifactPaths::results_dir() const { return root_ + "/results"; }
std::string ArtifactPaths::report_dir() const { return root_ + "/report"; }

std::string ArtifactPaths::master_dataset(const std::string& baseline, std::uint64_t seed) const {
    return datasets_dir() + "/master_" + baseline + "_s" + std::to_string(seed) + "_h" + tag_ +
           ".jsonl";
}

std::string ArtifactPaths::dataset(const std::string& baseline, int n, std::uint64_t seed) const {
    return datasets_dir() + "/ds_" + baseline + "_N" + std::to_string(n) + "_s" +
           std::to_string(seed) + "_h" + tag_ + ".jsonl";
}

std::string ArtifactPaths::dqn_baseline_net(std::uint64_t seed) const {
    return nets_dir() + "/dqnbase_s" + std::to_string(seed) + "_h" + tag_ + ".qnet";
}

std::string ArtifactPaths::spibb_net(const std::string& baseline, int n, double n_wedge,
                                     std::uint64_t seed) const {
    return nets_dir() + "/spibb_" + baseline + "_N" + std::to_string(n) + "_W" +
           wedge_tag(n_wedge) + "_s" + std::to_string(seed) + "_h" + tag_ + ".qnet";
}

std::string ArtifactPaths::spibb_sidecar(const std::string& baseline, int n, double n_wedge,
                                         std::uint64_t seed) const {
    return spibb_net(baseline, n, n_wedge, seed) + ".meta.json";
}

std::string ArtifactPaths::point_csv(const std::string& baseline, int n, double n_wedge) const {
    return results_dir() + "/point_" + baseline + "_N" + std::to_string(n) + "_W" +
           wedge_tag(n_wedge) + "_h" + tag_ + ".csv";
}

std::string ArtifactPaths::base_csv(const std::string& policy) const {
    return results_dir() + "/base_" + policy + "_h" + tag_ + ".csv";
}

std::string ArtifactPaths::curves_csv(const std::string& policy) const {
    return results_dir() + "/curves_" + policy + "_h" + tag_ + ".csv";
}

std::string ArtifactPaths::sweep_meta() const { return results_dir() + "/sweep_meta.json"; }

QNet ensure_dqn_baseline_net(const RunConfig& config, const ArtifactPaths& paths,
                             std::uint64_t seed) {
    const std::string path = paths.dqn_baseline_net(seed);
    if (fs::exists(path)) return QNet::load(path);
    Env env(config.network, derive_seed(seed, streams::network),
            derive_seed(seed, streams::dqn_train_episode), config.protocol);
    QNet net = train_dqn_baseline(env, config.hyper, config.dqn_baseline_steps,
                                  config.dqn_train_eps, derive_seed(seed, streams::dqn_train));
    save_net_atomic(net, path);
    return net;
}

Dataset ensure_master_dataset(const RunConfig& config, const ArtifactPaths& paths,
                              const std::string& baseline, std::uint64_t seed) {
    const std::string path = paths.master_dataset(baseline, seed);
    if (fs::exists(path)) return load_dataset(path);
    const std::shared_ptr<const Policy> policy =
        make_behavior_policy(baseline, config, paths, seed);
    Env env(config.network, derive_seed(seed, streams::network),
            derive_seed(seed, streams::collect_episode), config.protocol);
    Dataset dataset = collect(env, *policy, config.collect_steps,
                              derive_seed(seed, streams::collect_actions), baseline,
                              config_hash(config));
    save_dataset_atomic(dataset, path);
    return dataset;
}

Dataset training_dataset(const RunConfig& config, const ArtifactPaths& paths,
                         const std::string& baseline, int n, std::uint64_t seed) {
    const Dataset master = ensure_master_dataset(config, paths, baseline, seed);
    if (n < 0 || static_cast<std::size_t>(n) > master.rows.size()) {
        throw std::invalid_argument("dataset size " + std::to_string(n) + " exceeds the " +
                                    std::to_string(master.rows.size()) + " collected rows");
    }
    return subsample(master, static_cast<std::size_t>(n),
                     derive_seed(seed, subsample_stream(n)));
}

QNet ensure_spibb_net(const RunConfig& config, const ArtifactPaths& paths,
                      const std::string& baseline, int n, double n_wedge, std::uint64_t seed) {
    const std::string path = paths.spibb_net(baseline, n, n_wedge, seed);
    if (fs::exists(path)) return QNet::load(path);

    const Dataset dataset = training_dataset(config, paths, baseline, n, seed);
    SpibbConfig spibb = make_spibb_config(config);
    spibb.n_wedge = n_wedge;
    QNet net = train_spibb(dataset, spibb, derive_seed(seed, spibb_train_stream(n, n_wedge)));

    nlohmann::json sidecar;
    sidecar["baseline"] = baseline;
    sidecar["n"] = n;
    sidecar["n_wedge"] = n_wedge;
    sidecar["count_mode"] = count_mode_name(config.count_mode);
    sidecar["greedy_execution"] = config.greedy_execution;
    sidecar["seed"] = seed;
    sidecar["config_hash"] = config_hash(config);
    write_file_atomic(paths.spibb_sidecar(baseline, n, n_wedge, seed), sidecar.dump(2) + "\n");
    save_net_atomic(net, path);
    return net;
}

PolicyFactory base_policy_factory(const std::string& name, const RunConfig& config,
                                  const ArtifactPaths& paths) {
    if (name == "rb") {
        return fixed_policy(std::make_shared<RuleBasedPolicy>(config.rule));
    }
    if (name == "random") {
        return fixed_policy(std::make_shared<RandomPolicy>());
    }
    if (name == "dqn") {
        return [config, paths](Env&, std::uint64_t seed) -> std::shared_ptr<const Policy> {
            return std::make_shared<DqnPolicy>(ensure_dqn_baseline_net(config, paths, seed),
                                               config.behavior_eps);
        };
    }
    if (name == "optimal") {
        return [](Env& env, std::uint64_t) -> std::shared_ptr<const Policy> {
            const OptimalSearchResult result =
                optimal_search(env.state(), env.config(), env.geometry());
            return std::make_shared<TiltTargetPolicy>(result.targets_deg, env.config());
        };
    }
    throw std::invalid_argument("unknown policy: " + name +
                                " (expected rb|dqn|random|optimal)");
}

PolicyFactory spibb_policy_factory(const RunConfig& config, const ArtifactPaths& paths,
                                   const std::string& baseline, int n, double n_wedge) {
    return [config, paths, baseline, n,
            n_wedge](Env&, std::uint64_t seed) -> std::shared_ptr<const Policy> {
        QNet net = ensure_spibb_net(config, paths, baseline, n, n_wedge, seed);
        if (config.greedy_execution) {
            return std::make_shared<DqnPolicy>(std::move(net), 0.0);
        }
        const Dataset dataset = training_dataset(config, paths, baseline, n, seed);
        auto index = std::make_shared<BootstrapIndex>(dataset, config.count_mode,
                                                      config.kernel_d0, n_wedge);
        return std::make_shared<SpibbProjectedPolicy>(
            std::move(net), std::move(index), make_behavior_policy(baseline, config, paths, seed));
    };
}

std::string eval_rows_csv(const EvalReport& report, const std::vector<std::uint64_t>& seeds) {
    if (static_cast<Eigen::Index>(seeds.size()) != report.per_run_avg.size()) {
        throw std::invalid_argument("eval_rows_csv: seed/run count mismatch");
    }
    std::ostringstream out;
    out << kPointHeader << '\n';
    for (std::size_t k = 0; k < seeds.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        out << seeds[k] << ',' << format_double(report.per_run_avg[i]) << ','
            << format_double(report.per_run_min_cell[i]) << '\n';
    }
    return out.str();
}

std::string curves_csv_text(const EvalReport& report) {
    std::ostringstream out;
    out << kCurvesHeader << '\n';
    for (Eigen::Index t = 0; t < report.avg_network_per_step.size(); ++t) {
        out << (t + 1) << ',' << format_double(report.avg_network_per_step[t]) << ','
            << format_double(report.min_cell_per_step[t]) << ','
            << format_double(report.cvar_per_step[t]) << '\n';
    }
    return out.str();
}

void parallel_for(int workers, std::size_t count, const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    if (workers <= 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    const auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            {
                const std::lock_guard lock(error_mutex);
                if (error) return;
            }
            try {
                fn(i);
            } catch (...) {
                const std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
    pool.reserve(n_threads);
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

namespace {

nlohmann::json sweep_meta_json(const SweepSpec& spec) {
    nlohmann::json meta;
    meta["format"] = "sweep-meta-v1";
    meta["config_hash"] = config_hash(spec.config);
    meta["cvar_level"] = spec.config.cvar_level;
    meta["featured_n"] = spec.featured_n;
    meta["featured_n_wedge"] = spec.featured_n_wedge;
    meta["baselines"] = spec.baselines;
    meta["dataset_sizes"] = spec.dataset_sizes;
    meta["n_wedges"] = spec.n_wedges;
    meta["seeds"] = spec.seeds;
    std::vector<std::string> base_policies = {"random", "optimal"};
    for (const std::string& b : spec.baselines) base_policies.push_back(b);
    std::sort(base_policies.begin(), base_policies.end());
    meta["base_policies"] = base_policies;
    return meta;
}

}  // namespace

void run_sweep(const SweepSpec& spec) {
    validate(spec.config);
    if (spec.seeds.empty()) {
        throw std::invalid_argument("sweep: at least one seed required");
    }
    if (spec.baselines.empty()) {
        throw std::invalid_argument("sweep: at least one baseline required");
    }
    for (const std::string& b : spec.baselines) {
        if (b != "rb" && b != "dqn") {
            throw std::invalid_argument("sweep: unknown baseline '" + b + "'");
        }
    }
    const ArtifactPaths paths(spec.out_dir, config_hash(spec.config));
    fs::create_directories(paths.datasets_dir());
    fs::create_directories(paths.nets_dir());
    fs::create_directories(paths.results_dir());
    fs::create_directories(paths.report_dir());

    const std::string meta_text = sweep_meta_json(spec).dump(2) + "\n";
    if (fs::exists(paths.sweep_meta())) {
        if (read_file(paths.sweep_meta()) != meta_text) {
            throw std::runtime_error(
                "sweep: " + spec.out_dir +
                " holds results for different sweep settings; use a fresh output directory");
        }
    } else {
        write_file_atomic(paths.sweep_meta(), meta_text);
    }

    const bool need_dqn =
        std::find(spec.baselines.begin(), spec.baselines.end(), "dqn") != spec.baselines.end();

    // Per-seed prerequisites: the behavior nets and the master datasets.
    parallel_for(spec.workers, spec.seeds.size(), [&](std::size_t i) {
        const std::uint64_t seed = spec.seeds[i];
        if (need_dqn) ensure_dqn_baseline_net(spec.config, paths, seed);
        for (const std::string& baseline : spec.baselines) {
            ensure_master_dataset(spec.config, paths, baseline, seed);
        }
    });

    // Reference policies, each with per-run rows and per-step curves.
    const auto base_policies =
        sweep_meta_json(spec)["base_policies"].get<std::vector<std::string>>();
    parallel_for(spec.workers, base_policies.size(), [&](std::size_t i) {
        const std::string& name = base_policies[i];
        const std::string rows_path = paths.base_csv(name);
        const std::string curves_path = paths.curves_csv(name);
        if (fs::exists(rows_path) && fs::exists(curves_path)) return;
        const EvalReport report =
            evaluate_policy(base_policy_factory(name, spec.config, paths), spec.config.network,
                            spec.seeds, spec.config.protocol, spec.config.cvar_level);
        write_file_atomic(rows_path, eval_rows_csv(report, spec.seeds));
        write_file_atomic(curves_path, curves_csv_text(report));
    });

    // Grid points.
    struct Point {
        std::string baseline;
        int n;
        double n_wedge;
    };
    std::vector<Point> points;
    for (const std::string& baseline : spec.baselines) {
        for (const int n : spec.dataset_sizes) {
            for (const double w : spec.n_wedges) {
                points.push_back({baseline, n, w});
            }
        }
    }
    parallel_for(spec.workers, points.size(), [&](std::size_t i) {
        const Point& p = points[i];
        const bool featured = (p.n == spec.featured_n && p.n_wedge == spec.featured_n_wedge);
        const std::string rows_path = paths.point_csv(p.baseline, p.n, p.n_wedge);
        const std::string curves_path = paths.curves_csv("spibb_" + p.baseline);
        const bool need_rows = !fs::exists(rows_path);
        const bool need_curves = featured && !fs::exists(curves_path);
        if (!need_rows && !need_curves) return;
        for (const std::uint64_t seed : spec.seeds) {
            ensure_spibb_net(spec.config, paths, p.baseline, p.n, p.n_wedge, seed);
        }
        const EvalReport report = evaluate_policy(
            spibb_policy_factory(spec.config, paths, p.baseline, p.n, p.n_wedge),
            spec.config.network, spec.seeds, spec.config.protocol, spec.config.cvar_level);
        if (need_rows) write_file_atomic(rows_path, eval_rows_csv(report, spec.seeds));
        if (need_curves) write_file_atomic(curves_path, curves_csv_text(report));
    });

    write_report(spec.out_dir);
}

namespace {

struct MetricColumn {
    std::string name;
    std::vector<double> values;
};

std::string panel_csv(const std::string& x_name, const std::vector<double>& xs,
                      const std::vector<MetricColumn>& columns, bool integer_x) {
    std::ostringstream out;
    out << x_name;
    for (const MetricColumn& c : columns) out << ',' << c.name;
    out << '\n';
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (integer_x) {
            out << static_cast<long long>(xs[i]);
        } else {
            out << format_double(xs[i]);
        }
        for (const MetricColumn& c : columns) out << ',' << format_double(c.values[i]);
        out << '\n';
    }
    return out.str();
}

double metric_of(const PointRows& rows, const std::string& metric, double cvar_level) {
    if (metric == "avg") return mean_of(rows.avg);
    if (metric == "cvar") return cvar(rows.avg, cvar_level);
    return mean_of(rows.min_cell);  // "mincell"
}

}  // namespace

void write_report(const std::string& out_dir) {
    const std::string meta_path = out_dir + "/results/sweep_meta.json";
    if (!fs::exists(meta_path)) {
        throw std::runtime_error("report: no sweep results under " + out_dir +
                                 " (missing results/sweep_meta.json)");
    }
    const nlohmann::json meta = nlohmann::json::parse(read_file(meta_path));
    const ArtifactPaths paths(out_dir, meta.at("config_hash").get<std::uint64_t>());
    const double cvar_level = meta.at("cvar_level").get<double>();
    const int featured_n = meta.at("featured_n").get<int>();
    const double featured_w = meta.at("featured_n_wedge").get<double>();
    const auto baselines = meta.at("baselines").get<std::vector<std::string>>();
    const auto ns = meta.at("dataset_sizes").get<std::vector<int>>();
    const auto ws = meta.at("n_wedges").get<std::vector<double>>();
    const auto base_policies = meta.at("base_policies").get<std::vector<std::string>>();
    fs::create_directories(paths.report_dir());

    // summary.csv: reference policies first, then every grid point.
    std::ostringstream summary;
    summary << "policy,baseline,n,n_wedge,runs,avg_mean,avg_std,cvar,min_cell_mean,min_cell_std\n";
    const auto summary_row = [&](const std::string& policy, const std::string& baseline,
                                 const std::string& n, const std::string& w,
                                 const PointRows& rows) {
        summary << policy << ',' << baseline << ',' << n << ',' << w << ',' << rows.seeds.size()
                << ',' << format_double(mean_of(rows.avg)) << ','
                << format_double(pop_std_of(rows.avg)) << ','
                << format_double(cvar(rows.avg, cvar_level)) << ','
                << format_double(mean_of(rows.min_cell)) << ','
                << format_double(pop_std_of(rows.min_cell)) << '\n';
    };
    std::map<std::string, PointRows> base_rows;
    for (const std::string& name : base_policies) {
        base_rows[name] = load_rows_csv(paths.base_csv(name));
        summary_row(name, "", "", "", base_rows[name]);
    }
    std::vector<int> ns_sorted = ns;
    std::sort(ns_sorted.begin(), ns_sorted.end());
    std::vector<double> ws_sorted = ws;
    std::sort(ws_sorted.begin(), ws_sorted.end());
    std::map<std::string, std::map<std::pair<int, double>, PointRows>> point_rows;
    for (const std::string& baseline : baselines) {
        for (const int n : ns_sorted) {
            for (const double w : ws_sorted) {
                point_rows[baseline][{n, w}] = load_rows_csv(paths.point_csv(baseline, n, w));
                summary_row("spibb_" + baseline, baseline, std::to_string(n), format_double(w),
                            point_rows[baseline][{n, w}]);
            }
        }
    }
    write_file_atomic(paths.report_dir() + "/summary.csv", summary.str());

    const std::vector<std::string> metrics = {"avg", "cvar", "mincell"};
    const std::map<std::string, std::string> metric_label = {
        {"avg", "average network reward"},
        {"cvar", "CVaR of per-run average reward"},
        {"mincell", "worst-cell reward"}};

    // Panels vs step index: one column per policy with a stored curve.
    std::vector<std::string> curve_policies = base_policies;
    for (const std::string& b : baselines) {
        if (fs::exists(paths.curves_csv("spibb_" + b))) curve_policies.push_back("spibb_" + b);
    }
    std::sort(curve_policies.begin(), curve_policies.end());
    std::map<std::string, Curves> curves;
    for (const std::string& name : curve_policies) {
        curves[name] = load_curves_csv(paths.curves_csv(name));
    }
    for (const std::string& metric : metrics) {
        std::vector<double> xs;
        std::vector<MetricColumn> columns;
        for (const std::string& name : curve_policies) {
            const Curves& c = curves[name];
            if (xs.empty()) xs = c.t;
            const std::vector<double>& y =
                metric == "avg" ? c.avg : (metric == "cvar" ? c.cvar_v : c.min_cell);
            columns.push_back({name, y});
        }
        write_file_atomic(paths.report_dir() + "/panel_" + metric + "_vs_t.csv",
                          panel_csv("t", xs, columns, true));
        std::vector<Series> series;
        for (const MetricColumn& c : columns) series.push_back({c.name, xs, c.values});
        write_file_atomic(paths.report_dir() + "/panel_" + metric + "_vs_t.svg",
                          svg_line_chart(metric_label.at(metric) + " per step", "step",
                                         metric_label.at(metric), series));
    }

    // Panels vs dataset size (n_wedge fixed at the featured value) and vs
    // n_wedge (dataset size fixed); reference policies appear as flat lines.
    struct Axis {
        std::string file_tag;
        std::string label;
        bool integer_x;
    };
    for (const Axis& axis : {Axis{"n", "dataset size", true}, Axis{"nwedge", "N_wedge", false}}) {
        std::vector<double> xs;
        if (axis.file_tag == "n") {
            for (const int n : ns_sorted) xs.push_back(n);
        } else {
            xs = ws_sorted;
        }
        for (const std::string& metric : metrics) {
            std::vector<MetricColumn> columns;
            for (const std::string& baseline : baselines) {
                MetricColumn col{"spibb_" + baseline, {}};
                for (const double x : xs) {
                    const auto key = axis.file_tag == "n"
                                         ? std::make_pair(static_cast<int>(x), featured_w)
                                         : std::make_pair(featured_n, x);
                    col.values.push_back(
                        metric_of(point_rows.at(baseline).at(key), metric, cvar_level));
                }
                columns.push_back(std::move(col));
            }
            for (const std::string& name : base_policies) {
                const double v = metric_of(base_rows.at(name), metric, cvar_level);
                columns.push_back({"ref_" + name, std::vector<double>(xs.size(), v)});
            }
            const std::string x_name = axis.file_tag == "n" ? "n" : "n_wedge";
            write_file_atomic(
                paths.report_dir() + "/panel_" + metric + "_vs_" + axis.file_tag + ".csv",
                panel_csv(x_name, xs, columns, axis.integer_x));
            std::vector<Series> series;
            for (const MetricColumn& c : columns) series.push_back({c.name, xs, c.values});
            write_file_atomic(
                paths.report_dir() + "/panel_" + metric + "_vs_" + axis.file_tag + ".svg",
                svg_line_chart(metric_label.at(metric) + " vs " + axis.label, axis.label,
                               metric_label.at(metric), series));
        }
    }
}

}  // namespace retopt
