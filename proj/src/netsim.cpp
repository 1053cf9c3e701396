#include "retopt/netsim.hpp"

#include "retopt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace retopt {

namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

double wrap180(double deg) {
    deg = std::fmod(deg + 180.0, 360.0);
    if (deg < 0.0) deg += 360.0;
    return deg - 180.0;
}

// Hexagonal lattice sites sorted by (distance, angle); site 0 is the origin,
// the next six form the first ring at the inter-site distance.
Eigen::Matrix<double, Eigen::Dynamic, 2> hex_sites(int num_bs, double isd) {
    struct P {
        double x, y, r, ang;
    };
    std::vector<P> pts;
    const double ax = isd, ay = 0.0;
    const double bx = isd * 0.5, by = isd * std::numbers::sqrt3 / 2.0;
    const int span = 8;
    for (int i = -span; i <= span; ++i) {
        for (int j = -span; j <= span; ++j) {
            const double x = i * ax + j * bx;
            const double y = i * ay + j * by;
            const double r = std::hypot(x, y);
            pts.push_back({x, y, r, std::atan2(y, x)});
        }
    }
    std::sort(pts.begin(), pts.end(), [](const P& a, const P& b) {
        if (std::abs(a.r - b.r) > 1e-9) return a.r < b.r;
        return a.ang < b.ang;
    });
    Eigen::Matrix<double, Eigen::Dynamic, 2> sites(num_bs, 2);
    for (int s = 0; s < num_bs; ++s) {
        sites(s, 0) = pts[static_cast<std::size_t>(s)].x;
        sites(s, 1) = pts[static_cast<std::size_t>(s)].y;
    }
    return sites;
}

}  // namespace

void validate(const NetworkConfig& config) {
    if (config.num_bs <= 0 || config.num_ues <= 0)
        throw std::invalid_argument("netsim: counts must be positive");
    if (config.num_cells != kSectorsPerSite * config.num_bs)
        throw std::invalid_argument("netsim: num_cells must equal 3 * num_bs");
    if (!(config.tilt_min_deg < config.tilt_max_deg))
        throw std::invalid_argument("netsim: tilt bounds inverted");
    if (!(config.tilt_step_deg > 0.0))
        throw std::invalid_argument("netsim: tilt step must be positive");
    if (!(config.traffic_var_mbps2 >= 0.0) || !(config.shadow_sigma_db >= 0.0))
        throw std::invalid_argument("netsim: variances must be non-negative");
    if (!(config.inter_site_distance_m > 0.0) || !(config.antenna_height_m > 0.0))
        throw std::invalid_argument("netsim: geometry must be positive");
}

double vertical_gain_db(double elevation_deg, double tilt_deg) {
    const double off = (elevation_deg - tilt_deg) / kVerticalBeamwidthDeg;
    return -std::min(12.0 * off * off, kVerticalMaxAttenDb);
}

double horizontal_gain_db(double azimuth_offset_deg) {
    const double off = wrap180(azimuth_offset_deg) / kHorizontalBeamwidthDeg;
    return -std::min(12.0 * off * off, kHorizontalMaxAttenDb);
}

double pathloss_db(double distance_km) {
    return 128.1 + 37.6 * std::log10(std::max(distance_km, 1e-3));
}

NetworkState build_network(const NetworkConfig& config) {
    validate(config);
    Rng rng(config.rng_seed);

    const int cells = config.num_cells;
    const int ues = config.num_ues;

    NetworkState state;
    state.site_xy.resize(cells, 2);
    state.azimuth_deg.resize(cells);
    const auto sites = hex_sites(config.num_bs, config.inter_site_distance_m);
    double max_site_r = 0.0;
    for (int s = 0; s < config.num_bs; ++s) {
        max_site_r = std::max(max_site_r, std::hypot(sites(s, 0), sites(s, 1)));
        for (int k = 0; k < kSectorsPerSite; ++k) {
            const int c = s * kSectorsPerSite + k;
            state.site_xy.row(c) = sites.row(s);
            state.azimuth_deg(c) = 120.0 * k;
        }
    }

    // Service area: square covering the outermost sites plus half a cell.
    const double half_width = max_site_r + 0.5 * config.inter_site_distance_m;
    state.ue_positions.resize(ues, 2);
    for (int u = 0; u < ues; ++u) {
        state.ue_positions(u, 0) = rng.uniform(-half_width, half_width);
        state.ue_positions(u, 1) = rng.uniform(-half_width, half_width);
    }

    state.ue_demand_mbps.resize(ues);
    const double traffic_sd = std::sqrt(config.traffic_var_mbps2);
    for (int u = 0; u < ues; ++u)
        state.ue_demand_mbps(u) = std::max(0.0, rng.normal(config.traffic_mean_mbps, traffic_sd));

    state.shadow_db.resize(ues, cells);
    for (int u = 0; u < ues; ++u)
        for (int c = 0; c < cells; ++c)
            state.shadow_db(u, c) = rng.normal(0.0, config.shadow_sigma_db);

    state.tilts_deg.resize(cells);
    const int grid = config.tilt_grid_size();
    for (int c = 0; c < cells; ++c) {
        const auto k = rng.uniform_int(0, grid - 1);
        state.tilts_deg(c) = config.tilt_min_deg + static_cast<double>(k) * config.tilt_step_deg;
    }
    return state;
}

LinkGeometry make_link_geometry(const NetworkState& state, const NetworkConfig& config) {
    const Eigen::Index ues = state.ue_positions.rows();
    const Eigen::Index cells = state.site_xy.rows();
    LinkGeometry geom;
    geom.elevation_deg.resize(ues, cells);
    geom.static_db.resize(ues, cells);
    const double dh = config.antenna_height_m - kUeHeightM;
    for (Eigen::Index c = 0; c < cells; ++c) {
        for (Eigen::Index u = 0; u < ues; ++u) {
            const double dx = state.ue_positions(u, 0) - state.site_xy(c, 0);
            const double dy = state.ue_positions(u, 1) - state.site_xy(c, 1);
            const double ground = std::hypot(dx, dy);
            const double dist3d = std::hypot(ground, dh);
            geom.elevation_deg(u, c) = std::atan2(dh, ground) * kDegPerRad;
            const double bearing = std::atan2(dy, dx) * kDegPerRad;
            geom.static_db(u, c) = config.tx_power_dbm +
                                   horizontal_gain_db(bearing - state.azimuth_deg(c)) -
                                   pathloss_db(dist3d / 1000.0) - state.shadow_db(u, c);
        }
    }
    return geom;
}

double rsrp_dbm(const NetworkState& state, const NetworkConfig& config, Eigen::Index ue,
                Eigen::Index cell) {
    if (ue < 0 || ue >= state.ue_positions.rows() || cell < 0 || cell >= state.site_xy.rows())
        throw std::out_of_range("rsrp_dbm: index out of range");
    const double dx = state.ue_positions(ue, 0) - state.site_xy(cell, 0);
    const double dy = state.ue_positions(ue, 1) - state.site_xy(cell, 1);
    const double dh = config.antenna_height_m - kUeHeightM;
    const double ground = std::hypot(dx, dy);
    const double elevation = std::atan2(dh, ground) * kDegPerRad;
    const double bearing = std::atan2(dy, dx) * kDegPerRad;
    return config.tx_power_dbm + horizontal_gain_db(bearing - state.azimuth_deg(cell)) +
           vertical_gain_db(elevation, state.tilts_deg(cell)) -
           pathloss_db(std::hypot(ground, dh) / 1000.0) - state.shadow_db(ue, cell);
}

Eigen::MatrixXd rsrp_matrix(const NetworkState& state, const NetworkConfig& /*config*/,
                            const LinkGeometry& geom) {
    const Eigen::Index cells = state.site_xy.rows();
    Eigen::MatrixXd rsrp = geom.static_db;
    for (Eigen::Index c = 0; c < cells; ++c) {
        const double tilt = state.tilts_deg(c);
        auto off = (geom.elevation_deg.col(c).array() - tilt) / kVerticalBeamwidthDeg;
        rsrp.col(c).array() -= (12.0 * off.square()).min(kVerticalMaxAttenDb);
    }
    return rsrp;
}

std::vector<CellKpis> compute_kpis(const NetworkState& state, const NetworkConfig& config) {
    return compute_kpis(state, config, make_link_geometry(state, config));
}

std::vector<CellKpis> compute_kpis(const NetworkState& state, const NetworkConfig& config,
                                   const LinkGeometry& geom) {
    const Eigen::Index ues = state.ue_positions.rows();
    const Eigen::Index cells = state.site_xy.rows();
    const Eigen::MatrixXd rsrp = rsrp_matrix(state, config, geom);

    // dBm -> mW, per-UE totals, then SINR of the serving (max-RSRP) cell.
    constexpr double kLn10Over10 = 0.23025850929940457;
    const Eigen::MatrixXd power_mw = (rsrp.array() * kLn10Over10).exp();
    const Eigen::VectorXd total_mw = power_mw.rowwise().sum();
    const double noise_mw = std::exp(kNoisePowerDbm * kLn10Over10);

    std::vector<Eigen::Index> serving(static_cast<std::size_t>(ues));
    for (Eigen::Index u = 0; u < ues; ++u) {
        Eigen::Index best = 0;
        rsrp.row(u).maxCoeff(&best);
        serving[static_cast<std::size_t>(u)] = best;
    }

    struct Accum {
        Eigen::Index attached = 0;
        Eigen::Index covered = 0;
        double qual_sum = 0.0;
        double spectral_sum = 0.0; // sum of log2(1 + SINR) over attached UEs
        double demand_sum = 0.0;
    };
    std::vector<Accum> acc(static_cast<std::size_t>(cells));

    for (Eigen::Index u = 0; u < ues; ++u) {
        const Eigen::Index c = serving[static_cast<std::size_t>(u)];
        Accum& a = acc[static_cast<std::size_t>(c)];
        a.attached += 1;
        if (rsrp(u, c) >= config.rsrp_cov_threshold_dbm) a.covered += 1;
        const double signal = power_mw(u, c);
        const double interference = total_mw(u) - signal;
        const double sinr = signal / (interference + noise_mw);
        const double sinr_db = 10.0 * std::log10(sinr);
        a.qual_sum += std::clamp((sinr_db - kSinrQualLowDb) / (kSinrQualHighDb - kSinrQualLowDb),
                                 0.0, 1.0);
        a.spectral_sum += std::log2(1.0 + sinr);
        a.demand_sum += state.ue_demand_mbps(u);
    }

    std::vector<CellKpis> kpis(static_cast<std::size_t>(cells));
    for (Eigen::Index c = 0; c < cells; ++c) {
        const Accum& a = acc[static_cast<std::size_t>(c)];
        CellKpis& k = kpis[static_cast<std::size_t>(c)];
        if (a.attached == 0) {
            k = {1.0, 1.0, 1.0}; // vacuous convention for empty cells
            continue;
        }
        const double n = static_cast<double>(a.attached);
        k.cov = static_cast<double>(a.covered) / n;
        k.qual = a.qual_sum / n;
        // Equal-share Shannon rate over the cell bandwidth versus attached demand.
        const double servable_mbps = (kCellBandwidthHz / n) * a.spectral_sum / 1e6;
        k.cap = a.demand_sum <= 0.0 ? 1.0 : std::min(1.0, servable_mbps / a.demand_sum);
    }
    return kpis;
}

NetworkState apply_tilt_change(NetworkState state, const NetworkConfig& config, Eigen::Index cell,
                               double delta_deg) {
    if (cell < 0 || cell >= state.tilts_deg.size())
        throw std::out_of_range("apply_tilt_change: unknown cell index");
    state.tilts_deg(cell) = std::clamp(state.tilts_deg(cell) + delta_deg, config.tilt_min_deg,
                                       config.tilt_max_deg);
    return state;
}

}  // namespace retopt
