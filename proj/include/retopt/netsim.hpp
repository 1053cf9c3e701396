#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace retopt {

// Sector antenna pattern and link-budget constants (3GPP-style parabolic
// patterns; log-distance urban-macro pathloss).
inline constexpr double kVerticalBeamwidthDeg = 10.0;
inline constexpr double kHorizontalBeamwidthDeg = 65.0;
inline constexpr double kVerticalMaxAttenDb = 20.0;
inline constexpr double kHorizontalMaxAttenDb = 30.0;
inline constexpr double kUeHeightM = 1.5;
inline constexpr double kCellBandwidthHz = 10e6;
// Thermal noise over 10 MHz plus a 9 dB receiver noise figure.
inline constexpr double kNoisePowerDbm = -95.0;
inline constexpr double kSinrQualLowDb = 0.0;
inline constexpr double kSinrQualHighDb = 15.0;
inline constexpr int kSectorsPerSite = 3;

struct NetworkConfig {
    int num_bs = 7;
    int num_cells = 21;
    int num_ues = 2000;
    double carrier_freq_ghz = 2.0;
    double traffic_mean_mbps = 20.0;
    double traffic_var_mbps2 = 4.0;
    double antenna_height_m = 32.0;
    double tilt_min_deg = 1.0;
    double tilt_max_deg = 16.0;
    double tilt_step_deg = 1.0;
    double inter_site_distance_m = 500.0;
    double tx_power_dbm = 46.0;
    double rsrp_cov_threshold_dbm = -92.0;
    double shadow_sigma_db = 8.0;
    std::uint64_t rng_seed = 1;

    // Number of tilt values on the integer-step grid {tilt_min, tilt_min+step, ..., tilt_max}.
    int tilt_grid_size() const {
        return static_cast<int>((tilt_max_deg - tilt_min_deg) / tilt_step_deg + 0.5) + 1;
    }
};

// Throws std::invalid_argument when counts are non-positive, the sector
// relation num_cells == 3*num_bs fails, or tilt bounds are inverted.
void validate(const NetworkConfig& config);

struct CellKpis {
    double cov = 0.0;
    double cap = 0.0;
    double qual = 0.0;
};

// Value-semantic snapshot of the simulated network. Geometry lives here so
// tests can build custom layouts; build_network fills the hexagonal default.
struct NetworkState {
    Eigen::VectorXd tilts_deg;                             // per cell
    Eigen::Matrix<double, Eigen::Dynamic, 2> ue_positions; // per UE, metres
    Eigen::VectorXd ue_demand_mbps;                        // per UE
    Eigen::MatrixXd shadow_db;                             // UE x cell
    Eigen::Matrix<double, Eigen::Dynamic, 2> site_xy;      // per cell, metres
    Eigen::VectorXd azimuth_deg;                           // per cell boresight
};

// Antenna pattern cuts (non-positive gains in dB).
double vertical_gain_db(double elevation_deg, double tilt_deg);
double horizontal_gain_db(double azimuth_offset_deg);

// Log-distance urban-macro pathloss at 2 GHz.
double pathloss_db(double distance_km);

// Tilt-independent per-link terms, reusable across tilt changes on a fixed
// UE layout: elevation angles and tx + horizontal gain - pathloss - shadow.
struct LinkGeometry {
    Eigen::MatrixXd elevation_deg; // UE x cell
    Eigen::MatrixXd static_db;     // UE x cell
};

LinkGeometry make_link_geometry(const NetworkState& state, const NetworkConfig& config);

NetworkState build_network(const NetworkConfig& config);

double rsrp_dbm(const NetworkState& state, const NetworkConfig& config, Eigen::Index ue,
                Eigen::Index cell);

// Full UE x cell RSRP matrix for the current tilt vector.
Eigen::MatrixXd rsrp_matrix(const NetworkState& state, const NetworkConfig& config,
                            const LinkGeometry& geom);

std::vector<CellKpis> compute_kpis(const NetworkState& state, const NetworkConfig& config);
std::vector<CellKpis> compute_kpis(const NetworkState& state, const NetworkConfig& config,
                                   const LinkGeometry& geom);

// Clamped single-cell tilt update; other cells untouched.
NetworkState apply_tilt_change(NetworkState state, const NetworkConfig& config, Eigen::Index cell,
                               double delta_deg);

}  // namespace retopt
