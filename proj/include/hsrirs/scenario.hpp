#pragma once

// Scenario description: system constants, geometry, and seeded synthesis of
// every channel in the double-IRS uplink/downlink.

#include "hsrirs/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hsrirs {

/// Uniform planar array: mx * my elements with spacings dx, dy in metres.
struct ArrayGeometry {
  int mx = 1;
  int my = 1;
  double dx = 0.0;
  double dy = 0.0;

  int count() const { return mx * my; }
};

/// Near-square factorisation of n elements into an mx*my grid, spacing kept.
ArrayGeometry planar_geometry(int n, double spacing);

/// Link distances in metres.
struct Distances {
  double d_H = 10.0;   // BS -> IRS1
  double d_hd = 10.0;  // BS -> IoTD
  double d_hr = 5.0;   // IRS1 -> IoTD
  double d_gr = 9.0;   // IoTD -> IRS2
  double d_gd = 10.0;  // IoTD -> MCR
  double d_G = 2.0;    // IRS2 -> MCR
  double d_d = 7.0;    // IRS2 -> passenger
};

struct Tolerances {
  double eps1 = 1e-6;      // inner loop: scaled ||psi||
  double eps2 = 1e-3;      // outer loop: relative objective change
  double eps_dca = 1e-6;   // DCA relative step
  double eps_sdp = 1e-3;   // SDP relative residuals
  double eps_leak = 0.1;   // leakage bound, in units of one random-phase element's leakage
};

/// Layout of the track used by the Doppler experiments. The IoTD sits at
/// lateral offset `lateral_offset` from the track; the train position is the
/// signed along-track coordinate of the MCR relative to the IoTD.
struct TrackLayout {
  double lateral_offset = 1.0;
  double mcr_extra_distance = 1.0;  // d_gd - d_gr
};

struct SystemConfig {
  int m1 = 25;
  int m2 = 9;
  int n1 = 100;
  int n2 = 100;
  int num_iotds = 3;
  int num_users = 3;

  double f_s = 3.5e9;
  double f_m = 28e9;
  double f_dl = 3.5e9;  // downlink energy carrier
  double b_s = 10e6;
  double b_m = 80e6;

  double p_max = 10.0;
  double xi = 0.8;
  double kappa = 6.0;
  double rho0_db = -20.0;
  double d0 = 1.0;
  double alpha_ref = 2.2;
  double alpha_dir = 3.5;
  double noise_psd_dbm_hz = -174.0;

  Distances distances;
  std::vector<double> volumes;  // bits
  std::vector<double> weights;

  // An absent IRS keeps one placeholder element with all reflected channels zero.
  bool irs1_present = true;
  bool irs2_present = true;
  std::uint64_t scenario_seed = 7;

  double eaves_zod = 3.0 * kPi / 4.0;
  double eaves_zoa = kPi / 4.0;

  ArrayGeometry bs_array;
  ArrayGeometry mcr_array;
  ArrayGeometry irs1_array;
  ArrayGeometry irs2_array;

  int n_rand = 200;
  Tolerances tol;
  int t_max = 10;
  int t_inner_max = 3;
  int t_dca_max = 30;
  int sdp_max_iter = 150;
  int theta1_grid = 16;
  int theta1_passes = 2;
  double theta1_refine_tol = 1e-3;
  double delta = 0.5;
  double epsilon_newton = 0.5;

  // Doppler experiments.
  double train_speed = 110.0;
  double slot_duration = 0.01;
  double pilot_overhead = 6000.0;
  double train_position = -19.975;
  TrackLayout track;

  /// Noise variance sigma_F^2 = PSD(linear, W/Hz) * B_F.
  double noise_variance(Band b) const;
  double bandwidth(Band b) const { return b == Band::sub6 ? b_s : b_m; }
  double carrier(Band b) const { return b == Band::sub6 ? f_s : f_m; }
  double wavelength(Band b) const { return kSpeedOfLight / carrier(b); }

  /// Throws ValidationError naming the first violated invariant.
  void validate() const;
};

/// Defaults for the hybrid-band HSR scenario (M1=25, M2=9, N1=N2=100, K=L=3, ...).
SystemConfig default_config();

/// Volumes U(1, 2) Mbit and weights U(0, 1], drawn once from scenario_seed.
std::vector<double> default_volumes(int num_iotds, std::uint64_t scenario_seed);
std::vector<double> default_weights(int num_iotds, std::uint64_t scenario_seed);

/// Parses a flat JSON object; omitted keys keep their defaults.
SystemConfig load_config(std::string_view document);
SystemConfig load_config_file(const std::filesystem::path& path);

/// Same scenario with different passive element counts; IRS grids rebuilt.
/// A count of 0 marks that IRS absent.
SystemConfig with_elements(const SystemConfig& cfg, int n1, int n2);

/// Array response a_x(theta1, theta2) kron a_y(theta1, theta2).
VectorXcd array_response(const ArrayGeometry& geometry, double theta1, double theta2,
                         double wavelength);

/// rho0 * (d / d0)^(-exponent), linear power gain.
double path_loss(double distance, double exponent, const SystemConfig& cfg);

struct TrainState {
  double position = 0.0;  // m, along track relative to the IoTD
  double speed = 0.0;     // m/s
  double dt = 1e-3;       // s
  double phi_d = 0.0;     // rad, direct link horizontal angle
  double phi_c = 0.0;     // rad, cascaded link horizontal angle
};

/// Planar geometry: angles between the direction of travel and the link.
TrainState make_train_state(const TrackLayout& layout, double position, double speed,
                            double dt);

/// Copy of cfg whose IoTD->IRS2 and IoTD->MCR distances follow the train position.
SystemConfig config_at_position(const SystemConfig& cfg, double position);

struct BandChannels {
  MatrixXcd G;                    // M2 x N2
  std::vector<VectorXcd> g_r;     // L of N2 x 1
  std::vector<VectorXcd> g_d;     // L of M2 x 1
  std::vector<RowVectorXcd> d;    // K of 1 x N2
};

struct ChannelSet {
  MatrixXcd H;                     // N1 x M1
  std::vector<RowVectorXcd> h_r;   // L of 1 x N1
  std::vector<RowVectorXcd> h_d;   // L of 1 x M1
  PerBand<BandChannels> up;
  std::uint64_t seed = 0;
};

/// Seeded realisation of every channel. Deterministic in (cfg, train, seed).
/// With a train state, the IoTD-side uplink azimuths follow its angles.
ChannelSet build_channel_set(const SystemConfig& cfg, const std::optional<TrainState>& train,
                             std::uint64_t seed);

/// Mixes several integers into one well-spread 64-bit seed.
std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0);

}  // namespace hsrirs
