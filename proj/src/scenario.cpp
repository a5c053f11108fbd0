#include "hsrirs/scenario.hpp"

#include "hsrirs/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

namespace hsrirs {

namespace {

using json = nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

double uniform_angle(std::mt19937_64& rng) { return kTwoPi * uniform01(rng); }

// CN(0, 1): real and imaginary parts N(0, 1/2).
MatrixXcd complex_gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  MatrixXcd out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      double re = n(rng);
      double im = n(rng);
      out(i, j) = cd(re, im);
    }
  return out;
}

struct Rician {
  double los = 0.0;
  double nlos = 1.0;
};

Rician rician_weights(double kappa) {
  if (std::isinf(kappa)) return {1.0, 0.0};
  return {std::sqrt(kappa / (kappa + 1.0)), std::sqrt(1.0 / (kappa + 1.0))};
}

// ---- config parsing -------------------------------------------------------

template <typename T>
T get_as(const json& doc, const std::string& key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(key, e.what());
  }
}

template <typename T>
void read_opt(const json& doc, const std::string& key, T& out, std::set<std::string>& seen) {
  if (!doc.contains(key)) return;
  seen.insert(key);
  out = get_as<T>(doc, key);
}

void read_int(const json& doc, const std::string& key, int& out, std::set<std::string>& seen) {
  if (!doc.contains(key)) return;
  seen.insert(key);
  const json& v = doc.at(key);
  if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
  out = v.get<int>();
}

void read_real(const json& doc, const std::string& key, double& out,
               std::set<std::string>& seen) {
  if (!doc.contains(key)) return;
  seen.insert(key);
  const json& v = doc.at(key);
  if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "infinity")) {
    out = std::numeric_limits<double>::infinity();
    return;
  }
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  out = v.get<double>();
}

struct GeometryKeys {
  bool given = false;
  ArrayGeometry g;
};

GeometryKeys read_geometry(const json& doc, const std::string& prefix,
                           std::set<std::string>& seen) {
  GeometryKeys out;
  const std::string kx = prefix + "_mx", ky = prefix + "_my";
  const std::string sx = prefix + "_dx", sy = prefix + "_dy";
  bool any = doc.contains(kx) || doc.contains(ky) || doc.contains(sx) || doc.contains(sy);
  if (!any) return out;
  for (const auto& k : {kx, ky, sx, sy})
    if (!doc.contains(k)) throw ConfigError(k, "array geometry needs all of _mx, _my, _dx, _dy");
  out.given = true;
  read_int(doc, kx, out.g.mx, seen);
  read_int(doc, ky, out.g.my, seen);
  read_real(doc, sx, out.g.dx, seen);
  read_real(doc, sy, out.g.dy, seen);
  return out;
}

void rebuild_geometry(SystemConfig& cfg) {
  const double lam_dl = kSpeedOfLight / cfg.f_dl;
  const double lam_m = kSpeedOfLight / cfg.f_m;
  cfg.bs_array = planar_geometry(cfg.m1, lam_dl / 2.0);
  cfg.irs1_array = planar_geometry(cfg.n1, lam_dl / 2.0);
  cfg.mcr_array = planar_geometry(cfg.m2, lam_m / 2.0);
  cfg.irs2_array = planar_geometry(cfg.n2, lam_m / 2.0);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return splitmix64(splitmix64(splitmix64(a) ^ b) ^ c);
}

ArrayGeometry planar_geometry(int n, double spacing) {
  ArrayGeometry g;
  int best = 1;
  for (int a = 1; a * a <= n; ++a)
    if (n % a == 0) best = a;
  g.mx = best;
  g.my = n / best;
  g.dx = spacing;
  g.dy = spacing;
  return g;
}

double SystemConfig::noise_variance(Band b) const {
  return std::pow(10.0, (noise_psd_dbm_hz - 30.0) / 10.0) * bandwidth(b);
}

void SystemConfig::validate() const {
  require(p_max > 0.0, "p_max > 0");
  require(xi > 0.0 && xi <= 1.0, "0 < xi <= 1");
  require(m1 >= 1 && m2 >= 1 && n1 >= 1 && n2 >= 1, "antenna and element counts >= 1");
  require(num_iotds >= 1 && num_users >= 1, "num_iotds and num_users >= 1");
  require(f_s > 0.0 && f_m > 0.0 && f_dl > 0.0, "carrier frequencies > 0");
  require(b_s > 0.0 && b_m > 0.0, "bandwidths > 0");
  require(kappa >= 0.0, "kappa >= 0");
  require(d0 > 0.0, "d0 > 0");
  require(std::isfinite(rho0_db), "rho0_db finite");
  require(noise_variance(Band::sub6) > 0.0 && noise_variance(Band::mmwave) > 0.0,
          "noise variance > 0");
  const Distances& d = distances;
  for (double x : {d.d_H, d.d_hd, d.d_hr, d.d_gr, d.d_gd, d.d_G, d.d_d})
    require(x > 0.0, "all distances > 0");
  require(static_cast<int>(volumes.size()) == num_iotds, "one volume per IoTD");
  require(static_cast<int>(weights.size()) == num_iotds, "one weight per IoTD");
  for (double v : volumes) require(v > 0.0, "all volumes > 0");
  for (double w : weights) require(w > 0.0, "all weights > 0");
  auto geom_ok = [](const ArrayGeometry& g, int n) {
    return g.mx >= 1 && g.my >= 1 && g.mx * g.my == n && g.dx >= 0.0 && g.dy >= 0.0;
  };
  require(geom_ok(bs_array, m1), "bs_mx * bs_my == m1");
  require(geom_ok(mcr_array, m2), "mcr_mx * mcr_my == m2");
  require(geom_ok(irs1_array, n1), "irs1_mx * irs1_my == n1");
  require(geom_ok(irs2_array, n2), "irs2_mx * irs2_my == n2");
  require(n_rand >= 1, "n_rand >= 1");
  require(t_max >= 0 && t_inner_max >= 1 && t_dca_max >= 1 && sdp_max_iter >= 1,
          "iteration caps");
  require(theta1_grid >= 2 && theta1_passes >= 1 && theta1_refine_tol > 0.0,
          "theta1 search settings");
  require(delta > 0.0 && delta < 1.0, "0 < delta < 1");
  require(epsilon_newton > 0.0 && epsilon_newton < 1.0, "0 < epsilon_newton < 1");
  require(tol.eps1 > 0.0 && tol.eps2 > 0.0 && tol.eps_dca > 0.0 && tol.eps_sdp > 0.0 &&
              tol.eps_leak > 0.0,
          "tolerances > 0");
  require(train_speed >= 0.0, "train_speed >= 0");
  require(slot_duration > 0.0, "slot_duration > 0");
  require(pilot_overhead >= 0.0, "pilot_overhead >= 0");
  require(track.lateral_offset > 0.0 && track.mcr_extra_distance >= 0.0, "track layout");
}

std::vector<double> default_volumes(int num_iotds, std::uint64_t scenario_seed) {
  std::mt19937_64 rng(derive_seed(scenario_seed, 0x766f6c));
  std::vector<double> v(static_cast<std::size_t>(num_iotds));
  for (auto& x : v) x = 1e6 + 1e6 * uniform01(rng);
  return v;
}

std::vector<double> default_weights(int num_iotds, std::uint64_t scenario_seed) {
  std::mt19937_64 rng(derive_seed(scenario_seed, 0x776774));
  std::vector<double> w(static_cast<std::size_t>(num_iotds));
  for (auto& x : w) x = 1.0 - uniform01(rng);
  return w;
}

SystemConfig default_config() {
  SystemConfig cfg;
  cfg.volumes = default_volumes(cfg.num_iotds, cfg.scenario_seed);
  cfg.weights = default_weights(cfg.num_iotds, cfg.scenario_seed);
  rebuild_geometry(cfg);
  return cfg;
}

SystemConfig load_config(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", e.what());
  }
  if (!doc.is_object()) throw ConfigError("<document>", "expected a JSON object");

  SystemConfig cfg;
  std::set<std::string> seen;
  read_int(doc, "m1", cfg.m1, seen);
  read_int(doc, "m2", cfg.m2, seen);
  read_int(doc, "n1", cfg.n1, seen);
  read_int(doc, "n2", cfg.n2, seen);
  read_int(doc, "num_iotds", cfg.num_iotds, seen);
  read_int(doc, "num_users", cfg.num_users, seen);
  read_real(doc, "f_s", cfg.f_s, seen);
  read_real(doc, "f_m", cfg.f_m, seen);
  read_real(doc, "f_dl", cfg.f_dl, seen);
  read_real(doc, "b_s", cfg.b_s, seen);
  read_real(doc, "b_m", cfg.b_m, seen);
  read_real(doc, "p_max", cfg.p_max, seen);
  read_real(doc, "xi", cfg.xi, seen);
  read_real(doc, "kappa", cfg.kappa, seen);
  read_real(doc, "rho0_db", cfg.rho0_db, seen);
  read_real(doc, "d0", cfg.d0, seen);
  read_real(doc, "alpha_ref", cfg.alpha_ref, seen);
  read_real(doc, "alpha_dir", cfg.alpha_dir, seen);
  read_real(doc, "noise_psd_dbm_hz", cfg.noise_psd_dbm_hz, seen);
  read_real(doc, "d_H", cfg.distances.d_H, seen);
  read_real(doc, "d_hd", cfg.distances.d_hd, seen);
  read_real(doc, "d_hr", cfg.distances.d_hr, seen);
  read_real(doc, "d_gr", cfg.distances.d_gr, seen);
  read_real(doc, "d_gd", cfg.distances.d_gd, seen);
  read_real(doc, "d_G", cfg.distances.d_G, seen);
  read_real(doc, "d_d", cfg.distances.d_d, seen);
  read_real(doc, "eaves_zod", cfg.eaves_zod, seen);
  read_real(doc, "eaves_zoa", cfg.eaves_zoa, seen);
  read_opt(doc, "irs1_present", cfg.irs1_present, seen);
  read_opt(doc, "irs2_present", cfg.irs2_present, seen);
  if (doc.contains("scenario_seed")) {
    seen.insert("scenario_seed");
    if (!doc.at("scenario_seed").is_number_unsigned())
      throw ConfigError("scenario_seed", "expected an unsigned integer");
    cfg.scenario_seed = doc.at("scenario_seed").get<std::uint64_t>();
  }
  read_opt(doc, "volumes", cfg.volumes, seen);
  read_opt(doc, "weights", cfg.weights, seen);
  read_int(doc, "n_rand", cfg.n_rand, seen);
  read_real(doc, "eps1", cfg.tol.eps1, seen);
  read_real(doc, "eps2", cfg.tol.eps2, seen);
  read_real(doc, "eps_dca", cfg.tol.eps_dca, seen);
  read_real(doc, "eps_sdp", cfg.tol.eps_sdp, seen);
  read_real(doc, "eps_leak", cfg.tol.eps_leak, seen);
  read_int(doc, "t_max", cfg.t_max, seen);
  read_int(doc, "t_inner_max", cfg.t_inner_max, seen);
  read_int(doc, "t_dca_max", cfg.t_dca_max, seen);
  read_int(doc, "sdp_max_iter", cfg.sdp_max_iter, seen);
  read_int(doc, "theta1_grid", cfg.theta1_grid, seen);
  read_int(doc, "theta1_passes", cfg.theta1_passes, seen);
  read_real(doc, "theta1_refine_tol", cfg.theta1_refine_tol, seen);
  read_real(doc, "delta", cfg.delta, seen);
  read_real(doc, "epsilon_newton", cfg.epsilon_newton, seen);
  read_real(doc, "train_speed", cfg.train_speed, seen);
  read_real(doc, "slot_duration", cfg.slot_duration, seen);
  read_real(doc, "pilot_overhead", cfg.pilot_overhead, seen);
  read_real(doc, "train_position", cfg.train_position, seen);
  read_real(doc, "track_lateral_offset", cfg.track.lateral_offset, seen);
  read_real(doc, "track_mcr_extra_distance", cfg.track.mcr_extra_distance, seen);

  rebuild_geometry(cfg);
  const GeometryKeys bs = read_geometry(doc, "bs", seen);
  const GeometryKeys mcr = read_geometry(doc, "mcr", seen);
  const GeometryKeys irs1 = read_geometry(doc, "irs1", seen);
  const GeometryKeys irs2 = read_geometry(doc, "irs2", seen);
  if (bs.given) cfg.bs_array = bs.g;
  if (mcr.given) cfg.mcr_array = mcr.g;
  if (irs1.given) cfg.irs1_array = irs1.g;
  if (irs2.given) cfg.irs2_array = irs2.g;

  for (const auto& [key, value] : doc.items())
    if (!seen.count(key)) throw ConfigError(key, "unknown key");

  if (cfg.num_iotds < 1) throw ValidationError("num_iotds >= 1");
  if (!doc.contains("volumes")) cfg.volumes = default_volumes(cfg.num_iotds, cfg.scenario_seed);
  if (!doc.contains("weights")) cfg.weights = default_weights(cfg.num_iotds, cfg.scenario_seed);
  cfg.validate();
  return cfg;
}

SystemConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return load_config(ss.str());
}

SystemConfig with_elements(const SystemConfig& cfg, int n1, int n2) {
  if (n1 < 0 || n2 < 0) throw ValidationError("element counts >= 0");
  SystemConfig out = cfg;
  out.irs1_present = cfg.irs1_present && n1 > 0;
  out.irs2_present = cfg.irs2_present && n2 > 0;
  out.n1 = std::max(n1, 1);
  out.n2 = std::max(n2, 1);
  const double lam_dl = kSpeedOfLight / cfg.f_dl;
  const double lam_m = kSpeedOfLight / cfg.f_m;
  out.irs1_array = planar_geometry(out.n1, lam_dl / 2.0);
  out.irs2_array = planar_geometry(out.n2, lam_m / 2.0);
  return out;
}

VectorXcd array_response(const ArrayGeometry& geometry, double theta1, double theta2,
                         double wavelength) {
  if (geometry.mx < 1 || geometry.my < 1) throw ContractError("array counts must be >= 1");
  if (!(wavelength > 0.0)) throw DomainError("wavelength must be > 0");
  const double kx = kTwoPi * geometry.dx / wavelength * std::sin(theta1) * std::cos(theta2);
  const double ky = kTwoPi * geometry.dy / wavelength * std::sin(theta1) * std::sin(theta2);
  VectorXcd out(geometry.mx * geometry.my);
  for (int m = 0; m < geometry.mx; ++m)
    for (int n = 0; n < geometry.my; ++n)
      out(m * geometry.my + n) = std::polar(1.0, kx * m + ky * n);
  return out;
}

double path_loss(double distance, double exponent, const SystemConfig& cfg) {
  if (!(distance > 0.0)) throw DomainError("path_loss: distance must be > 0");
  return std::pow(10.0, cfg.rho0_db / 10.0) * std::pow(distance / cfg.d0, -exponent);
}

TrainState make_train_state(const TrackLayout& layout, double position, double speed,
                            double dt) {
  if (speed < 0.0) throw DomainError("train speed must be >= 0");
  if (!(dt > 0.0)) throw DomainError("slot duration must be > 0");
  TrainState s;
  s.position = position;
  s.speed = speed;
  s.dt = dt;
  const double dist = std::hypot(position, layout.lateral_offset);
  // Travel along +x; the IoTD sits at the origin, so the line of sight from
  // the train points along -position.
  s.phi_d = wrap_phase(std::acos(std::clamp(-position / dist, -1.0, 1.0)));
  s.phi_c = s.phi_d;
  return s;
}

SystemConfig config_at_position(const SystemConfig& cfg, double position) {
  SystemConfig out = cfg;
  const double dist = std::hypot(position, cfg.track.lateral_offset);
  out.distances.d_gr = dist;
  out.distances.d_gd = dist + cfg.track.mcr_extra_distance;
  return out;
}

ChannelSet build_channel_set(const SystemConfig& cfg, const std::optional<TrainState>& train,
                             std::uint64_t seed) {
  cfg.validate();
  const int L = cfg.num_iotds, K = cfg.num_users;
  const Rician rw = rician_weights(cfg.kappa);
  const Distances& dist = cfg.distances;
  const double lam_dl = kSpeedOfLight / cfg.f_dl;

  ChannelSet ch;
  ch.seed = seed;

  // Angles come from their own stream so that they are shared by both bands.
  std::mt19937_64 ang(derive_seed(seed, 1));
  std::mt19937_64 nlos_dl(derive_seed(seed, 2));

  auto compose = [&](const MatrixXcd& los, double gain, std::mt19937_64& rng) {
    MatrixXcd nlos = complex_gaussian(los.rows(), los.cols(), rng);
    return MatrixXcd(std::sqrt(gain) * (rw.los * los + rw.nlos * nlos));
  };

  // Downlink.
  {
    const double z_a = uniform_angle(ang), az_a = uniform_angle(ang);
    const double z_d = uniform_angle(ang), az_d = uniform_angle(ang);
    MatrixXcd los = array_response(cfg.irs1_array, z_a, az_a, lam_dl) *
                    array_response(cfg.bs_array, z_d, az_d, lam_dl).adjoint();
    ch.H = compose(los, path_loss(dist.d_H, cfg.alpha_ref, cfg), nlos_dl);
  }
  for (int l = 0; l < L; ++l) {
    const double z_r = uniform_angle(ang), az_r = uniform_angle(ang);
    const double z_d = uniform_angle(ang), az_d = uniform_angle(ang);
    MatrixXcd los_r = array_response(cfg.irs1_array, z_r, az_r, lam_dl).adjoint();
    MatrixXcd los_d = array_response(cfg.bs_array, z_d, az_d, lam_dl).adjoint();
    ch.h_r.push_back(compose(los_r, path_loss(dist.d_hr, cfg.alpha_ref, cfg), nlos_dl).row(0));
    ch.h_d.push_back(compose(los_d, path_loss(dist.d_hd, cfg.alpha_dir, cfg), nlos_dl).row(0));
  }
  if (!cfg.irs1_present) {
    ch.H.setZero();
    for (auto& h : ch.h_r) h.setZero();
  }

  // Uplink angles, shared by both bands.
  const double G_za = uniform_angle(ang), G_aza = uniform_angle(ang);
  const double G_zd = uniform_angle(ang), G_azd = uniform_angle(ang);
  std::vector<std::array<double, 4>> iot(static_cast<std::size_t>(L));
  for (auto& a : iot)
    for (double& x : a) x = uniform_angle(ang);
  if (train) {
    for (auto& a : iot) {
      a[1] = train->phi_c;
      a[3] = train->phi_d;
    }
  }
  std::vector<double> user_az(static_cast<std::size_t>(K));
  for (double& x : user_az) x = uniform_angle(ang);

  for (Band b : kBands) {
    std::mt19937_64 rng(derive_seed(seed, 3 + static_cast<std::uint64_t>(index(b))));
    const double lam = cfg.wavelength(b);
    BandChannels& bc = ch.up[b];
    MatrixXcd los_G = array_response(cfg.mcr_array, G_za, G_aza, lam) *
                      array_response(cfg.irs2_array, G_zd, G_azd, lam).adjoint();
    bc.G = compose(los_G, path_loss(dist.d_G, cfg.alpha_ref, cfg), rng);
    for (int l = 0; l < L; ++l) {
      const auto& a = iot[static_cast<std::size_t>(l)];
      MatrixXcd los_r = array_response(cfg.irs2_array, a[0], a[1], lam);
      MatrixXcd los_d = array_response(cfg.mcr_array, a[2], a[3], lam);
      bc.g_r.push_back(compose(los_r, path_loss(dist.d_gr, cfg.alpha_ref, cfg), rng).col(0));
      bc.g_d.push_back(compose(los_d, path_loss(dist.d_gd, cfg.alpha_dir, cfg), rng).col(0));
    }
    for (int k = 0; k < K; ++k) {
      MatrixXcd los = array_response(cfg.irs2_array, cfg.eaves_zod,
                                     user_az[static_cast<std::size_t>(k)], lam)
                          .adjoint();
      bc.d.push_back(compose(los, path_loss(dist.d_d, cfg.alpha_ref, cfg), rng).row(0));
    }
    if (!cfg.irs2_present) {
      bc.G.setZero();
      for (auto& g : bc.g_r) g.setZero();
      for (auto& d : bc.d) d.setZero();
    }
  }
  return ch;
}

}  // namespace hsrirs
