#pragma once

// Sum-of-ratios machinery and the block coordinate descent driver.

#include "hsrirs/downlink.hpp"
#include "hsrirs/linkmetrics.hpp"
#include "hsrirs/uplink.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hsrirs {

struct VolumeSplit {
  double v_s = 0.0;
  double alpha = 0.0;
};

/// v_s = v C_s / (C_s + C_m): both bands then finish at the same time.
VolumeSplit optimal_volume_split(double v, double c_s, double c_m);

/// lambda = 1 / (C_s + C_m), eta = w v / (C_s + C_m).
RatioMultipliers init_multipliers(const VectorXd& c_s, const VectorXd& c_m,
                             const std::vector<double>& weights,
                             const std::vector<double>& volumes);

/// Gamma_{F,l} = lambda_l eta_l B_F / e_{F,l}.
PerBand<VectorXd> mse_weights(const VectorXd& lambda, const VectorXd& eta,
                              const PerBand<double>& bandwidth, const PerBand<VectorXd>& mse);

/// psi1_l = -w_l v_l + eta_l C_l and psi2_l = -1 + lambda_l C_l.
struct Psi {
  VectorXd psi1;
  VectorXd psi2;
};

Psi psi(const RatioMultipliers& mu, const VectorXd& capacity, const std::vector<double>& weights,
        const std::vector<double>& volumes);

/// Norm of (psi1 / (w v), psi2); both parts are dimensionless.
double psi_norm(const Psi& p, const std::vector<double>& weights,
                const std::vector<double>& volumes);

struct NewtonResult {
  RatioMultipliers mu;
  int step_exponent = 0;
  bool stagnated = false;
};

/// Damped Newton step on psi with the Armijo-type rule
/// ||psi(mu')|| <= (1 - epsilon delta^i) ||psi(mu)||, smallest i, capped at 50.
NewtonResult newton_update_multipliers(const RatioMultipliers& mu, const VectorXd& c_s,
                                       const VectorXd& c_m, const std::vector<double>& weights,
                                       const std::vector<double>& volumes, double delta,
                                       double epsilon);

struct TraceRecord {
  int outer = 0;
  int inner = 0;
  std::string block;
  double objective = 0.0;
  double psi_norm = 0.0;
};

struct BcdOptions {
  std::uint64_t seed = 1;
  bool optimize_w = true;
  bool optimize_theta1 = true;
  bool optimize_theta2 = true;
  /// Benchmark energy beams: Re, Im ~ U(0, 1), scaled to full power, held fixed.
  bool benchmark_w = false;
};

struct BcdSolution {
  Decisions decisions;
  RatioMultipliers multipliers;
  LatencyReport report;
  std::vector<TraceRecord> trace;
  double initial_objective = 0.0;
  double first_outer_objective = 0.0;
  int outer_iterations = 0;
  bool converged = false;
  int sdp_infeasible = 0;       // theta2 passes that had to relax the leakage bound
  double eps_leak_used = 0.0;   // largest leakage bound that was needed
};

/// Random initial point: beta, alpha, gamma ~ U(0, 1), phases ~ U(0, 2 pi),
/// W and F with Re, Im ~ U(-1, 1), W scaled to full power.
Decisions initial_decisions(const SystemConfig& cfg, std::uint64_t seed, bool benchmark_w);

BcdSolution bcd_solve(const SystemConfig& cfg, const ChannelSet& ch, const BcdOptions& options);

}  // namespace hsrirs
