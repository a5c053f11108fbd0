#pragma once

// Uplink block: band power split gamma, MMSE decoders F, IRS2 phases theta2.

#include "hsrirs/linkmetrics.hpp"
#include "hsrirs/sdp.hpp"

#include <functional>
#include <random>
#include <vector>

namespace hsrirs {

// ---- gamma ----------------------------------------------------------------

struct GammaProblem {
  VectorXd power;              // harvested p_l
  PerBand<MatrixXd> q;         // |f_l^H g_bar_i|^2
  PerBand<VectorXd> noise;     // sigma2 ||f_l||^2
  PerBand<double> bandwidth;
};

GammaProblem gamma_problem(const SystemConfig& cfg, const LinkState& s, const Decisions& dec);

/// d/d gamma_l of IoTD l's two-band rate, with the other splits held fixed.
double gamma_derivative(const GammaProblem& pr, const VectorXd& gamma, int l, double gamma_l);

/// IoTD l's own two-band rate B_s log2(1 + SINR_s) + B_m log2(1 + SINR_m).
double gamma_own_rate(const GammaProblem& pr, const VectorXd& gamma, int l, double gamma_l);

struct GammaResult {
  double gamma = 0.0;
  double derivative = 0.0;
  bool boundary = false;
  bool no_power = false;
};

GammaResult optimize_gamma(const GammaProblem& pr, const VectorXd& gamma, int l);

// ---- decoders -------------------------------------------------------------

/// Column l = (sum_i p_i g_i g_i^H + sigma2 I)^{-1} sqrt(p_l) g_l.
MatrixXcd mmse_decoder(const std::vector<VectorXcd>& g_bar, const VectorXd& band_power,
                       double sigma2);

// ---- theta2 ---------------------------------------------------------------

struct SdrProblem {
  MatrixXcd Lambda;                     // (N2 + 1) square
  std::vector<MatrixXcd> constraint_mats;  // (N2 + 1) square, last row/column zero
  int n2 = 0;
};

/// Weighted MSE sum in theta2 as phi_bar^H Lambda phi_bar plus a constant,
/// and one leakage matrix per (band, IoTD, user).
SdrProblem build_sdr_problem(const ChannelSet& ch, const Decisions& dec, const LinkState& s,
                             const PerBand<VectorXd>& gamma_mse);

/// phi^H Xi phi + 2 Re(e phi) evaluated straight from decoders and channels.
double sdr_quadratic_direct(const ChannelSet& ch, const Decisions& dec, const LinkState& s,
                            const PerBand<VectorXd>& gamma_mse, const VectorXcd& phi);

struct SdrSolution {
  MatrixXcd Omega;
  double objective = 0.0;  // Tr(Lambda Omega)
  KktResiduals kkt_residuals;
  bool converged = false;
  bool infeasible = false;
  int binding_constraints = 0;
  int iterations = 0;
  double eps_leak = 0.0;   // bound actually used
};

/// Constraint j reads Tr(D_j Omega) <= eps_leak Tr(D_j) / N2: eps_leak counts
/// random-phase elements' worth of leakage, so eps_leak = N2 is the random-phase level.
SdrSolution solve_sdp(const SdrProblem& problem, double eps_sdp, double eps_leak, int max_iter,
                      SdpWarmStart* warm = nullptr);

struct PhaseScore {
  double objective = 0.0;
  double leakage = 0.0;
};

using PhaseEvaluator = std::function<PhaseScore(const VectorXd& theta2)>;

struct RecoveryResult {
  VectorXd theta2;
  PhaseScore score;
  bool improved = false;
};

/// Gauge-fixed phases exp(j arg(xi_n / xi_last)).
VectorXd normalize_phases(const VectorXcd& xi);

/// Gaussian randomization around Omega plus its principal eigenvector. A
/// candidate must not raise the objective nor push leakage above
/// max(leak_budget, incumbent leakage); among those, least excess leakage
/// wins, then lowest objective.
RecoveryResult recover_phases(const SdrSolution& solution, int n_rand, std::mt19937_64& rng,
                              const PhaseEvaluator& evaluate, const VectorXd& incumbent,
                              double leak_budget);

}  // namespace hsrirs
