#pragma once

// Downlink block: time split beta, energy beams W, IRS1 phases theta1.

#include "hsrirs/linkmetrics.hpp"

#include <vector>

namespace hsrirs {

/// One term w * (1 - beta) log2(1 + beta a / ((b - c) beta + c)).
struct BetaTerm {
  double weight = 0.0;  // lambda eta B
  double a = 0.0;
  double b = 0.0;
  double c = 1.0;
};

struct BetaCoefficients {
  std::vector<BetaTerm> terms;
};

struct BetaResult {
  double beta = 0.5;
  double lo = 0.0;  // final bracket
  double hi = 1.0;
  double derivative = 0.0;
  bool boundary = false;
  bool degenerate = false;
};

double beta_objective(const BetaCoefficients& coeffs, double beta);
double beta_derivative(const BetaCoefficients& coeffs, double beta);

/// Coefficients for the current W, decoders, gamma and phases.
BetaCoefficients beta_coefficients(const SystemConfig& cfg, const LinkState& s,
                                   const Decisions& dec, const VectorXd& lambda_eta);

/// Maximizes the concave beta objective by bisection on its derivative.
BetaResult optimize_beta(const BetaCoefficients& coeffs);

/// Quadratic-minus-norm split of the weighted MSE sum as a function of W:
/// f(W) = Tr(W^H Q W) - sum_l d_l ||h_bar_l W||.
struct DcaModel {
  MatrixXcd Q;
  std::vector<RowVectorXcd> h_bar;
  VectorXd d;

  double g(const MatrixXcd& W) const;
  double h(const MatrixXcd& W) const;
  double value(const MatrixXcd& W) const { return g(W) - h(W); }
  /// Linearization slope of h at W.
  MatrixXcd slope(const MatrixXcd& W) const;
};

DcaModel dca_model(const SystemConfig& cfg, const LinkState& s, const Decisions& dec,
                   const PerBand<VectorXd>& gamma_mse);

struct EnergySubproblemResult {
  MatrixXcd W;
  double nu = 0.0;
};

/// argmin Tr(W^H Q W) - 2 Re Tr(V^H W) subject to ||W||_F^2 <= p_max.
/// eig_vals/eig_vecs is the eigendecomposition of Q.
EnergySubproblemResult energy_subproblem(const VectorXd& eig_vals, const MatrixXcd& eig_vecs,
                                         const MatrixXcd& V, double p_max);

struct DcaResult {
  MatrixXcd W;
  std::vector<double> trace;  // f(W^t), starting point first
  int iterations = 0;
};

DcaResult dca_energy_beams(const DcaModel& model, const MatrixXcd& W0, double p_max,
                           double eps_dca, int t_dca_max);

/// Sum over IoTDs of lambda eta (C_s + C_m) as a function of theta1 only.
class Theta1Objective {
 public:
  Theta1Objective(const SystemConfig& cfg, const ChannelSet& ch, const Decisions& dec,
                  const VectorXd& lambda_eta);

  double value(const VectorXd& theta1) const;
  double value_from_gains(const VectorXd& gains) const;  // gains_l = ||h_bar_l W||^2

  const ChannelSet& channels() const { return *ch_; }
  const MatrixXcd& W() const { return W_; }

 private:
  std::vector<double> bandwidth_;
  PerBand<MatrixXd> q_;       // |f_l^H g_bar_i|^2
  PerBand<VectorXd> noise_;   // sigma2 ||f_l||^2
  PerBand<VectorXd> share_;   // gamma, 1 - gamma
  VectorXd weight_;           // lambda eta
  double scale_ = 0.0;        // xi beta / (1 - beta)
  double time_share_ = 0.0;   // 1 - beta
  const ChannelSet* ch_ = nullptr;
  MatrixXcd W_;
};

/// Coordinate ascent: per element, a uniform phase grid then golden-section
/// refinement. Never returns a point worse than the input.
VectorXd optimize_theta1(const Theta1Objective& obj, const VectorXd& theta1, int grid,
                         int passes, double refine_tol);

}  // namespace hsrirs
