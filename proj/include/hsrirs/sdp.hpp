#pragma once

// Dual ADMM for   min Tr(C X)  s.t.  diag(X) = 1,  Tr(D_j X) <= eps,  X psd.
// Inequalities carry nonnegative slacks stored as a diagonal psd block.

#include "hsrirs/types.hpp"

#include <vector>

namespace hsrirs {

struct SdpSettings {
  double eps = 2e-4;      // relative primal/dual residual and gap
  int max_iter = 400;
  double mu0 = 1.0;
  int patience = 50;  // iterations one residual must lead before mu moves
  double relax = 1.6;  // primal step length, in (0, (1 + sqrt 5) / 2)
};

/// Iterates kept between calls that share the same constraint set.
struct SdpWarmStart {
  bool valid = false;
  MatrixXcd X;
  MatrixXcd S;
  VectorXd xs;  // slack primal
  VectorXd ss;  // slack dual
  double mu = 1.0;
};

struct KktResiduals {
  double psd_violation = 0.0;   // -min eigenvalue of X, clipped at 0
  double diag_violation = 0.0;  // max |X_ii - 1|
  double eq_violation = 0.0;    // max over j of (Tr(D_j X) - eps)_+
};

struct SdpResult {
  MatrixXcd X;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  KktResiduals kkt;
  int iterations = 0;
  bool converged = false;
  bool infeasible = false;
  int binding_constraints = 0;  // constraints that alone rule out feasibility
};

/// C and every D_j are Hermitian n x n. eps_leak is the common bound.
SdpResult solve_diag_sdp(const MatrixXcd& C, const std::vector<MatrixXcd>& D, double eps_leak,
                         const SdpSettings& settings, SdpWarmStart* warm = nullptr);

}  // namespace hsrirs
