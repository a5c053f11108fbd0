#include "hsrirs/sdp.hpp"

#include "hsrirs/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>

namespace hsrirs {

namespace {

double inner(const MatrixXcd& A, const MatrixXcd& B) {
  return (A.array().conjugate() * B.array()).sum().real();
}

}  // namespace

SdpResult solve_diag_sdp(const MatrixXcd& C, const std::vector<MatrixXcd>& D, double eps_leak,
                         const SdpSettings& settings, SdpWarmStart* warm) {
  const Eigen::Index n = C.rows();
  if (C.cols() != n) throw ContractError("solve_diag_sdp: cost matrix must be square");
  for (const auto& Dj : D)
    if (Dj.rows() != n || Dj.cols() != n)
      throw ContractError("solve_diag_sdp: constraint matrix size mismatch");
  const Eigen::Index J = static_cast<Eigen::Index>(D.size());
  const Eigen::Index m = n + J;

  SdpResult res;

  // Two lower bounds on Tr(D_j X) over diag(X) = 1, X psd: n lambda_min(D_j),
  // and Tr(D_j) + n lambda_min(D_j - Diag(D_j)) from the diagonal dual.
  for (const auto& Dj : D) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(Dj, Eigen::EigenvaluesOnly);
    MatrixXcd off = Dj;
    off.diagonal().setZero();
    Eigen::SelfAdjointEigenSolver<MatrixXcd> eo(off, Eigen::EigenvaluesOnly);
    const double nd = static_cast<double>(n);
    const double bound = std::max(es.eigenvalues()(0) * nd,
                                  Dj.trace().real() + eo.eigenvalues()(0) * nd);
    if (bound > eps_leak * (1.0 + 1e-9)) ++res.binding_constraints;
  }
  if (res.binding_constraints > 0) {
    res.infeasible = true;
    return res;
  }

  VectorXd b(m);
  b.head(n).setOnes();
  b.tail(J).setConstant(eps_leak);

  MatrixXd AAt = MatrixXd::Zero(m, m);
  AAt.topLeftCorner(n, n).setIdentity();
  for (Eigen::Index j = 0; j < J; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = D[static_cast<std::size_t>(j)](i, i).real();
      AAt(i, n + j) = v;
      AAt(n + j, i) = v;
    }
    for (Eigen::Index k = 0; k <= j; ++k) {
      double v = inner(D[static_cast<std::size_t>(j)], D[static_cast<std::size_t>(k)]);
      if (k == j) v += 1.0;
      AAt(n + j, n + k) = v;
      AAt(n + k, n + j) = v;
    }
  }
  Eigen::LDLT<MatrixXd> ldlt(AAt);

  auto apply_A = [&](const MatrixXcd& X, const VectorXd& xs) {
    VectorXd out(m);
    for (Eigen::Index i = 0; i < n; ++i) out(i) = X(i, i).real();
    for (Eigen::Index j = 0; j < J; ++j)
      out(n + j) = inner(D[static_cast<std::size_t>(j)], X) + xs(j);
    return out;
  };
  auto apply_At = [&](const VectorXd& y, MatrixXcd& M, VectorXd& ms) {
    M = MatrixXcd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) M(i, i) = y(i);
    for (Eigen::Index j = 0; j < J; ++j) M += y(n + j) * D[static_cast<std::size_t>(j)];
    ms = y.tail(J);
  };

  const double cnorm = C.norm();
  const double bnorm = b.norm();

  MatrixXcd X, S;
  VectorXd xs, ss;
  double mu = settings.mu0;
  if (warm && warm->valid && warm->X.rows() == n && warm->xs.size() == J) {
    X = warm->X;
    S = warm->S;
    xs = warm->xs;
    ss = warm->ss;
    mu = warm->mu;
  } else {
    X = MatrixXcd::Identity(n, n);
    S = MatrixXcd::Zero(n, n);
    xs = VectorXd::Zero(J);
    ss = VectorXd::Zero(J);
  }

  VectorXd y = VectorXd::Zero(m);
  MatrixXcd Aty;
  VectorXd Atys;
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(n);
  double pinf = 0.0, dinf = 0.0, gap = 0.0;
  int primal_lead = 0, dual_lead = 0;
  int it = 0;
  for (; it < settings.max_iter; ++it) {
    // y from the normal equations.
    const VectorXd rhs = mu * (b - apply_A(X, xs)) + apply_A(C - S, -ss);
    y = ldlt.solve(rhs);
    apply_At(y, Aty, Atys);

    MatrixXcd V = C - Aty - mu * X;
    V = 0.5 * (V + V.adjoint());
    const VectorXd Vs = -Atys - mu * xs;
    es.compute(V);
    const VectorXd& ev = es.eigenvalues();
    const MatrixXcd& U = es.eigenvectors();
    // Eigenvalues come sorted ascending: the negative part is a leading block.
    Eigen::Index k = 0;
    while (k < n && ev(k) < 0.0) ++k;
    const MatrixXcd Un = U.leftCols(k);
    const MatrixXcd Xn = Un * (-ev.head(k) / mu).asDiagonal() * Un.adjoint();
    S = V + mu * Xn;
    ss = Vs.cwiseMax(0.0);
    const VectorXd xsn = (-Vs.cwiseMin(0.0)) / mu;
    X = (1.0 - settings.relax) * X + settings.relax * Xn;
    xs = (1.0 - settings.relax) * xs + settings.relax * xsn;

    const VectorXd ax = apply_A(X, xs);
    pinf = (ax - b).norm() / (1.0 + bnorm);
    dinf = mu * std::sqrt(Xn.squaredNorm() + xsn.squaredNorm()) / (1.0 + cnorm);
    const double pobj = inner(C, X);
    const double dobj = b.dot(y);
    gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    if (std::max({pinf, dinf, gap}) <= settings.eps) {
      ++it;
      break;
    }
    // Rebalance only after one residual has led for a while.
    if (pinf <= dinf) {
      ++primal_lead;
      dual_lead = 0;
    } else {
      ++dual_lead;
      primal_lead = 0;
    }
    if (primal_lead >= settings.patience) {
      mu = std::max(mu * 0.5, 1e-8);
      primal_lead = 0;
    } else if (dual_lead >= settings.patience) {
      mu = std::min(mu * 2.0, 1e8);
      dual_lead = 0;
    }
  }

  res.X = X;
  res.iterations = it;
  res.primal_residual = pinf;
  res.dual_residual = dinf;
  res.converged = std::max({pinf, dinf, gap}) <= settings.eps;
  res.primal_objective = inner(C, X);
  res.dual_objective = b.dot(y);
  {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> ex(X, Eigen::EigenvaluesOnly);
    res.kkt.psd_violation = std::max(0.0, -ex.eigenvalues()(0));
  }
  for (Eigen::Index i = 0; i < n; ++i)
    res.kkt.diag_violation = std::max(res.kkt.diag_violation, std::abs(X(i, i).real() - 1.0));
  for (Eigen::Index j = 0; j < J; ++j)
    res.kkt.eq_violation = std::max(
        res.kkt.eq_violation, inner(D[static_cast<std::size_t>(j)], X) - eps_leak);
  res.kkt.eq_violation = std::max(res.kkt.eq_violation, 0.0);

  if (warm) {
    warm->valid = true;
    warm->X = X;
    warm->S = S;
    warm->xs = xs;
    warm->ss = ss;
    warm->mu = mu;
  }
  return res;
}

}  // namespace hsrirs
