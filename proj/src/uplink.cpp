#include "hsrirs/uplink.hpp"

#include "hsrirs/errors.hpp"

#include <Eigen/Eigenvalues>

#include <limits>

namespace hsrirs {

// ---- gamma ----------------------------------------------------------------

GammaProblem gamma_problem(const SystemConfig& cfg, const LinkState& s, const Decisions& dec) {
  const int L = cfg.num_iotds;
  GammaProblem pr;
  pr.power = s.power;
  for (Band b : kBands) {
    pr.bandwidth[b] = cfg.bandwidth(b);
    pr.q[b] = MatrixXd::Zero(L, L);
    pr.noise[b] = VectorXd::Zero(L);
    const MatrixXcd& F = dec.ul.F[b];
    for (int l = 0; l < L; ++l) {
      for (int i = 0; i < L; ++i)
        pr.q[b](l, i) = std::norm(F.col(l).dot(s.eff.g_bar[b][static_cast<std::size_t>(i)]));
      pr.noise[b](l) = cfg.noise_variance(b) * F.col(l).squaredNorm();
    }
  }
  return pr;
}

namespace {

// Interference plus noise seen by IoTD l in band b, excluding its own signal.
double other_terms(const GammaProblem& pr, const VectorXd& gamma, int l, Band b) {
  double acc = pr.noise[b](l);
  for (Eigen::Index i = 0; i < gamma.size(); ++i) {
    if (i == l) continue;
    const double share = b == Band::sub6 ? gamma(i) : 1.0 - gamma(i);
    acc += share * pr.power(i) * pr.q[b](l, i);
  }
  return acc;
}

}  // namespace

double gamma_derivative(const GammaProblem& pr, const VectorXd& gamma, int l, double gamma_l) {
  const double p = pr.power(l);
  double d = 0.0;
  for (Band b : kBands) {
    const double share = b == Band::sub6 ? gamma_l : 1.0 - gamma_l;
    const double sign = b == Band::sub6 ? 1.0 : -1.0;
    const double num = pr.bandwidth[b] * p * pr.q[b](l, l);
    if (num == 0.0) continue;
    const double den = share * p * pr.q[b](l, l) + other_terms(pr, gamma, l, b);
    d += sign * num / den;
  }
  return d;
}

double gamma_own_rate(const GammaProblem& pr, const VectorXd& gamma, int l, double gamma_l) {
  const double p = pr.power(l);
  double r = 0.0;
  for (Band b : kBands) {
    const double share = b == Band::sub6 ? gamma_l : 1.0 - gamma_l;
    const double sig = share * p * pr.q[b](l, l);
    if (sig <= 0.0) continue;
    r += pr.bandwidth[b] * std::log2(1.0 + sig / other_terms(pr, gamma, l, b));
  }
  return r;
}

GammaResult optimize_gamma(const GammaProblem& pr, const VectorXd& gamma, int l) {
  GammaResult r;
  r.gamma = gamma(l);
  if (!(pr.power(l) > 0.0)) {
    r.no_power = true;
    return r;
  }
  const double d0 = gamma_derivative(pr, gamma, l, 0.0);
  const double d1 = gamma_derivative(pr, gamma, l, 1.0);
  if (d0 <= 0.0) {
    r.gamma = 0.0;
    r.boundary = true;
    r.derivative = d0;
    return r;
  }
  if (d1 >= 0.0) {
    r.gamma = 1.0;
    r.boundary = true;
    r.derivative = d1;
    return r;
  }
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon(); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double d = gamma_derivative(pr, gamma, l, mid);
    if (d > 0.0)
      lo = mid;
    else if (d < 0.0)
      hi = mid;
    else {
      lo = hi = mid;
      break;
    }
  }
  r.gamma = 0.5 * (lo + hi);
  r.derivative = gamma_derivative(pr, gamma, l, r.gamma);
  return r;
}

// ---- decoders -------------------------------------------------------------

MatrixXcd mmse_decoder(const std::vector<VectorXcd>& g_bar, const VectorXd& band_power,
                       double sigma2) {
  if (!(sigma2 > 0.0)) throw DomainError("mmse_decoder: noise variance must be > 0");
  const Eigen::Index L = static_cast<Eigen::Index>(g_bar.size());
  if (band_power.size() != L || L == 0)
    throw ContractError("mmse_decoder: power count does not match IoTD count");
  const Eigen::Index M = g_bar[0].size();
  MatrixXcd R = sigma2 * MatrixXcd::Identity(M, M);
  MatrixXcd rhs(M, L);
  for (Eigen::Index i = 0; i < L; ++i) {
    const VectorXcd& g = g_bar[static_cast<std::size_t>(i)];
    if (g.size() != M) throw ContractError("mmse_decoder: channel length mismatch");
    R.noalias() += band_power(i) * (g * g.adjoint());
    rhs.col(i) = std::sqrt(std::max(band_power(i), 0.0)) * g;
  }
  return R.llt().solve(rhs);
}

// ---- theta2 ---------------------------------------------------------------

SdrProblem build_sdr_problem(const ChannelSet& ch, const Decisions& dec, const LinkState& s,
                             const PerBand<VectorXd>& gamma_mse) {
  const Eigen::Index N = ch.up[Band::sub6].G.cols();
  const Eigen::Index L = static_cast<Eigen::Index>(ch.h_d.size());
  SdrProblem pr;
  pr.n2 = static_cast<int>(N);
  MatrixXcd Xi = MatrixXcd::Zero(N, N);
  RowVectorXcd e = RowVectorXcd::Zero(N);
  for (Band b : kBands) {
    const BandChannels& bc = ch.up[b];
    const MatrixXcd& F = dec.ul.F[b];
    const VectorXd& p = s.band_power[b];
    MatrixXcd A = MatrixXcd::Zero(N, N);
    MatrixXcd B = MatrixXcd::Zero(N, N);
    std::vector<VectorXcd> x(static_cast<std::size_t>(L));
    for (Eigen::Index l = 0; l < L; ++l) {
      x[static_cast<std::size_t>(l)] = bc.G.adjoint() * F.col(l);
      const VectorXcd& xl = x[static_cast<std::size_t>(l)];
      A.noalias() += gamma_mse[b](l) * (xl * xl.adjoint());
      const VectorXcd& g = bc.g_r[static_cast<std::size_t>(l)];
      B.noalias() += p(l) * (g * g.adjoint());
    }
    Xi += A.cwiseProduct(B.transpose());
    // Linear part: f^H G diag(g_r) phi has coefficients conj(x_l) .* g_r.
    for (Eigen::Index l = 0; l < L; ++l) {
      const VectorXcd& xl = x[static_cast<std::size_t>(l)];
      const double w = gamma_mse[b](l);
      for (Eigen::Index i = 0; i < L; ++i) {
        const VectorXcd& gr = bc.g_r[static_cast<std::size_t>(i)];
        const cd bli = F.col(l).dot(bc.g_d[static_cast<std::size_t>(i)]);
        const RowVectorXcd a = xl.conjugate().cwiseProduct(gr).transpose();
        e += w * p(i) * std::conj(bli) * a;
        if (i == l) e -= w * std::sqrt(std::max(p(l), 0.0)) * a;
      }
    }
  }
  pr.Lambda = MatrixXcd::Zero(N + 1, N + 1);
  pr.Lambda.topLeftCorner(N, N) = 0.5 * (Xi + Xi.adjoint());
  pr.Lambda.block(0, N, N, 1) = e.adjoint();
  pr.Lambda.block(N, 0, 1, N) = e;

  for (Band b : kBands) {
    const BandChannels& bc = ch.up[b];
    for (const auto& g : bc.g_r)
      for (const auto& d : bc.d) {
        const VectorXcd v = d.transpose().cwiseProduct(g).conjugate();
        MatrixXcd D = MatrixXcd::Zero(N + 1, N + 1);
        D.topLeftCorner(N, N) = v * v.adjoint();
        pr.constraint_mats.push_back(std::move(D));
      }
  }
  return pr;
}

double sdr_quadratic_direct(const ChannelSet& ch, const Decisions& dec, const LinkState& s,
                            const PerBand<VectorXd>& gamma_mse, const VectorXcd& phi) {
  const int L = static_cast<int>(ch.h_d.size());
  double v = 0.0;
  for (Band b : kBands) {
    const BandChannels& bc = ch.up[b];
    const MatrixXcd& F = dec.ul.F[b];
    const VectorXd& p = s.band_power[b];
    std::vector<VectorXcd> g;
    for (int i = 0; i < L; ++i) g.push_back(effective_uplink(bc, phi, i));
    for (int l = 0; l < L; ++l) {
      double term = 0.0;
      for (int i = 0; i < L; ++i)
        term += p(i) * (std::norm(F.col(l).dot(g[static_cast<std::size_t>(i)])) -
                        std::norm(F.col(l).dot(bc.g_d[static_cast<std::size_t>(i)])));
      const cd refl = F.col(l).dot(g[static_cast<std::size_t>(l)]) -
                      F.col(l).dot(bc.g_d[static_cast<std::size_t>(l)]);
      term -= 2.0 * std::sqrt(std::max(p(l), 0.0)) * refl.real();
      v += gamma_mse[b](l) * term;
    }
  }
  return v;
}

SdrSolution solve_sdp(const SdrProblem& problem, double eps_sdp, double eps_leak, int max_iter,
                      SdpWarmStart* warm) {
  SdrSolution out;
  out.eps_leak = eps_leak;
  const double scale = problem.Lambda.norm();
  const MatrixXcd C = scale > 0.0 ? MatrixXcd(problem.Lambda / scale) : problem.Lambda;
  // Tr(D_j) / N2 is what one element at random phase leaks into constraint j.
  std::vector<MatrixXcd> D;
  for (const auto& Dj : problem.constraint_mats) {
    const double tr = Dj.trace().real();
    if (tr > 0.0) D.push_back(Dj * (problem.n2 / tr));
  }
  SdpSettings st;
  st.eps = eps_sdp;
  st.max_iter = max_iter;
  SdpResult r = solve_diag_sdp(C, D, eps_leak, st, warm);
  out.infeasible = r.infeasible;
  out.binding_constraints = r.binding_constraints;
  if (r.infeasible && r.X.size() == 0) return out;
  out.Omega = r.X;
  out.objective = (problem.Lambda * r.X).trace().real();
  out.kkt_residuals = r.kkt;
  out.converged = r.converged;
  out.iterations = r.iterations;
  return out;
}

VectorXd normalize_phases(const VectorXcd& xi) {
  const Eigen::Index n = xi.size() - 1;
  VectorXd theta(n);
  const cd ref = xi(n);
  for (Eigen::Index k = 0; k < n; ++k)
    theta(k) = wrap_phase(std::arg(std::abs(ref) > 0.0 ? xi(k) / ref : xi(k)));
  return theta;
}

RecoveryResult recover_phases(const SdrSolution& solution, int n_rand, std::mt19937_64& rng,
                              const PhaseEvaluator& evaluate, const VectorXd& incumbent,
                              double leak_budget) {
  if (n_rand < 1) throw ContractError("recover_phases: n_rand must be >= 1");
  RecoveryResult best;
  best.theta2 = incumbent;
  best.score = evaluate(incumbent);
  if (solution.Omega.size() == 0) return best;

  const PhaseScore inc = best.score;
  const double leak_cap = std::max(leak_budget, inc.leakage);
  auto excess = [&](const PhaseScore& s) { return std::max(0.0, s.leakage - leak_budget); };

  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (solution.Omega + solution.Omega.adjoint()));
  const VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const MatrixXcd factor = es.eigenvectors() * root.asDiagonal();
  const Eigen::Index n = factor.rows();

  bool have = false;
  PhaseScore chosen;
  VectorXd chosen_theta;
  auto consider = [&](const VectorXcd& xi) {
    const VectorXd theta = normalize_phases(xi);
    const PhaseScore sc = evaluate(theta);
    if (!(sc.objective <= inc.objective) || !(sc.leakage <= leak_cap)) return;
    const bool better =
        !have || excess(sc) < excess(chosen) ||
        (excess(sc) == excess(chosen) && sc.objective < chosen.objective);
    if (better) {
      have = true;
      chosen = sc;
      chosen_theta = theta;
    }
  };

  consider(es.eigenvectors().col(n - 1));
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  VectorXcd r(n);
  for (int k = 0; k < n_rand; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double re = nd(rng);
      const double im = nd(rng);
      r(i) = cd(re, im);
    }
    consider(factor * r);
  }
  if (have && (chosen.objective < inc.objective || excess(chosen) < excess(inc))) {
    best.theta2 = chosen_theta;
    best.score = chosen;
    best.improved = true;
  }
  return best;
}

}  // namespace hsrirs
