#include "hsrirs/downlink.hpp"

#include "hsrirs/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <limits>

namespace hsrirs {

// ---- beta -----------------------------------------------------------------

double beta_objective(const BetaCoefficients& coeffs, double beta) {
  double f = 0.0;
  for (const BetaTerm& t : coeffs.terms) {
    const double den = (t.b - t.c) * beta + t.c;
    if (t.a == 0.0 || den <= 0.0) continue;
    f += t.weight * (1.0 - beta) * std::log2(1.0 + beta * t.a / den);
  }
  return f;
}

double beta_derivative(const BetaCoefficients& coeffs, double beta) {
  double g = 0.0;
  for (const BetaTerm& t : coeffs.terms) {
    if (t.a == 0.0) continue;
    const double den = (t.b - t.c) * beta + t.c;
    const double s = beta * t.a / den;
    const double ds = t.a * t.c / (den * den);
    g += t.weight * (-std::log2(1.0 + s) + (1.0 - beta) * ds / ((1.0 + s) * std::log(2.0)));
  }
  return g;
}

BetaCoefficients beta_coefficients(const SystemConfig& cfg, const LinkState& s,
                                   const Decisions& dec, const VectorXd& lambda_eta) {
  const int L = cfg.num_iotds;
  VectorXd gain(L);
  for (int l = 0; l < L; ++l)
    gain(l) = (s.eff.h_bar[static_cast<std::size_t>(l)] * dec.dl.W).squaredNorm();
  BetaCoefficients out;
  for (Band b : kBands) {
    const MatrixXcd& F = dec.ul.F[b];
    const auto& g = s.eff.g_bar[b];
    const double sigma2 = cfg.noise_variance(b);
    for (int l = 0; l < L; ++l) {
      const double share_l = b == Band::sub6 ? dec.ul.gamma(l) : 1.0 - dec.ul.gamma(l);
      BetaTerm t;
      t.weight = lambda_eta(l) * cfg.bandwidth(b);
      t.a = cfg.xi * share_l * gain(l) * std::norm(F.col(l).dot(g[static_cast<std::size_t>(l)]));
      for (int i = 0; i < L; ++i) {
        if (i == l) continue;
        const double share_i = b == Band::sub6 ? dec.ul.gamma(i) : 1.0 - dec.ul.gamma(i);
        t.b += cfg.xi * share_i * gain(i) * std::norm(F.col(l).dot(g[static_cast<std::size_t>(i)]));
      }
      t.c = sigma2 * F.col(l).squaredNorm();
      // A zero decoder column (the IoTD is off this band) carries no rate.
      if (t.c == 0.0) continue;
      out.terms.push_back(t);
    }
  }
  return out;
}

BetaResult optimize_beta(const BetaCoefficients& coeffs) {
  BetaResult r;
  bool any = false;
  for (const BetaTerm& t : coeffs.terms) {
    if (t.a < 0.0 || t.b < 0.0 || !(t.c > 0.0))
      throw ContractError("optimize_beta: coefficients must satisfy a, b >= 0 and c > 0");
    any = any || (t.a > 0.0 && t.weight > 0.0);
  }
  if (!any) {
    r.degenerate = true;
    return r;
  }
  double lo = 0.0, hi = 1.0;
  // The derivative is positive at 0 and negative at 1 whenever some a > 0.
  for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon(); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double d = beta_derivative(coeffs, mid);
    if (d > 0.0)
      lo = mid;
    else if (d < 0.0)
      hi = mid;
    else {
      lo = hi = mid;
      break;
    }
  }
  r.lo = lo;
  r.hi = hi;
  r.beta = 0.5 * (lo + hi);
  const double tiny = 1e-12;
  if (r.beta < tiny || r.beta > 1.0 - tiny) {
    r.boundary = true;
    r.beta = std::clamp(r.beta, tiny, 1.0 - tiny);
  }
  r.derivative = beta_derivative(coeffs, r.beta);
  return r;
}

// ---- energy beams ---------------------------------------------------------

double DcaModel::g(const MatrixXcd& W) const { return (W.adjoint() * Q * W).trace().real(); }

double DcaModel::h(const MatrixXcd& W) const {
  double v = 0.0;
  for (std::size_t l = 0; l < h_bar.size(); ++l)
    v += d(static_cast<Eigen::Index>(l)) * (h_bar[l] * W).norm();
  return v;
}

MatrixXcd DcaModel::slope(const MatrixXcd& W) const {
  MatrixXcd V = MatrixXcd::Zero(W.rows(), W.cols());
  for (std::size_t l = 0; l < h_bar.size(); ++l) {
    const RowVectorXcd hw = h_bar[l] * W;
    const double n = hw.norm();
    if (n < 1e-12) continue;
    V += (d(static_cast<Eigen::Index>(l)) / (2.0 * n)) * (h_bar[l].adjoint() * hw);
  }
  return V;
}

DcaModel dca_model(const SystemConfig& cfg, const LinkState& s, const Decisions& dec,
                   const PerBand<VectorXd>& gamma_mse) {
  const int L = cfg.num_iotds;
  const int M1 = cfg.m1;
  const double beta = dec.dl.beta;
  const double scale = cfg.xi * beta / (1.0 - beta);
  DcaModel m;
  m.Q = MatrixXcd::Zero(M1, M1);
  m.h_bar = s.eff.h_bar;
  m.d = VectorXd::Zero(L);
  for (int i = 0; i < L; ++i) {
    double ci = 0.0;
    for (Band b : kBands) {
      const double share = b == Band::sub6 ? dec.ul.gamma(i) : 1.0 - dec.ul.gamma(i);
      const auto& g = s.eff.g_bar[b];
      double acc = 0.0;
      for (int l = 0; l < L; ++l)
        acc += gamma_mse[b](l) * std::norm(dec.ul.F[b].col(l).dot(g[static_cast<std::size_t>(i)]));
      ci += share * scale * acc;
    }
    const auto& h = s.eff.h_bar[static_cast<std::size_t>(i)];
    m.Q += ci * (h.adjoint() * h);
  }
  for (int l = 0; l < L; ++l) {
    double dl = 0.0;
    for (Band b : kBands) {
      const double share = b == Band::sub6 ? dec.ul.gamma(l) : 1.0 - dec.ul.gamma(l);
      const cd q = dec.ul.F[b].col(l).dot(s.eff.g_bar[b][static_cast<std::size_t>(l)]);
      dl += 2.0 * gamma_mse[b](l) * q.real() * std::sqrt(share * scale);
    }
    // A negative coefficient would make -d ||h W|| convex; such a term is
    // dropped from the concave part and the outer guard decides.
    m.d(l) = std::max(dl, 0.0);
  }
  m.Q = 0.5 * (m.Q + m.Q.adjoint());
  return m;
}

EnergySubproblemResult energy_subproblem(const VectorXd& eig_vals, const MatrixXcd& eig_vecs,
                                         const MatrixXcd& V, double p_max) {
  const Eigen::Index n = eig_vals.size();
  const MatrixXcd Vt = eig_vecs.adjoint() * V;
  VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) w(i) = Vt.row(i).squaredNorm();
  const double vnorm2 = w.sum();
  EnergySubproblemResult r;
  if (vnorm2 == 0.0) {
    r.W = MatrixXcd::Zero(V.rows(), V.cols());
    return r;
  }
  const double qmax = std::max(eig_vals.maxCoeff(), 0.0);
  const double qtol = 1e-13 * std::max(qmax, 1e-300);
  auto norm2_at = [&](double nu) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double q = std::max(eig_vals(i), 0.0) + nu;
      if (q <= qtol) {
        if (w(i) > 1e-30 * vnorm2) return std::numeric_limits<double>::infinity();
        continue;
      }
      acc += w(i) / (q * q);
    }
    return acc;
  };
  double nu = 0.0;
  if (!(norm2_at(0.0) <= p_max)) {
    double lo = 0.0, hi = std::sqrt(vnorm2 / p_max);
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (norm2_at(mid) > p_max)
        lo = mid;
      else
        hi = mid;
    }
    nu = hi;
  }
  MatrixXcd scaled = Vt;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double q = std::max(eig_vals(i), 0.0) + nu;
    scaled.row(i) = q <= qtol ? RowVectorXcd::Zero(Vt.cols()) : RowVectorXcd(Vt.row(i) / q);
  }
  r.W = eig_vecs * scaled;
  r.nu = nu;
  // Bisection leaves the norm a hair inside the ball; clip rounding overshoot.
  const double n2 = r.W.squaredNorm();
  if (n2 > p_max) r.W *= std::sqrt(p_max / n2);
  return r;
}

DcaResult dca_energy_beams(const DcaModel& model, const MatrixXcd& W0, double p_max,
                           double eps_dca, int t_dca_max) {
  DcaResult r;
  r.W = W0;
  const double n0 = r.W.squaredNorm();
  if (n0 > p_max) r.W *= std::sqrt(p_max / n0);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(model.Q);
  const VectorXd vals = es.eigenvalues();
  const MatrixXcd vecs = es.eigenvectors();
  r.trace.push_back(model.value(r.W));
  for (int t = 0; t < t_dca_max; ++t) {
    const MatrixXcd V = model.slope(r.W);
    MatrixXcd next = energy_subproblem(vals, vecs, V, p_max).W;
    const double base = r.W.squaredNorm();
    const double step = (next - r.W).squaredNorm();
    r.W = std::move(next);
    r.trace.push_back(model.value(r.W));
    ++r.iterations;
    if (base == 0.0 ? step == 0.0 : step / base <= eps_dca) break;
  }
  return r;
}

// ---- theta1 ---------------------------------------------------------------

Theta1Objective::Theta1Objective(const SystemConfig& cfg, const ChannelSet& ch,
                                 const Decisions& dec, const VectorXd& lambda_eta)
    : weight_(lambda_eta), ch_(&ch), W_(dec.dl.W) {
  const int L = cfg.num_iotds;
  const VectorXcd phi2 = phasors(dec.ul.theta2);
  scale_ = cfg.xi * dec.dl.beta / (1.0 - dec.dl.beta);
  time_share_ = 1.0 - dec.dl.beta;
  bandwidth_ = {cfg.b_s, cfg.b_m};
  for (Band b : kBands) {
    std::vector<VectorXcd> g;
    for (int l = 0; l < L; ++l) g.push_back(effective_uplink(ch.up[b], phi2, l));
    q_[b] = MatrixXd::Zero(L, L);
    noise_[b] = VectorXd::Zero(L);
    share_[b] = b == Band::sub6 ? dec.ul.gamma : VectorXd(VectorXd::Ones(L) - dec.ul.gamma);
    for (int l = 0; l < L; ++l) {
      for (int i = 0; i < L; ++i)
        q_[b](l, i) = std::norm(dec.ul.F[b].col(l).dot(g[static_cast<std::size_t>(i)]));
      noise_[b](l) = cfg.noise_variance(b) * dec.ul.F[b].col(l).squaredNorm();
    }
  }
}

double Theta1Objective::value_from_gains(const VectorXd& gains) const {
  const Eigen::Index L = gains.size();
  double v = 0.0;
  for (Band b : kBands) {
    const VectorXd p = scale_ * share_[b].cwiseProduct(gains);
    const double bw = bandwidth_[static_cast<std::size_t>(index(b))];
    for (Eigen::Index l = 0; l < L; ++l) {
      if (p(l) <= 0.0) continue;
      double den = noise_[b](l);
      for (Eigen::Index i = 0; i < L; ++i)
        if (i != l) den += p(i) * q_[b](l, i);
      if (den <= 0.0) continue;
      v += weight_(l) * time_share_ * bw * std::log2(1.0 + p(l) * q_[b](l, l) / den);
    }
  }
  return v;
}

double Theta1Objective::value(const VectorXd& theta1) const {
  const VectorXcd phi1 = phasors(theta1);
  const Eigen::Index L = static_cast<Eigen::Index>(ch_->h_d.size());
  VectorXd gains(L);
  for (Eigen::Index l = 0; l < L; ++l)
    gains(l) = (effective_downlink(*ch_, phi1, static_cast<int>(l)) * W_).squaredNorm();
  return value_from_gains(gains);
}

VectorXd optimize_theta1(const Theta1Objective& obj, const VectorXd& theta1, int grid,
                         int passes, double refine_tol) {
  const ChannelSet& ch = obj.channels();
  const MatrixXcd& W = obj.W();
  const Eigen::Index N = theta1.size();
  const Eigen::Index L = static_cast<Eigen::Index>(ch.h_d.size());
  VectorXd theta = theta1;
  const MatrixXcd HW = ch.H * W;
  const VectorXcd phi1 = phasors(theta);
  std::vector<RowVectorXcd> hw(static_cast<std::size_t>(L));
  for (Eigen::Index l = 0; l < L; ++l)
    hw[static_cast<std::size_t>(l)] = effective_downlink(ch, phi1, static_cast<int>(l)) * W;

  std::vector<RowVectorXcd> u(static_cast<std::size_t>(L)), r(static_cast<std::size_t>(L));
  VectorXd A(L), gains(L);
  std::vector<cd> B(static_cast<std::size_t>(L));
  auto eval = [&](double th) {
    const cd e = std::polar(1.0, th);
    for (Eigen::Index l = 0; l < L; ++l)
      gains(l) = std::max(A(l) + 2.0 * (e * B[static_cast<std::size_t>(l)]).real(), 0.0);
    return obj.value_from_gains(gains);
  };
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;

  for (int pass = 0; pass < passes; ++pass) {
    bool changed = false;
    for (Eigen::Index n = 0; n < N; ++n) {
      const cd old = std::polar(1.0, theta(n));
      bool live = false;
      for (Eigen::Index l = 0; l < L; ++l) {
        const std::size_t k = static_cast<std::size_t>(l);
        r[k] = ch.h_r[k](n) * HW.row(n);
        u[k] = hw[k] - old * r[k];
        A(l) = u[k].squaredNorm() + r[k].squaredNorm();
        B[k] = u[k].dot(r[k]);
        live = live || r[k].squaredNorm() > 0.0;
      }
      if (!live) continue;
      const double current = eval(theta(n));
      double best_th = theta(n), best = current;
      const double h = kTwoPi / grid;
      for (int k = 0; k < grid; ++k) {
        const double th = h * k;
        const double v = eval(th);
        if (v > best) {
          best = v;
          best_th = th;
        }
      }
      double a = best_th - h, b = best_th + h;
      double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
      double f1 = eval(x1), f2 = eval(x2);
      while (b - a > refine_tol) {
        if (f1 < f2) {
          a = x1;
          x1 = x2;
          f1 = f2;
          x2 = a + invphi * (b - a);
          f2 = eval(x2);
        } else {
          b = x2;
          x2 = x1;
          f2 = f1;
          x1 = b - invphi * (b - a);
          f1 = eval(x1);
        }
      }
      const double mid = 0.5 * (a + b);
      const double fm = eval(mid);
      if (fm > best) {
        best = fm;
        best_th = mid;
      }
      if (best > current) {
        theta(n) = wrap_phase(best_th);
        const cd e = std::polar(1.0, theta(n));
        for (Eigen::Index l = 0; l < L; ++l) {
          const std::size_t k = static_cast<std::size_t>(l);
          hw[k] = u[k] + e * r[k];
        }
        changed = true;
      }
    }
    if (!changed) break;
  }
  return theta;
}

}  // namespace hsrirs
