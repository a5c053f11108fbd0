#include "hsrirs/outer_loop.hpp"

#include "hsrirs/errors.hpp"

#include <random>
#include <string>

namespace hsrirs {

VolumeSplit optimal_volume_split(double v, double c_s, double c_m) {
  if (c_s < 0.0 || c_m < 0.0) throw DomainError("optimal_volume_split: negative capacity");
  const double c = c_s + c_m;
  if (!(c > 0.0)) throw InfeasibleError("optimal_volume_split: both capacities are zero");
  VolumeSplit s;
  s.alpha = c_s / c;
  s.v_s = v * s.alpha;
  return s;
}

RatioMultipliers init_multipliers(const VectorXd& c_s, const VectorXd& c_m,
                                  const std::vector<double>& weights,
                                  const std::vector<double>& volumes) {
  const Eigen::Index L = c_s.size();
  RatioMultipliers mu;
  mu.lambda = VectorXd::Zero(L);
  mu.eta = VectorXd::Zero(L);
  for (Eigen::Index l = 0; l < L; ++l) {
    const double c = c_s(l) + c_m(l);
    if (!(c > 0.0)) throw InfeasibleError("init_multipliers: zero total capacity");
    const std::size_t k = static_cast<std::size_t>(l);
    mu.lambda(l) = 1.0 / c;
    mu.eta(l) = weights[k] * volumes[k] / c;
  }
  return mu;
}

PerBand<VectorXd> mse_weights(const VectorXd& lambda, const VectorXd& eta,
                              const PerBand<double>& bandwidth, const PerBand<VectorXd>& mse) {
  PerBand<VectorXd> g;
  for (Band b : kBands) {
    g[b] = VectorXd::Zero(lambda.size());
    for (Eigen::Index l = 0; l < lambda.size(); ++l) {
      if (!(mse[b](l) > 0.0)) throw DomainError("mse_weights: MSE must be > 0");
      g[b](l) = lambda(l) * eta(l) * bandwidth[b] / mse[b](l);
    }
  }
  return g;
}

Psi psi(const RatioMultipliers& mu, const VectorXd& capacity, const std::vector<double>& weights,
        const std::vector<double>& volumes) {
  const Eigen::Index L = capacity.size();
  Psi p{VectorXd::Zero(L), VectorXd::Zero(L)};
  for (Eigen::Index l = 0; l < L; ++l) {
    const std::size_t k = static_cast<std::size_t>(l);
    p.psi1(l) = -weights[k] * volumes[k] + mu.eta(l) * capacity(l);
    p.psi2(l) = -1.0 + mu.lambda(l) * capacity(l);
  }
  return p;
}

double psi_norm(const Psi& p, const std::vector<double>& weights,
                const std::vector<double>& volumes) {
  double acc = 0.0;
  for (Eigen::Index l = 0; l < p.psi1.size(); ++l) {
    const std::size_t k = static_cast<std::size_t>(l);
    const double a = p.psi1(l) / (weights[k] * volumes[k]);
    acc += a * a + p.psi2(l) * p.psi2(l);
  }
  return std::sqrt(acc);
}

NewtonResult newton_update_multipliers(const RatioMultipliers& mu, const VectorXd& c_s,
                                       const VectorXd& c_m, const std::vector<double>& weights,
                                       const std::vector<double>& volumes, double delta,
                                       double epsilon) {
  const VectorXd c = c_s + c_m;
  for (Eigen::Index l = 0; l < c.size(); ++l)
    if (!(c(l) > 0.0)) throw InfeasibleError("newton_update_multipliers: zero total capacity");
  NewtonResult r;
  r.mu = mu;
  const Psi p0 = psi(mu, c, weights, volumes);
  const double n0 = psi_norm(p0, weights, volumes);
  if (n0 == 0.0) return r;
  // psi1 depends on eta only and psi2 on lambda only, each with slope C.
  const VectorXd d_eta = p0.psi1.cwiseQuotient(c);
  const VectorXd d_lambda = p0.psi2.cwiseQuotient(c);
  double step = 1.0;
  for (int i = 0; i <= 50; ++i, step *= delta) {
    RatioMultipliers cand = mu;
    cand.eta = mu.eta - step * d_eta;
    cand.lambda = mu.lambda - step * d_lambda;
    const double n1 = psi_norm(psi(cand, c, weights, volumes), weights, volumes);
    if (n1 <= (1.0 - epsilon * step) * n0) {
      r.mu = cand;
      r.step_exponent = i;
      return r;
    }
  }
  r.stagnated = true;
  r.step_exponent = 50;
  return r;
}

Decisions initial_decisions(const SystemConfig& cfg, std::uint64_t seed, bool benchmark_w) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> upm(-1.0, 1.0);
  const int L = cfg.num_iotds;
  Decisions d;
  d.dl.beta = u01(rng);
  if (d.dl.beta <= 0.0) d.dl.beta = 0.5;
  d.alpha = VectorXd(L);
  for (int l = 0; l < L; ++l) d.alpha(l) = u01(rng);
  d.ul.gamma = VectorXd(L);
  for (int l = 0; l < L; ++l) d.ul.gamma(l) = u01(rng);
  d.dl.theta1 = VectorXd(cfg.n1);
  for (int n = 0; n < cfg.n1; ++n) d.dl.theta1(n) = kTwoPi * u01(rng);
  d.ul.theta2 = VectorXd(cfg.n2);
  for (int n = 0; n < cfg.n2; ++n) d.ul.theta2(n) = kTwoPi * u01(rng);
  d.dl.W = MatrixXcd(cfg.m1, cfg.m1);
  for (int j = 0; j < cfg.m1; ++j)
    for (int i = 0; i < cfg.m1; ++i) {
      double re, im;
      if (benchmark_w) {
        re = u01(rng);
        im = u01(rng);
      } else {
        re = upm(rng);
        im = upm(rng);
      }
      d.dl.W(i, j) = cd(re, im);
    }
  d.dl.W *= std::sqrt(cfg.p_max) / d.dl.W.norm();
  for (Band b : kBands) {
    d.ul.F[b] = MatrixXcd(cfg.m2, L);
    for (int j = 0; j < L; ++j)
      for (int i = 0; i < cfg.m2; ++i) {
        const double re = upm(rng);
        const double im = upm(rng);
        d.ul.F[b](i, j) = cd(re, im);
      }
  }
  return d;
}

namespace {

class Driver {
 public:
  Driver(const SystemConfig& cfg, const ChannelSet& ch, const BcdOptions& opt)
      : cfg_(cfg), ch_(ch), opt_(opt), rng_(derive_seed(opt.seed, 0x62636421)) {
    bw_[Band::sub6] = cfg.b_s;
    bw_[Band::mmwave] = cfg.b_m;
  }

  BcdSolution run() {
    BcdSolution sol;
    dec_ = initial_decisions(cfg_, opt_.seed, opt_.benchmark_w);
    state_ = evaluate_links(cfg_, ch_, dec_);
    const LatencyReport init = upload_latency_objective(
        dec_.alpha, cfg_.volumes, cfg_.weights, state_.capacity[Band::sub6],
        state_.capacity[Band::mmwave]);
    sol.initial_objective = init.objective;
    sol.first_outer_objective = init.objective;
    trace_.push_back({0, 0, "init", init.objective, 0.0});
    obj_ = p1(state_);
    eps_leak_used_ = cfg_.tol.eps_leak;

    double prev = init.objective;
    int t = 0;
    bool converged = false;
    for (t = 1; t <= cfg_.t_max; ++t) {
      split_volumes();
      trace_.push_back({t, 0, "alpha", obj_, 0.0});
      mu_ = init_multipliers(state_.capacity[Band::sub6], state_.capacity[Band::mmwave],
                             cfg_.weights, cfg_.volumes);
      for (int inner = 1; inner <= cfg_.t_inner_max; ++inner) {
        if (with_context(t, inner, [&] { return inner_iteration(t, inner); })) break;
      }
      if (t == 1) sol.first_outer_objective = obj_;
      const double rel = std::abs(prev - obj_) / std::max(std::abs(prev), 1e-300);
      prev = obj_;
      if (rel <= cfg_.tol.eps2) {
        converged = true;
        break;
      }
    }
    sol.outer_iterations = std::min(t, cfg_.t_max);
    sol.converged = converged;
    if (cfg_.t_max > 0) split_volumes();

    sol.decisions = dec_;
    mu_.gamma_mse = gamma_weights();
    sol.multipliers = mu_;
    sol.report = report(cfg_, ch_, dec_);
    sol.trace = std::move(trace_);
    sol.sdp_infeasible = sdp_infeasible_;
    sol.eps_leak_used = eps_leak_used_;
    return sol;
  }

 private:
  // Rethrows solver errors with the iteration they came from, keeping their type.
  template <typename F>
  static bool with_context(int t, int inner, F&& f) {
    const std::string at =
        " (outer " + std::to_string(t) + ", inner " + std::to_string(inner) + ")";
    try {
      return f();
    } catch (const InfeasibleError& e) {
      throw InfeasibleError(e.what() + at);
    } catch (const DomainError& e) {
      throw DomainError(e.what() + at);
    } catch (const ContractError& e) {
      throw ContractError(e.what() + at);
    }
  }

  double p1(const LinkState& s) const {
    return split_objective(cfg_.volumes, cfg_.weights, s.capacity[Band::sub6],
                           s.capacity[Band::mmwave]);
  }

  void split_volumes() {
    for (int l = 0; l < cfg_.num_iotds; ++l)
      dec_.alpha(l) = optimal_volume_split(cfg_.volumes[static_cast<std::size_t>(l)],
                                           state_.capacity[Band::sub6](l),
                                           state_.capacity[Band::mmwave](l))
                          .alpha;
  }

  PerBand<VectorXd> gamma_weights() const {
    if (mu_.lambda.size() == 0) return {};
    return mse_weights(mu_.lambda, mu_.eta, bw_, state_.mse);
  }

  // Keeps a candidate only if the objective does not rise.
  bool accept(const Decisions& cand, int t, int inner, const char* tag) {
    LinkState s = evaluate_links(cfg_, ch_, cand);
    const double v = p1(s);
    const bool ok = v <= obj_;
    if (ok) {
      dec_ = cand;
      state_ = std::move(s);
      obj_ = v;
    }
    trace_.push_back({t, inner, tag, obj_, 0.0});
    return ok;
  }

  // Returns true once the multipliers satisfy the fixed-point test.
  bool inner_iteration(int t, int inner) {
    const VectorXd le = mu_.lambda.cwiseProduct(mu_.eta);

    {  // beta
      Decisions cand = dec_;
      const BetaResult br = optimize_beta(beta_coefficients(cfg_, state_, dec_, le));
      if (!br.degenerate) cand.dl.beta = br.beta;
      accept(cand, t, inner, "beta");
    }
    {  // decoders
      Decisions cand = dec_;
      for (Band b : kBands)
        cand.ul.F[b] = mmse_decoder(state_.eff.g_bar[b], state_.band_power[b],
                                    cfg_.noise_variance(b));
      accept(cand, t, inner, "F");
    }
    if (opt_.optimize_w && !opt_.benchmark_w) {
      const DcaModel model = dca_model(cfg_, state_, dec_, gamma_weights());
      Decisions cand = dec_;
      cand.dl.W = dca_energy_beams(model, dec_.dl.W, cfg_.p_max, cfg_.tol.eps_dca,
                                   cfg_.t_dca_max)
                      .W;
      accept(cand, t, inner, "W");
    }
    if (opt_.optimize_theta1 && cfg_.irs1_present) {
      const Theta1Objective obj(cfg_, ch_, dec_, le);
      Decisions cand = dec_;
      cand.dl.theta1 = optimize_theta1(obj, dec_.dl.theta1, cfg_.theta1_grid,
                                       cfg_.theta1_passes, cfg_.theta1_refine_tol);
      accept(cand, t, inner, "theta1");
    }
    {  // gamma, one IoTD at a time
      for (int l = 0; l < cfg_.num_iotds; ++l) {
        const GammaProblem pr = gamma_problem(cfg_, state_, dec_);
        const GammaResult gr = optimize_gamma(pr, dec_.ul.gamma, l);
        if (gr.no_power || gr.gamma == dec_.ul.gamma(l)) continue;
        Decisions cand = dec_;
        cand.ul.gamma(l) = gr.gamma;
        LinkState s = evaluate_links(cfg_, ch_, cand);
        const double v = p1(s);
        if (v <= obj_) {
          dec_ = cand;
          state_ = std::move(s);
          obj_ = v;
        }
      }
      trace_.push_back({t, inner, "gamma", obj_, 0.0});
    }
    if (opt_.optimize_theta2 && cfg_.irs2_present) theta2_block(t, inner);

    const VectorXd c = state_.capacity[Band::sub6] + state_.capacity[Band::mmwave];
    const double pn = psi_norm(psi(mu_, c, cfg_.weights, cfg_.volumes), cfg_.weights,
                               cfg_.volumes);
    trace_.push_back({t, inner, "mu", obj_, pn});
    if (pn <= cfg_.tol.eps1) return true;
    mu_ = newton_update_multipliers(mu_, state_.capacity[Band::sub6],
                                    state_.capacity[Band::mmwave], cfg_.weights, cfg_.volumes,
                                    cfg_.delta, cfg_.epsilon_newton)
              .mu;
    return false;
  }

  void theta2_block(int t, int inner) {
    const PerBand<VectorXd> gw = gamma_weights();
    const SdrProblem pr = build_sdr_problem(ch_, dec_, state_, gw);
    double eps = cfg_.tol.eps_leak;
    SdrSolution sol = solve_sdp(pr, cfg_.tol.eps_sdp, eps, cfg_.sdp_max_iter, &warm_);
    // eps = N2 is the leakage at random phases, which is always attainable.
    const double ceiling = static_cast<double>(cfg_.n2);
    while (sol.infeasible && eps < ceiling) {
      ++sdp_infeasible_;
      eps = std::min(ceiling, eps * 10.0);
      warm_.valid = false;
      sol = solve_sdp(pr, cfg_.tol.eps_sdp, eps, cfg_.sdp_max_iter, &warm_);
    }
    eps_leak_used_ = std::max(eps_leak_used_, eps);

    double reference = 0.0;
    for (const auto& D : pr.constraint_mats) reference += D.trace().real();
    const double budget = eps * reference / cfg_.n2;

    // Candidates are scored together with the decoders matched to them.
    auto with_phases = [&](const VectorXd& theta2) {
      Decisions cand = dec_;
      cand.ul.theta2 = theta2;
      const LinkState s = evaluate_links(cfg_, ch_, cand);
      for (Band b : kBands)
        cand.ul.F[b] = mmse_decoder(s.eff.g_bar[b], s.band_power[b], cfg_.noise_variance(b));
      return cand;
    };
    const PhaseEvaluator evaluate = [&](const VectorXd& theta2) {
      if (theta2 == dec_.ul.theta2) return PhaseScore{obj_, leakage(ch_, theta2)};
      const LinkState s = evaluate_links(cfg_, ch_, with_phases(theta2));
      return PhaseScore{p1(s), leakage(ch_, theta2)};
    };
    const RecoveryResult rr =
        recover_phases(sol, cfg_.n_rand, rng_, evaluate, dec_.ul.theta2, budget);
    if (rr.improved)
      accept(with_phases(rr.theta2), t, inner, "theta2");
    else
      trace_.push_back({t, inner, "theta2", obj_, 0.0});
  }

  const SystemConfig& cfg_;
  const ChannelSet& ch_;
  BcdOptions opt_;
  std::mt19937_64 rng_;
  PerBand<double> bw_;
  Decisions dec_;
  LinkState state_;
  RatioMultipliers mu_;
  double obj_ = 0.0;
  std::vector<TraceRecord> trace_;
  SdpWarmStart warm_;
  int sdp_infeasible_ = 0;
  double eps_leak_used_ = 0.0;
};

}  // namespace

BcdSolution bcd_solve(const SystemConfig& cfg, const ChannelSet& ch, const BcdOptions& options) {
  Driver d(cfg, ch, options);
  return d.run();
}

}  // namespace hsrirs
