#include "hsrirs/doppler.hpp"

#include "hsrirs/errors.hpp"

#include <algorithm>
#include <numeric>

namespace hsrirs {

namespace {

void check_histories(const DopplerContext& ctx) {
  if (ctx.theta_t.size() != ctx.theta_prev.size())
    throw ContractError("doppler: phase histories differ in length");
  if (!(ctx.train.dt > 0.0)) throw ContractError("doppler: slot duration must be > 0");
}

double spread_of(const VectorXd& inc, double dt) {
  if (inc.size() < 2) return 0.0;
  return (inc.maxCoeff() - inc.minCoeff()) / (kTwoPi * dt);
}

}  // namespace

DopplerContext make_doppler_context(const SystemConfig& cfg, const TrainState& train,
                                    const VectorXd& theta_t, const VectorXd& theta_prev) {
  DopplerContext ctx;
  ctx.train = train;
  ctx.wavelength = cfg.wavelength(Band::mmwave);
  ctx.pilot_overhead = cfg.pilot_overhead;
  ctx.theta_t = theta_t;
  ctx.theta_prev = theta_prev;
  return ctx;
}

double direct_doppler(const DopplerContext& ctx) {
  if (ctx.train.speed < 0.0) throw DomainError("direct_doppler: speed must be >= 0");
  return ctx.train.speed * std::cos(ctx.train.phi_d) / ctx.wavelength;
}

VectorXd phase_increments(const DopplerContext& ctx) {
  check_histories(ctx);
  const double kin =
      kTwoPi * ctx.train.speed * ctx.train.dt * std::cos(ctx.train.phi_c) / ctx.wavelength;
  return (ctx.theta_t - ctx.theta_prev).array() + kin;
}

double cascaded_doppler_spread(const DopplerContext& ctx) {
  return spread_of(phase_increments(ctx), ctx.train.dt);
}

double effective_rate_factor(double f_d_total, double pilot_overhead, double bandwidth,
                             const CoherenceModel& model) {
  if (pilot_overhead < 0.0) throw DomainError("effective_rate_factor: pilot overhead < 0");
  if (!(bandwidth > 0.0)) throw DomainError("effective_rate_factor: bandwidth must be > 0");
  if (pilot_overhead == 0.0) return 1.0;
  const double tc = model.k / std::max(std::abs(f_d_total), model.f_floor);
  return std::max(0.0, 1.0 - pilot_overhead / (bandwidth * tc));
}

RateFactors doppler_rate_factors(const SystemConfig& cfg, const DopplerContext& ctx) {
  const double f = std::max(std::abs(direct_doppler(ctx)), cascaded_doppler_spread(ctx));
  RateFactors rf;
  for (Band b : kBands)
    rf.f[b] = effective_rate_factor(f, ctx.pilot_overhead, cfg.bandwidth(b), ctx.coherence);
  return rf;
}

MitigationResult mitigate_phases(const DopplerContext& ctx, const DopplerEvaluator& evaluate) {
  const VectorXd inc = phase_increments(ctx);
  const double dt = ctx.train.dt;
  MitigationResult r;
  r.theta = ctx.theta_t;
  r.spread_before = spread_of(inc, dt);
  r.spread_after = r.spread_before;
  r.baseline_objective = evaluate(ctx.theta_t);
  r.objective = r.baseline_objective;

  const double f_dd = std::abs(direct_doppler(ctx));
  if (r.spread_before <= f_dd) return r;

  const Eigen::Index n = inc.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return inc(a) > inc(b); });
  auto at = [&](Eigen::Index k) { return order[static_cast<std::size_t>(k)]; };

  // First sorted position whose remaining elements already fit the direct spread.
  Eigen::Index nn = -1;
  for (Eigen::Index k = 1; k < n; ++k) {
    if ((inc(at(k)) - inc(at(n - 1))) / (kTwoPi * dt) <= f_dd) {
      nn = k;
      break;
    }
  }
  if (nn < 0) return r;
  r.boundary = static_cast<int>(nn);

  // Step k gives the k leading elements the increment of sorted position k:
  // theta_n = theta_{n+1,t} + theta_{n,t-1} - theta_{n+1,t-1}, applied down the chain.
  VectorXd best = ctx.theta_t;
  double best_obj = r.baseline_objective;
  double prev_obj = r.baseline_objective;
  for (Eigen::Index k = 1; k <= nn; ++k) {
    VectorXd cand = ctx.theta_t;
    const Eigen::Index ref = at(k);
    for (Eigen::Index j = 0; j < k; ++j) {
      const Eigen::Index e = at(j);
      cand(e) = ctx.theta_t(ref) + ctx.theta_prev(e) - ctx.theta_prev(ref);
    }
    const double obj = evaluate(cand);
    ++r.steps;
    if (obj < best_obj) {
      best_obj = obj;
      best = cand;
    }
    if (obj > prev_obj) break;
    prev_obj = obj;
  }
  if (best_obj < r.baseline_objective) {
    r.theta = best;
    r.objective = best_obj;
    r.changed = true;
    DopplerContext after = ctx;
    after.theta_t = best;
    r.spread_after = cascaded_doppler_spread(after);
  }
  return r;
}

}  // namespace hsrirs
