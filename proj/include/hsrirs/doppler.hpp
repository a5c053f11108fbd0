#pragma once

// Doppler spreads seen by the moving MCR and the IRS2 phase-smoothing heuristic.

#include "hsrirs/linkmetrics.hpp"
#include "hsrirs/scenario.hpp"

#include <functional>

namespace hsrirs {

/// Coherence time T_c = k / max(f_d, f_floor).
struct CoherenceModel {
  double k = 0.423;
  double f_floor = 1.0;  // Hz
};

struct DopplerContext {
  TrainState train;
  double wavelength = 0.0;      // mmWave, c / f_m
  double pilot_overhead = 0.0;  // symbols per coherence block
  VectorXd theta_t;             // IRS2 phases at slot t
  VectorXd theta_prev;          // and at slot t - 1
  CoherenceModel coherence;
};

DopplerContext make_doppler_context(const SystemConfig& cfg, const TrainState& train,
                                    const VectorXd& theta_t, const VectorXd& theta_prev);

/// v cos(phi_d) / lambda. Signed.
double direct_doppler(const DopplerContext& ctx);

/// Per-element phase change over one slot: kinematic term plus theta_t - theta_prev.
VectorXd phase_increments(const DopplerContext& ctx);

/// Largest pairwise gap of the phase increments over 2 pi dt.
double cascaded_doppler_spread(const DopplerContext& ctx);

/// max(0, 1 - po / (B T_c)).
double effective_rate_factor(double f_d_total, double pilot_overhead, double bandwidth,
                             const CoherenceModel& model = {});

/// Both bands penalised with the dominant spread max(|f_dd|, f_dc).
RateFactors doppler_rate_factors(const SystemConfig& cfg, const DopplerContext& ctx);

/// Doppler-penalised objective of a candidate theta_t.
using DopplerEvaluator = std::function<double(const VectorXd& theta2)>;

struct MitigationResult {
  VectorXd theta;
  double objective = 0.0;
  double baseline_objective = 0.0;
  double spread_before = 0.0;
  double spread_after = 0.0;
  int boundary = -1;  // nn; -1 when nothing needed smoothing
  int steps = 0;      // adjustments evaluated
  bool changed = false;
};

/// Sorts the increments in descending order (ties by element index), finds
/// the first sorted position whose tail spread is within the direct Doppler,
/// and pulls the leading elements onto that increment one at a time. Stops
/// once a step makes the objective worse; returns the input unless the best
/// step beats it.
MitigationResult mitigate_phases(const DopplerContext& ctx, const DopplerEvaluator& evaluate);

}  // namespace hsrirs
