#pragma once

// Physical-layer quantities: equivalent channels, harvested power, SINR and
// capacity, decoder MSE, upload latency, and leakage towards passengers.

#include "hsrirs/scenario.hpp"
#include "hsrirs/types.hpp"

#include <vector>

namespace hsrirs {

struct DownlinkDecision {
  double beta = 0.5;
  MatrixXcd W;        // M1 x M1, column i is energy beam i
  VectorXd theta1;    // N1
};

struct UplinkDecision {
  VectorXd gamma;          // L, share of each IoTD's power on sub-6
  PerBand<MatrixXcd> F;    // M2 x L decoders
  VectorXd theta2;         // N2
};

struct Decisions {
  DownlinkDecision dl;
  UplinkDecision ul;
  VectorXd alpha;  // L, share of each volume sent on sub-6
};

/// Sum-of-ratios multipliers and the MSE weights derived from them.
struct RatioMultipliers {
  VectorXd lambda;
  VectorXd eta;
  PerBand<VectorXd> gamma_mse;

  VectorXd product() const { return lambda.cwiseProduct(eta); }
};

struct LatencyReport {
  PerBand<VectorXd> capacity;  // bits/s, (1 - beta) folded in
  VectorXd latency;            // s
  double objective = 0.0;      // s
  double leakage = 0.0;
  VectorXd power;              // harvested, W
};

struct EffectiveChannels {
  std::vector<RowVectorXcd> h_bar;           // L of 1 x M1
  PerBand<std::vector<VectorXcd>> g_bar;     // L of M2 x 1 per band
};

/// h_bar_l = h_r Phi1 H + h_d, g_bar = G Phi2 g_r + g_d.
EffectiveChannels effective_channels(const ChannelSet& ch, const VectorXd& theta1,
                                     const VectorXd& theta2);
RowVectorXcd effective_downlink(const ChannelSet& ch, const VectorXcd& phi1, int l);
VectorXcd effective_uplink(const BandChannels& bc, const VectorXcd& phi2, int l);

/// xi * beta * ||h_bar W||^2 / (1 - beta).
double harvested_power(const RowVectorXcd& h_bar, const MatrixXcd& W, double beta, double xi);

struct LinkQuality {
  VectorXd sinr;
  VectorXd capacity;
};

/// Per-IoTD SINR and (1 - beta) B log2(1 + SINR) in one band. Interference
/// is limited to IoTDs sharing that band.
LinkQuality sinr_and_capacity(const std::vector<VectorXcd>& g_bar, const MatrixXcd& F,
                              const VectorXd& band_power, double sigma2, double bandwidth,
                              double beta);

/// Decoder MSE |sqrt(p_l) f^H g_l - 1|^2 + sum_{i != l} p_i |f^H g_i|^2 + sigma2 ||f||^2.
double mse(const std::vector<VectorXcd>& g_bar, const MatrixXcd& F, const VectorXd& band_power,
           double sigma2, int l);

/// D_l = max(alpha v / C_s, (1 - alpha) v / C_m); a dead band carries nothing.
LatencyReport upload_latency_objective(const VectorXd& alpha, const std::vector<double>& volumes,
                                       const std::vector<double>& weights, const VectorXd& c_s,
                                       const VectorXd& c_m);

/// sum_{k,l,F} |d(F,k) Phi2 g_r(F,l)|^2.
double leakage(const ChannelSet& ch, const VectorXd& theta2);

/// Everything the optimizer needs about one operating point.
struct LinkState {
  EffectiveChannels eff;
  VectorXd power;                  // harvested p_l
  PerBand<VectorXd> band_power;    // gamma p, (1 - gamma) p
  PerBand<VectorXd> sinr;
  PerBand<VectorXd> capacity;
  PerBand<VectorXd> mse;
};

/// Per-band multiplicative capacity factors (1, 1 outside Doppler experiments).
struct RateFactors {
  PerBand<double> f{{1.0, 1.0}};
};

LinkState evaluate_links(const SystemConfig& cfg, const ChannelSet& ch, const Decisions& dec,
                         const RateFactors& rf = {});

/// Objective with the volume split chosen optimally: sum w v / (C_s + C_m).
double split_objective(const std::vector<double>& volumes, const std::vector<double>& weights,
                       const VectorXd& c_s, const VectorXd& c_m);

/// Full latency report for the decisions as given (alpha is used verbatim).
LatencyReport report(const SystemConfig& cfg, const ChannelSet& ch, const Decisions& dec,
                     const RateFactors& rf = {});

}  // namespace hsrirs
