#include "hsrirs/linkmetrics.hpp"

#include "hsrirs/errors.hpp"

#include <limits>

namespace hsrirs {

RowVectorXcd effective_downlink(const ChannelSet& ch, const VectorXcd& phi1, int l) {
  const RowVectorXcd& h_r = ch.h_r[static_cast<std::size_t>(l)];
  if (h_r.size() != phi1.size() || ch.H.rows() != phi1.size())
    throw ContractError("effective_downlink: theta1 length does not match N1");
  return (h_r.cwiseProduct(phi1.transpose())) * ch.H + ch.h_d[static_cast<std::size_t>(l)];
}

VectorXcd effective_uplink(const BandChannels& bc, const VectorXcd& phi2, int l) {
  const VectorXcd& g_r = bc.g_r[static_cast<std::size_t>(l)];
  if (g_r.size() != phi2.size() || bc.G.cols() != phi2.size())
    throw ContractError("effective_uplink: theta2 length does not match N2");
  return bc.G * phi2.cwiseProduct(g_r) + bc.g_d[static_cast<std::size_t>(l)];
}

EffectiveChannels effective_channels(const ChannelSet& ch, const VectorXd& theta1,
                                     const VectorXd& theta2) {
  EffectiveChannels out;
  const VectorXcd phi1 = phasors(theta1);
  const VectorXcd phi2 = phasors(theta2);
  const int L = static_cast<int>(ch.h_d.size());
  for (int l = 0; l < L; ++l) out.h_bar.push_back(effective_downlink(ch, phi1, l));
  for (Band b : kBands)
    for (int l = 0; l < L; ++l) out.g_bar[b].push_back(effective_uplink(ch.up[b], phi2, l));
  return out;
}

double harvested_power(const RowVectorXcd& h_bar, const MatrixXcd& W, double beta, double xi) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("harvested_power: beta must be in (0,1)");
  if (h_bar.size() != W.rows()) throw ContractError("harvested_power: dimension mismatch");
  return xi * beta * (h_bar * W).squaredNorm() / (1.0 - beta);
}

LinkQuality sinr_and_capacity(const std::vector<VectorXcd>& g_bar, const MatrixXcd& F,
                              const VectorXd& band_power, double sigma2, double bandwidth,
                              double beta) {
  const Eigen::Index L = static_cast<Eigen::Index>(g_bar.size());
  if (F.cols() != L || band_power.size() != L)
    throw ContractError("sinr_and_capacity: decoder/power count does not match IoTD count");
  if (!(sigma2 > 0.0)) throw DomainError("sinr_and_capacity: noise variance must be > 0");
  LinkQuality q{VectorXd::Zero(L), VectorXd::Zero(L)};
  for (Eigen::Index l = 0; l < L; ++l) {
    if (band_power(l) <= 0.0) continue;
    const auto f = F.col(l);
    const double fn = f.squaredNorm();
    if (fn == 0.0) throw ContractError("sinr_and_capacity: zero decoder column for a live IoTD");
    double interference = sigma2 * fn;
    for (Eigen::Index i = 0; i < L; ++i)
      if (i != l) interference += band_power(i) * std::norm(f.dot(g_bar[static_cast<std::size_t>(i)]));
    const double signal = band_power(l) * std::norm(f.dot(g_bar[static_cast<std::size_t>(l)]));
    q.sinr(l) = signal / interference;
    q.capacity(l) = (1.0 - beta) * bandwidth * std::log2(1.0 + q.sinr(l));
  }
  return q;
}

double mse(const std::vector<VectorXcd>& g_bar, const MatrixXcd& F, const VectorXd& band_power,
           double sigma2, int l) {
  const Eigen::Index L = static_cast<Eigen::Index>(g_bar.size());
  if (F.cols() != L || band_power.size() != L || l < 0 || l >= L)
    throw ContractError("mse: dimension mismatch");
  const auto f = F.col(l);
  double e = std::norm(std::sqrt(band_power(l)) * f.dot(g_bar[static_cast<std::size_t>(l)]) - 1.0);
  for (Eigen::Index i = 0; i < L; ++i)
    if (i != l) e += band_power(i) * std::norm(f.dot(g_bar[static_cast<std::size_t>(i)]));
  return e + sigma2 * f.squaredNorm();
}

LatencyReport upload_latency_objective(const VectorXd& alpha, const std::vector<double>& volumes,
                                       const std::vector<double>& weights, const VectorXd& c_s,
                                       const VectorXd& c_m) {
  const Eigen::Index L = alpha.size();
  if (static_cast<Eigen::Index>(volumes.size()) != L ||
      static_cast<Eigen::Index>(weights.size()) != L || c_s.size() != L || c_m.size() != L)
    throw ContractError("upload_latency_objective: length mismatch");
  LatencyReport r;
  r.capacity[Band::sub6] = c_s;
  r.capacity[Band::mmwave] = c_m;
  r.latency = VectorXd::Zero(L);
  for (Eigen::Index l = 0; l < L; ++l) {
    if (alpha(l) < 0.0 || alpha(l) > 1.0)
      throw DomainError("upload_latency_objective: alpha must be in [0,1]");
    const double v = volumes[static_cast<std::size_t>(l)];
    const bool live_s = c_s(l) > 0.0, live_m = c_m(l) > 0.0;
    if (!live_s && !live_m)
      throw InfeasibleError("IoTD " + std::to_string(l) + " has zero capacity in both bands");
    double d;
    if (!live_s)
      d = v / c_m(l);
    else if (!live_m)
      d = v / c_s(l);
    else
      d = std::max(alpha(l) * v / c_s(l), (1.0 - alpha(l)) * v / c_m(l));
    r.latency(l) = d;
    r.objective += weights[static_cast<std::size_t>(l)] * d;
  }
  return r;
}

double leakage(const ChannelSet& ch, const VectorXd& theta2) {
  const VectorXcd phi2 = phasors(theta2);
  double z = 0.0;
  for (Band b : kBands) {
    const BandChannels& bc = ch.up[b];
    for (const auto& g : bc.g_r) {
      if (g.size() != phi2.size()) throw ContractError("leakage: theta2 length mismatch");
      const VectorXcd pg = phi2.cwiseProduct(g);
      for (const auto& d : bc.d) z += std::norm((d * pg)(0));
    }
  }
  return z;
}

LinkState evaluate_links(const SystemConfig& cfg, const ChannelSet& ch, const Decisions& dec,
                         const RateFactors& rf) {
  LinkState s;
  s.eff = effective_channels(ch, dec.dl.theta1, dec.ul.theta2);
  const int L = cfg.num_iotds;
  s.power = VectorXd::Zero(L);
  for (int l = 0; l < L; ++l)
    s.power(l) = harvested_power(s.eff.h_bar[static_cast<std::size_t>(l)], dec.dl.W,
                                 dec.dl.beta, cfg.xi);
  s.band_power[Band::sub6] = dec.ul.gamma.cwiseProduct(s.power);
  s.band_power[Band::mmwave] =
      (VectorXd::Ones(L) - dec.ul.gamma).cwiseProduct(s.power);
  for (Band b : kBands) {
    const double sigma2 = cfg.noise_variance(b);
    LinkQuality q = sinr_and_capacity(s.eff.g_bar[b], dec.ul.F[b], s.band_power[b], sigma2,
                                      cfg.bandwidth(b), dec.dl.beta);
    s.sinr[b] = q.sinr;
    s.capacity[b] = q.capacity * rf.f[b];
    s.mse[b] = VectorXd::Zero(L);
    for (int l = 0; l < L; ++l)
      s.mse[b](l) = mse(s.eff.g_bar[b], dec.ul.F[b], s.band_power[b], sigma2, l);
  }
  return s;
}

double split_objective(const std::vector<double>& volumes, const std::vector<double>& weights,
                       const VectorXd& c_s, const VectorXd& c_m) {
  double obj = 0.0;
  for (std::size_t l = 0; l < volumes.size(); ++l) {
    const double c = c_s(static_cast<Eigen::Index>(l)) + c_m(static_cast<Eigen::Index>(l));
    if (!(c > 0.0)) return std::numeric_limits<double>::infinity();
    obj += weights[l] * volumes[l] / c;
  }
  return obj;
}

LatencyReport report(const SystemConfig& cfg, const ChannelSet& ch, const Decisions& dec,
                     const RateFactors& rf) {
  const LinkState s = evaluate_links(cfg, ch, dec, rf);
  LatencyReport r = upload_latency_objective(dec.alpha, cfg.volumes, cfg.weights,
                                             s.capacity[Band::sub6], s.capacity[Band::mmwave]);
  r.leakage = leakage(ch, dec.ul.theta2);
  r.power = s.power;
  return r;
}

}  // namespace hsrirs
