#include "support.hpp"

#include "hsrirs/downlink.hpp"
#include "hsrirs/errors.hpp"
#include "hsrirs/outer_loop.hpp"

#include <doctest.h>

using namespace hsrirs;

namespace {

// Root of -ln(1 + b) + (1 - b) / (1 + b) by Newton's method from 0.5.
double beta_oracle() {
  double b = 0.5;
  for (int i = 0; i < 100; ++i) {
    const double f = -std::log1p(b) + (1.0 - b) / (1.0 + b);
    const double df = -1.0 / (1.0 + b) - 2.0 / ((1.0 + b) * (1.0 + b));
    b -= f / df;
  }
  return b;
}

struct Instance {
  SystemConfig cfg;
  ChannelSet ch;
  Decisions dec;
  LinkState s;
  RatioMultipliers mu;
};

Instance instance(std::uint64_t seed, int n = 16) {
  Instance in{testing::small_config(4, n), {}, {}, {}, {}};
  in.ch = build_channel_set(in.cfg, std::nullopt, seed);
  in.dec = initial_decisions(in.cfg, seed + 100, false);
  in.s = evaluate_links(in.cfg, in.ch, in.dec);
  in.mu = init_multipliers(in.s.capacity[Band::sub6], in.s.capacity[Band::mmwave],
                           in.cfg.weights, in.cfg.volumes);
  PerBand<double> bw;
  bw[Band::sub6] = in.cfg.b_s;
  bw[Band::mmwave] = in.cfg.b_m;
  in.mu.gamma_mse = mse_weights(in.mu.lambda, in.mu.eta, bw, in.s.mse);
  return in;
}

double weighted_capacity(const VectorXd& le, const LinkState& s) {
  return le.dot(s.capacity[Band::sub6] + s.capacity[Band::mmwave]);
}

}  // namespace

TEST_CASE("beta for the scalar unit instance") {
  BetaCoefficients c;
  c.terms.push_back({1.0, 1.0, 1.0, 1.0});
  const BetaResult r = optimize_beta(c);
  const double oracle = beta_oracle();
  CHECK(oracle == doctest::Approx(0.4547).epsilon(1e-4));
  CHECK(std::abs(r.beta - oracle) < 1e-9);
  CHECK(std::abs(beta_derivative(c, r.beta)) < 1e-8);
  CHECK_FALSE(r.boundary);
  CHECK_FALSE(r.degenerate);
  // The bracket straddles the root.
  CHECK(beta_derivative(c, r.lo) >= 0.0);
  CHECK(beta_derivative(c, r.hi) <= 0.0);
}

TEST_CASE("beta with zero gains is degenerate") {
  BetaCoefficients c;
  c.terms.push_back({2.0, 0.0, 1.0, 1.0});
  c.terms.push_back({1.0, 0.0, 0.0, 3.0});
  const BetaResult r = optimize_beta(c);
  CHECK(r.degenerate);
  CHECK(beta_objective(c, 0.3) == 0.0);
  CHECK(beta_objective(c, 0.9) == 0.0);
}

TEST_CASE("beta objective equals the weighted capacity sum") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Instance in = instance(seed);
    const VectorXd le = in.mu.product();
    const BetaCoefficients c = beta_coefficients(in.cfg, in.s, in.dec, le);
    for (double beta : {0.1, 0.37, 0.8}) {
      Decisions d = in.dec;
      d.dl.beta = beta;
      const LinkState s = evaluate_links(in.cfg, in.ch, d);
      CHECK(beta_objective(c, beta) ==
            doctest::Approx(weighted_capacity(le, s)).epsilon(1e-10));
    }
    const BetaResult r = optimize_beta(c);
    for (double beta = 0.01; beta < 1.0; beta += 0.01)
      CHECK(beta_objective(c, r.beta) >= beta_objective(c, beta) - 1e-12);
  }
}

TEST_CASE("energy subproblem stationarity") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const int M = 2 + trial % 5;
    const MatrixXcd A = testing::random_cmat(rng, M, trial % 3 == 0 ? 1 : M);
    const MatrixXcd Q = A * A.adjoint();
    const MatrixXcd V = testing::random_cmat(rng, M, M) * (trial % 2 ? 0.1 : 10.0);
    const double p = 1.0 + trial % 4;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(Q);
    const EnergySubproblemResult r = energy_subproblem(es.eigenvalues(), es.eigenvectors(), V, p);
    const MatrixXcd res = (Q + r.nu * MatrixXcd::Identity(M, M)) * r.W - V;
    CHECK(res.norm() <= 1e-7 * std::max(1.0, V.norm()));
    CHECK(r.nu >= 0.0);
    CHECK(r.W.squaredNorm() <= p + 1e-9);
    CHECK(r.nu * std::abs(r.W.squaredNorm() - p) <= 1e-7 * std::max(1.0, V.norm()));
    // No random feasible point does better.
    auto f = [&](const MatrixXcd& W) {
      return (W.adjoint() * Q * W).trace().real() - 2.0 * (V.adjoint() * W).trace().real();
    };
    for (int k = 0; k < 20; ++k) {
      MatrixXcd W = testing::random_cmat(rng, M, M);
      W *= std::sqrt(p) / W.norm() * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      CHECK(f(r.W) <= f(W) + 1e-9);
    }
  }
}

TEST_CASE("DCA model reproduces the weighted MSE sum up to a constant") {
  const Instance in = instance(3);
  const DcaModel m = dca_model(in.cfg, in.s, in.dec, in.mu.gamma_mse);
  std::mt19937_64 rng(12);
  double offset = 0.0;
  for (int k = 0; k < 6; ++k) {
    Decisions d = in.dec;
    d.dl.W = testing::random_cmat(rng, in.cfg.m1, in.cfg.m1);
    d.dl.W *= std::sqrt(in.cfg.p_max) / d.dl.W.norm();
    const LinkState s = evaluate_links(in.cfg, in.ch, d);
    double wmse = 0.0;
    for (Band b : kBands) wmse += in.mu.gamma_mse[b].dot(s.mse[b]);
    if (k == 0) offset = wmse - m.value(d.dl.W);
    CHECK(wmse - m.value(d.dl.W) == doctest::Approx(offset).epsilon(1e-9).scale(std::abs(wmse)));
  }
}

TEST_CASE("DCA keeps power feasible and never increases its objective") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Instance in = instance(seed);
    const DcaModel m = dca_model(in.cfg, in.s, in.dec, in.mu.gamma_mse);
    const DcaResult r = dca_energy_beams(m, in.dec.dl.W, in.cfg.p_max, 1e-9, 50);
    CHECK(r.W.squaredNorm() <= in.cfg.p_max + 1e-9);
    for (std::size_t i = 1; i < r.trace.size(); ++i)
      CHECK(r.trace[i] <= r.trace[i - 1] + 1e-9 * std::abs(r.trace[i - 1]));
  }
  SUBCASE("infeasible start is pulled onto the power ball") {
    const Instance in = instance(2);
    const DcaModel m = dca_model(in.cfg, in.s, in.dec, in.mu.gamma_mse);
    const DcaResult r = dca_energy_beams(m, 10.0 * in.dec.dl.W, in.cfg.p_max, 1e-9, 5);
    CHECK(r.W.squaredNorm() <= in.cfg.p_max + 1e-9);
  }
  SUBCASE("zero channels") {
    DcaModel m;
    m.Q = MatrixXcd::Zero(3, 3);
    m.h_bar.assign(2, RowVectorXcd::Zero(3));
    m.d = VectorXd::Zero(2);
    const MatrixXcd W0 = MatrixXcd::Identity(3, 3);
    const DcaResult r = dca_energy_beams(m, W0, 10.0, 1e-9, 10);
    for (double v : r.trace) CHECK(v == 0.0);
  }
}

TEST_CASE("theta1 objective matches linkmetrics") {
  const Instance in = instance(6);
  const VectorXd le = in.mu.product();
  const Theta1Objective obj(in.cfg, in.ch, in.dec, le);
  std::mt19937_64 rng(2);
  for (int k = 0; k < 5; ++k) {
    Decisions d = in.dec;
    d.dl.theta1 = testing::random_phases(rng, in.cfg.n1);
    const LinkState s = evaluate_links(in.cfg, in.ch, d);
    CHECK(obj.value(d.dl.theta1) == doctest::Approx(weighted_capacity(le, s)).epsilon(1e-10));
  }
}

TEST_CASE("theta1 ascent never loses and is a fixed point on one element") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const Instance in = instance(seed);
    const Theta1Objective obj(in.cfg, in.ch, in.dec, in.mu.product());
    const VectorXd t = optimize_theta1(obj, in.dec.dl.theta1, 16, 2, 1e-3);
    CHECK(obj.value(t) >= obj.value(in.dec.dl.theta1));
  }
  const Instance in = instance(4, 1);
  const Theta1Objective obj(in.cfg, in.ch, in.dec, in.mu.product());
  const VectorXd t1 = optimize_theta1(obj, in.dec.dl.theta1, 16, 2, 1e-6);
  const VectorXd t2 = optimize_theta1(obj, t1, 16, 2, 1e-6);
  CHECK(std::abs(std::remainder(t2(0) - t1(0), kTwoPi)) <= 1e-3);
}
