// Acceptance run: one PASS/FAIL line per criterion 1-8.
//
// Seed counts default to what one core finishes in about half an hour and
// can be raised through the environment:
//   HSRIRS_ACCEPT_SEEDS          default-scenario seeds (criteria 1-4, 8), default 20
//   HSRIRS_ACCEPT_REDUCED_SEEDS  reduced-scale seeds (criterion 1), default 100
//   HSRIRS_ACCEPT_ALLOC_SEEDS    allocation seeds (criterion 5), default 2
//   HSRIRS_ACCEPT_TRAIN_SEEDS    seeds per Doppler point (criterion 6), default 6
//   HSRIRS_ACCEPT_THREADS        worker threads, default 1

#include "../support.hpp"

#include "hsrirs/doppler.hpp"
#include "hsrirs/downlink.hpp"
#include "hsrirs/harness.hpp"
#include "hsrirs/outer_loop.hpp"
#include "hsrirs/uplink.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

using namespace hsrirs;

namespace {

int env_int(const char* name, int fallback) {
  const char* v = std::getenv(name);
  if (v == nullptr) return fallback;
  int out = fallback;
  const std::string_view s(v);
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || p != s.data() + s.size() || out < 1) return fallback;
  return out;
}

struct Knobs {
  int seeds = env_int("HSRIRS_ACCEPT_SEEDS", 20);
  int reduced_seeds = env_int("HSRIRS_ACCEPT_REDUCED_SEEDS", 100);
  int alloc_seeds = env_int("HSRIRS_ACCEPT_ALLOC_SEEDS", 2);
  int train_seeds = env_int("HSRIRS_ACCEPT_TRAIN_SEEDS", 6);
  int threads = env_int("HSRIRS_ACCEPT_THREADS", 1);
};

int failures = 0;

void verdict(int id, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::cout << "criterion " << id << ": " << (pass ? "PASS" : "FAIL") << "  " << detail
            << std::endl;
}

void progress(const std::string& what) { std::cerr << "[acceptance] " << what << std::endl; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ExperimentResult run(ExperimentKind kind, Variant variant, std::vector<double> grid, int seeds,
                     const SystemConfig& cfg, const Knobs& k, bool traces = false) {
  ExperimentSpec spec;
  spec.kind = kind;
  spec.variant = variant;
  spec.grid = std::move(grid);
  spec.realizations = seeds;
  spec.config = cfg;
  spec.parallelism = k.threads;
  spec.keep_traces = traces;
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentResult r = run_experiment(spec);
  std::ostringstream os;
  os << to_string(kind) << '/' << to_string(variant) << ": " << r.rows.size() << " cells, "
     << r.failures << " failed, " << seconds_since(t0) << " s";
  progress(os.str());
  return r;
}

struct Mean {
  double value = 0.0;
  int n = 0;
};

template <class F>
Mean mean_of(const std::vector<ResultRow>& rows, F field, double grid_value) {
  Mean m;
  for (const ResultRow& r : rows)
    if (r.ok && r.grid_value == grid_value) {
      m.value += field(r);
      ++m.n;
    }
  if (m.n > 0) m.value /= m.n;
  return m;
}

template <class F>
double median_of(const std::vector<ResultRow>& rows, F field, double grid_value) {
  std::vector<double> v;
  for (const ResultRow& r : rows)
    if (r.ok && r.grid_value == grid_value) v.push_back(field(r));
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

double objective_of(const ResultRow& r) { return r.objective; }
double leakage_of(const ResultRow& r) { return r.leakage; }

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

// ---- criterion 1 ----------------------------------------------------------

struct TraceCheck {
  int transitions = 0;
  int violations = 0;
  double worst = 0.0;  // largest obj_after - obj_before
  int rows = 0;
  int failed = 0;
};

TraceCheck check_traces(const std::vector<ResultRow>& rows) {
  TraceCheck c;
  for (const ResultRow& r : rows) {
    if (!r.ok) {
      ++c.failed;
      continue;
    }
    ++c.rows;
    for (std::size_t i = 1; i < r.trace.size(); ++i) {
      const double up = r.trace[i].objective - r.trace[i - 1].objective;
      ++c.transitions;
      c.worst = std::max(c.worst, up);
      if (!(up <= 1e-9)) ++c.violations;
    }
  }
  return c;
}

// ---- criterion 7 ----------------------------------------------------------

struct OracleInstance {
  SystemConfig cfg;
  ChannelSet ch;
  Decisions dec;
  LinkState s;
  PerBand<VectorXd> gw;
};

OracleInstance oracle_instance(std::uint64_t seed) {
  OracleInstance in;
  in.cfg = load_config(R"({"m1":4,"m2":4,"n1":8,"n2":2})");
  in.ch = build_channel_set(in.cfg, std::nullopt, seed);
  in.dec = initial_decisions(in.cfg, derive_seed(seed, 7), false);
  in.s = evaluate_links(in.cfg, in.ch, in.dec);
  for (Band b : kBands)
    in.dec.ul.F[b] = mmse_decoder(in.s.eff.g_bar[b], in.s.band_power[b], in.cfg.noise_variance(b));
  in.s = evaluate_links(in.cfg, in.ch, in.dec);
  const RatioMultipliers mu = init_multipliers(in.s.capacity[Band::sub6],
                                               in.s.capacity[Band::mmwave], in.cfg.weights,
                                               in.cfg.volumes);
  PerBand<double> bw;
  bw[Band::sub6] = in.cfg.b_s;
  bw[Band::mmwave] = in.cfg.b_m;
  in.gw = mse_weights(mu.lambda, mu.eta, bw, in.s.mse);
  return in;
}

// Weighted MSE sum with the decoders held fixed: the lifted quadratic plus a constant.
double weighted_mse(const OracleInstance& in, const VectorXd& theta2) {
  Decisions d = in.dec;
  d.ul.theta2 = theta2;
  const LinkState s = evaluate_links(in.cfg, in.ch, d);
  double v = 0.0;
  for (Band b : kBands) v += in.gw[b].dot(s.mse[b]);
  return v;
}

// Derivative of sum w (1 - x) log2(((b - c + a) x + c) / ((b - c) x + c)), written
// from the log-difference form rather than the solver's SINR form.
double beta_slope(const BetaCoefficients& c, double x) {
  double g = 0.0;
  for (const BetaTerm& t : c.terms) {
    const double num = (t.b - t.c + t.a) * x + t.c;
    const double den = (t.b - t.c) * x + t.c;
    g += t.weight * (-std::log2(num / den) +
                     (1.0 - x) / std::log(2.0) * ((t.b - t.c + t.a) / num - (t.b - t.c) / den));
  }
  return g;
}

// Illinois false position on [0, 1]; endpoints when the slope keeps its sign.
double illinois_root(const BetaCoefficients& c) {
  double a = 0.0, b = 1.0, fa = beta_slope(c, a), fb = beta_slope(c, b);
  if (fa <= 0.0) return 0.0;
  if (fb >= 0.0) return 1.0;
  int side = 0;
  for (int i = 0; i < 500; ++i) {
    const double x = (a * fb - b * fa) / (fb - fa);
    const double fx = beta_slope(c, x);
    if (fx == 0.0 || b - a < 1e-15) return x;
    if (fx > 0.0) {
      a = x;
      fa = fx;
      if (side == -1) fb /= 2.0;
      side = -1;
    } else {
      b = x;
      fb = fx;
      if (side == 1) fa /= 2.0;
      side = 1;
    }
  }
  return 0.5 * (a + b);
}

double gamma_closed_form(const GammaProblem& pr, const VectorXd& gamma, int l) {
  auto interference = [&](Band b) {
    double a = pr.noise[b](l);
    for (Eigen::Index i = 0; i < gamma.size(); ++i)
      if (i != l)
        a += (b == Band::sub6 ? gamma(i) : 1.0 - gamma(i)) * pr.power(i) * pr.q[b](l, i);
    return a;
  };
  const double as = interference(Band::sub6), am = interference(Band::mmwave);
  const double xs = pr.power(l) * pr.q[Band::sub6](l, l);
  const double xm = pr.power(l) * pr.q[Band::mmwave](l, l);
  const double bs = pr.bandwidth[Band::sub6], bm = pr.bandwidth[Band::mmwave];
  return std::clamp((bs * xs * (am + xm) - bm * xm * as) / (xs * xm * (bs + bm)), 0.0, 1.0);
}

void criterion7() {
  std::mt19937_64 rng(20260101);
  std::ostringstream detail;
  bool pass = true;

  // (a) trace/Hadamard identity.
  double worst_a = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 12;
    const MatrixXcd A = testing::random_hermitian(rng, n);
    const MatrixXcd B = testing::random_hermitian(rng, n);
    const VectorXcd phi = phasors(testing::random_phases(rng, n));
    const MatrixXcd P = phi.asDiagonal();
    const cd lhs = (P.adjoint() * A * P * B).trace();
    const cd rhs = phi.dot(A.cwiseProduct(B.transpose()) * phi);
    worst_a = std::max(worst_a, std::abs(lhs - rhs));
  }
  const bool a_ok = worst_a <= 1e-9;
  detail << "(a) " << fmt(worst_a) << (a_ok ? " ok" : " BAD");

  // (b) MMSE duality.
  double worst_b = 0.0;
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int L = 1 + trial % 4, M = 1 + trial % 6;
    std::vector<VectorXcd> g;
    for (int l = 0; l < L; ++l) g.push_back(testing::random_cvec(rng, M));
    VectorXd p(L);
    for (int l = 0; l < L; ++l) p(l) = u(rng);
    const double s2 = u(rng);
    const MatrixXcd F = mmse_decoder(g, p, s2);
    const LinkQuality q = sinr_and_capacity(g, F, p, s2, 1.0, 0.5);
    for (int l = 0; l < L; ++l)
      worst_b = std::max(worst_b, std::abs(mse(g, F, p, s2, l) * (1.0 + q.sinr(l)) - 1.0));
  }
  const bool b_ok = worst_b <= 1e-10;
  detail << "; (b) " << fmt(worst_b) << (b_ok ? " ok" : " BAD");

  // (c) two-element SDR plus rounding against a 64 x 64 phase grid.
  double worst_c = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const OracleInstance in = oracle_instance(seed);
    SdrProblem pr = build_sdr_problem(in.ch, in.dec, in.s, in.gw);
    pr.constraint_mats.clear();
    const SdrSolution sol = solve_sdp(pr, 1e-6, 1.0, 3000);
    std::mt19937_64 r2(seed);
    const PhaseEvaluator eval = [&](const VectorXd& t) {
      return PhaseScore{weighted_mse(in, t), 0.0};
    };
    const RecoveryResult rec = recover_phases(sol, in.cfg.n_rand, r2, eval, in.dec.ul.theta2,
                                              std::numeric_limits<double>::infinity());
    const double got = rec.improved ? rec.score.objective : weighted_mse(in, in.dec.ul.theta2);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 64; ++i)
      for (int j = 0; j < 64; ++j) {
        VectorXd th(2);
        th << kTwoPi * i / 64.0, kTwoPi * j / 64.0;
        best = std::min(best, weighted_mse(in, th));
      }
    worst_c = std::max(worst_c, (got - best) / std::abs(best));
  }
  const bool c_ok = worst_c <= 0.05;
  detail << "; (c) gap " << fmt(100.0 * worst_c) << "%" << (c_ok ? " ok" : " BAD");

  // (d) full Newton step against the closed-form multipliers.
  double worst_d = 0.0;
  std::uniform_real_distribution<double> w(0.1, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int L = 1 + trial % 4;
    VectorXd cs(L), cm(L);
    std::vector<double> wt(L), v(L);
    RatioMultipliers mu;
    mu.lambda = VectorXd(L);
    mu.eta = VectorXd(L);
    for (int l = 0; l < L; ++l) {
      cs(l) = w(rng) * 1e6;
      cm(l) = w(rng) * 1e7;
      wt[static_cast<std::size_t>(l)] = w(rng) / 10.0;
      v[static_cast<std::size_t>(l)] = w(rng) * 1e6;
      mu.lambda(l) = w(rng) * 1e-7;
      mu.eta(l) = w(rng) * 1e-2;
    }
    const NewtonResult r = newton_update_multipliers(mu, cs, cm, wt, v, 0.5, 0.5);
    const RatioMultipliers ref = init_multipliers(cs, cm, wt, v);
    for (int l = 0; l < L; ++l) {
      worst_d = std::max(worst_d, std::abs(r.mu.lambda(l) / ref.lambda(l) - 1.0));
      worst_d = std::max(worst_d, std::abs(r.mu.eta(l) / ref.eta(l) - 1.0));
    }
  }
  const bool d_ok = worst_d <= 1e-12;
  detail << "; (d) " << fmt(worst_d) << (d_ok ? " ok" : " BAD");

  // (e) beta and gamma roots against independent scalar solvers.
  double worst_root = 0.0, worst_slope = 0.0;
  std::uniform_real_distribution<double> cu(0.01, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    BetaCoefficients c;
    const int terms = 1 + trial % 6;
    for (int i = 0; i < terms; ++i) c.terms.push_back({cu(rng), cu(rng), cu(rng), cu(rng)});
    const BetaResult r = optimize_beta(c);
    const double ref = illinois_root(c);
    worst_root = std::max(worst_root, std::abs(r.beta - ref));
    double scale = 0.0;
    for (const BetaTerm& t : c.terms) scale += t.weight;
    if (!r.boundary) worst_slope = std::max(worst_slope, std::abs(beta_slope(c, r.beta)) / scale);
  }
  for (int trial = 0; trial < 200; ++trial) {
    const int L = 1 + trial % 3;
    GammaProblem pr;
    pr.power = VectorXd(L);
    VectorXd gamma(L);
    for (int l = 0; l < L; ++l) {
      pr.power(l) = cu(rng);
      gamma(l) = cu(rng) / 5.0;
    }
    for (Band b : kBands) {
      pr.q[b] = MatrixXd(L, L);
      pr.noise[b] = VectorXd(L);
      for (int i = 0; i < L; ++i) {
        pr.noise[b](i) = cu(rng);
        for (int j = 0; j < L; ++j) pr.q[b](i, j) = cu(rng);
      }
      pr.bandwidth[b] = cu(rng);
    }
    const int l = trial % L;
    const GammaResult r = optimize_gamma(pr, gamma, l);
    worst_root = std::max(worst_root, std::abs(r.gamma - gamma_closed_form(pr, gamma, l)));
    if (!r.boundary) {
      const double scale = pr.bandwidth[Band::sub6] + pr.bandwidth[Band::mmwave];
      worst_slope =
          std::max(worst_slope, std::abs(gamma_derivative(pr, gamma, l, r.gamma)) / scale);
    }
  }
  const bool e_ok = worst_root <= 1e-8 && worst_slope <= 1e-8;
  detail << "; (e) root " << fmt(worst_root) << " slope " << fmt(worst_slope)
         << (e_ok ? " ok" : " BAD");

  pass = a_ok && b_ok && c_ok && d_ok && e_ok;
  verdict(7, pass, detail.str());
}

}  // namespace

int main() {
  const Knobs k;
  const SystemConfig base = default_config();
  {
    std::ostringstream os;
    os << "seeds: base " << k.seeds << ", reduced " << k.reduced_seeds << ", allocation "
       << k.alloc_seeds << ", train " << k.train_seeds << ", threads " << k.threads;
    progress(os.str());
  }

  criterion7();

  // Default-scenario runs shared by criteria 1-4 and 8. The N = 100 point of the element
  // sweep is the default configuration.
  const ExperimentResult elements =
      run(ExperimentKind::sweep_elements, Variant::optimized, {25, 64, 100}, k.seeds, base, k,
          true);
  std::vector<ResultRow> full;
  for (const ResultRow& r : elements.rows)
    if (r.grid_value == 100.0) full.push_back(r);

  // 1. Block monotonicity.
  {
    const auto t0 = std::chrono::steady_clock::now();
    const SystemConfig reduced = load_config(R"({"m1":9,"n1":32,"n2":32})");
    const ExperimentResult red =
        run(ExperimentKind::solve, Variant::optimized, {0}, k.reduced_seeds, reduced, k, true);
    const double wall = seconds_since(t0);
    const TraceCheck cr = check_traces(red.rows);
    const TraceCheck cf = check_traces(full);
    const bool pass = cr.violations == 0 && cf.violations == 0 && cr.failed == 0 &&
                      cf.failed == 0 && cf.rows >= 10 && wall <= 1800.0;
    std::ostringstream os;
    os << "reduced: " << cr.rows << " seeds, " << cr.transitions << " transitions, "
       << cr.violations << " violations, worst rise " << fmt(cr.worst) << " s, " << fmt(wall)
       << " s wall; full: " << cf.rows << " seeds, " << cf.transitions << " transitions, "
       << cf.violations << " violations, worst rise " << fmt(cf.worst) << " s";
    verdict(1, pass, os.str());
  }

  // 2. First-iteration collapse.
  {
    double init = 0.0, first = 0.0;
    int n = 0;
    for (const ResultRow& r : full)
      if (r.ok) {
        init += r.initial_objective;
        first += r.first_outer_objective;
        ++n;
      }
    const double ratio = n > 0 ? first / init : std::numeric_limits<double>::quiet_NaN();
    std::ostringstream os;
    os << n << " seeds, mean after outer 1 / mean initial = " << fmt(100.0 * ratio)
       << "% (limit 20%)";
    verdict(2, n > 0 && ratio <= 0.2, os.str());
  }

  // 3. Element-count ordering.
  {
    const Mean m25 = mean_of(elements.rows, objective_of, 25.0);
    const Mean m64 = mean_of(elements.rows, objective_of, 64.0);
    const Mean m100 = mean_of(elements.rows, objective_of, 100.0);
    std::ostringstream os;
    os << "mean objective N=25 " << fmt(m25.value) << " s, N=64 " << fmt(m64.value)
       << " s, N=100 " << fmt(m100.value) << " s over " << m100.n << " paired seeds";
    const bool pass = m25.n > 0 && m64.n > 0 && m100.n > 0 && m25.value > m64.value &&
                      m64.value > m100.value && !elements.failed;
    verdict(3, pass, os.str());
  }

  // 4. Leakage suppression.
  {
    const ExperimentResult rnd =
        run(ExperimentKind::solve, Variant::random_phase_irs2, {0}, k.seeds, base, k);
    const ExperimentResult leak =
        run(ExperimentKind::leakage_sweep, Variant::optimized, {36, 64}, k.seeds, base, k);
    const Mean opt = mean_of(full, leakage_of, 100.0);
    const Mean base = mean_of(rnd.rows, leakage_of, 0.0);
    const Mean z36 = mean_of(leak.rows, leakage_of, 36.0);
    const Mean z64 = mean_of(leak.rows, leakage_of, 64.0);
    const double ratio = opt.value / base.value;
    const bool monotone = z36.value >= z64.value && z64.value >= opt.value;
    std::ostringstream os;
    os << "N2=100: optimized/random-phase mean leakage = " << fmt(100.0 * ratio)
       << "% (limit 5%); mean leakage N2=36 " << fmt(z36.value) << ", 64 " << fmt(z64.value)
       << ", 100 " << fmt(opt.value) << (monotone ? " non-increasing" : " NOT non-increasing")
       << " (medians " << fmt(median_of(leak.rows, leakage_of, 36.0)) << ", "
       << fmt(median_of(leak.rows, leakage_of, 64.0)) << ", "
       << fmt(median_of(full, leakage_of, 100.0)) << ")";
    const bool pass = opt.n > 0 && base.n > 0 && z36.n > 0 && z64.n > 0 && ratio <= 0.05 &&
                      monotone && !rnd.failed && !leak.failed;
    verdict(4, pass, os.str());
  }

  // 5. Allocation trade-off at 1 W.
  {
    SystemConfig cfg = base;
    cfg.p_max = 1.0;
    const std::vector<double> grid = default_grid(ExperimentKind::sweep_allocation, cfg);
    const ExperimentResult alloc =
        run(ExperimentKind::sweep_allocation, Variant::optimized, grid, k.alloc_seeds, cfg, k);
    std::vector<double> means;
    std::ostringstream os;
    os << k.alloc_seeds << " seeds, means";
    bool complete = !alloc.failed;
    for (double g : grid) {
      const Mean m = mean_of(alloc.rows, objective_of, g);
      complete = complete && m.n > 0;
      means.push_back(m.value);
      os << ' ' << g << ':' << fmt(m.value);
    }
    const auto best = std::min_element(means.begin(), means.end());
    const std::size_t arg = static_cast<std::size_t>(best - means.begin());
    const double worse_end = std::max(means.front(), means.back());
    const bool interior = arg > 0 && arg + 1 < means.size();
    const double ratio = *best / worse_end;
    os << "; minimizer N1=" << grid[arg] << (interior ? " interior" : " at an endpoint")
       << ", min/worse endpoint = " << fmt(100.0 * ratio) << "% (limit 60%)";
    verdict(5, complete && interior && ratio <= 0.6, os.str());
  }

  // 6. Doppler mitigation.
  {
    SystemConfig fast = base;
    fast.train_speed = 110.0;
    SystemConfig slow = base;
    slow.train_speed = 50.0;
    const double far = -19.975;
    const ExperimentResult rf =
        run(ExperimentKind::train_sweep, Variant::optimized, {far}, k.train_seeds, fast, k);
    const ExperimentResult rs =
        run(ExperimentKind::train_sweep, Variant::optimized, {0.0}, k.train_seeds, slow, k);
    const ExperimentResult traj =
        run(ExperimentKind::train_sweep, Variant::optimized,
            default_grid(ExperimentKind::train_sweep, fast), 1, fast, k);

    auto ratio_of = [](const std::vector<ResultRow>& rows, int& n, double& fdd) {
      double mit = 0.0, base = 0.0;
      n = 0;
      fdd = 0.0;
      for (const ResultRow& r : rows)
        if (r.ok) {
          mit += r.objective;
          base += r.unmitigated_objective;
          fdd += r.f_dd;
          ++n;
        }
      if (n > 0) fdd /= n;
      return mit / base;
    };
    int nf = 0, ns = 0;
    double fdd_f = 0.0, fdd_s = 0.0;
    const double qf = ratio_of(rf.rows, nf, fdd_f);
    const double qs = ratio_of(rs.rows, ns, fdd_s);
    const bool fast_ok = nf > 0 && std::isfinite(qf) && 1.0 - qf >= 0.25;
    const bool slow_ok = ns > 0 && std::isfinite(qs) && std::abs(qs - 1.0) <= 0.05;

    int slots = 0, raised = 0, infinite = 0;
    for (const auto* rows : {&rf.rows, &rs.rows, &traj.rows})
      for (const ResultRow& r : *rows) {
        if (!r.ok) continue;
        ++slots;
        if (!std::isfinite(r.unmitigated_objective)) ++infinite;
        if (r.objective > r.unmitigated_objective) ++raised;
      }
    const bool guard_ok = slots > 0 && raised == 0;

    std::ostringstream os;
    os << "v=110 at " << far << " m (f_dd " << fmt(fdd_f) << " Hz, " << nf
       << " seeds): reduction " << (std::isfinite(qf) ? fmt(100.0 * (1.0 - qf)) : "undefined")
       << "% (need >= 25%)" << (fast_ok ? "" : " BAD") << "; v=50 at 0 m (" << ns
       << " seeds): change "
       << (std::isfinite(qs) ? fmt(100.0 * (qs - 1.0)) : "undefined") << "% (need within 5%)"
       << (slow_ok ? "" : " BAD") << "; guard: " << raised << " of " << slots
       << " slots raised the objective, " << infinite << " slots have zero effective rate";
    verdict(6, fast_ok && slow_ok && guard_ok, os.str());
  }

  // 8. Absolute latency.
  {
    const Mean m = mean_of(full, objective_of, 100.0);
    std::ostringstream os;
    os << m.n << " seeds, mean converged objective " << fmt(1e3 * m.value)
       << " ms (band 50-400 ms)";
    verdict(8, m.n > 0 && m.value >= 0.05 && m.value <= 0.4, os.str());
  }

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
