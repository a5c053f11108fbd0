#include "hsrirs/harness.hpp"

#include "hsrirs/errors.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace hsrirs {

namespace {

constexpr std::array<std::pair<ExperimentKind, std::string_view>, 7> kKindNames{{
    {ExperimentKind::solve, "solve"},
    {ExperimentKind::sweep_power, "sweep_power"},
    {ExperimentKind::sweep_elements, "sweep_elements"},
    {ExperimentKind::sweep_allocation, "sweep_allocation"},
    {ExperimentKind::leakage_sweep, "leakage_sweep"},
    {ExperimentKind::train_sweep, "train_sweep"},
    {ExperimentKind::pilot_sweep, "pilot_sweep"},
}};

constexpr std::array<std::pair<Variant, std::string_view>, 7> kVariantNames{{
    {Variant::optimized, "optimized"},
    {Variant::random_W, "random_W"},
    {Variant::no_irs1, "no_irs1"},
    {Variant::no_irs2, "no_irs2"},
    {Variant::random_phase_irs1, "random_phase_irs1"},
    {Variant::random_phase_irs2, "random_phase_irs2"},
    {Variant::no_doppler_mitigation, "no_doppler_mitigation"},
}};

bool is_doppler(ExperimentKind k) {
  return k == ExperimentKind::train_sweep || k == ExperimentKind::pilot_sweep;
}

int element_count(double g, const char* what) {
  if (!(g >= 0.0) || g != std::floor(g) || g > 1e6)
    throw ConfigError("grid", std::string(what) + " must be a non-negative integer");
  return static_cast<int>(g);
}

std::string num(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path.string() + "' for writing");
  f << text;
  f.close();
  if (!f) throw Error("write to '" + path.string() + "' failed");
}

VectorXd unweighted_latency(const SystemConfig& cfg, const LinkState& s) {
  VectorXd d(cfg.num_iotds);
  for (int l = 0; l < cfg.num_iotds; ++l) {
    const double c = s.capacity[Band::sub6](l) + s.capacity[Band::mmwave](l);
    d(l) = c > 0.0 ? cfg.volumes[static_cast<std::size_t>(l)] / c
                   : std::numeric_limits<double>::infinity();
  }
  return d;
}

Decisions with_matched_decoders(const SystemConfig& cfg, const ChannelSet& ch, Decisions dec,
                                const VectorXd& theta2) {
  dec.ul.theta2 = theta2;
  const LinkState s = evaluate_links(cfg, ch, dec);
  for (Band b : kBands)
    dec.ul.F[b] = mmse_decoder(s.eff.g_bar[b], s.band_power[b], cfg.noise_variance(b));
  return dec;
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  for (const auto& [k, n] : kKindNames)
    if (k == kind) return n;
  return "unknown";
}

std::string_view to_string(Variant variant) {
  for (const auto& [v, n] : kVariantNames)
    if (v == variant) return n;
  return "unknown";
}

ExperimentKind parse_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames)
    if (n == name) return k;
  throw ConfigError("kind", "unknown experiment '" + std::string(name) + "'");
}

Variant parse_variant(std::string_view name) {
  for (const auto& [v, n] : kVariantNames)
    if (n == name) return v;
  throw ConfigError("variant", "unknown variant '" + std::string(name) + "'");
}

std::vector<double> default_grid(ExperimentKind kind, const SystemConfig& cfg) {
  switch (kind) {
    case ExperimentKind::solve:
      return {0.0};
    case ExperimentKind::sweep_power:
      return {1.0, 2.0, 5.0, 10.0, 20.0};
    case ExperimentKind::sweep_elements:
      return {25.0, 36.0, 64.0, 100.0};
    case ExperimentKind::sweep_allocation: {
      std::vector<double> g;
      const int total = cfg.n1 + cfg.n2;
      for (int n1 = 0; n1 <= total; n1 += total / 8) g.push_back(n1);
      return g;
    }
    case ExperimentKind::leakage_sweep:
      return {36.0, 64.0, 100.0};
    case ExperimentKind::train_sweep:
      return {-19.975, -15.0, -10.0, -5.0, -1.0, 0.0, 1.0, 5.0, 10.0, 15.0, 19.975};
    case ExperimentKind::pilot_sweep:
      return {1000.0, 2000.0, 4000.0, 6000.0, 8000.0};
  }
  return {0.0};
}

void ExperimentSpec::validate() const {
  if (grid.empty()) throw ConfigError("grid", "must not be empty");
  if (realizations < 1) throw ConfigError("realizations", "must be >= 1");
  if (parallelism < 1) throw ConfigError("parallelism", "must be >= 1");
  if (variant == Variant::no_doppler_mitigation && !is_doppler(kind))
    throw ConfigError("variant", "no_doppler_mitigation needs train_sweep or pilot_sweep");
  for (double g : grid) {
    if (!std::isfinite(g)) throw ConfigError("grid", "values must be finite");
    switch (kind) {
      case ExperimentKind::sweep_power:
        if (!(g > 0.0)) throw ConfigError("grid", "power must be > 0");
        break;
      case ExperimentKind::sweep_elements:
      case ExperimentKind::leakage_sweep:
        if (element_count(g, "element count") < 1)
          throw ConfigError("grid", "element count must be >= 1");
        break;
      case ExperimentKind::sweep_allocation:
        if (element_count(g, "N1") > config.n1 + config.n2)
          throw ConfigError("grid", "N1 exceeds the element budget");
        break;
      case ExperimentKind::pilot_sweep:
        if (g < 0.0) throw ConfigError("grid", "pilot overhead must be >= 0");
        break;
      default:
        break;
    }
  }
  config.validate();
}

std::uint64_t channel_seed(std::uint64_t master, int seed_index) {
  return derive_seed(master, 0x6368616e, static_cast<std::uint64_t>(seed_index));
}

std::uint64_t cell_seed(std::uint64_t master, int grid_index, int seed_index) {
  return derive_seed(derive_seed(master, static_cast<std::uint64_t>(grid_index)), 0x63656c6c,
                     static_cast<std::uint64_t>(seed_index));
}

CellSetup setup_cell(const ExperimentSpec& spec, double g) {
  CellSetup c{spec.config, {}};
  SystemConfig& cfg = c.config;
  switch (spec.kind) {
    case ExperimentKind::solve:
      break;
    case ExperimentKind::sweep_power:
      cfg.p_max = g;
      break;
    case ExperimentKind::sweep_elements: {
      const int n = element_count(g, "element count");
      cfg = with_elements(cfg, n, n);
      break;
    }
    case ExperimentKind::sweep_allocation: {
      const int n1 = element_count(g, "N1");
      cfg = with_elements(cfg, n1, spec.config.n1 + spec.config.n2 - n1);
      break;
    }
    case ExperimentKind::leakage_sweep:
      cfg = with_elements(cfg, cfg.n1, element_count(g, "N2"));
      break;
    case ExperimentKind::train_sweep:
      cfg.train_position = g;
      break;
    case ExperimentKind::pilot_sweep:
      cfg.pilot_overhead = g;
      break;
  }
  switch (spec.variant) {
    case Variant::optimized:
    case Variant::no_doppler_mitigation:
      break;
    case Variant::random_W:
      c.options.benchmark_w = true;
      c.options.optimize_w = false;
      break;
    case Variant::no_irs1:
      cfg.irs1_present = false;
      c.options.optimize_theta1 = false;
      break;
    case Variant::no_irs2:
      cfg.irs2_present = false;
      c.options.optimize_theta2 = false;
      break;
    case Variant::random_phase_irs1:
      c.options.optimize_theta1 = false;
      break;
    case Variant::random_phase_irs2:
      c.options.optimize_theta2 = false;
      break;
  }
  cfg.validate();
  return c;
}

double doppler_objective(const SystemConfig& cfg, const ChannelSet& ch, const Decisions& dec,
                         const DopplerContext& ctx, const VectorXd& theta2) {
  const Decisions cand = with_matched_decoders(cfg, ch, dec, theta2);
  DopplerContext c = ctx;
  c.theta_t = theta2;
  const LinkState s = evaluate_links(cfg, ch, cand, doppler_rate_factors(cfg, c));
  return split_objective(cfg.volumes, cfg.weights, s.capacity[Band::sub6],
                         s.capacity[Band::mmwave]);
}

TrainSlotResult solve_train_slot(const SystemConfig& cfg, const BcdOptions& options,
                                 double position, std::uint64_t ch_seed,
                                 std::uint64_t solver_seed) {
  const double prev_position = position - cfg.train_speed * cfg.slot_duration;
  const TrainState now =
      make_train_state(cfg.track, position, cfg.train_speed, cfg.slot_duration);
  const TrainState before =
      make_train_state(cfg.track, prev_position, cfg.train_speed, cfg.slot_duration);

  TrainSlotResult r;
  r.config = config_at_position(cfg, position);
  r.channels = build_channel_set(r.config, now, ch_seed);
  const SystemConfig cfg_prev = config_at_position(cfg, prev_position);
  const ChannelSet ch_prev = build_channel_set(cfg_prev, before, ch_seed);

  // Each slot is optimised on its own, as a tracker without memory would.
  BcdOptions o = options;
  o.seed = derive_seed(solver_seed, 1);
  r.current = bcd_solve(r.config, r.channels, o);
  o.seed = derive_seed(solver_seed, 2);
  r.previous = bcd_solve(cfg_prev, ch_prev, o);

  const DopplerContext ctx = make_doppler_context(r.config, now, r.current.decisions.ul.theta2,
                                                  r.previous.decisions.ul.theta2);
  r.f_dd = direct_doppler(ctx);
  const DopplerEvaluator evaluate = [&](const VectorXd& theta2) {
    return doppler_objective(r.config, r.channels, r.current.decisions, ctx, theta2);
  };
  r.mitigation = mitigate_phases(ctx, evaluate);
  return r;
}

ResultRow run_cell(const ExperimentSpec& spec, int gi, int si) {
  ResultRow row;
  row.experiment = std::string(to_string(spec.kind));
  row.variant = std::string(to_string(spec.variant));
  row.grid_index = gi;
  row.grid_value = spec.grid[static_cast<std::size_t>(gi)];
  row.seed_index = si;
  row.seed = channel_seed(spec.master_seed, si);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const CellSetup setup = setup_cell(spec, row.grid_value);
    const SystemConfig& cfg = setup.config;
    const std::uint64_t solver_seed = cell_seed(spec.master_seed, gi, si);
    if (is_doppler(spec.kind)) {
      const TrainSlotResult tr =
          solve_train_slot(cfg, setup.options, cfg.train_position, row.seed, solver_seed);
      const bool mitigate = spec.variant != Variant::no_doppler_mitigation;
      const VectorXd theta2 =
          mitigate ? tr.mitigation.theta : tr.current.decisions.ul.theta2;
      Decisions dec = with_matched_decoders(tr.config, tr.channels, tr.current.decisions, theta2);
      DopplerContext ctx = make_doppler_context(tr.config,
                                                make_train_state(cfg.track, cfg.train_position,
                                                                 cfg.train_speed,
                                                                 cfg.slot_duration),
                                                theta2, tr.previous.decisions.ul.theta2);
      const LinkState s =
          evaluate_links(tr.config, tr.channels, dec, doppler_rate_factors(tr.config, ctx));
      row.doppler = true;
      row.speed = cfg.train_speed;
      row.f_dd = tr.f_dd;
      row.f_dc = cascaded_doppler_spread(ctx);
      row.unmitigated_objective = tr.mitigation.baseline_objective;
      row.objective = mitigate ? tr.mitigation.objective : tr.mitigation.baseline_objective;
      row.leakage = leakage(tr.channels, theta2);
      row.beta = dec.dl.beta;
      row.iterations = tr.current.outer_iterations;
      row.initial_objective = tr.current.initial_objective;
      row.first_outer_objective = tr.current.first_outer_objective;
      row.latency = unweighted_latency(tr.config, s);
      if (spec.keep_traces) row.trace = tr.current.trace;
    } else {
      const ChannelSet ch = build_channel_set(cfg, std::nullopt, row.seed);
      BcdOptions o = setup.options;
      o.seed = solver_seed;
      BcdSolution sol = bcd_solve(cfg, ch, o);
      row.objective = sol.report.objective;
      row.leakage = sol.report.leakage;
      row.beta = sol.decisions.dl.beta;
      row.iterations = sol.outer_iterations;
      row.initial_objective = sol.initial_objective;
      row.first_outer_objective = sol.first_outer_objective;
      row.latency = sol.report.latency;
      if (spec.keep_traces) row.trace = std::move(sol.trace);
    }
    row.ok = true;
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
  }
  row.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

std::vector<Aggregate> aggregate(const std::vector<ResultRow>& rows) {
  std::vector<Aggregate> out;
  std::map<std::pair<std::string, int>, std::size_t> slot;
  std::vector<std::vector<const ResultRow*>> members;
  for (const auto& r : rows) {
    const auto key = std::make_pair(r.variant, r.grid_index);
    auto it = slot.find(key);
    if (it == slot.end()) {
      it = slot.emplace(key, out.size()).first;
      out.push_back({r.variant, r.grid_value, 0, 0, 0.0, 0.0, 0.0, 0.0});
      members.emplace_back();
    }
    if (r.ok)
      members[it->second].push_back(&r);
    else
      ++out[it->second].failures;
  }
  auto mean_se = [](const std::vector<double>& x, double& mean, double& se) {
    const double n = static_cast<double>(x.size());
    if (x.empty()) {
      mean = se = std::numeric_limits<double>::quiet_NaN();
      return;
    }
    double sum = 0.0;
    for (double v : x) sum += v;
    mean = sum / n;
    if (!std::isfinite(mean)) {
      se = std::numeric_limits<double>::infinity();
      return;
    }
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    se = x.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  };
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::vector<double> obj, leak;
    for (const ResultRow* r : members[i]) {
      obj.push_back(r->objective);
      leak.push_back(r->leakage);
    }
    out[i].count = static_cast<int>(obj.size());
    mean_se(obj, out[i].mean, out[i].std_error);
    mean_se(leak, out[i].mean_leakage, out[i].std_error_leakage);
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const int G = static_cast<int>(spec.grid.size());
  const int S = spec.realizations;
  const int cells = G * S;
  ExperimentResult res;
  res.rows.resize(static_cast<std::size_t>(cells));

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < cells; i = next++)
      res.rows[static_cast<std::size_t>(i)] = run_cell(spec, i / S, i % S);
  };
  const int threads = std::min(spec.parallelism, cells);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (const auto& r : res.rows)
    if (!r.ok) ++res.failures;
  res.failed = too_many_failures(res.failures, cells);
  res.summary = aggregate(res.rows);
  return res;
}

bool too_many_failures(int failures, int cells) { return 10 * failures > cells; }

void require_success(const ExperimentResult& result) {
  if (!result.failed) return;
  std::string first;
  for (const auto& r : result.rows)
    if (!r.ok) {
      first = r.error;
      break;
    }
  throw ExperimentError(std::to_string(result.failures) + " of " +
                        std::to_string(result.rows.size()) + " cells failed; first: " + first);
}

Comparison compare_benchmarks(const ExperimentSpec& base, const std::vector<Variant>& variants) {
  if (variants.empty()) throw ConfigError("variant", "comparison needs at least one variant");
  Comparison cmp;
  for (Variant v : variants) {
    ExperimentSpec s = base;
    s.variant = v;
    cmp.runs.push_back(run_experiment(s));
  }
  const int S = base.realizations;
  const auto& ref = cmp.runs.front().rows;
  for (std::size_t g = 0; g < base.grid.size(); ++g) {
    for (std::size_t k = 0; k < variants.size(); ++k) {
      const auto& rows = cmp.runs[k].rows;
      ComparisonRow row;
      row.grid_value = base.grid[g];
      row.variant = std::string(to_string(variants[k]));
      double sum = 0.0, gap = 0.0;
      int n = 0;
      for (int s = 0; s < S; ++s) {
        const std::size_t i = g * static_cast<std::size_t>(S) + static_cast<std::size_t>(s);
        if (!rows[i].ok) continue;
        sum += rows[i].objective;
        ++n;
        if (ref[i].ok) {
          gap += rows[i].objective - ref[i].objective;
          ++row.pairs;
        }
      }
      row.mean = n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN();
      row.mean_gap = row.pairs > 0 ? gap / row.pairs : std::numeric_limits<double>::quiet_NaN();
      row.sign = row.mean_gap > 0.0 ? 1 : (row.mean_gap < 0.0 ? -1 : 0);
      cmp.rows.push_back(row);
    }
  }
  return cmp;
}

std::string format_csv(const std::vector<ResultRow>& rows, int num_iotds,
                       const CsvOptions& options) {
  std::ostringstream os;
  os << "experiment,variant,grid_value,seed,objective_s,leakage,beta,iterations,wall_ms,"
        "status,speed,f_dd,f_dc";
  for (int l = 1; l <= num_iotds; ++l) os << ",D_" << l;
  os << '\n';
  for (const auto& r : rows) {
    os << r.experiment << ',' << r.variant << ',' << num(r.grid_value) << ',' << r.seed_index
       << ',';
    if (r.ok)
      os << num(r.objective) << ',' << num(r.leakage) << ',' << num(r.beta) << ','
         << r.iterations;
    else
      os << ",,,";
    os << ',' << (options.timing ? num(r.wall_ms) : "0") << ','
       << csv_field(r.ok ? "ok" : "error: " + r.error) << ',';
    if (r.ok && r.doppler) os << num(r.speed) << ',' << num(r.f_dd) << ',' << num(r.f_dc);
    else os << ",,";
    for (int l = 0; l < num_iotds; ++l) {
      os << ',';
      if (r.ok && l < r.latency.size()) os << num(r.latency(l));
    }
    os << '\n';
  }
  return os.str();
}

void emit_csv(const std::vector<ResultRow>& rows, int num_iotds,
              const std::filesystem::path& path, const CsvOptions& options) {
  write_file(path, format_csv(rows, num_iotds, options));
}

void emit_trace_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
  std::ostringstream os;
  os << "experiment,variant,grid_value,seed,outer,inner,block,objective_s,psi_norm\n";
  for (const auto& r : rows)
    for (const auto& t : r.trace)
      os << r.experiment << ',' << r.variant << ',' << num(r.grid_value) << ',' << r.seed_index
         << ',' << t.outer << ',' << t.inner << ',' << t.block << ',' << num(t.objective) << ','
         << num(t.psi_norm) << '\n';
  write_file(path, os.str());
}

}  // namespace hsrirs
