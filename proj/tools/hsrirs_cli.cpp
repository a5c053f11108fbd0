// hsrirs: run single solves and seeded sweeps, write CSV.
//
//   hsrirs solve --realizations 1
//   hsrirs sweep_allocation --grid 0,50,100,150,200 --realizations 20 --out alloc.csv
//   hsrirs leakage_sweep --variant optimized,random_phase_irs2 --out leak.csv
//
// Exit status: 0 success, 1 experiment error, 2 configuration error.

#include "hsrirs/errors.hpp"
#include "hsrirs/harness.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

using namespace hsrirs;

namespace {

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t end = s.find(',', start);
    std::string item = s.substr(start, end == std::string::npos ? std::string::npos : end - start);
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    out.push_back(a == std::string::npos ? std::string() : item.substr(a, b - a + 1));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> g;
  for (const auto& item : split(s)) {
    double v = 0.0;
    const auto r = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || r.ec != std::errc() || r.ptr != item.data() + item.size())
      throw ConfigError("grid", "'" + item + "' is not a number");
    g.push_back(v);
  }
  return g;
}

struct Args {
  std::string config;
  std::string variants = "optimized";
  std::string grid;
  int realizations = 100;
  std::uint64_t seed = 1;
  std::string out;
  std::string trace;
  int parallelism = 1;
  bool no_timing = false;
};

void print_summary(const std::vector<Aggregate>& summary) {
  std::fprintf(stderr, "%-22s %12s %6s %6s %14s %12s %14s\n", "variant", "grid", "n", "fail",
               "mean_obj_s", "se", "mean_leak");
  for (const auto& a : summary)
    std::fprintf(stderr, "%-22s %12g %6d %6d %14.6g %12.3g %14.6g\n", a.variant.c_str(),
                 a.grid_value, a.count, a.failures, a.mean, a.std_error, a.mean_leakage);
}

int run(ExperimentKind kind, const Args& a) {
  ExperimentSpec spec;
  spec.kind = kind;
  if (!a.config.empty()) spec.config = load_config_file(a.config);
  spec.grid = a.grid.empty() ? default_grid(kind, spec.config) : parse_grid(a.grid);
  spec.realizations = a.realizations;
  spec.master_seed = a.seed;
  spec.parallelism = a.parallelism;
  spec.keep_traces = !a.trace.empty();
  spec.output = a.out;

  std::vector<Variant> variants;
  for (const auto& v : split(a.variants)) variants.push_back(parse_variant(v));
  for (Variant v : variants) {
    ExperimentSpec s = spec;
    s.variant = v;
    s.validate();
  }

  std::vector<ResultRow> rows;
  std::vector<Aggregate> summary;
  bool failed = false;
  std::string failure;
  const Comparison cmp = compare_benchmarks(spec, variants);
  for (const auto& r : cmp.runs) {
    rows.insert(rows.end(), r.rows.begin(), r.rows.end());
    summary.insert(summary.end(), r.summary.begin(), r.summary.end());
    try {
      require_success(r);
    } catch (const ExperimentError& e) {
      failed = true;
      failure = e.what();
    }
  }

  const CsvOptions csv{!a.no_timing};
  if (a.out.empty())
    std::cout << format_csv(rows, spec.config.num_iotds, csv);
  else
    emit_csv(rows, spec.config.num_iotds, a.out, csv);
  if (!a.trace.empty()) emit_trace_csv(rows, a.trace);

  print_summary(summary);
  if (variants.size() > 1) {
    std::fprintf(stderr, "\n%-22s %12s %6s %14s %14s\n", "variant", "grid", "pairs", "mean_obj_s",
                 "gap_vs_first");
    for (const auto& c : cmp.rows)
      std::fprintf(stderr, "%-22s %12g %6d %14.6g %+14.6g\n", c.variant.c_str(), c.grid_value,
                   c.pairs, c.mean, c.mean_gap);
  }
  if (failed) {
    std::fprintf(stderr, "error: %s\n", failure.c_str());
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latency-minimising double-IRS hybrid-band uplink: solver and sweeps"};
  app.require_subcommand(1);
  Args args;

  const std::vector<std::pair<ExperimentKind, std::string>> kinds{
      {ExperimentKind::solve, "Solve the default scenario, one row per seed"},
      {ExperimentKind::sweep_power, "Sweep the downlink power budget P_max (W)"},
      {ExperimentKind::sweep_elements, "Sweep N1 = N2"},
      {ExperimentKind::sweep_allocation, "Sweep N1 with N1 + N2 fixed"},
      {ExperimentKind::leakage_sweep, "Sweep N2 and report leakage"},
      {ExperimentKind::train_sweep, "Sweep the train position (m) with the Doppler step"},
      {ExperimentKind::pilot_sweep, "Sweep the pilot overhead (symbols) with the Doppler step"},
  };
  std::vector<std::pair<CLI::App*, ExperimentKind>> subs;
  for (const auto& [kind, help] : kinds) {
    CLI::App* sub = app.add_subcommand(std::string(to_string(kind)), help);
    sub->add_option("--config", args.config, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--variant", args.variants, "Variant, or a comma list for a paired comparison")
        ->capture_default_str();
    sub->add_option("--grid", args.grid, "Comma-separated grid values");
    sub->add_option("--realizations", args.realizations, "Channel realizations per grid point")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", args.seed, "Master seed")->capture_default_str();
    sub->add_option("--out", args.out, "CSV output path (stdout when omitted)");
    sub->add_option("--trace", args.trace, "Also write per-block iteration traces here");
    sub->add_option("--parallelism", args.parallelism, "Worker threads")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_flag("--no-timing", args.no_timing, "Write wall_ms as 0 for reproducible files");
    subs.emplace_back(sub, kind);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    for (const auto& [sub, kind] : subs)
      if (sub->parsed()) return run(kind, args);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
