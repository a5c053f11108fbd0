#pragma once

// Seeded experiment runner behind the command line tool.

#include "hsrirs/doppler.hpp"
#include "hsrirs/outer_loop.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hsrirs {

enum class ExperimentKind {
  solve,
  sweep_power,       // grid: P_max in W
  sweep_elements,    // grid: N1 = N2
  sweep_allocation,  // grid: N1, with N2 = (N1 + N2 of the base config) - N1
  leakage_sweep,     // grid: N2
  train_sweep,       // grid: train position in m
  pilot_sweep,       // grid: pilot overhead in symbols
};

enum class Variant {
  optimized,
  random_W,
  no_irs1,
  no_irs2,
  random_phase_irs1,
  random_phase_irs2,
  no_doppler_mitigation,
};

std::string_view to_string(ExperimentKind kind);
std::string_view to_string(Variant variant);
/// Throw ConfigError on unknown names.
ExperimentKind parse_kind(std::string_view name);
Variant parse_variant(std::string_view name);

/// Grid used when none is given on the command line.
std::vector<double> default_grid(ExperimentKind kind, const SystemConfig& cfg);

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::solve;
  Variant variant = Variant::optimized;
  std::vector<double> grid{0.0};
  int realizations = 100;
  std::uint64_t master_seed = 1;
  SystemConfig config = default_config();
  std::filesystem::path output;
  int parallelism = 1;
  bool keep_traces = false;

  /// ConfigError on an empty grid, realizations < 1 or an incompatible variant.
  void validate() const;
};

/// Channel realization of seed index s; shared by every grid point and variant.
std::uint64_t channel_seed(std::uint64_t master, int seed_index);
/// Initial point of cell (g, s).
std::uint64_t cell_seed(std::uint64_t master, int grid_index, int seed_index);

/// Configuration and solver options of one grid point under one variant.
struct CellSetup {
  SystemConfig config;
  BcdOptions options;
};
CellSetup setup_cell(const ExperimentSpec& spec, double grid_value);

struct ResultRow {
  std::string experiment;
  std::string variant;
  int grid_index = 0;
  double grid_value = 0.0;
  int seed_index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double objective = 0.0;  // s
  double leakage = 0.0;
  double beta = 0.0;
  int iterations = 0;
  double wall_ms = 0.0;
  double initial_objective = 0.0;
  double first_outer_objective = 0.0;
  VectorXd latency;  // D_l, s
  // Doppler experiments only.
  bool doppler = false;
  double speed = 0.0;
  double f_dd = 0.0;
  double f_dc = 0.0;
  double unmitigated_objective = 0.0;
  std::vector<TraceRecord> trace;
};

struct Aggregate {
  std::string variant;
  double grid_value = 0.0;
  int count = 0;
  int failures = 0;
  double mean = 0.0;
  double std_error = 0.0;
  double mean_leakage = 0.0;
  double std_error_leakage = 0.0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;  // grid-major, then seed
  std::vector<Aggregate> summary;
  int failures = 0;
  bool failed = false;  // more than 10% of the cells failed
};

/// More than 10% of the cells failed.
bool too_many_failures(int failures, int cells);

/// Throws ExperimentError when result.failed.
void require_success(const ExperimentResult& result);

/// Mean and standard error over the successful rows of each grid point.
std::vector<Aggregate> aggregate(const std::vector<ResultRow>& rows);

/// One cell: channels, variant, BCD, and the Doppler step for train and pilot sweeps.
ResultRow run_cell(const ExperimentSpec& spec, int grid_index, int seed_index);

/// Every (grid point, seed) cell, spread over spec.parallelism threads and
/// merged in grid-then-seed order. Failed cells become error rows and never
/// stop the sweep.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Outcome of the Doppler step for one slot pair.
struct TrainSlotResult {
  SystemConfig config;   // at slot t
  ChannelSet channels;   // at slot t
  BcdSolution current;
  BcdSolution previous;
  MitigationResult mitigation;
  double f_dd = 0.0;
};

/// Solves slots t - 1 and t independently at the given position and runs the
/// phase smoothing on the pair.
TrainSlotResult solve_train_slot(const SystemConfig& cfg, const BcdOptions& options,
                                 double position, std::uint64_t channel_seed,
                                 std::uint64_t solver_seed);

/// Penalised objective of theta2 on top of decisions solved for slot t.
double doppler_objective(const SystemConfig& cfg, const ChannelSet& ch, const Decisions& dec,
                         const DopplerContext& ctx, const VectorXd& theta2);

struct ComparisonRow {
  double grid_value = 0.0;
  std::string variant;
  int pairs = 0;
  double mean = 0.0;
  double mean_gap = 0.0;  // paired mean of (variant - first variant)
  int sign = 0;
};

struct Comparison {
  std::vector<ExperimentResult> runs;  // one per variant
  std::vector<ComparisonRow> rows;
};

/// Runs every variant on the same seeds and grid; gaps are against variants[0].
Comparison compare_benchmarks(const ExperimentSpec& base, const std::vector<Variant>& variants);

struct CsvOptions {
  bool timing = true;  // false writes wall_ms as 0 for byte-stable files
};

/// Header plus one line per row; I/O failure throws Error naming the path.
void emit_csv(const std::vector<ResultRow>& rows, int num_iotds,
              const std::filesystem::path& path, const CsvOptions& options = {});
std::string format_csv(const std::vector<ResultRow>& rows, int num_iotds,
                       const CsvOptions& options = {});
void emit_trace_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path);

}  // namespace hsrirs
