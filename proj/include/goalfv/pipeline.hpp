// End-to-end pipelines behind the CLI: solve, adaptation runs with either
// dual solver, the parallel speedup harness, and the exact-vs-surrogate
// comparison.
#pragma once

#include "goalfv/config.hpp"

namespace goalfv {

MeshHierarchy build_mesh(const RunConfig& cfg);

struct SolveRunResult {
  double j = 0.0;
  double residual_l1 = 0.0;
  int newton_iterations = 0;
};

/// Primal solve + functional; writes convergence history and fields.
SolveRunResult run_solve(const RunConfig& cfg);

enum class DualMode { Exact, Surrogate };

struct AdaptRunResult {
  std::vector<AdaptReport> rounds;
  double final_j_estimate = 0.0;
  std::vector<std::string> warnings;
  std::uint64_t initial_checksum = 0;
};

/// max_rounds adaptation rounds; writes per-round reports, VTK fields (u, z,
/// eta), and the report CSV. With max_rounds = 0 this degenerates to a primal
/// solve + J report. `dataset_out`, when set on the exact path, collects
/// fine-mesh training rows.
AdaptRunResult run_adapt(const RunConfig& cfg, DualMode mode,
                         const SurrogateModel* model = nullptr,
                         Dataset* dataset_out = nullptr);

struct BenchSample {
  std::string module;
  int threads = 0;
  double seconds = 0.0;
  double speedup = 1.0;  // t(1)/t(N)
  bool parallel_kernel = true;
};

struct BenchReport {
  std::vector<BenchSample> samples;
  bool outputs_bitwise_identical = true;
  int elements = 0;
  std::vector<std::string> warnings;

  double seconds_of(const std::string& module, int threads) const;
  double speedup_of(const std::string& module, int threads) const;
};

/// Fixed problem size across thread counts; times the element-parallel
/// kernels (reconstruct, residual assembly, cell update, surrogate
/// prediction) and the sequential block-SGS smoother.
BenchReport run_bench(const RunConfig& cfg, const std::vector<int>& thread_counts);

void write_bench_csv(const BenchReport& rep, const std::string& path);

struct CompareRow {
  int round = 0;
  int elements_exact = 0;
  double j_error_exact = 0.0;
  double dual_seconds_exact = 0.0;
  int elements_surrogate = 0;
  double j_error_surrogate = 0.0;
  double dual_seconds_surrogate = 0.0;
};

struct CompareResult {
  double j_reference = 0.0;
  std::vector<CompareRow> rows;
};

/// Runs adapt-exact and adapt-surrogate from the same initial mesh (checksum
/// verified) against a cached uniform-refinement reference value.
CompareResult run_compare(const RunConfig& cfg, const SurrogateModel& model);

void write_adapt_report_csv(const std::vector<AdaptReport>& rounds,
                            const std::string& path);

/// Reference J by uniform refinement + solve, cached with the mesh checksum.
double reference_j(const RunConfig& cfg, bool* from_cache = nullptr);

}  // namespace goalfv
