#pragma once

#include <optional>
#include <string>
#include <vector>

#include "a2ilu/bench/config.hpp"
#include "a2ilu/types.hpp"

namespace a2ilu::bench {

inline constexpr int kReportSchemaVersion = 1;

/// One solver run. Timing fields form a trailing column set so that reports
/// are byte-identical across repeat runs once those columns are stripped.
struct RunRecord {
  std::string matrix_id;
  std::string variant;
  std::optional<double> alpha;
  std::optional<double> omega;
  std::optional<int> level_p;
  std::optional<double> tol;
  std::optional<double> fill_m;
  bool accelerated = false;
  std::string method;  // "cg" | "bicgstab"
  double epsilon = 0;
  bool scaled = true;

  std::optional<double> phi;
  std::optional<double> gamma;
  bool projected = false;
  bool no_improvement = false;
  int fallback_steps = 0;

  std::optional<Index> iterations;
  std::string convergence;  // convergent | pseudo_convergent | not_convergent | failed
  std::string error;
  std::optional<double> f_baseline;  // f(1,1)
  std::optional<double> f_final;     // f(phi,gamma)
  std::optional<double> true_residual_sq_rel;
  std::optional<double> increase_ratio;  // (N_A - N_I) / N_I, set on paired accelerated runs

  double factor_time_s = 0;
  double accel_time_s = 0;
  double solve_time_s = 0;
  double total_time_s = 0;
};

/// Stable column order; timings last. Numbers carry 17 significant digits.
std::string to_csv(const std::vector<RunRecord>& records);
std::vector<RunRecord> parse_csv_string(const std::string& text);
std::vector<RunRecord> parse_csv(const std::string& path);

std::string to_json(const std::vector<RunRecord>& records);

void emit_report(const std::vector<RunRecord>& records, ReportFormat format,
                 const std::string& path);

}  // namespace a2ilu::bench
