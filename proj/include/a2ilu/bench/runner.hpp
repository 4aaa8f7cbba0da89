#pragma once

#include <string>
#include <utility>
#include <vector>

#include "a2ilu/bench/config.hpp"
#include "a2ilu/bench/record.hpp"
#include "a2ilu/sparse_kernels.hpp"
#include "a2ilu/types.hpp"

namespace a2ilu::bench {

/// A source matrix after the pre-solve protocol: optional symmetric diagonal
/// scaling, right-hand side in scaled variables.
struct PreparedSystem {
  std::string id;
  SparseMatrix<double> matrix;   // scaled when record says so
  ScalingRecord<double> scaling;
  Vector<double> rhs;
  bool symmetric = false;
  Index default_max_iters = 0;
  double default_epsilon = 1e-18;
};

PreparedSystem prepare_generator(const GeneratorSpec& spec, bool scaling);
PreparedSystem prepare_file(const std::string& path, bool scaling);

/// Executes the Cartesian product (variant x grid values x acceleration
/// flag). Failed cells (breakdown, divergence) are recorded, never aborting
/// the sweep. Cells may run in parallel (A2ILU_THREADS); output order is
/// config order.
std::vector<RunRecord> run_sweep(const RunConfig& cfg);

struct ConvergenceCounts {
  int convergent = 0;
  int pseudo_convergent = 0;
  int not_convergent = 0;
};

struct IncreaseRatioHistogram {
  int below_minus_50 = 0;  // includes "A2 converges, baseline does not"
  int minus_50_to_0 = 0;
  int no_change = 0;
  int zero_to_plus_50 = 0;
  int above_plus_50 = 0;   // includes "baseline converges, A2 does not"
};

struct CollectionConfig {
  std::vector<double> alphas{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  double epsilon = 1e-16;  // general-matrix protocol: relative 2-norm 1e-8, squared
  Index max_iters = 0;    // 0 = matrix dimension
  Index true_residual_stride = 10;
  bool scaling = true;
  bool enforce_constraint = true;
};

struct CollectionTally {
  std::vector<double> alphas;
  std::vector<ConvergenceCounts> shifted_ilu0;   // per alpha
  std::vector<ConvergenceCounts> shifted_a2ilu0; // per alpha
  std::vector<IncreaseRatioHistogram> histograms;  // per alpha
  std::vector<std::pair<std::string, std::string>> skipped;  // file, reason
  std::vector<RunRecord> records;
};

/// For each Matrix Market file in the directory: scale, build b = A e, run
/// shifted ILU(0) and shifted A2ILU(0) across the alpha grid, and tally the
/// convergence trichotomy plus increase-ratio histogram buckets. Matrices
/// with zero diagonals are skipped and listed.
CollectionTally run_collection(const std::string& directory, const CollectionConfig& cfg);

std::string collection_to_json(const CollectionTally& tally);
void emit_collection_report(const CollectionTally& tally, const std::string& path);

}  // namespace a2ilu::bench
