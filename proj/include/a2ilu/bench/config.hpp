#pragma once

#include <array>
#include <limits>
#include <string>
#include <vector>

#include "a2ilu/factorization.hpp"
#include "a2ilu/krylov.hpp"
#include "a2ilu/types.hpp"

namespace a2ilu::bench {

enum class AccelMode { Off, On, Both };
enum class SourceKind { Generator, File, Directory };
enum class GeneratorKind { PoissonJump, Helmholtz, AdvectionDiffusion };
enum class ReportFormat { Csv, Json };

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::PoissonJump;
  Index m = 16;
  double contrast = 1000.0;                  // poisson_jump
  double shift = 0.0;                        // helmholtz
  std::array<double, 3> velocity{0, 0, 0};   // advection_diffusion
  std::string id() const;
  bool symmetric() const;
};

struct SourceSpec {
  SourceKind kind = SourceKind::Generator;
  GeneratorSpec generator;
  std::string path;  // file or directory sources
};

/// Parameter grid for one factorization variant; only the lists the variant
/// consumes participate in the Cartesian product.
struct VariantGrid {
  FactorVariant variant = FactorVariant::Ilu0;
  std::vector<double> alpha{0.0};
  std::vector<double> omega{0.0};
  std::vector<int> level_p{1};
  std::vector<double> tol{0.0};
  std::vector<double> fill_m{std::numeric_limits<double>::infinity()};
};

/// epsilon <= 0 and max_iters = 0 resolve per source to the benchmark
/// protocol defaults.
inline SolverConfig auto_solver_config() {
  SolverConfig s;
  s.epsilon = 0;
  s.max_iters = 0;
  return s;
}

struct RunConfig {
  SourceSpec source;
  std::vector<VariantGrid> variants{VariantGrid{}};
  AccelMode acceleration = AccelMode::Both;
  SolverConfig solver = auto_solver_config();
  bool auto_method = true;  // CG for symmetric sources, BiCGSTAB otherwise
  bool scaling = true;
  bool enforce_constraint = true;
  std::string output_path;
  ReportFormat format = ReportFormat::Csv;
};

/// Loads the same structure the CLI flags mirror from a single JSON file.
RunConfig load_config_json(const std::string& path);

const char* to_string(GeneratorKind k);
const char* to_string(AccelMode m);

}  // namespace a2ilu::bench
