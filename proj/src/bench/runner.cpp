#include "a2ilu/bench/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "a2ilu/acceleration.hpp"
#include "a2ilu/factorization.hpp"
#include "a2ilu/krylov.hpp"
#include "a2ilu/matrix_market.hpp"
#include "a2ilu/problems.hpp"

namespace a2ilu::bench {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int thread_count() {
  if (const char* env = std::getenv("A2ILU_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 1;
}

/// One grid cell of a sweep, fully specified before execution.
struct Cell {
  FactorizationConfig factor;
  bool accelerated = false;
};

void append_cells(const VariantGrid& grid, AccelMode accel, std::vector<Cell>& cells) {
  std::vector<FactorizationConfig> configs;
  FactorizationConfig base;
  base.variant = grid.variant;
  switch (grid.variant) {
    case FactorVariant::Ilu0:
      configs.push_back(base);
      break;
    case FactorVariant::ShiftedIlu0:
      for (double a : grid.alpha) {
        base.alpha = a;
        configs.push_back(base);
      }
      break;
    case FactorVariant::Milu0:
      for (double w : grid.omega) {
        base.omega = w;
        configs.push_back(base);
      }
      break;
    case FactorVariant::LevelIlu:
      for (int p : grid.level_p) {
        base.level_p = p;
        configs.push_back(base);
      }
      break;
    case FactorVariant::CroutIlu:
      for (double t : grid.tol) {
        for (double m : grid.fill_m) {
          base.tol = t;
          base.fill_ratio_m = m;
          configs.push_back(base);
        }
      }
      break;
  }
  for (const auto& fc : configs) {
    if (accel == AccelMode::Off || accel == AccelMode::Both) cells.push_back({fc, false});
    if (accel == AccelMode::On || accel == AccelMode::Both) cells.push_back({fc, true});
  }
}

void fill_parameter_fields(RunRecord& rec, const FactorizationConfig& fc) {
  rec.variant = to_string(fc.variant);
  switch (fc.variant) {
    case FactorVariant::Ilu0: break;
    case FactorVariant::ShiftedIlu0: rec.alpha = fc.alpha; break;
    case FactorVariant::Milu0: rec.omega = fc.omega; break;
    case FactorVariant::LevelIlu: rec.level_p = fc.level_p; break;
    case FactorVariant::CroutIlu:
      rec.tol = fc.tol;
      rec.fill_m = fc.fill_ratio_m;
      break;
  }
}

RunRecord run_single(const PreparedSystem& sys, const Cell& cell, const SolverConfig& solver,
                     KrylovMethod method, bool scaled, bool enforce_constraint) {
  RunRecord rec;
  rec.matrix_id = sys.id;
  fill_parameter_fields(rec, cell.factor);
  rec.accelerated = cell.accelerated;
  rec.method = method == KrylovMethod::Cg ? "cg" : "bicgstab";
  rec.epsilon = solver.epsilon;
  rec.scaled = scaled;

  const auto t_total = Clock::now();
  try {
    const auto t_factor = Clock::now();
    const FactorTriple<double> factors = factorize(sys.matrix, cell.factor);
    rec.factor_time_s = seconds_since(t_factor);

    AccelerationParams<double> params{1.0, 1.0};
    if (cell.accelerated) {
      const auto t_accel = Clock::now();
      const ObjectiveData<double> obj = build_objective(sys.matrix, factors);
      OptimizeOptions<double> opts;
      opts.enforce_ratio_constraint = enforce_constraint;
      const OptimizeReport<double> report = optimize(obj, opts);
      rec.accel_time_s = seconds_since(t_accel);
      params = report.params;
      rec.phi = params.phi;
      rec.gamma = params.gamma;
      rec.projected = report.projected;
      rec.no_improvement = report.no_improvement;
      rec.fallback_steps = report.gradient_fallback_steps;
      rec.f_baseline = report.initial_objective;
      rec.f_final = report.final_objective;
    } else {
      const ObjectiveData<double> obj = build_objective(sys.matrix, factors);
      rec.f_baseline = objective(obj, AccelerationParams<double>{1.0, 1.0});
      rec.f_final = rec.f_baseline;
    }

    const auto t_solve = Clock::now();
    const Preconditioner<double> precond = make_preconditioner(factors, params);
    ApplyFn<double> apply = [&precond](const Vector<double>& r) { return precond.apply(r); };
    const Vector<double> x0 = Vector<double>::Zero(sys.matrix.rows());
    auto [x, stats] = method == KrylovMethod::Cg
                          ? cg_solve(sys.matrix, apply, sys.rhs, x0, solver)
                          : bicgstab_solve(sys.matrix, apply, sys.rhs, x0, solver);
    rec.solve_time_s = seconds_since(t_solve);
    stats.preconditioner_setup_s = rec.factor_time_s;
    stats.acceleration_s = rec.accel_time_s;

    rec.iterations = stats.iterations;
    rec.convergence = to_string(stats.convergence);
    if (stats.breakdown) rec.error = stats.breakdown_reason;
    if (!stats.true_residual_checkpoints.empty()) {
      rec.true_residual_sq_rel = stats.true_residual_checkpoints.back().true_residual_sq_rel;
    }
  } catch (const std::exception& e) {
    rec.convergence = "failed";
    rec.error = e.what();
  }
  rec.total_time_s = seconds_since(t_total);
  return rec;
}

void pair_increase_ratios(std::vector<RunRecord>& records) {
  for (auto& accel : records) {
    if (!accel.accelerated || !accel.iterations) continue;
    for (const auto& base : records) {
      if (base.accelerated || base.matrix_id != accel.matrix_id ||
          base.variant != accel.variant || base.alpha != accel.alpha ||
          base.omega != accel.omega || base.level_p != accel.level_p ||
          base.tol != accel.tol || base.fill_m != accel.fill_m) {
        continue;
      }
      if (base.iterations && *base.iterations > 0) {
        accel.increase_ratio =
            static_cast<double>(*accel.iterations - *base.iterations) / *base.iterations;
      }
      break;
    }
  }
}

/// index-sharded parallel map preserving output order
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const int threads = std::min<int>(thread_count(), static_cast<int>(count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

std::string GeneratorSpec::id() const {
  std::ostringstream ss;
  switch (kind) {
    case GeneratorKind::PoissonJump:
      ss << "poisson_jump_m" << m << "_k" << contrast;
      break;
    case GeneratorKind::Helmholtz:
      ss << "helmholtz_m" << m << "_s" << shift;
      break;
    case GeneratorKind::AdvectionDiffusion:
      ss << "advection_m" << m << "_v" << velocity[0] << "_" << velocity[1] << "_"
         << velocity[2];
      break;
  }
  return ss.str();
}

bool GeneratorSpec::symmetric() const {
  return kind != GeneratorKind::AdvectionDiffusion ||
         (velocity[0] == 0 && velocity[1] == 0 && velocity[2] == 0);
}

PreparedSystem prepare_generator(const GeneratorSpec& spec, bool scaling) {
  Problem<double> problem;
  switch (spec.kind) {
    case GeneratorKind::PoissonJump:
      problem = gen_poisson_jump<double>(spec.m, spec.contrast);
      break;
    case GeneratorKind::Helmholtz:
      problem = gen_helmholtz<double>(spec.m, spec.shift);
      break;
    case GeneratorKind::AdvectionDiffusion:
      problem = gen_advection_diffusion<double>(
          spec.m, {spec.velocity[0], spec.velocity[1], spec.velocity[2]});
      break;
  }
  PreparedSystem sys;
  sys.id = spec.id();
  sys.symmetric = spec.symmetric();
  sys.default_max_iters = 10 * spec.m;  // generous cap for generated problems
  sys.default_epsilon = 1e-18;  // relative 2-norm 1e-9, squared criterion
  if (scaling) {
    auto [scaled, record] = diagonal_scale(problem.matrix);
    sys.matrix = std::move(scaled);
    sys.rhs = record.scale_rhs(problem.rhs);
    sys.scaling = std::move(record);
  } else {
    sys.matrix = std::move(problem.matrix);
    sys.rhs = std::move(problem.rhs);
  }
  return sys;
}

PreparedSystem prepare_file(const std::string& path, bool scaling) {
  auto mm = read_matrix_market<double>(path);
  if (!mm.zero_diagonal_rows.empty()) {
    throw ZeroDiagonalError(mm.zero_diagonal_rows.front(),
                            path + ": zero diagonal in row " +
                                std::to_string(mm.zero_diagonal_rows.front()));
  }
  PreparedSystem sys;
  sys.id = std::filesystem::path(path).stem().string();
  sys.symmetric = mm.symmetric_source || is_numerically_symmetric(mm.matrix);
  sys.default_max_iters = static_cast<Index>(mm.matrix.rows());  // general-matrix protocol
  sys.default_epsilon = 1e-16;  // relative 2-norm 1e-8, squared criterion
  if (scaling) {
    auto [scaled, record] = diagonal_scale(mm.matrix);
    sys.matrix = std::move(scaled);
    sys.scaling = std::move(record);
  } else {
    sys.matrix = std::move(mm.matrix);
  }
  sys.rhs = build_rhs_ones(sys.matrix);  // b = A e on the solved (scaled) matrix
  return sys;
}

std::vector<RunRecord> run_sweep(const RunConfig& cfg) {
  std::vector<PreparedSystem> systems;
  switch (cfg.source.kind) {
    case SourceKind::Generator:
      systems.push_back(prepare_generator(cfg.source.generator, cfg.scaling));
      break;
    case SourceKind::File:
      systems.push_back(prepare_file(cfg.source.path, cfg.scaling));
      break;
    case SourceKind::Directory: {
      std::vector<std::string> files;
      for (const auto& entry : std::filesystem::directory_iterator(cfg.source.path)) {
        if (entry.path().extension() == ".mtx") files.push_back(entry.path().string());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) systems.push_back(prepare_file(f, cfg.scaling));
      break;
    }
  }

  std::vector<Cell> cells;
  for (const auto& grid : cfg.variants) append_cells(grid, cfg.acceleration, cells);

  struct Job {
    const PreparedSystem* sys;
    Cell cell;
    SolverConfig solver;
    KrylovMethod method;
  };
  std::vector<Job> jobs;
  for (const auto& sys : systems) {
    SolverConfig solver = cfg.solver;
    if (solver.epsilon <= 0) solver.epsilon = sys.default_epsilon;
    if (solver.max_iters <= 0) solver.max_iters = sys.default_max_iters;
    const KrylovMethod method =
        cfg.auto_method ? (sys.symmetric ? KrylovMethod::Cg : KrylovMethod::Bicgstab)
                        : cfg.solver.method;
    for (const auto& cell : cells) jobs.push_back({&sys, cell, solver, method});
  }

  std::vector<RunRecord> records(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    const Job& job = jobs[i];
    records[i] = run_single(*job.sys, job.cell, job.solver, job.method, cfg.scaling,
                            cfg.enforce_constraint);
  });
  pair_increase_ratios(records);
  return records;
}

CollectionTally run_collection(const std::string& directory, const CollectionConfig& cfg) {
  CollectionTally tally;
  tally.alphas = cfg.alphas;
  tally.shifted_ilu0.resize(cfg.alphas.size());
  tally.shifted_a2ilu0.resize(cfg.alphas.size());
  tally.histograms.resize(cfg.alphas.size());

  std::vector<std::string> files;
  for (const auto& entry : std::filesystem::directory_iterator(directory)) {
    if (entry.path().extension() == ".mtx") files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());

  for (const auto& file : files) {
    PreparedSystem sys;
    try {
      sys = prepare_file(file, cfg.scaling);
    } catch (const std::exception& e) {
      tally.skipped.emplace_back(file, e.what());
      continue;
    }
    SolverConfig solver;
    solver.method = KrylovMethod::Cg;
    solver.epsilon = cfg.epsilon;
    solver.max_iters = cfg.max_iters > 0 ? cfg.max_iters : sys.default_max_iters;
    solver.true_residual_stride = cfg.true_residual_stride;

    for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
      FactorizationConfig fc;
      fc.variant = FactorVariant::ShiftedIlu0;
      fc.alpha = cfg.alphas[a];

      const RunRecord base = run_single(sys, {fc, false}, solver, KrylovMethod::Cg,
                                        cfg.scaling, cfg.enforce_constraint);
      const RunRecord accel = run_single(sys, {fc, true}, solver, KrylovMethod::Cg,
                                         cfg.scaling, cfg.enforce_constraint);

      auto bump = [](ConvergenceCounts& counts, const RunRecord& rec) {
        if (rec.convergence == "convergent") ++counts.convergent;
        else if (rec.convergence == "pseudo_convergent") ++counts.pseudo_convergent;
        else ++counts.not_convergent;  // includes failed factorization
      };
      bump(tally.shifted_ilu0[a], base);
      bump(tally.shifted_a2ilu0[a], accel);

      const bool base_ok = base.convergence == "convergent";
      const bool accel_ok = accel.convergence == "convergent";
      auto& hist = tally.histograms[a];
      if (accel_ok && !base_ok) {
        ++hist.below_minus_50;
      } else if (base_ok && !accel_ok) {
        ++hist.above_plus_50;
      } else if (!base_ok && !accel_ok) {
        ++hist.no_change;
      } else if (*base.iterations == 0) {
        if (*accel.iterations == 0) ++hist.no_change;
        else ++hist.above_plus_50;
      } else {
        const double ratio = static_cast<double>(*accel.iterations - *base.iterations) /
                             static_cast<double>(*base.iterations);
        if (ratio < -0.5) ++hist.below_minus_50;
        else if (ratio < 0) ++hist.minus_50_to_0;
        else if (ratio == 0) ++hist.no_change;
        else if (ratio <= 0.5) ++hist.zero_to_plus_50;
        else ++hist.above_plus_50;
      }

      tally.records.push_back(base);
      tally.records.push_back(accel);
    }
  }
  pair_increase_ratios(tally.records);
  return tally;
}

std::string collection_to_json(const CollectionTally& tally) {
  nlohmann::json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["alphas"] = tally.alphas;
  auto counts_json = [](const std::vector<ConvergenceCounts>& counts) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : counts) {
      arr.push_back({{"convergent", c.convergent},
                     {"pseudo_convergent", c.pseudo_convergent},
                     {"not_convergent", c.not_convergent}});
    }
    return arr;
  };
  doc["shifted_ilu0"] = counts_json(tally.shifted_ilu0);
  doc["shifted_a2ilu0"] = counts_json(tally.shifted_a2ilu0);
  doc["increase_ratio_histograms"] = nlohmann::json::array();
  for (const auto& h : tally.histograms) {
    doc["increase_ratio_histograms"].push_back({{"below_minus_50", h.below_minus_50},
                                                {"minus_50_to_0", h.minus_50_to_0},
                                                {"no_change", h.no_change},
                                                {"zero_to_plus_50", h.zero_to_plus_50},
                                                {"above_plus_50", h.above_plus_50}});
  }
  doc["skipped"] = nlohmann::json::array();
  for (const auto& [file, reason] : tally.skipped) {
    doc["skipped"].push_back({{"file", file}, {"reason", reason}});
  }
  return doc.dump(2) + "\n";
}

void emit_collection_report(const CollectionTally& tally, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_collection_report: cannot open " + path);
  out << collection_to_json(tally);
  if (!out) throw std::runtime_error("emit_collection_report: write failed for " + path);
}

}  // namespace a2ilu::bench
