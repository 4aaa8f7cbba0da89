#include "a2ilu/bench/config.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace a2ilu::bench {

const char* to_string(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::PoissonJump: return "poisson_jump";
    case GeneratorKind::Helmholtz: return "helmholtz";
    case GeneratorKind::AdvectionDiffusion: return "advection_diffusion";
  }
  return "unknown";
}

const char* to_string(AccelMode m) {
  switch (m) {
    case AccelMode::Off: return "off";
    case AccelMode::On: return "on";
    case AccelMode::Both: return "both";
  }
  return "unknown";
}

namespace {

GeneratorKind parse_generator_kind(const std::string& s) {
  if (s == "poisson_jump" || s == "poisson") return GeneratorKind::PoissonJump;
  if (s == "helmholtz") return GeneratorKind::Helmholtz;
  if (s == "advection_diffusion" || s == "advection") return GeneratorKind::AdvectionDiffusion;
  throw std::invalid_argument("config: unknown generator kind '" + s + "'");
}

FactorVariant parse_variant(const std::string& s) {
  if (s == "ilu0") return FactorVariant::Ilu0;
  if (s == "shifted_ilu0" || s == "shifted") return FactorVariant::ShiftedIlu0;
  if (s == "milu0" || s == "milu") return FactorVariant::Milu0;
  if (s == "level_ilu" || s == "level") return FactorVariant::LevelIlu;
  if (s == "crout_ilu" || s == "crout") return FactorVariant::CroutIlu;
  throw std::invalid_argument("config: unknown variant '" + s + "'");
}

AccelMode parse_accel(const std::string& s) {
  if (s == "off") return AccelMode::Off;
  if (s == "on") return AccelMode::On;
  if (s == "both") return AccelMode::Both;
  throw std::invalid_argument("config: unknown acceleration mode '" + s + "'");
}

template <typename T>
std::vector<T> list_of(const nlohmann::json& j) {
  std::vector<T> out;
  for (const auto& v : j) out.push_back(v.get<T>());
  if (out.empty()) throw std::invalid_argument("config: parameter grid must be nonempty");
  return out;
}

}  // namespace

RunConfig load_config_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config: " + path + ": " + e.what());
  }

  RunConfig cfg;
  const auto& src = j.at("source");
  const std::string kind = src.at("kind").get<std::string>();
  if (kind == "generator") {
    cfg.source.kind = SourceKind::Generator;
    const auto& g = src.at("generator");
    cfg.source.generator.kind = parse_generator_kind(g.at("kind").get<std::string>());
    cfg.source.generator.m = g.at("m").get<Index>();
    if (g.contains("contrast")) cfg.source.generator.contrast = g["contrast"].get<double>();
    if (g.contains("shift")) cfg.source.generator.shift = g["shift"].get<double>();
    if (g.contains("velocity")) {
      const auto v = list_of<double>(g["velocity"]);
      if (v.size() != 3) throw std::invalid_argument("config: velocity must have 3 components");
      cfg.source.generator.velocity = {v[0], v[1], v[2]};
    }
  } else if (kind == "file") {
    cfg.source.kind = SourceKind::File;
    cfg.source.path = src.at("path").get<std::string>();
  } else if (kind == "directory") {
    cfg.source.kind = SourceKind::Directory;
    cfg.source.path = src.at("path").get<std::string>();
  } else {
    throw std::invalid_argument("config: unknown source kind '" + kind + "'");
  }

  if (j.contains("variants")) {
    cfg.variants.clear();
    for (const auto& v : j["variants"]) {
      VariantGrid grid;
      grid.variant = parse_variant(v.at("variant").get<std::string>());
      if (v.contains("alpha")) grid.alpha = list_of<double>(v["alpha"]);
      if (v.contains("omega")) grid.omega = list_of<double>(v["omega"]);
      if (v.contains("level_p")) grid.level_p = list_of<int>(v["level_p"]);
      if (v.contains("tol")) grid.tol = list_of<double>(v["tol"]);
      if (v.contains("fill_m")) grid.fill_m = list_of<double>(v["fill_m"]);
      for (double a : grid.alpha) {
        if (!std::isfinite(a)) throw std::invalid_argument("config: alpha must be finite");
      }
      for (double w : grid.omega) {
        if (!std::isfinite(w)) throw std::invalid_argument("config: omega must be finite");
      }
      cfg.variants.push_back(std::move(grid));
    }
    if (cfg.variants.empty()) throw std::invalid_argument("config: variants must be nonempty");
  }

  if (j.contains("acceleration")) cfg.acceleration = parse_accel(j["acceleration"].get<std::string>());
  if (j.contains("scaling")) cfg.scaling = j["scaling"].get<bool>();
  if (j.contains("enforce_constraint")) cfg.enforce_constraint = j["enforce_constraint"].get<bool>();

  if (j.contains("solver")) {
    const auto& s = j["solver"];
    if (s.contains("method")) {
      const std::string m = s["method"].get<std::string>();
      if (m == "auto") {
        cfg.auto_method = true;
      } else if (m == "cg") {
        cfg.auto_method = false;
        cfg.solver.method = KrylovMethod::Cg;
      } else if (m == "bicgstab") {
        cfg.auto_method = false;
        cfg.solver.method = KrylovMethod::Bicgstab;
      } else {
        throw std::invalid_argument("config: unknown method '" + m + "'");
      }
    }
    if (s.contains("epsilon")) cfg.solver.epsilon = s["epsilon"].get<double>();
    if (s.contains("max_iters")) cfg.solver.max_iters = s["max_iters"].get<Index>();
    if (s.contains("true_residual_stride")) {
      cfg.solver.true_residual_stride = s["true_residual_stride"].get<Index>();
    }
  }

  if (j.contains("output")) {
    const auto& o = j["output"];
    if (o.contains("path")) cfg.output_path = o["path"].get<std::string>();
    if (o.contains("format")) {
      const std::string f = o["format"].get<std::string>();
      if (f == "csv") cfg.format = ReportFormat::Csv;
      else if (f == "json") cfg.format = ReportFormat::Json;
      else throw std::invalid_argument("config: unknown format '" + f + "'");
    }
  }
  return cfg;
}

}  // namespace a2ilu::bench
