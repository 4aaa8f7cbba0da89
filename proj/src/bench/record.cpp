#include "a2ilu/bench/record.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace a2ilu::bench {

namespace {

const char* const kColumns[] = {
    "matrix_id",   "variant",       "alpha",         "omega",
    "level_p",     "tol",           "fill_m",        "accelerated",
    "method",      "epsilon",       "scaled",        "phi",
    "gamma",       "projected",     "no_improvement", "fallback_steps",
    "iterations",  "convergence",   "error",         "f_baseline",
    "f_final",     "true_residual_sq_rel",           "increase_ratio",
    "factor_time_s", "accel_time_s", "solve_time_s", "total_time_s",
};

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string opt_str(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

std::string opt_str(const std::optional<int>& v) {
  return v ? std::to_string(*v) : std::string();
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

std::optional<double> parse_opt_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::stod(s);
}

std::optional<int> parse_opt_int(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::stoi(s);
}

}  // namespace

std::string to_csv(const std::vector<RunRecord>& records) {
  std::ostringstream out;
  for (std::size_t i = 0; i < std::size(kColumns); ++i) {
    if (i) out << ',';
    out << kColumns[i];
  }
  out << '\n';
  for (const auto& r : records) {
    out << csv_escape(r.matrix_id) << ',' << r.variant << ',' << opt_str(r.alpha) << ','
        << opt_str(r.omega) << ',' << opt_str(r.level_p) << ',' << opt_str(r.tol) << ','
        << opt_str(r.fill_m) << ',' << (r.accelerated ? "true" : "false") << ',' << r.method
        << ',' << format_double(r.epsilon) << ',' << (r.scaled ? "true" : "false") << ','
        << opt_str(r.phi) << ',' << opt_str(r.gamma) << ',' << (r.projected ? "true" : "false")
        << ',' << (r.no_improvement ? "true" : "false") << ',' << r.fallback_steps << ','
        << opt_str(r.iterations) << ',' << r.convergence << ',' << csv_escape(r.error) << ','
        << opt_str(r.f_baseline) << ',' << opt_str(r.f_final) << ','
        << opt_str(r.true_residual_sq_rel) << ',' << opt_str(r.increase_ratio) << ','
        << format_double(r.factor_time_s) << ',' << format_double(r.accel_time_s) << ','
        << format_double(r.solve_time_s) << ',' << format_double(r.total_time_s) << '\n';
  }
  return out.str();
}

std::vector<RunRecord> parse_csv_string(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("parse_csv: empty input");
  const auto header = split_csv_line(line);
  if (header.size() != std::size(kColumns)) {
    throw std::runtime_error("parse_csv: unexpected column count " +
                             std::to_string(header.size()));
  }
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] != kColumns[i]) {
      throw std::runtime_error("parse_csv: unexpected column '" + header[i] + "'");
    }
  }

  std::vector<RunRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != std::size(kColumns)) {
      throw std::runtime_error("parse_csv: malformed row '" + line + "'");
    }
    RunRecord r;
    std::size_t c = 0;
    r.matrix_id = f[c++];
    r.variant = f[c++];
    r.alpha = parse_opt_double(f[c++]);
    r.omega = parse_opt_double(f[c++]);
    r.level_p = parse_opt_int(f[c++]);
    r.tol = parse_opt_double(f[c++]);
    r.fill_m = parse_opt_double(f[c++]);
    r.accelerated = f[c++] == "true";
    r.method = f[c++];
    r.epsilon = std::stod(f[c++]);
    r.scaled = f[c++] == "true";
    r.phi = parse_opt_double(f[c++]);
    r.gamma = parse_opt_double(f[c++]);
    r.projected = f[c++] == "true";
    r.no_improvement = f[c++] == "true";
    r.fallback_steps = std::stoi(f[c++]);
    if (auto it = parse_opt_int(f[c++])) r.iterations = static_cast<Index>(*it);
    r.convergence = f[c++];
    r.error = f[c++];
    r.f_baseline = parse_opt_double(f[c++]);
    r.f_final = parse_opt_double(f[c++]);
    r.true_residual_sq_rel = parse_opt_double(f[c++]);
    r.increase_ratio = parse_opt_double(f[c++]);
    r.factor_time_s = std::stod(f[c++]);
    r.accel_time_s = std::stod(f[c++]);
    r.solve_time_s = std::stod(f[c++]);
    r.total_time_s = std::stod(f[c++]);
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<RunRecord> parse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("parse_csv: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv_string(ss.str());
}

namespace {

nlohmann::json record_to_json(const RunRecord& r) {
  nlohmann::json j;
  auto set_opt = [&j](const char* key, const auto& opt) {
    if (opt) j[key] = *opt;
    else j[key] = nullptr;
  };
  j["matrix_id"] = r.matrix_id;
  j["variant"] = r.variant;
  set_opt("alpha", r.alpha);
  set_opt("omega", r.omega);
  set_opt("level_p", r.level_p);
  set_opt("tol", r.tol);
  set_opt("fill_m", r.fill_m);
  j["accelerated"] = r.accelerated;
  j["method"] = r.method;
  j["epsilon"] = r.epsilon;
  j["scaled"] = r.scaled;
  set_opt("phi", r.phi);
  set_opt("gamma", r.gamma);
  j["projected"] = r.projected;
  j["no_improvement"] = r.no_improvement;
  j["fallback_steps"] = r.fallback_steps;
  set_opt("iterations", r.iterations);
  j["convergence"] = r.convergence;
  j["error"] = r.error;
  set_opt("f_baseline", r.f_baseline);
  set_opt("f_final", r.f_final);
  set_opt("true_residual_sq_rel", r.true_residual_sq_rel);
  set_opt("increase_ratio", r.increase_ratio);
  j["factor_time_s"] = r.factor_time_s;
  j["accel_time_s"] = r.accel_time_s;
  j["solve_time_s"] = r.solve_time_s;
  j["total_time_s"] = r.total_time_s;
  return j;
}

}  // namespace

std::string to_json(const std::vector<RunRecord>& records) {
  nlohmann::json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["records"] = nlohmann::json::array();
  for (const auto& r : records) doc["records"].push_back(record_to_json(r));
  return doc.dump(2) + "\n";
}

void emit_report(const std::vector<RunRecord>& records, ReportFormat format,
                 const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_report: cannot open " + path + " for writing");
  out << (format == ReportFormat::Csv ? to_csv(records) : to_json(records));
  if (!out) throw std::runtime_error("emit_report: write failed for " + path);
}

}  // namespace a2ilu::bench
