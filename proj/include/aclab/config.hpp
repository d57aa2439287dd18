#pragma once

// Run configuration: a sectioned key = value text format.
//
//   [grid]       x_min x_max y_min y_max nx ny tag.<face>
//   [physics]    eps sigma law.<face> = dynamic | dirichlet | neumann
//   [initial]    type = line | circle | halfspace | sigma_arc, plus
//                line: x sign; circle: cx cy radius sign; halfspace: normal_x
//                normal_y offset; sigma_arc: (uses physics.sigma)
//   [schedule]   t_end cadence safety per_step
//   [experiment] mode eps_list sigma_list test_fields brakke brakke_mode
//                windows oracle_* keys
//   [output]     dir fields dump_every
//
// '#' and ';' start comments. Lists are comma separated; test fields are
// written name(key=value, ...). serialize() emits a canonical form, and
// parse_config_text(serialize(c)) reproduces c exactly.

#include <aclab/error.hpp>
#include <aclab/grid.hpp>
#include <aclab/solver.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace aclab {

/// Catalog reference: name(key=value, ...).
struct FieldSpec {
  std::string name;
  std::map<std::string, double> params;

  double get(const std::string& k, double fallback) const {
    auto it = params.find(k);
    return it == params.end() ? fallback : it->second;
  }
  bool operator==(const FieldSpec&) const = default;
};

struct Window {
  double t1 = 0.0;
  double t2 = 0.0;
  bool operator==(const Window&) const = default;
};

struct GridConfig {
  double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 0.0;
  int nx = 101, ny = 1;
  std::array<std::string, 4> tags{"bottom", "right", "top", "left"};
  bool operator==(const GridConfig&) const = default;
};

struct PhysicsConfig {
  double eps = 0.05;
  double sigma = 1.0;
  std::array<std::string, 4> law{"neumann", "neumann", "neumann", "neumann"};
  bool operator==(const PhysicsConfig&) const = default;
};

struct InitialConfig {
  std::string type = "line";
  double x = 0.5, sign = 1.0;
  double cx = 0.0, cy = 0.0, radius = 0.5;
  double normal_x = 1.0, normal_y = 0.0, offset = 0.0;
  bool operator==(const InitialConfig&) const = default;
};

struct ScheduleConfig {
  double t_end = 0.1;
  int cadence = 100;
  double safety = 0.5;
  bool per_step = true;
  bool operator==(const ScheduleConfig&) const = default;
};

struct ExperimentConfig {
  std::string mode = "run";
  std::vector<double> eps_list;
  std::vector<double> sigma_list;
  std::vector<FieldSpec> test_fields;
  std::vector<FieldSpec> brakke;
  std::string brakke_mode = "dynamic";
  std::vector<Window> windows;
  /// Half width of the local linear fit used for contact velocities.
  double contact_fd_span = 0.01;
  std::string oracle_shape = "arc";
  int oracle_nodes = 200;
  double oracle_dt = 1e-5;
  double oracle_t_end = 0.3;
  double oracle_radius = 0.5;
  int oracle_redistribute = 10;
  double oracle_grading = 1.0;
  std::string oracle_law = "dynamic";
  bool operator==(const ExperimentConfig&) const = default;
};

struct OutputConfig {
  std::string dir = "out";
  std::string fields = "none";
  int dump_every = 1;
  bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
  GridConfig grid;
  PhysicsConfig physics;
  InitialConfig initial;
  ScheduleConfig schedule;
  ExperimentConfig experiment;
  OutputConfig output;
  bool operator==(const RunConfig&) const = default;
};

/// Number formatting that reads back to the same double.
inline std::string format_number(double v) {
  char buf[40];
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::string format_field(const FieldSpec& f) {
  std::string s = f.name;
  if (f.params.empty()) return s;
  s += '(';
  bool first = true;
  for (const auto& [k, v] : f.params) {
    if (!first) s += ", ";
    s += k + "=" + format_number(v);
    first = false;
  }
  return s + ')';
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// Splits on commas that are not inside parentheses.
inline std::vector<std::string> split_top(const std::string& s) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

class Collector {
 public:
  using Section = std::map<std::string, std::string>;

  Collector(std::map<std::string, Section> data, std::vector<std::string>& errors)
      : data_(std::move(data)), errors_(errors) {}

  std::optional<std::string> raw(const std::string& sec, const std::string& key) {
    used_.insert(sec + "." + key);
    auto s = data_.find(sec);
    if (s == data_.end()) return std::nullopt;
    auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return k->second;
  }

  void number(const std::string& sec, const std::string& key, double& out, bool required = false) {
    auto v = raw(sec, key);
    if (!v) {
      if (required) errors_.push_back("missing key " + sec + "." + key);
      return;
    }
    char* end = nullptr;
    const double d = std::strtod(v->c_str(), &end);
    if (end == v->c_str() || trim(end) != "") {
      errors_.push_back(sec + "." + key + " is not a number: '" + *v + "'");
      return;
    }
    out = d;
  }

  void integer(const std::string& sec, const std::string& key, int& out, bool required = false) {
    double d = out;
    const std::size_t before = errors_.size();
    number(sec, key, d, required);
    if (errors_.size() != before) return;
    if (d != std::floor(d) || std::abs(d) > 1e9) {
      errors_.push_back(sec + "." + key + " must be an integer");
      return;
    }
    out = static_cast<int>(d);
  }

  void text(const std::string& sec, const std::string& key, std::string& out, bool required = false) {
    auto v = raw(sec, key);
    if (!v) {
      if (required) errors_.push_back("missing key " + sec + "." + key);
      return;
    }
    out = *v;
  }

  void boolean(const std::string& sec, const std::string& key, bool& out) {
    auto v = raw(sec, key);
    if (!v) return;
    if (*v == "true" || *v == "1" || *v == "yes") {
      out = true;
    } else if (*v == "false" || *v == "0" || *v == "no") {
      out = false;
    } else {
      errors_.push_back(sec + "." + key + " must be true or false");
    }
  }

  void numbers(const std::string& sec, const std::string& key, std::vector<double>& out) {
    auto v = raw(sec, key);
    if (!v) return;
    out.clear();
    for (const auto& item : split_top(*v)) {
      char* end = nullptr;
      const double d = std::strtod(item.c_str(), &end);
      if (item.empty() || trim(end) != "") {
        errors_.push_back(sec + "." + key + " has a non-numeric entry '" + item + "'");
        continue;
      }
      out.push_back(d);
    }
  }

  void fields(const std::string& sec, const std::string& key, std::vector<FieldSpec>& out) {
    auto v = raw(sec, key);
    if (!v) return;
    out.clear();
    for (const auto& item : split_top(*v)) {
      FieldSpec f;
      const auto open = item.find('(');
      if (open == std::string::npos) {
        f.name = trim(item);
      } else {
        if (item.back() != ')') {
          errors_.push_back(sec + "." + key + ": unbalanced parentheses in '" + item + "'");
          continue;
        }
        f.name = trim(item.substr(0, open));
        for (const auto& kv : split_top(item.substr(open + 1, item.size() - open - 2))) {
          if (kv.empty()) continue;
          const auto eq = kv.find('=');
          char* end = nullptr;
          const std::string val = eq == std::string::npos ? "" : trim(kv.substr(eq + 1));
          const double d = std::strtod(val.c_str(), &end);
          if (eq == std::string::npos || val.empty() || trim(end) != "") {
            errors_.push_back(sec + "." + key + ": bad parameter '" + kv + "'");
            continue;
          }
          f.params[trim(kv.substr(0, eq))] = d;
        }
      }
      if (f.name.empty()) {
        errors_.push_back(sec + "." + key + ": empty field name");
        continue;
      }
      out.push_back(std::move(f));
    }
  }

  void windows(const std::string& sec, const std::string& key, std::vector<Window>& out) {
    auto v = raw(sec, key);
    if (!v) return;
    out.clear();
    for (const auto& item : split_top(*v)) {
      const auto colon = item.find(':');
      char* e1 = nullptr;
      char* e2 = nullptr;
      if (colon == std::string::npos) {
        errors_.push_back(sec + "." + key + ": window '" + item + "' is not t1:t2");
        continue;
      }
      const std::string a = trim(item.substr(0, colon)), b = trim(item.substr(colon + 1));
      Window w{std::strtod(a.c_str(), &e1), std::strtod(b.c_str(), &e2)};
      if (a.empty() || b.empty() || trim(e1) != "" || trim(e2) != "") {
        errors_.push_back(sec + "." + key + ": window '" + item + "' is not t1:t2");
        continue;
      }
      out.push_back(w);
    }
  }

  void report_unknown() {
    for (const auto& [sec, keys] : data_)
      for (const auto& [k, v] : keys)
        if (!used_.count(sec + "." + k)) errors_.push_back("unknown key " + sec + "." + k);
  }

 private:
  std::map<std::string, Section> data_;
  std::set<std::string> used_;
  std::vector<std::string>& errors_;
};

inline const std::set<std::string>& known_sections() {
  static const std::set<std::string> s{"grid", "physics", "initial", "schedule", "experiment", "output"};
  return s;
}

}  // namespace detail

/// Collected configuration violations, one per line in what().
class ConfigErrors : public ConfigError {
 public:
  explicit ConfigErrors(std::vector<std::string> errors) : ConfigError(join(errors)), errors_(std::move(errors)) {}
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  static std::string join(const std::vector<std::string>& e) {
    std::string s;
    for (const auto& x : e) s += (s.empty() ? "" : "\n") + x;
    return s;
  }
  std::vector<std::string> errors_;
};

/// Range and consistency checks; returns every violation found.
inline std::vector<std::string> validate(const RunConfig& c) {
  std::vector<std::string> e;
  const auto& g = c.grid;
  if (g.nx < 2) e.push_back("grid.nx must be >= 2");
  if (g.ny < 1) e.push_back("grid.ny must be >= 1");
  if (!(g.x_max > g.x_min)) e.push_back("grid.x_max must exceed grid.x_min");
  if (g.ny > 1 && !(g.y_max > g.y_min)) e.push_back("grid.y_max must exceed grid.y_min");
  std::set<std::string> tags;
  for (Face f : kAllFaces) {
    const auto& t = g.tags[static_cast<int>(f)];
    if (t.empty()) e.push_back("grid.tag." + std::string(face_name(f)) + " is empty");
    if (!tags.insert(t).second) e.push_back("grid.tag." + std::string(face_name(f)) + " repeats tag '" + t + "'");
  }
  const auto& p = c.physics;
  if (!(p.eps > 0.0 && p.eps < 1.0)) e.push_back("physics.eps out of (0,1)");
  bool dynamic = false;
  for (Face f : kAllFaces) {
    const auto& l = p.law[static_cast<int>(f)];
    if (l != "dynamic" && l != "dirichlet" && l != "neumann")
      e.push_back("physics.law." + std::string(face_name(f)) + " must be dynamic, dirichlet or neumann");
    dynamic = dynamic || l == "dynamic";
  }
  if ((dynamic || c.initial.type == "sigma_arc") && !(p.sigma > 0.0)) e.push_back("physics.sigma must be > 0");
  const auto& in = c.initial;
  if (in.type == "line") {
    if (!(in.x > g.x_min && in.x < g.x_max)) e.push_back("initial.x outside the grid extent");
    if (in.sign == 0.0) e.push_back("initial.sign must be nonzero");
  } else if (in.type == "circle") {
    if (!(in.radius > 0.0)) e.push_back("initial.radius must be > 0");
  } else if (in.type == "halfspace") {
    if (in.normal_x == 0.0 && in.normal_y == 0.0) e.push_back("initial.normal must be nonzero");
  } else if (in.type != "sigma_arc") {
    e.push_back("initial.type must be line, circle, halfspace or sigma_arc");
  }
  if (g.ny == 1 && in.type != "line") e.push_back("initial.type must be line on a 1D grid");
  const auto& s = c.schedule;
  if (!(s.t_end >= 0.0)) e.push_back("schedule.t_end must be >= 0");
  if (s.cadence < 1) e.push_back("schedule.cadence must be >= 1");
  if (!(s.safety > 0.0 && s.safety <= 1.0)) e.push_back("schedule.safety out of (0,1]");
  const auto& x = c.experiment;
  static const std::set<std::string> modes{"run", "sweep-eps", "sweep-sigma", "arc-benchmark", "oracle"};
  if (!modes.count(x.mode)) e.push_back("experiment.mode must be one of run, sweep-eps, sweep-sigma, arc-benchmark, oracle");
  if (x.mode == "sweep-eps") {
    if (x.eps_list.empty()) e.push_back("experiment.eps_list must be nonempty in sweep-eps mode");
    for (double v : x.eps_list)
      if (!(v > 0.0 && v < 1.0)) e.push_back("experiment.eps_list entry " + format_number(v) + " out of (0,1)");
  }
  if (x.mode == "sweep-sigma") {
    if (x.sigma_list.empty()) e.push_back("experiment.sigma_list must be nonempty in sweep-sigma mode");
    if (!dynamic) e.push_back("sweep-sigma needs at least one dynamic face");
  }
  if (x.mode == "oracle" && x.oracle_shape == "arc" && x.sigma_list.empty() && !(p.sigma > 0.0))
    e.push_back("physics.sigma must be > 0");
  for (double v : x.sigma_list)
    if (!(v > 0.0)) e.push_back("experiment.sigma_list entry " + format_number(v) + " must be > 0");
  static const std::set<std::string> vec_names{"constant", "bump", "gaussian", "radial_bump"};
  for (const auto& f : x.test_fields)
    if (!vec_names.count(f.name)) e.push_back("experiment.test_fields: unknown field '" + f.name + "'");
  static const std::set<std::string> sca_names{"one", "gaussian", "neumann_gaussian", "bump"};
  for (const auto& f : x.brakke)
    if (!sca_names.count(f.name)) e.push_back("experiment.brakke: unknown test function '" + f.name + "'");
  if (x.brakke_mode != "dynamic" && x.brakke_mode != "dirichlet" && x.brakke_mode != "neumann")
    e.push_back("experiment.brakke_mode must be dynamic, dirichlet or neumann");
  for (const auto& w : x.windows)
    if (!(w.t1 < w.t2) || w.t1 < 0.0) e.push_back("experiment.windows entry " + format_number(w.t1) + ":" +
                                                 format_number(w.t2) + " is not an increasing nonnegative pair");
  if (!(x.contact_fd_span > 0.0)) e.push_back("experiment.contact_fd_span must be > 0");
  if (x.oracle_shape != "arc" && x.oracle_shape != "circle") e.push_back("experiment.oracle_shape must be arc or circle");
  if (x.oracle_nodes < 3) e.push_back("experiment.oracle_nodes must be >= 3");
  if (!(x.oracle_dt > 0.0)) e.push_back("experiment.oracle_dt must be > 0");
  if (!(x.oracle_t_end > 0.0)) e.push_back("experiment.oracle_t_end must be > 0");
  if (!(x.oracle_radius > 0.0)) e.push_back("experiment.oracle_radius must be > 0");
  if (x.oracle_redistribute < 0) e.push_back("experiment.oracle_redistribute must be >= 0");
  if (!(x.oracle_grading > 0.0 && x.oracle_grading <= 1.0)) e.push_back("experiment.oracle_grading out of (0,1]");
  if (x.oracle_law != "dynamic" && x.oracle_law != "pinned") e.push_back("experiment.oracle_law must be dynamic or pinned");
  const auto& o = c.output;
  if (o.fields != "none" && o.fields != "csv" && o.fields != "binary") e.push_back("output.fields must be none, csv or binary");
  if (o.dump_every < 1) e.push_back("output.dump_every must be >= 1");
  if (o.dir.empty()) e.push_back("output.dir must be nonempty");
  return e;
}

/// Parses and validates; throws ConfigErrors listing every violation.
inline RunConfig parse_config_text(const std::string& text) {
  std::vector<std::string> errors;
  std::map<std::string, detail::Collector::Section> data;
  std::string section;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back("line " + std::to_string(lineno) + ": malformed section header");
        continue;
      }
      section = detail::trim(line.substr(1, line.size() - 2));
      if (!detail::known_sections().count(section)) errors.push_back("unknown section [" + section + "]");
      data[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    if (section.empty()) {
      errors.push_back("line " + std::to_string(lineno) + ": key outside any section");
      continue;
    }
    const std::string key = detail::trim(line.substr(0, eq));
    if (data[section].count(key)) errors.push_back("duplicate key " + section + "." + key);
    data[section][key] = detail::trim(line.substr(eq + 1));
  }

  RunConfig c;
  detail::Collector in(std::move(data), errors);
  auto& g = c.grid;
  in.number("grid", "x_min", g.x_min);
  in.number("grid", "x_max", g.x_max);
  in.number("grid", "y_min", g.y_min);
  in.number("grid", "y_max", g.y_max);
  in.integer("grid", "nx", g.nx, true);
  in.integer("grid", "ny", g.ny);
  for (Face f : kAllFaces) {
    in.text("grid", "tag." + std::string(face_name(f)), g.tags[static_cast<int>(f)]);
    in.text("physics", "law." + std::string(face_name(f)), c.physics.law[static_cast<int>(f)]);
  }
  in.number("physics", "eps", c.physics.eps, true);
  in.number("physics", "sigma", c.physics.sigma);
  auto& ini = c.initial;
  in.text("initial", "type", ini.type);
  in.number("initial", "x", ini.x);
  in.number("initial", "sign", ini.sign);
  in.number("initial", "cx", ini.cx);
  in.number("initial", "cy", ini.cy);
  in.number("initial", "radius", ini.radius);
  in.number("initial", "normal_x", ini.normal_x);
  in.number("initial", "normal_y", ini.normal_y);
  in.number("initial", "offset", ini.offset);
  auto& s = c.schedule;
  in.number("schedule", "t_end", s.t_end, true);
  in.integer("schedule", "cadence", s.cadence);
  in.number("schedule", "safety", s.safety);
  in.boolean("schedule", "per_step", s.per_step);
  auto& x = c.experiment;
  in.text("experiment", "mode", x.mode);
  in.numbers("experiment", "eps_list", x.eps_list);
  in.numbers("experiment", "sigma_list", x.sigma_list);
  in.fields("experiment", "test_fields", x.test_fields);
  in.fields("experiment", "brakke", x.brakke);
  in.text("experiment", "brakke_mode", x.brakke_mode);
  in.windows("experiment", "windows", x.windows);
  in.number("experiment", "contact_fd_span", x.contact_fd_span);
  in.text("experiment", "oracle_shape", x.oracle_shape);
  in.integer("experiment", "oracle_nodes", x.oracle_nodes);
  in.number("experiment", "oracle_dt", x.oracle_dt);
  in.number("experiment", "oracle_t_end", x.oracle_t_end);
  in.number("experiment", "oracle_radius", x.oracle_radius);
  in.integer("experiment", "oracle_redistribute", x.oracle_redistribute);
  in.number("experiment", "oracle_grading", x.oracle_grading);
  in.text("experiment", "oracle_law", x.oracle_law);
  in.text("output", "dir", c.output.dir);
  in.text("output", "fields", c.output.fields);
  in.integer("output", "dump_every", c.output.dump_every);
  in.report_unknown();

  if (errors.empty()) {
    auto more = validate(c);
    errors.insert(errors.end(), more.begin(), more.end());
  }
  if (!errors.empty()) throw ConfigErrors(std::move(errors));
  return c;
}

inline RunConfig parse_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

/// Canonical text: every key of every section, fixed order.
inline std::string serialize(const RunConfig& c) {
  std::ostringstream os;
  auto kv = [&](const std::string& k, const std::string& v) { os << k << " = " << v << '\n'; };
  auto num = [&](const std::string& k, double v) { kv(k, format_number(v)); };
  auto list = [&](const std::string& k, const std::vector<double>& v) {
    std::string s;
    for (double d : v) s += (s.empty() ? "" : ", ") + format_number(d);
    kv(k, s);
  };
  auto flist = [&](const std::string& k, const std::vector<FieldSpec>& v) {
    std::string s;
    for (const auto& f : v) s += (s.empty() ? "" : ", ") + format_field(f);
    kv(k, s);
  };
  os << "[grid]\n";
  num("x_min", c.grid.x_min);
  num("x_max", c.grid.x_max);
  num("y_min", c.grid.y_min);
  num("y_max", c.grid.y_max);
  num("nx", c.grid.nx);
  num("ny", c.grid.ny);
  for (Face f : kAllFaces) kv("tag." + std::string(face_name(f)), c.grid.tags[static_cast<int>(f)]);
  os << "\n[physics]\n";
  num("eps", c.physics.eps);
  num("sigma", c.physics.sigma);
  for (Face f : kAllFaces) kv("law." + std::string(face_name(f)), c.physics.law[static_cast<int>(f)]);
  os << "\n[initial]\n";
  const auto& in = c.initial;
  kv("type", in.type);
  if (in.type == "line") {
    num("x", in.x);
    num("sign", in.sign);
  } else if (in.type == "circle") {
    num("cx", in.cx);
    num("cy", in.cy);
    num("radius", in.radius);
    num("sign", in.sign);
  } else if (in.type == "halfspace") {
    num("normal_x", in.normal_x);
    num("normal_y", in.normal_y);
    num("offset", in.offset);
  }
  os << "\n[schedule]\n";
  num("t_end", c.schedule.t_end);
  num("cadence", c.schedule.cadence);
  num("safety", c.schedule.safety);
  kv("per_step", c.schedule.per_step ? "true" : "false");
  const auto& x = c.experiment;
  os << "\n[experiment]\n";
  kv("mode", x.mode);
  list("eps_list", x.eps_list);
  list("sigma_list", x.sigma_list);
  flist("test_fields", x.test_fields);
  flist("brakke", x.brakke);
  kv("brakke_mode", x.brakke_mode);
  {
    std::string s;
    for (const auto& w : x.windows) s += (s.empty() ? "" : ", ") + format_number(w.t1) + ":" + format_number(w.t2);
    kv("windows", s);
  }
  num("contact_fd_span", x.contact_fd_span);
  kv("oracle_shape", x.oracle_shape);
  num("oracle_nodes", x.oracle_nodes);
  num("oracle_dt", x.oracle_dt);
  num("oracle_t_end", x.oracle_t_end);
  num("oracle_radius", x.oracle_radius);
  num("oracle_redistribute", x.oracle_redistribute);
  num("oracle_grading", x.oracle_grading);
  kv("oracle_law", x.oracle_law);
  os << "\n[output]\n";
  kv("dir", c.output.dir);
  kv("fields", c.output.fields);
  num("dump_every", c.output.dump_every);
  return os.str();
}

/// Child configurations of a sweep, differing only in the swept parameter.
inline std::vector<RunConfig> sweep_children(const RunConfig& c) {
  std::vector<RunConfig> out;
  if (c.experiment.mode == "sweep-eps") {
    for (double e : c.experiment.eps_list) {
      RunConfig k = c;
      k.physics.eps = e;
      out.push_back(std::move(k));
    }
  } else if (c.experiment.mode == "sweep-sigma") {
    for (double s : c.experiment.sigma_list) {
      RunConfig k = c;
      k.physics.sigma = s;
      out.push_back(std::move(k));
    }
  } else {
    throw UsageError("sweep_children: mode " + c.experiment.mode + " is not a sweep");
  }
  return out;
}

// Building solver objects -------------------------------------------------------

inline Grid2D build_grid(const RunConfig& c) {
  Grid2D g = c.grid.ny == 1 ? Grid2D::line(c.grid.x_min, c.grid.x_max, c.grid.nx)
                            : Grid2D::box(c.grid.x_min, c.grid.x_max, c.grid.y_min, c.grid.y_max, c.grid.nx, c.grid.ny);
  g.face_tags = c.grid.tags;
  return g;
}

inline FaceLaws build_laws(const RunConfig& c) {
  FaceLaws laws = all_neumann();
  for (Face f : kAllFaces) {
    const auto& l = c.physics.law[static_cast<int>(f)];
    if (l == "dynamic") laws[static_cast<int>(f)] = Dynamic{c.physics.sigma};
    if (l == "dirichlet") laws[static_cast<int>(f)] = DirichletFrozen{};
  }
  return laws;
}

inline InterfaceDescriptor build_descriptor(const RunConfig& c) {
  const auto& in = c.initial;
  if (in.type == "line") return Line1D{in.x, in.sign};
  if (in.type == "circle") return CircleArc{{in.cx, in.cy}, in.radius, in.sign};
  if (in.type == "halfspace") return Halfspace{{in.normal_x, in.normal_y}, in.offset};
  return sigma_arc(c.physics.sigma);
}

inline PhaseState build_state(const RunConfig& c) {
  return init_profile(build_grid(c), build_descriptor(c), c.physics.eps, build_laws(c));
}

}  // namespace aclab
