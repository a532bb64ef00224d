#include "tubedissip/io.hpp"

#include "tubedissip/errors.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <locale>
#include <ostream>
#include <sstream>

namespace tubedissip {

namespace {

// ConfigError keys thrown by from_json are relative to the object being parsed;
// read_field prefixes them on the way out, so the final key is a dotted path.
std::string join_key(const std::string & a, const std::string & b)
{
  if (a.empty()) { return b; }
  if (b.empty()) { return a; }
  return a + "." + b;
}

void check_keys(const json & j, std::initializer_list<const char *> allowed)
{
  if (!j.is_object()) { throw ConfigError("", "expected a JSON object"); }
  for (const auto & item : j.items()) {
    bool ok = false;
    for (const char * a : allowed) { ok = ok || item.key() == a; }
    if (!ok) { throw ConfigError(item.key(), "unknown config key"); }
  }
}

/// Reads j[key] into out if present; errors become ConfigError naming the key path.
template <typename T>
void read_field(const json & j, const char * key, T & out)
{
  if (!j.contains(key)) { return; }
  try {
    out = j.at(key).get<T>();
  } catch (const ConfigError & e) {
    throw ConfigError(join_key(key, e.key()), e.what());
  } catch (const std::exception & e) {
    throw ConfigError(key, e.what());
  }
}

Eigen::Vector4d vec4(const json & j, const std::string & key)
{
  if (!j.is_array() || j.size() != 4) { throw ConfigError(key, "expected an array of 4 numbers"); }
  Eigen::Vector4d v;
  for (int i = 0; i < 4; ++i) { v(i) = j.at(static_cast<std::size_t>(i)).get<double>(); }
  return v;
}

json vec_json(const Eigen::VectorXd & v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Eigen::VectorXd vec_from(const json & j)
{
  const auto s = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
}

/// Non-finite doubles become null.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }
double num_from(const json & j, double if_null) { return j.is_null() ? if_null : j.get<double>(); }

}  // namespace

void to_json(json & j, const Box & b) { j = json::array({{b.lo(0), b.hi(0)}, {b.lo(1), b.hi(1)}}); }

void from_json(const json & j, Box & b)
{
  if (!j.is_array() || j.size() != 2 || !j[0].is_array() || j[0].size() != 2 || !j[1].is_array() || j[1].size() != 2) {
    throw ConfigError("", "expected a box [[lo1,hi1],[lo2,hi2]]");
  }
  try {
    b = Box(j[0][0].get<double>(), j[0][1].get<double>(), j[1][0].get<double>(), j[1][1].get<double>());
  } catch (const std::invalid_argument & e) {
    throw ConfigError("", e.what());
  }
}

void to_json(json & j, const Interval & iv) { j = json::array({iv.lo, iv.hi}); }

void from_json(const json & j, Interval & iv)
{
  if (!j.is_array() || j.size() != 2) { throw ConfigError("", "expected an interval [lo, hi]"); }
  iv = {j[0].get<double>(), j[1].get<double>()};
}

void to_json(json & j, const ExtendedReal & v) { j = v.is_finite() ? json(v.value()) : json("inf"); }

void from_json(const json & j, ExtendedReal & v)
{
  if (j.is_string() && j.get<std::string>() == "inf") {
    v = ExtendedReal::infinity();
  } else {
    v = ExtendedReal(j.get<double>());
  }
}

void to_json(json & j, QpStatus s) { j = to_string(s); }

void from_json(const json & j, QpStatus & s)
{
  const auto str = j.get<std::string>();
  for (auto c : {QpStatus::Optimal, QpStatus::Infeasible, QpStatus::Unbounded, QpStatus::MaxIterations}) {
    if (str == to_string(c)) {
      s = c;
      return;
    }
  }
  throw ConfigError("status", "unknown status '" + str + "'");
}

void to_json(json & j, const ProblemSpec & s)
{
  j = {{"alpha", s.alpha},
       {"x_bounds", s.x_bounds},
       {"u_bounds", s.u_bounds},
       {"w_bounds", s.w_bounds},
       {"cost_linear", vec_json(s.cost_linear)},
       {"cost_quad", vec_json(s.cost_quad)}};
}

void from_json(const json & j, ProblemSpec & s)
{
  check_keys(j, {"alpha", "x_bounds", "u_bounds", "w_bounds", "cost_linear", "cost_quad"});
  ProblemSpec out;
  read_field(j, "alpha", out.alpha);
  read_field(j, "x_bounds", out.x_bounds);
  read_field(j, "u_bounds", out.u_bounds);
  read_field(j, "w_bounds", out.w_bounds);
  if (j.contains("cost_linear")) { out.cost_linear = vec4(j["cost_linear"], "cost_linear"); }
  if (j.contains("cost_quad")) { out.cost_quad = vec4(j["cost_quad"], "cost_quad"); }
  try {
    out.validate();
  } catch (const std::invalid_argument & e) {
    throw ConfigError("", e.what());
  }
  s = out;
}

void to_json(json & j, const StorageFunction & sf)
{
  j = {{"offset", sf.offset}, {"linear", vec_json(sf.linear)}, {"outside_value", sf.outside_value}};
}

void from_json(const json & j, StorageFunction & sf)
{
  check_keys(j, {"offset", "linear", "outside_value"});
  StorageFunction out;
  read_field(j, "offset", out.offset);
  read_field(j, "outside_value", out.outside_value);
  if (j.contains("linear")) { out.linear = vec4(j["linear"], "linear"); }
  sf = out;
}

void to_json(json & j, const TubeMpcConfig & c)
{
  j = {{"horizon", c.horizon},
       {"use_initial_cost", c.use_initial_cost},
       {"terminal_set", c.terminal_set ? json(*c.terminal_set) : json(nullptr)},
       {"storage", c.storage},
       {"tie_break_epsilon", c.tie_break_epsilon},
       {"terminal_mode", c.terminal_mode == TerminalMode::Equality ? "equality" : "containment"}};
}

void from_json(const json & j, TubeMpcConfig & c)
{
  check_keys(j, {"horizon", "use_initial_cost", "terminal_set", "storage", "tie_break_epsilon", "terminal_mode"});
  TubeMpcConfig out;
  read_field(j, "horizon", out.horizon);
  read_field(j, "use_initial_cost", out.use_initial_cost);
  if (j.contains("terminal_set") && !j["terminal_set"].is_null()) {
    Box t;
    read_field(j, "terminal_set", t);
    out.terminal_set = t;
  }
  read_field(j, "storage", out.storage);
  read_field(j, "tie_break_epsilon", out.tie_break_epsilon);
  if (j.contains("terminal_mode")) {
    const auto m = j["terminal_mode"];
    if (m == "equality") {
      out.terminal_mode = TerminalMode::Equality;
    } else if (m == "containment") {
      out.terminal_mode = TerminalMode::Containment;
    } else {
      throw ConfigError("terminal_mode", "must be \"equality\" or \"containment\"");
    }
  }
  if (out.horizon < 1) { throw ConfigError("horizon", "must be >= 1"); }
  c = out;
}

void to_json(json & j, const QpOptions & o)
{
  j = {{"kkt", o.kkt_tol}, {"feasibility", o.feas_tol}, {"max_iterations", o.max_iterations}};
}

void from_json(const json & j, QpOptions & o)
{
  check_keys(j, {"kkt", "feasibility", "max_iterations"});
  QpOptions out;
  read_field(j, "kkt", out.kkt_tol);
  read_field(j, "feasibility", out.feas_tol);
  read_field(j, "max_iterations", out.max_iterations);
  o = out;
}

void to_json(json & j, const CostToTravelResult & r)
{
  json controls = json::array();
  for (const auto & v : r.aux_controls) { controls.push_back({v(0), v(1)}); }
  j = {{"value", r.value}, {"tube", r.tube ? json(*r.tube) : json(nullptr)}, {"aux_controls", controls}};
}

void from_json(const json & j, CostToTravelResult & r)
{
  r.value = j.at("value").get<ExtendedReal>();
  r.tube.reset();
  if (!j.at("tube").is_null()) { r.tube = j["tube"].get<std::vector<Box>>(); }
  r.aux_controls.clear();
  for (const auto & v : j.at("aux_controls")) { r.aux_controls.emplace_back(v[0].get<double>(), v[1].get<double>()); }
}

void to_json(json & j, const OptimalRci & r)
{
  j = {{"set", r.set}, {"corners", vec_json(r.set.corners())}, {"v_star", r.cost}};
}

void from_json(const json & j, OptimalRci & r)
{
  r.set  = j.at("set").get<Box>();
  r.cost = j.at("v_star").get<double>();
}

void to_json(json & j, const StrictnessSummary & s)
{
  j = {{"samples", s.samples},
       {"min_margin", num(s.min_margin)},
       {"nonpositive", s.nonpositive},
       {"argmin", s.argmin ? json::array({s.argmin->first, s.argmin->second}) : json(nullptr)}};
}

void from_json(const json & j, StrictnessSummary & s)
{
  s.samples     = j.at("samples").get<int>();
  s.min_margin  = num_from(j.at("min_margin"), std::numeric_limits<double>::infinity());
  s.nonpositive = j.at("nonpositive").get<int>();
  s.argmin.reset();
  if (!j.at("argmin").is_null()) { s.argmin = std::make_pair(j["argmin"][0].get<Box>(), j["argmin"][1].get<Box>()); }
}

void to_json(json & j, const SeparabilityReport & r)
{
  j = {{"status", r.status},
       {"qp_min_value", num(r.qp_min_value)},
       {"a", vec_json(r.a)},
       {"b", vec_json(r.b)},
       {"v1", r.v1},
       {"v_star", r.v_star},
       {"gap", num(r.gap)},
       {"passed", r.passed},
       {"unbounded_ray", r.unbounded_ray ? vec_json(*r.unbounded_ray) : json(nullptr)},
       {"storage_min", r.storage_min},
       {"nonnegative", r.nonnegative},
       {"strictness", r.strictness ? json(*r.strictness) : json(nullptr)}};
}

void from_json(const json & j, SeparabilityReport & r)
{
  const double ninf = -std::numeric_limits<double>::infinity();
  r.status       = j.at("status").get<QpStatus>();
  r.qp_min_value = num_from(j.at("qp_min_value"), ninf);
  r.a            = vec4(j.at("a"), "a");
  r.b            = vec4(j.at("b"), "b");
  r.v1           = j.at("v1").get<double>();
  r.v_star       = j.at("v_star").get<double>();
  r.gap          = num_from(j.at("gap"), ninf);
  r.passed       = j.at("passed").get<bool>();
  r.unbounded_ray.reset();
  if (!j.at("unbounded_ray").is_null()) { r.unbounded_ray = vec_from(j["unbounded_ray"]); }
  r.storage_min = j.at("storage_min").get<double>();
  r.nonnegative = j.at("nonnegative").get<bool>();
  r.strictness.reset();
  if (!j.at("strictness").is_null()) { r.strictness = j["strictness"].get<StrictnessSummary>(); }
}

void to_json(json & j, const TubeSolution & s)
{
  json controls = json::array();
  for (const auto & v : s.controls) { controls.push_back({v(0), v(1)}); }
  j = {{"status", s.status},
       {"tube", s.tube},
       {"u0", s.u0},
       {"u0_interval", s.u0_interval},
       {"objective", s.objective},
       {"controls", controls}};
}

void from_json(const json & j, TubeSolution & s)
{
  s.status      = j.at("status").get<QpStatus>();
  s.tube        = j.at("tube").get<std::vector<Box>>();
  s.u0          = j.at("u0").get<double>();
  s.u0_interval = j.at("u0_interval").get<Interval>();
  s.objective   = j.at("objective").get<double>();
  s.controls.clear();
  for (const auto & v : j.at("controls")) { s.controls.emplace_back(v[0].get<double>(), v[1].get<double>()); }
}

void to_json(json & j, const StabilityReport & r)
{
  auto opt = [](const std::optional<int> & v) { return v ? json(*v) : json(nullptr); };
  j = {{"verdict", r.verdict},
       {"stable", r.stable()},
       {"enclosure_holds", r.enclosure_holds},
       {"enclosure_violation", opt(r.enclosure_violation)},
       {"absorbed", r.absorbed},
       {"absorption_index", opt(r.absorption_index)},
       {"lyapunov_decreasing", r.lyapunov_decreasing},
       {"lyapunov_violation", opt(r.lyapunov_violation)},
       {"escape_step", opt(r.escape_step)},
       {"max_distance", r.max_distance}};
}

json qp_to_json(const QpProblem<double> & qp)
{
  auto mat = [](const Eigen::MatrixXd & m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) { rows.push_back(vec_json(m.row(i).transpose())); }
    return rows;
  };
  auto bounds = [](const Eigen::VectorXd & v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) { out.push_back(num(v(i))); }
    return out;
  };
  return {{"H", mat(qp.H)},   {"g", vec_json(qp.g)},     {"c0", qp.c0},           {"Aeq", mat(qp.Aeq)},
          {"beq", vec_json(qp.beq)}, {"Ain", mat(qp.Ain)}, {"bin", vec_json(qp.bin)}, {"lb", bounds(qp.lb)},
          {"ub", bounds(qp.ub)}};
}

RunConfig parse_run_config(const json & j)
{
  check_keys(j, {"problem", "controller", "tolerances", "seed", "output"});
  RunConfig rc;
  read_field(j, "problem", rc.problem);
  read_field(j, "controller", rc.controller);
  read_field(j, "tolerances", rc.tolerances);
  read_field(j, "seed", rc.seed);
  if (j.contains("output")) {
    const auto & o = j["output"];
    try {
      check_keys(o, {"path", "format"});
      read_field(o, "path", rc.output_path);
      read_field(o, "format", rc.output_format);
    } catch (const ConfigError & e) {
      throw ConfigError(join_key("output", e.key()), e.what());
    }
    if (!rc.output_format.empty() && rc.output_format != "json" && rc.output_format != "csv") {
      throw ConfigError("output.format", "must be \"json\" or \"csv\"");
    }
  }
  return rc;
}

RunConfig load_run_config(const std::string & path)
{
  std::ifstream in(path);
  if (!in) { throw ConfigError("config", "cannot open config file '" + path + "'"); }
  json j;
  try {
    in >> j;
  } catch (const json::parse_error & e) {
    throw ConfigError("config", std::string("malformed JSON in '") + path + "': " + e.what());
  }
  return parse_run_config(j);
}

std::string format_number(double x)
{
  if (std::isinf(x)) { return x > 0 ? "inf" : "-inf"; }
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(12);
  os << x;
  return os.str();
}

void write_sweep_csv(std::ostream & os, std::span<const SweepRow> rows)
{
  os << "z1,z2,u0,objective,status\n";
  for (const auto & r : rows) {
    const bool ok = r.status == QpStatus::Optimal;
    os << format_number(r.z(0)) << ',' << format_number(r.z(1)) << ',' << (ok ? format_number(r.u0) : "") << ','
       << (ok ? format_number(r.objective) : "") << ',' << to_string(r.status) << '\n';
  }
}

void write_trace_csv(std::ostream & os, const SimulationTrace & trace)
{
  os << "k,y1,y2,u,w,Y_a1,Y_a2,Y_a3,Y_a4,dH,lyapunov\n";
  for (const auto & s : trace.steps) {
    const Eigen::Vector4d c = s.Y.corners();
    os << s.k << ',' << format_number(s.y(0)) << ',' << format_number(s.y(1)) << ',' << format_number(s.u) << ','
       << format_number(s.w);
    for (int i = 0; i < 4; ++i) { os << ',' << format_number(c(i)); }
    os << ',' << format_number(s.distance) << ','
       << (s.lyapunov.is_finite() ? format_number(s.lyapunov.value()) : std::string("inf")) << '\n';
  }
}

}  // namespace tubedissip
