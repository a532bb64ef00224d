#include "tubedissip/cli.hpp"

#include "tubedissip/acceptance.hpp"
#include "tubedissip/closed_loop.hpp"
#include "tubedissip/cost_to_travel.hpp"
#include "tubedissip/dissipativity.hpp"
#include "tubedissip/errors.hpp"
#include "tubedissip/io.hpp"
#include "tubedissip/tube_mpc.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tubedissip {

namespace {

/// Raised for bad flag values that CLI11 cannot validate by itself.
struct UsageError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

struct Args
{
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string output;
  std::string format;
  bool no_initial_cost{false};
  int horizon{0};

  std::vector<double> A, B;
  int N{1};

  std::string storage{"default"};
  int samples{0};

  std::vector<double> z;
  int grid{21};

  std::vector<double> y0;
  int steps{10};
  std::string policy{"adversarial"};
  bool fig2{false};
};

Eigen::Vector2d point_arg(const std::vector<double> & v, const char * flag)
{
  if (v.size() != 2) { throw UsageError(std::string(flag) + " expects two comma-separated numbers"); }
  return {v[0], v[1]};
}

Box box_arg(const std::vector<double> & v, const char * flag)
{
  if (v.size() != 4) { throw UsageError(std::string(flag) + " expects a corner vector a1,a2,a3,a4"); }
  if (v[0] > v[1] || v[2] > v[3]) { throw UsageError(std::string(flag) + " needs a1 <= a2 and a3 <= a4"); }
  return Box(v[0], v[1], v[2], v[3]);
}

std::uint64_t parse_seed(const std::string & s, const std::string & what)
{
  try {
    std::size_t pos = 0;
    const auto v    = std::stoull(s, &pos);
    if (pos != s.size()) { throw std::invalid_argument(s); }
    return v;
  } catch (const std::exception &) {
    throw UsageError(what + ": '" + s + "' is not a nonnegative integer");
  }
}

DisturbancePolicy parse_policy(const std::string & s, std::uint64_t seed)
{
  if (s == "adversarial") { return DisturbancePolicy::adversarial(); }
  if (s == "random") { return DisturbancePolicy::uniform(seed); }
  if (s.rfind("random:", 0) == 0) { return DisturbancePolicy::uniform(parse_seed(s.substr(7), "--policy random:SEED")); }
  if (s.rfind("extreme:", 0) == 0 && s.size() > 8) {
    std::vector<int> signs;
    for (char c : s.substr(8)) {
      if (c != '+' && c != '-') { throw UsageError("--policy extreme: expects a sequence of '+' and '-'"); }
      signs.push_back(c == '+' ? 1 : -1);
    }
    return DisturbancePolicy::extreme(signs);
  }
  throw UsageError("--policy must be adversarial, random, random:SEED or extreme:<signs>");
}

json trace_json(const SimulationTrace & trace, const Box & x_star)
{
  json steps = json::array();
  for (const auto & s : trace.steps) {
    steps.push_back({{"k", s.k},
                     {"y", {s.y(0), s.y(1)}},
                     {"u", s.u},
                     {"w", s.w},
                     {"Y", s.Y},
                     {"dH", s.distance},
                     {"lyapunov", s.lyapunov},
                     {"tube", s.tube}});
  }
  json j = {{"steps", steps}, {"failed", trace.failed}};
  if (trace.failed) { j["failure"] = trace.failure; }
  if (!trace.steps.empty()) { j["stability"] = check_enclosure_stability(trace, x_star); }
  return j;
}

std::string stability_line(const SimulationTrace & trace, const Box & x_star)
{
  if (trace.steps.empty()) { return "no steps recorded: " + trace.failure; }
  const auto rep = check_enclosure_stability(trace, x_star);
  std::string line = rep.verdict;
  if (rep.absorption_index) { line += ", k_abs = " + std::to_string(*rep.absorption_index); }
  if (!rep.lyapunov_decreasing) { line += ", Lyapunov increase at k = " + std::to_string(*rep.lyapunov_violation); }
  if (rep.escape_step) { line += ", Y leaves X* at k = " + std::to_string(*rep.escape_step); }
  if (trace.failed) { line += ", " + trace.failure; }
  return line;
}

class Runner
{
public:
  Runner(const Args & args, std::ostream & out, std::ostream & err) : args_(args), out_(out), err_(err)
  {
    if (!args_.config_path.empty()) { rc_ = load_run_config(args_.config_path); }
    if (const char * env = std::getenv("TUBE_DISSIP_SEED"); env && *env) {
      rc_.seed = parse_seed(env, "TUBE_DISSIP_SEED");
    }
    if (args_.seed) { rc_.seed = *args_.seed; }
    if (!args_.output.empty()) { rc_.output_path = args_.output; }
    if (!args_.format.empty()) { rc_.output_format = args_.format; }
    if (args_.no_initial_cost) { rc_.controller.use_initial_cost = false; }
    if (args_.horizon > 0) { rc_.controller.horizon = args_.horizon; }
  }

  int rci()
  {
    require_json("rci");
    const auto r = optimal_rci(rc_.problem, rc_.tolerances);
    emit(json(r).dump(2));
    return kExitOk;
  }

  int eval_v()
  {
    require_json("eval-v");
    if (args_.N < 1) { throw UsageError("--N must be >= 1"); }
    const auto r = tubedissip::eval_v(rc_.problem, box_arg(args_.A, "--A"), box_arg(args_.B, "--B"), args_.N,
                                      rc_.tolerances);
    emit(json(r).dump(2));
    if (!r.value.is_finite()) {
      err_ << "target set is not reachable in " << args_.N << " step(s)\n";
      return kExitDomainFailure;
    }
    return kExitOk;
  }

  int check_storage()
  {
    require_json("check-storage");
    StorageFunction sf = rc_.controller.storage;
    if (args_.storage != "default") {
      std::ifstream in(args_.storage);
      if (!in) { throw ConfigError("storage", "cannot open storage file '" + args_.storage + "'"); }
      json j;
      try {
        in >> j;
      } catch (const json::parse_error & e) {
        throw ConfigError("storage", std::string("malformed JSON in '") + args_.storage + "': " + e.what());
      }
      try {
        sf = j.get<StorageFunction>();
      } catch (const ConfigError & e) {
        throw ConfigError(e.key().empty() ? "storage" : "storage." + e.key(), e.what());
      }
    }
    auto rep = verify_separability(rc_.problem, sf, rc_.tolerances);
    if (args_.samples > 0) { rep.strictness = check_strictness(rc_.problem, sf, args_.samples, rc_.seed, rc_.tolerances); }
    emit(json(rep).dump(2));
    if (!rep.passed) {
      err_ << "storage candidate rejected\n";
      return kExitDomainFailure;
    }
    return kExitOk;
  }

  int control()
  {
    require_json("control");
    const auto z = point_arg(args_.z, "--z");
    TubeMpcController ctrl(rc_.problem, rc_.controller, rc_.tolerances);
    const auto s = ctrl.solve(z);
    emit(json(s).dump(2));
    if (!s.feasible()) {
      err_ << "tube MPC problem is " << to_string(s.status) << " at z\n";
      return kExitDomainFailure;
    }
    return kExitOk;
  }

  int sweep()
  {
    if (args_.grid < 1) { throw UsageError("--grid must be >= 1"); }
    TubeMpcController ctrl(rc_.problem, rc_.controller, rc_.tolerances);
    const auto grid = make_grid(rc_.problem.x_bounds, args_.grid, args_.grid);
    const auto rows = sweep_feedback(ctrl, grid);
    if (format("csv") == "csv") {
      std::ostringstream os;
      write_sweep_csv(os, rows);
      emit(os.str(), false);
    } else {
      json j = json::array();
      for (const auto & r : rows) {
        j.push_back({{"z", {r.z(0), r.z(1)}},
                     {"u0", r.u0},
                     {"objective", r.objective},
                     {"status", r.status},
                     {"u0_interval", r.u0_interval}});
      }
      emit(j.dump(2));
    }
    return kExitOk;
  }

  int simulate()
  {
    if (args_.steps < 1) { throw UsageError("--steps must be >= 1"); }
    std::vector<Eigen::Vector2d> starts;
    if (args_.fig2) {
      starts = {Eigen::Vector2d(5, -5), Eigen::Vector2d(-5, 5)};
    } else {
      starts = {point_arg(args_.y0, "--y0")};
    }
    const auto policy = parse_policy(args_.policy, rc_.seed);
    TubeMpcController ctrl(rc_.problem, rc_.controller, rc_.tolerances);
    const Box & xs = ctrl.rci().set;

    const bool csv = format("csv") == "csv";
    std::ostringstream os;
    json runs = json::array();
    bool any_failed = false;
    for (const auto & y0 : starts) {
      const auto trace = tubedissip::simulate(ctrl, y0, args_.steps, policy);
      any_failed       = any_failed || trace.failed;
      const std::string summary = stability_line(trace, xs);
      err_ << "y0 = (" << format_number(y0(0)) << "," << format_number(y0(1)) << "): " << summary << "\n";
      if (csv) {
        if (starts.size() > 1) { os << "# y0 = " << format_number(y0(0)) << "," << format_number(y0(1)) << "\n"; }
        write_trace_csv(os, trace);
      } else {
        json j  = trace_json(trace, xs);
        j["y0"] = {y0(0), y0(1)};
        runs.push_back(j);
      }
    }
    if (csv) {
      emit(os.str(), false);
    } else {
      emit((starts.size() > 1 ? runs : runs[0]).dump(2));
    }
    return any_failed ? kExitDomainFailure : kExitOk;
  }

  int verify_all()
  {
    const auto results = run_acceptance(rc_.seed, rc_.tolerances);
    int passed = 0;
    for (const auto & r : results) { passed += r.passed ? 1 : 0; }
    if (rc_.output_format == "json") {
      json j = json::array();
      for (const auto & r : results) {
        j.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
      }
      emit(j.dump(2));
    } else {
      std::ostringstream os;
      for (const auto & r : results) { os << format_criterion(r) << "\n"; }
      os << passed << "/" << results.size() << " criteria passed (seed " << rc_.seed << ")\n";
      emit(os.str(), false);
    }
    return passed == static_cast<int>(results.size()) ? kExitOk : kExitDomainFailure;
  }

private:
  std::string format(const char * fallback) const
  {
    return rc_.output_format.empty() ? std::string(fallback) : rc_.output_format;
  }

  void require_json(const char * cmd) const
  {
    if (format("json") != "json") { throw UsageError(std::string(cmd) + " only writes JSON"); }
  }

  void emit(const std::string & text, bool newline = true)
  {
    if (rc_.output_path.empty()) {
      out_ << text << (newline ? "\n" : "");
      return;
    }
    std::ofstream f(rc_.output_path);
    if (!f) { throw UsageError("cannot write '" + rc_.output_path + "'"); }
    f << text << (newline ? "\n" : "");
  }

  const Args & args_;
  std::ostream & out_;
  std::ostream & err_;
  RunConfig rc_;
};

}  // namespace

int run(int argc, const char * const * argv, std::ostream & out, std::ostream & err)
{
  Args a;
  CLI::App app{"Set-based dissipativity and tube MPC on interval boxes"};
  app.require_subcommand(1, 1);
  app.add_option("--config", a.config_path, "JSON run configuration");
  app.add_option("--seed", a.seed, "Random seed (overrides config and TUBE_DISSIP_SEED)");
  app.add_option("-o,--output", a.output, "Write results to this file instead of stdout");
  app.add_option("--format", a.format, "Output format")->check(CLI::IsMember({"json", "csv"}));

  auto add_controller_flags = [&](CLI::App * sub) {
    sub->add_flag("--no-initial-cost", a.no_initial_cost, "Drop the storage function from the objective");
    sub->add_option("--horizon", a.horizon, "Prediction horizon N");
  };

  auto * rci = app.add_subcommand("rci", "Optimal robust control invariant set and its cost");
  auto * ev  = app.add_subcommand("eval-v", "Cost-to-travel V(A,B,N)");
  ev->add_option("--A", a.A, "Start box a1,a2,a3,a4")->required()->delimiter(',')->allow_extra_args(false);
  ev->add_option("--B", a.B, "Target box a1,a2,a3,a4")->required()->delimiter(',')->allow_extra_args(false);
  ev->add_option("--N", a.N, "Number of steps");
  auto * cs = app.add_subcommand("check-storage", "Separability certificate for a storage function");
  cs->add_option("--storage", a.storage, "'default' or a JSON file {offset, linear, outside_value}");
  cs->add_option("--samples", a.samples, "Random pairs for the strictness check (0 skips it)");
  auto * ctl = app.add_subcommand("control", "Solve the tube MPC problem at z");
  ctl->add_option("--z", a.z, "Measured state z1,z2")->required()->delimiter(',')->allow_extra_args(false);
  add_controller_flags(ctl);
  auto * sw = app.add_subcommand("sweep", "Feedback u0 over an n x n grid on X");
  sw->add_option("--grid", a.grid, "Points per dimension");
  add_controller_flags(sw);
  auto * sim = app.add_subcommand("simulate", "Closed-loop simulation");
  sim->add_option("--y0", a.y0, "Initial state y1,y2")->delimiter(',')->allow_extra_args(false);
  sim->add_option("--steps", a.steps, "Number of steps");
  sim->add_option("--policy", a.policy, "adversarial | random[:SEED] | extreme:<+/- sequence>");
  sim->add_flag("--fig2", a.fig2, "Run from (5,-5) and (-5,5)");
  add_controller_flags(sim);
  auto * va = app.add_subcommand("verify-all", "Run the acceptance suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success & e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::ParseError & e) {
    app.exit(e, out, err);
    return kExitUsage;
  }
  if (sim->parsed() && !a.fig2 && a.y0.empty()) {
    err << "simulate: --y0 or --fig2 is required\n";
    return kExitUsage;
  }

  try {
    Runner r(a, out, err);
    if (rci->parsed()) { return r.rci(); }
    if (ev->parsed()) { return r.eval_v(); }
    if (cs->parsed()) { return r.check_storage(); }
    if (ctl->parsed()) { return r.control(); }
    if (sw->parsed()) { return r.sweep(); }
    if (sim->parsed()) { return r.simulate(); }
    if (va->parsed()) { return r.verify_all(); }
  } catch (const ConfigError & e) {
    err << "config error [" << e.key() << "]: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError & e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InfeasibleProblem & e) {
    err << "infeasible: " << e.what() << "\n";
    return kExitDomainFailure;
  } catch (const SolverFailure & e) {
    err << "solver failure: " << e.what() << "\n";
    return kExitDomainFailure;
  } catch (const std::invalid_argument & e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace tubedissip
