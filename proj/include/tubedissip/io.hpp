#ifndef TUBEDISSIP_IO_HPP_
#define TUBEDISSIP_IO_HPP_

/**
 * @file
 * @brief JSON and CSV serialization.
 *
 * Boxes are [[lo1,hi1],[lo2,hi2]] in JSON and four columns a1,a2,a3,a4 in CSV.
 * +inf is the JSON string "inf". CSV numbers use '.' and 12 significant digits.
 * Config readers reject unknown keys with a ConfigError naming the key.
 */

#include "closed_loop.hpp"
#include "cost_to_travel.hpp"
#include "dissipativity.hpp"
#include "extended_real.hpp"
#include "interval_box.hpp"
#include "problem.hpp"
#include "qp.hpp"
#include "tube_mpc.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>

namespace tubedissip {

using json = nlohmann::json;

void to_json(json & j, const Box & b);
void from_json(const json & j, Box & b);
void to_json(json & j, const Interval & iv);
void from_json(const json & j, Interval & iv);
void to_json(json & j, const ExtendedReal & v);
void from_json(const json & j, ExtendedReal & v);
void to_json(json & j, QpStatus s);
void from_json(const json & j, QpStatus & s);

void to_json(json & j, const ProblemSpec & s);
void from_json(const json & j, ProblemSpec & s);
void to_json(json & j, const StorageFunction & sf);
void from_json(const json & j, StorageFunction & sf);
void to_json(json & j, const TubeMpcConfig & c);
void from_json(const json & j, TubeMpcConfig & c);
void to_json(json & j, const QpOptions & o);
void from_json(const json & j, QpOptions & o);

void to_json(json & j, const CostToTravelResult & r);
void from_json(const json & j, CostToTravelResult & r);
void to_json(json & j, const OptimalRci & r);
void from_json(const json & j, OptimalRci & r);
void to_json(json & j, const StrictnessSummary & s);
void from_json(const json & j, StrictnessSummary & s);
void to_json(json & j, const SeparabilityReport & r);
void from_json(const json & j, SeparabilityReport & r);
void to_json(json & j, const TubeSolution & s);
void from_json(const json & j, TubeSolution & s);
void to_json(json & j, const StabilityReport & r);

/// Dense row-major dump of a QP for offline inspection.
json qp_to_json(const QpProblem<double> & qp);

struct RunConfig
{
  ProblemSpec problem{};
  TubeMpcConfig controller{};
  QpOptions tolerances{};
  std::uint64_t seed{20190125};
  std::string output_path;  ///< empty: stdout
  std::string output_format;  ///< "json", "csv" or empty for the command default
};

/// Parses {"problem": {...}, "controller": {...}, "tolerances": {...}, "seed": n, "output": {"path", "format"}}.
RunConfig parse_run_config(const json & j);
RunConfig load_run_config(const std::string & path);

/// "%.12g" in the classic locale.
std::string format_number(double x);

void write_sweep_csv(std::ostream & os, std::span<const SweepRow> rows);
void write_trace_csv(std::ostream & os, const SimulationTrace & trace);

}  // namespace tubedissip

#endif  // TUBEDISSIP_IO_HPP_
