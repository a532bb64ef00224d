#ifndef TUBEDISSIP_ACCEPTANCE_HPP_
#define TUBEDISSIP_ACCEPTANCE_HPP_

/**
 * @file
 * @brief End-to-end acceptance checks on the reference problem (default ProblemSpec).
 */

#include "qp.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace tubedissip {

struct CriterionResult
{
  int id{0};
  std::string name;
  bool passed{false};
  std::string detail;
};

/// Closed-form feedback of the N = 2 initial-cost controller on the reference problem.
double reference_feedback_law(const Eigen::Vector2d & z);

/// Runs criteria 1..9 in order. Deterministic in `seed`.
std::vector<CriterionResult> run_acceptance(std::uint64_t seed, const QpOptions & opts = {});

/// "[PASS] 3 feedback_laws: ..." lines.
std::string format_criterion(const CriterionResult & r);

}  // namespace tubedissip

#endif  // TUBEDISSIP_ACCEPTANCE_HPP_
