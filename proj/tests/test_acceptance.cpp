// One line per acceptance criterion; nonzero exit if any fails.
#include "tubedissip/acceptance.hpp"

#include <cstdlib>
#include <iostream>
#include <string>

int main()
{
  std::uint64_t seed = 20190125;
  if (const char * env = std::getenv("TUBE_DISSIP_SEED"); env && *env) { seed = std::stoull(env); }

  int failed = 0;
  for (const auto & r : tubedissip::run_acceptance(seed)) {
    std::cout << tubedissip::format_criterion(r) << "\n";
    failed += r.passed ? 0 : 1;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
