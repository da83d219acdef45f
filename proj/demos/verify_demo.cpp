// End-to-end inequality check on the Grushin plane: admissibility report,
// explicit constant, then a Monte Carlo comparison of both sides.

#include <cstdio>

#include "dlh/dlh.hpp"

using namespace dlh;

int main() {
  const auto sys = make_grushin(3, 1, 1.0);
  HardyParams prm;
  prm.p = 2.0;
  prm.s = 2.0;
  prm.mu = {0.0, 0.0};

  for (auto mode : {ConditionMode::Verbatim, ConditionMode::Relaxed}) {
    const auto rep = check_conditions(sys, prm, mode);
    std::printf("%s conditions:\n",
                mode == ConditionMode::Verbatim ? "verbatim" : "relaxed");
    for (const auto& r : rep.records)
      std::printf("  %-40s %g < %g  %s\n", r.label.c_str(), r.lhs, r.rhs,
                  r.satisfied ? "ok" : "FAIL");
  }

  const auto cst = hardy_constant(sys, prm);
  std::printf("constant ((Q - s)/p)^p = %g\n\n", cst.value);

  McOptions opts;
  opts.n = 200000;
  opts.seed = 7;
  const auto u = bump({0.0, 0.0, 0.0, 0.0}, 1.5);
  const auto rep =
      verify_hardy(sys, prm, u, Domain::ball({0.0, 0.0, 0.0, 0.0}, 2.0), opts);
  std::printf("lhs (potential side) = %.6g +- %.2g\n", rep.lhs, rep.lhs_se);
  std::printf("rhs (gradient side)  = %.6g +- %.2g\n", rep.rhs, rep.rhs_se);
  std::printf("margin = %.6g (z = %.1f): %s\n", rep.margin, rep.z,
              to_string(rep.verdict));
  return rep.verdict == Verdict::Violated ? 1 : 0;
}
