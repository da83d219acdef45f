// Builds a few operator structures and prints their dilation data.

#include <cstdio>

#include "dlh/dlh.hpp"

using namespace dlh;

static void show(const char* name, const LambdaSystem& sys) {
  std::printf("%s\n", name);
  std::printf("  blocks:");
  for (int i = 0; i < sys.k(); ++i) std::printf(" %d", sys.dim(i));
  std::printf("\n  sigma: ");
  for (int i = 0; i < sys.k(); ++i) std::printf(" %g", sys.sigma(i));
  std::printf("\n  Q = %g, degree sum E = %g\n", sys.Q(), sys.degree_sum());

  std::vector<double> x(sys.total_dim(), 1.0);
  std::printf("  [[1,...,1]] = %.12g\n", bracket_norm(sys, x));
  const auto y = dilate(sys, 2.0, x);
  std::printf("  [[dilate(2, 1...1)]] = %.12g (twice the above)\n\n",
              bracket_norm(sys, y));
}

int main() {
  show("classical Laplacian on R^3", LambdaSystem({3}, {0.0}));
  show("Grushin (3, 1), weight |x^(1)|", make_grushin(3, 1, 1.0));
  show("Grushin (2, 2), weight |x^(1)|^1.5", make_grushin(2, 2, 1.5));
  show("chain (3, 2, 1), sigma = (1, 3, 8)",
       LambdaSystem({3, 2, 1}, {0, 0, 0, 2, 0, 0, 1, 2, 0}));
  return 0;
}
