#pragma once

#include <functional>
#include <vector>

namespace cutplane {

// Gauss-Legendre rule on [0,1]; weights sum to one.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int size() const { return static_cast<int>(nodes.size()); }
};

QuadratureRule gauss_rule(int N);

double integrate_1d(const std::function<double(double)>& f, const QuadratureRule& rule);

// Tensor-product rule on [0,1]^d.
double integrate_tensor(const std::function<double(const std::vector<double>&)>& f, int d,
                        const QuadratureRule& rule);

}  // namespace cutplane
