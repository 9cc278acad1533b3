#pragma once

#include <functional>
#include <limits>
#include <string>

#include "qte/core.hpp"

namespace qte {

/// Strictly convex, continuously differentiable f on [0, 1] seeding the
/// Bregman divergence D_f(rho, sigma) = Tr(f(rho) - f(sigma) - f'(sigma)(rho - sigma)).
struct GeneratorFunction {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> f_prime;
  bool zero_singular = false;  // f' diverges at 0
};

/// f(x) = x ln x, f'(x) = ln x + 1 on (0, 1]. Yields the relative entropy.
GeneratorFunction entropy_generator();
/// f(x) = x^2. Yields the squared Hilbert-Schmidt distance.
GeneratorFunction hs_generator();

struct GeneratorCheck {
  bool strictly_convex = true;
  double max_derivative_error = 0.0;
  bool passed = true;
};

/// Probes strict convexity on a fixed (x, y, t) grid and compares f' with a
/// centered finite difference of f on interior points.
GeneratorCheck check_generator(const GeneratorFunction& g);

struct DivergenceValue {
  double value = 0.0;
  bool finite = true;

  static DivergenceValue infinity() {
    return {std::numeric_limits<double>::infinity(), false};
  }
  /// value as a double, +inf when not finite
  double as_double() const { return finite ? value : std::numeric_limits<double>::infinity(); }
};

inline constexpr double kSupportThreshold = 1e-10;

DivergenceValue bregman(const GeneratorFunction& g, const DensityMatrix& rho, const DensityMatrix& sigma);
DivergenceValue relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma);
DivergenceValue hilbert_schmidt_sq(const DensityMatrix& rho, const DensityMatrix& sigma);

/// (1/lambda) Tr(lambda f(rho) + (1-lambda) f(sigma) - f(lambda rho + (1-lambda) sigma)),
/// a lower approximant of bregman() that increases to it as lambda -> 0.
DivergenceValue bregman_lambda(const GeneratorFunction& g, const DensityMatrix& rho,
                               const DensityMatrix& sigma, double lambda);

/// Tr f(m) for Hermitian m with spectrum in [0, 1].
double trace_function(const GeneratorFunction& g, const HermitianMatrix& m);

}  // namespace qte
