#include "qte/divergence.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace qte {

namespace {

void require_same_dim(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) {
    std::ostringstream os;
    os << "divergence arguments differ in dimension: " << a.dim() << " vs " << b.dim();
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
}

DivergenceValue clip(double v) {
  if (v < 0.0 && v >= -tol::kEigenClip) v = 0.0;
  return {v, true};
}

}  // namespace

GeneratorFunction entropy_generator() {
  return {"x log x", [](double x) { return xlogx(x); },
          [](double x) { return std::log(x) + 1.0; }, true};
}

GeneratorFunction hs_generator() {
  return {"x^2", [](double x) { return x * x; }, [](double x) { return 2.0 * x; }, false};
}

GeneratorCheck check_generator(const GeneratorFunction& g) {
  GeneratorCheck out;
  constexpr std::array<double, 6> grid{0.0, 0.1, 0.3, 0.5, 0.8, 1.0};
  constexpr std::array<double, 3> ts{0.25, 0.5, 0.75};
  for (double x : grid)
    for (double y : grid) {
      if (x == y) continue;
      for (double t : ts) {
        double lhs = g.f(t * x + (1 - t) * y);
        double rhs = t * g.f(x) + (1 - t) * g.f(y);
        if (!(lhs < rhs - 1e-15)) out.strictly_convex = false;
      }
    }
  constexpr double h = 1e-6;
  for (double x = 0.05; x < 0.96; x += 0.05) {
    double fd = (g.f(x + h) - g.f(x - h)) / (2 * h);
    out.max_derivative_error = std::max(out.max_derivative_error, std::abs(fd - g.f_prime(x)));
  }
  out.passed = out.strictly_convex && out.max_derivative_error <= 1e-6;
  return out;
}

double trace_function(const GeneratorFunction& g, const HermitianMatrix& m) {
  auto spec = spectral_decompose(m);
  double sum = 0.0;
  for (Eigen::Index k = 0; k < spec.eigenvalues.size(); ++k) {
    double lambda = spec.eigenvalues[k];
    if (lambda < -tol::kEigenClip || lambda > 1.0 + tol::kEigenClip) {
      std::ostringstream os;
      os << "eigenvalue " << lambda << " outside [0, 1] for generator " << g.name;
      throw Error(ErrorCode::Domain, os.str());
    }
    sum += g.f(std::clamp(lambda, 0.0, 1.0));
  }
  return sum;
}

DivergenceValue bregman(const GeneratorFunction& g, const DensityMatrix& rho,
                        const DensityMatrix& sigma) {
  require_same_dim(rho, sigma);
  auto sig = spectral_decompose(sigma.hermitian());
  const Matrix delta = rho.matrix() - sigma.matrix();

  // Tr f'(sigma)(rho - sigma) evaluated in sigma's eigenbasis; kernel
  // directions only appear when f' is finite at 0 or rho vanishes there.
  double linear = 0.0;
  for (Eigen::Index k = 0; k < sig.eigenvalues.size(); ++k) {
    double lambda = std::clamp(sig.eigenvalues[k], 0.0, 1.0);
    Vector v = sig.eigenvectors.col(k);
    double rho_kk = (v.adjoint() * rho.matrix() * v)(0, 0).real();
    if (g.zero_singular && lambda <= kSupportThreshold) {
      if (rho_kk > kSupportThreshold) return DivergenceValue::infinity();
      continue;  // 0 * inf := 0
    }
    double delta_kk = (v.adjoint() * delta * v)(0, 0).real();
    linear += g.f_prime(lambda) * delta_kk;
  }
  double value = trace_function(g, rho.hermitian()) - trace_function(g, sigma.hermitian()) - linear;
  return clip(value);
}

DivergenceValue relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return bregman(entropy_generator(), rho, sigma);
}

DivergenceValue hilbert_schmidt_sq(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_same_dim(rho, sigma);
  return {hs_norm_sq(rho.matrix() - sigma.matrix()), true};
}

DivergenceValue bregman_lambda(const GeneratorFunction& g, const DensityMatrix& rho,
                               const DensityMatrix& sigma, double lambda) {
  require_same_dim(rho, sigma);
  if (!(lambda > 0.0 && lambda < 1.0)) {
    std::ostringstream os;
    os << "lambda must lie in (0, 1), got " << lambda;
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
  HermitianMatrix mix(Matrix(lambda * rho.matrix() + (1.0 - lambda) * sigma.matrix()), 1e-10);
  double value = (lambda * trace_function(g, rho.hermitian()) +
                  (1.0 - lambda) * trace_function(g, sigma.hermitian()) - trace_function(g, mix)) /
                 lambda;
  return clip(value);
}

}  // namespace qte
