#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qte {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  InvalidState,
  Domain,
  NotConverged,
  NullSet,
  SeedNormalization,
  Internal,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

namespace tol {
inline constexpr double kHermitian = 1e-12;
inline constexpr double kEigenClip = 1e-10;
inline constexpr double kTrace = 1e-10;
inline constexpr double kBlochNorm = 1e-10;
inline constexpr double kUnitary = 1e-12;
}  // namespace tol

/// Square complex matrix equal to its conjugate transpose.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;

  /// Validates Hermiticity elementwise and symmetrizes away the residual.
  explicit HermitianMatrix(const Matrix& m, double tolerance = tol::kHermitian);

  static HermitianMatrix identity(int dim);

  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const noexcept { return m_; }
  double trace() const noexcept { return m_.trace().real(); }

 private:
  Matrix m_;
};

/// Positive semidefinite, unit-trace Hermitian operator.
class DensityMatrix {
 public:
  DensityMatrix() = default;

  /// Eigenvalues in [-1e-10, 0) are clipped to zero; anything more negative
  /// or a trace off by more than 1e-10 throws InvalidState.
  explicit DensityMatrix(const Matrix& m);
  explicit DensityMatrix(const HermitianMatrix& h) : DensityMatrix(h.matrix()) {}

  int dim() const noexcept { return base_.dim(); }
  const Matrix& matrix() const noexcept { return base_.matrix(); }
  const HermitianMatrix& hermitian() const noexcept { return base_; }
  double purity() const;

 private:
  HermitianMatrix base_;
};

struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const;
  Eigen::Vector3d vec() const { return {x, y, z}; }
  static BlochVector from(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }
};

class UnitaryMatrix {
 public:
  UnitaryMatrix() = default;
  explicit UnitaryMatrix(const Matrix& m, double tolerance = tol::kUnitary);

  int dim() const noexcept { return static_cast<int>(u_.rows()); }
  const Matrix& matrix() const noexcept { return u_; }

 private:
  Matrix u_;
};

struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;  // descending
  Matrix eigenvectors;          // columns, first nonzero component real positive
};

/// Eigen-decomposition of a Hermitian matrix. Throws NotConverged with a
/// short conditioning report when the solver fails.
SpectralDecomposition spectral_decompose(const HermitianMatrix& m);

/// Real scalar function with a closed domain [lo, hi]. Eigenvalues that stray
/// outside the domain by at most `slack` are clamped onto it.
struct ScalarFunction {
  std::string name;
  std::function<double(double)> fn;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  double slack = tol::kEigenClip;
  bool open_lo = false;  // domain is (lo, hi]
};

HermitianMatrix apply_scalar_function(const HermitianMatrix& m, const ScalarFunction& g);

/// x ln x with 0 ln 0 := 0, on [0, 1].
double xlogx(double x);

DensityMatrix bloch_to_density(const BlochVector& v);
BlochVector density_to_bloch(const DensityMatrix& rho);
/// Components Tr(m sigma_i) of a 2x2 operator; the Bloch vector when Tr m = 1.
Eigen::Vector3d bloch_components(const Matrix& m);

const Matrix& pauli_x();
const Matrix& pauli_y();
const Matrix& pauli_z();

enum class Purity { Pure, Mixed };

/// Pure states from normalized complex Gaussian vectors, mixed states from
/// G G^dagger / Tr(G G^dagger) with G complex Gaussian.
DensityMatrix random_density(int dim, Purity purity, std::uint64_t seed);
HermitianMatrix random_hermitian(int dim, std::uint64_t seed);
/// Haar-random unitary via QR of a complex Ginibre matrix with phase fix.
UnitaryMatrix random_unitary(int dim, std::uint64_t seed);

/// U m U^dagger.
Matrix conjugate(const Matrix& u, const Matrix& m);
double hs_norm_sq(const Matrix& m);

}  // namespace qte
