#include "qte/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace qte {

namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream os;
    os << what << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
}

// Makes the first component with modulus above 1e-12 real and positive.
void fix_phase(Eigen::Ref<Vector> v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > 1e-12) {
      v *= std::conj(v[i]) / std::abs(v[i]);
      v[i] = std::abs(v[i]);
      return;
    }
  }
}

Matrix complex_gaussian(int rows, int cols, std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) {
      double re = normal(gen);
      double im = normal(gen);
      g(i, j) = Complex(re, im);
    }
  return g;
}

}  // namespace

HermitianMatrix::HermitianMatrix(const Matrix& m, double tolerance) {
  require_square(m, "HermitianMatrix");
  double residual = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (!(residual <= tolerance)) {
    std::ostringstream os;
    os << "matrix is not Hermitian: max |m_ij - conj(m_ji)| = " << residual;
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
  m_ = 0.5 * (m + m.adjoint());
}

HermitianMatrix HermitianMatrix::identity(int dim) {
  return HermitianMatrix(Matrix::Identity(dim, dim));
}

DensityMatrix::DensityMatrix(const Matrix& m) {
  HermitianMatrix h(m);
  double tr = h.trace();
  if (std::abs(tr - 1.0) > tol::kTrace) {
    std::ostringstream os;
    os << "density matrix must have unit trace, got " << tr;
    throw Error(ErrorCode::InvalidState, os.str());
  }
  auto spec = spectral_decompose(h);
  double min_eig = spec.eigenvalues.minCoeff();
  if (min_eig < -tol::kEigenClip) {
    std::ostringstream os;
    os << "density matrix has negative eigenvalue " << min_eig;
    throw Error(ErrorCode::InvalidState, os.str());
  }
  if (min_eig < 0.0) {
    Eigen::VectorXd clipped = spec.eigenvalues.cwiseMax(0.0);
    clipped /= clipped.sum();
    Matrix rebuilt = spec.eigenvectors * clipped.cast<Complex>().asDiagonal() *
                     spec.eigenvectors.adjoint();
    base_ = HermitianMatrix(0.5 * (rebuilt + rebuilt.adjoint()));
  } else {
    base_ = std::move(h);
  }
}

double DensityMatrix::purity() const { return (matrix() * matrix()).trace().real(); }

double BlochVector::norm() const { return std::sqrt(x * x + y * y + z * z); }

UnitaryMatrix::UnitaryMatrix(const Matrix& m, double tolerance) {
  require_square(m, "UnitaryMatrix");
  Matrix id = Matrix::Identity(m.rows(), m.cols());
  double residual = (m * m.adjoint() - id).cwiseAbs().maxCoeff();
  if (!(residual <= tolerance)) {
    std::ostringstream os;
    os << "matrix is not unitary: max |U U^dagger - I| = " << residual;
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
  u_ = m;
}

SpectralDecomposition spectral_decompose(const HermitianMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m.matrix());
  if (solver.info() != Eigen::Success) {
    std::ostringstream os;
    os << "eigen-solver did not converge (dim " << m.dim()
       << ", Frobenius norm " << m.matrix().norm()
       << ", max |entry| " << m.matrix().cwiseAbs().maxCoeff() << ")";
    throw Error(ErrorCode::NotConverged, os.str());
  }
  const int n = m.dim();
  // Eigen returns ascending order; reverse into descending with a stable sort
  // so equal eigenvalues keep the solver's basis order.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return solver.eigenvalues()[a] > solver.eigenvalues()[b];
  });
  SpectralDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (int k = 0; k < n; ++k) {
    out.eigenvalues[k] = solver.eigenvalues()[order[k]];
    out.eigenvectors.col(k) = solver.eigenvectors().col(order[k]);
    fix_phase(out.eigenvectors.col(k));
  }
  return out;
}

HermitianMatrix apply_scalar_function(const HermitianMatrix& m, const ScalarFunction& g) {
  auto spec = spectral_decompose(m);
  const int n = m.dim();
  Eigen::VectorXd mapped(n);
  for (int k = 0; k < n; ++k) {
    double lambda = spec.eigenvalues[k];
    if (lambda < g.lo - g.slack || lambda > g.hi + g.slack ||
        (g.open_lo && lambda <= g.lo)) {
      std::ostringstream os;
      os << "eigenvalue " << lambda << " outside the domain of "
         << (g.name.empty() ? std::string("function") : g.name) << " ["
         << g.lo << ", " << g.hi << "]";
      throw Error(ErrorCode::Domain, os.str());
    }
    mapped[k] = g.fn(std::clamp(lambda, g.lo, g.hi));
  }
  Matrix out = spec.eigenvectors * mapped.cast<Complex>().asDiagonal() * spec.eigenvectors.adjoint();
  return HermitianMatrix(0.5 * (out + out.adjoint()), 1e-9);
}

double xlogx(double x) { return x <= 0.0 ? 0.0 : x * std::log(x); }

const Matrix& pauli_x() {
  static const Matrix m = (Matrix(2, 2) << 0, 1, 1, 0).finished();
  return m;
}
const Matrix& pauli_y() {
  static const Matrix m = (Matrix(2, 2) << 0, Complex(0, -1), Complex(0, 1), 0).finished();
  return m;
}
const Matrix& pauli_z() {
  static const Matrix m = (Matrix(2, 2) << 1, 0, 0, -1).finished();
  return m;
}

DensityMatrix bloch_to_density(const BlochVector& v) {
  double r = v.norm();
  if (r > 1.0 + tol::kBlochNorm) {
    std::ostringstream os;
    os << "Bloch vector has norm " << r << " > 1";
    throw Error(ErrorCode::InvalidState, os.str());
  }
  Matrix m = 0.5 * (Matrix::Identity(2, 2) + v.x * pauli_x() + v.y * pauli_y() + v.z * pauli_z());
  return DensityMatrix(m);
}

Eigen::Vector3d bloch_components(const Matrix& m) {
  if (m.rows() != 2 || m.cols() != 2)
    throw Error(ErrorCode::DimensionMismatch, "Bloch components need a 2x2 operator");
  return {(m * pauli_x()).trace().real(), (m * pauli_y()).trace().real(),
          (m * pauli_z()).trace().real()};
}

BlochVector density_to_bloch(const DensityMatrix& rho) {
  if (rho.dim() != 2) {
    std::ostringstream os;
    os << "Bloch vector needs a qubit state, got dimension " << rho.dim();
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
  return BlochVector::from(bloch_components(rho.matrix()));
}

DensityMatrix random_density(int dim, Purity purity, std::uint64_t seed) {
  if (dim < 2) throw Error(ErrorCode::InvalidArgument, "random_density needs dim >= 2");
  std::mt19937_64 gen(seed);
  if (purity == Purity::Pure) {
    Vector psi = complex_gaussian(dim, 1, gen).col(0);
    psi.normalize();
    return DensityMatrix(Matrix(psi * psi.adjoint()));
  }
  Matrix g = complex_gaussian(dim, dim, gen);
  Matrix w = g * g.adjoint();
  w /= w.trace().real();
  return DensityMatrix(Matrix(0.5 * (w + w.adjoint())));
}

HermitianMatrix random_hermitian(int dim, std::uint64_t seed) {
  if (dim < 1) throw Error(ErrorCode::InvalidArgument, "random_hermitian needs dim >= 1");
  std::mt19937_64 gen(seed);
  Matrix g = complex_gaussian(dim, dim, gen);
  return HermitianMatrix(Matrix(0.5 * (g + g.adjoint())));
}

UnitaryMatrix random_unitary(int dim, std::uint64_t seed) {
  if (dim < 1) throw Error(ErrorCode::InvalidArgument, "random_unitary needs dim >= 1");
  std::mt19937_64 gen(seed);
  Matrix g = complex_gaussian(dim, dim, gen);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < dim; ++k) {
    Complex d = r(k, k);
    if (std::abs(d) > 0) q.col(k) *= d / std::abs(d);
  }
  return UnitaryMatrix(q, 1e-10);
}

Matrix conjugate(const Matrix& u, const Matrix& m) { return u * m * u.adjoint(); }

double hs_norm_sq(const Matrix& m) { return m.cwiseAbs2().sum(); }

}  // namespace qte
