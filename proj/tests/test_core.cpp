#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qte/core.hpp"

using namespace qte;

namespace {

Matrix m2(Complex a, Complex b, Complex c, Complex d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Internal;
}

}  // namespace

TEST_CASE("hermitian construction") {
  HermitianMatrix h(m2(1.0, Complex(0.0, -1.0), Complex(0.0, 1.0), -1.0));
  CHECK(h.dim() == 2);
  CHECK(h.trace() == doctest::Approx(0.0));
  CHECK(code_of([] { HermitianMatrix(m2(1.0, 1.0, 0.0, 1.0)); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { HermitianMatrix(Matrix::Zero(2, 3)); }) == ErrorCode::DimensionMismatch);
  // tiny asymmetry is symmetrized away
  HermitianMatrix s(m2(1.0, 1e-13, 0.0, 0.0));
  CHECK(s.matrix()(0, 1) == s.matrix()(1, 0));
}

TEST_CASE("density matrix validation") {
  DensityMatrix ok(m2(0.5, 0.5, 0.5, 0.5));
  CHECK(ok.purity() == doctest::Approx(1.0));
  CHECK(code_of([] { DensityMatrix(m2(0.6, 0.0, 0.0, 0.6)); }) == ErrorCode::InvalidState);
  CHECK(code_of([] { DensityMatrix(m2(1.1, 0.0, 0.0, -0.1)); }) == ErrorCode::InvalidState);

  SUBCASE("round-off negatives are clipped") {
    DensityMatrix d(m2(1.0 + 5e-11, 0.0, 0.0, -5e-11));
    auto sd = spectral_decompose(d.hermitian());
    CHECK(sd.eigenvalues[1] >= 0.0);
    CHECK(d.matrix().trace().real() == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("spectral decomposition") {
  SUBCASE("pauli x") {
    auto sd = spectral_decompose(HermitianMatrix(pauli_x()));
    CHECK(sd.eigenvalues[0] == doctest::Approx(1.0));
    CHECK(sd.eigenvalues[1] == doctest::Approx(-1.0));
    // phase convention: first non-negligible entry real and positive
    for (int k = 0; k < 2; ++k) {
      Complex c0 = sd.eigenvectors(0, k);
      CHECK(c0.imag() == doctest::Approx(0.0));
      CHECK(c0.real() > 0.0);
    }
  }
  SUBCASE("reconstruction and orthonormality on random inputs") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      auto h = random_hermitian(4, seed);
      auto sd = spectral_decompose(h);
      Matrix v = sd.eigenvectors;
      Matrix rebuilt = v * sd.eigenvalues.asDiagonal() * v.adjoint();
      CHECK((rebuilt - h.matrix()).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((v.adjoint() * v - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
      for (int k = 1; k < 4; ++k) CHECK(sd.eigenvalues[k - 1] >= sd.eigenvalues[k]);
    }
  }
  SUBCASE("degenerate spectrum") {
    auto sd = spectral_decompose(HermitianMatrix::identity(3));
    for (int k = 0; k < 3; ++k) CHECK(sd.eigenvalues[k] == doctest::Approx(1.0));
  }
}

TEST_CASE("scalar functions of matrices") {
  ScalarFunction sq{"square", [](double x) { return x * x; }};
  auto h = random_hermitian(3, 11);
  auto r = apply_scalar_function(h, sq);
  CHECK((r.matrix() - h.matrix() * h.matrix()).cwiseAbs().maxCoeff() < 1e-12);

  ScalarFunction lg{"log", [](double x) { return std::log(x); }, 0.0, std::numeric_limits<double>::infinity(),
                    1e-10, true};
  CHECK(code_of([&] { apply_scalar_function(HermitianMatrix(pauli_z()), lg); }) == ErrorCode::Domain);

  SUBCASE("agrees with the 2x2 projector oracle") {
    DensityMatrix rho = bloch_to_density({0.3, -0.2, 0.5});
    auto lib = apply_scalar_function(rho.hermitian(), lg).matrix();
    auto ref = oracle::apply(oracle::from_bloch(0.3, -0.2, 0.5), [](double x) { return std::log(x); });
    CHECK(std::abs(lib(0, 0) - ref.a) < 1e-12);
    CHECK(std::abs(lib(0, 1) - ref.b) < 1e-12);
    CHECK(std::abs(lib(1, 0) - ref.c) < 1e-12);
    CHECK(std::abs(lib(1, 1) - ref.d) < 1e-12);
  }
}

TEST_CASE("xlogx") {
  CHECK(xlogx(0.0) == 0.0);
  CHECK(xlogx(1.0) == 0.0);
  CHECK(xlogx(0.5) == doctest::Approx(0.5 * std::log(0.5)));
}

TEST_CASE("bloch conversions") {
  DensityMatrix up = bloch_to_density({0, 0, 1});
  CHECK(std::abs(up.matrix()(0, 0) - 1.0) < 1e-15);
  DensityMatrix plus = bloch_to_density({1, 0, 0});
  CHECK(std::abs(plus.matrix()(0, 1) - 0.5) < 1e-15);
  DensityMatrix yplus = bloch_to_density({0, 1, 0});
  CHECK(std::abs(yplus.matrix()(0, 1) - Complex(0, -0.5)) < 1e-15);
  CHECK(code_of([] { bloch_to_density({1, 1, 0}); }) == ErrorCode::InvalidState);
  CHECK(code_of([] { density_to_bloch(random_density(3, Purity::Mixed, 1)); }) == ErrorCode::DimensionMismatch);

  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    DensityMatrix r = random_density(2, Purity::Mixed, seed);
    BlochVector v = density_to_bloch(r);
    CHECK(v.norm() <= 1.0 + 1e-12);
    CHECK((bloch_to_density(v).matrix() - r.matrix()).cwiseAbs().maxCoeff() < 1e-13);
    // purity = (1 + |v|^2) / 2
    CHECK(r.purity() == doctest::Approx(0.5 * (1.0 + v.norm() * v.norm())).epsilon(1e-12));
  }
}

TEST_CASE("random generation") {
  SUBCASE("deterministic in the seed") {
    CHECK(random_density(3, Purity::Mixed, 5).matrix() == random_density(3, Purity::Mixed, 5).matrix());
    CHECK(random_density(3, Purity::Mixed, 5).matrix() != random_density(3, Purity::Mixed, 6).matrix());
  }
  SUBCASE("pure states have unit purity") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed)
      CHECK(random_density(4, Purity::Pure, seed).purity() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("unitaries are unitary") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      auto u = random_unitary(3, seed).matrix();
      CHECK((u.adjoint() * u - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  CHECK(code_of([] { UnitaryMatrix(m2(1.0, 1.0, 0.0, 1.0)); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("conjugation preserves spectrum") {
  auto h = random_hermitian(3, 2);
  auto u = random_unitary(3, 3);
  auto a = spectral_decompose(h).eigenvalues;
  auto b = spectral_decompose(HermitianMatrix(conjugate(u.matrix(), h.matrix()), 1e-10)).eigenvalues;
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(hs_norm_sq(pauli_x()) == doctest::Approx(2.0));
}
