#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include <unsupported/Eigen/KroneckerProduct>

#include "qte/measurement.hpp"

using namespace qte;

namespace {

Matrix swap_operator(int d) {
  Matrix s = Matrix::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) s(i * d + j, j * d + i) = 1.0;
  return s;
}

Matrix projector(const Eigen::VectorXcd& v) { return v * v.adjoint(); }

}  // namespace

TEST_CASE("built-in POVMs are valid") {
  for (const auto& p : {pauli_design_povm(), sic_povm(), z_povm()}) {
    auto v = validate_povm(p);
    CHECK(v.passed);
    CHECK(v.completeness_residual < 1e-12);
    CHECK(v.min_eigenvalue >= -1e-12);
    CHECK(v.weight_sum == doctest::Approx(1.0));
  }
  CHECK(pauli_design_povm().size() == 6);
  CHECK(sic_povm().size() == 4);
}

TEST_CASE("pauli POVM elements") {
  auto p = pauli_design_povm();
  // +z effect is (1/3)|0><0|
  Matrix e0 = p.effects[0].op();
  CHECK(std::abs(e0(0, 0) - 1.0 / 3) < 1e-15);
  CHECK(std::abs(e0(1, 1)) < 1e-15);
  CHECK(p.effects[0].weight == doctest::Approx(1.0 / 6));
}

TEST_CASE("validation detects broken POVMs") {
  auto p = pauli_design_povm();
  p.effects.pop_back();
  auto v = validate_povm(p);
  CHECK_FALSE(v.passed);
  CHECK(v.completeness_residual > 0.1);
  CHECK_THROWS_AS(require_valid(p), Error);

  Povm neg = z_povm();
  neg.effects[0].normalized_effect = HermitianMatrix(Matrix(2.0 * pauli_z()));
  CHECK_FALSE(validate_povm(neg).passed);
}

TEST_CASE("povm from operators") {
  Matrix e0 = Matrix::Zero(2, 2), e1 = Matrix::Zero(2, 2);
  e0(0, 0) = 1.0;
  e1(1, 1) = 1.0;
  std::vector<Matrix> ops{e0, e1};
  auto p = povm_from_operators(ops, {"0", "1"});
  CHECK(p.effects[0].weight == doctest::Approx(0.5));
  REQUIRE(p.effects[0].bloch);
  CHECK(p.effects[0].bloch->z == doctest::Approx(1.0));
  CHECK(validate_povm(p).passed);
}

TEST_CASE("born rule and sampling") {
  auto p = sic_povm();
  for (std::uint64_t s = 1; s <= 50; ++s) {
    auto rho = random_density(2, Purity::Mixed, s);
    auto probs = born_probabilities(p, rho);
    CHECK(std::accumulate(probs.begin(), probs.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    for (double q : probs) CHECK(q >= 0.0);
  }
  auto rho = bloch_to_density({0.2, 0.3, -0.4});
  auto probs = born_probabilities(p, rho);
  auto samples = sample_outcomes(p, rho, 400000, 3);
  std::uint64_t total = 0;
  std::vector<double> freq(p.size(), 0.0);
  for (const auto& s : samples) {
    total += s.count;
    freq[s.index] = static_cast<double>(s.count) / 400000.0;
  }
  CHECK(total == 400000);
  for (std::size_t k = 0; k < p.size(); ++k) {
    double se = std::sqrt(probs[k] * (1 - probs[k]) / 400000.0);
    CHECK(std::abs(freq[k] - probs[k]) < 5 * se);
  }
  auto again = sample_outcomes(p, rho, 400000, 3);
  REQUIRE(again.size() == samples.size());
  for (std::size_t i = 0; i < again.size(); ++i) CHECK(again[i].count == samples[i].count);
  CHECK_THROWS_AS(sample_outcomes(p, rho, 0, 3), Error);
}

TEST_CASE("spherical 2-design check") {
  for (const auto& p : {pauli_design_povm(), sic_povm()}) {
    auto r = spherical_2design_check(p);
    CHECK(r.applicable);
    CHECK(r.passed);
    CHECK(r.max_moment_residual < 1e-12);
    CHECK(r.max_mean_residual < 1e-12);
  }
  auto z = spherical_2design_check(z_povm());
  CHECK(z.applicable);
  CHECK_FALSE(z.passed);
  auto nonunit = spherical_2design_check(random_povm(2, 4, 5, false));
  CHECK_FALSE(nonunit.applicable);
}

TEST_CASE("random POVMs") {
  for (std::uint64_t s = 1; s <= 20; ++s) {
    for (bool rank_one : {true, false}) {
      auto p = random_povm(2 + static_cast<int>(s % 2), 5, s, rank_one);
      CHECK(validate_povm(p).passed);
    }
    auto q = random_povm(2, 4, s, true);
    for (const auto& x : effect_bloch_vectors(q)) CHECK(x.norm() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("haar twirl closed form") {
  SUBCASE("swap and identity are fixed points") {
    for (int d : {2, 3}) {
      Matrix id = Matrix::Identity(d * d, d * d);
      CHECK((haar_twirl_2(id) - id).cwiseAbs().maxCoeff() < 1e-12);
      Matrix sw = swap_operator(d);
      CHECK((haar_twirl_2(sw) - sw).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  SUBCASE("pure product state averages to the normalized symmetric projector") {
    Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(2);
    zero[0] = 1.0;
    Matrix x = Eigen::kroneckerProduct(projector(zero), projector(zero));
    Matrix sym = 0.5 * (Matrix::Identity(4, 4) + swap_operator(2));
    CHECK((haar_twirl_2(x) - sym / 3.0).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("agrees with a Monte Carlo Haar average") {
    Matrix x = random_hermitian(4, 9).matrix();
    Matrix acc = Matrix::Zero(4, 4);
    const int samples = 20000;
    for (int s = 0; s < samples; ++s) {
      Matrix u = random_unitary(2, 100000 + s).matrix();
      Matrix uu = Eigen::kroneckerProduct(u, u);
      acc += uu * x * uu.adjoint();
    }
    acc /= samples;
    CHECK((acc - haar_twirl_2(x)).cwiseAbs().maxCoeff() < 0.05);
  }
}

TEST_CASE("unitary 2-designs") {
  SUBCASE("tetrahedral group") {
    auto t = tetrahedral_unitaries();
    CHECK(t.size() == 12);
    auto r = unitary_2design_check(t);
    CHECK(r.passed);
    CHECK(r.residual < 1e-12);
  }
  SUBCASE("clifford group") {
    auto c = clifford_unitaries();
    CHECK(c.size() == 24);
    CHECK(unitary_2design_check(c).passed);
  }
  SUBCASE("pauli group is only a 1-design") {
    std::vector<UnitaryMatrix> paulis{UnitaryMatrix(Matrix::Identity(2, 2)), UnitaryMatrix(pauli_x()),
                                      UnitaryMatrix(pauli_y()), UnitaryMatrix(pauli_z())};
    CHECK_FALSE(unitary_2design_check(paulis).passed);
  }
  SUBCASE("the six orbit unitaries twirl the orbit seed but not the full operator space") {
    auto six = pauli_orbit_unitaries();
    CHECK(six.size() == 6);
    Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(2);
    zero[0] = 1.0;
    Matrix seed = Eigen::kroneckerProduct(projector(zero), projector(zero));
    CHECK(twirl_residual(six, seed) < 1e-12);
    auto full = unitary_2design_check(six);
    CHECK_FALSE(full.passed);
    CHECK(full.residual > 0.1);
  }
  SUBCASE("frame potential lower bound") {
    // sum |Tr U^dag V|^4 / N^2 equals 2 exactly for a qubit unitary 2-design
    auto frame = [](const std::vector<UnitaryMatrix>& us) {
      double acc = 0.0;
      for (const auto& u : us)
        for (const auto& v : us) acc += std::pow(std::abs((u.matrix().adjoint() * v.matrix()).trace()), 4);
      return acc / static_cast<double>(us.size() * us.size());
    };
    CHECK(frame(tetrahedral_unitaries()) == doctest::Approx(2.0));
    CHECK(frame(pauli_orbit_unitaries()) > 2.1);
  }
}

TEST_CASE("orbit unitaries map |0> onto the pauli eigenstates") {
  auto six = pauli_orbit_unitaries();
  auto p = pauli_design_povm();
  for (std::size_t k = 0; k < six.size(); ++k) {
    Eigen::VectorXcd v = six[k].matrix().col(0);
    Matrix proj = projector(v);
    CHECK((proj - p.effects[k].normalized_effect.matrix() / 2.0).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("covariant POVM construction") {
  Matrix seed = Matrix::Zero(2, 2);
  seed(0, 0) = 2.0;
  auto six = pauli_orbit_unitaries();
  auto cov = covariant_povm_from_seed(HermitianMatrix(seed), six);
  auto pauli = pauli_design_povm();
  REQUIRE(cov.size() == pauli.size());
  for (std::size_t k = 0; k < cov.size(); ++k)
    CHECK((cov.effects[k].op() - pauli.effects[k].op()).cwiseAbs().maxCoeff() < 1e-12);

  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 0) = 1.0;
  try {
    covariant_povm_from_seed(HermitianMatrix(bad), six);
    FAIL("expected SeedNormalization");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SeedNormalization);
  }
  CHECK_THROWS_AS(covariant_povm_from_seed(HermitianMatrix(Matrix(2.0 * pauli_z())), six), Error);
}

TEST_CASE("covariance permutations") {
  auto t = tetrahedral_unitaries();
  CHECK(covariance_permutations(pauli_design_povm(), t).has_value());
  CHECK(covariance_permutations(sic_povm(), t).has_value());
  CHECK_FALSE(covariance_permutations(z_povm(), t).has_value());
}

TEST_CASE("group closure") {
  std::vector<UnitaryMatrix> gens{UnitaryMatrix(pauli_x()), UnitaryMatrix(pauli_z())};
  CHECK(group_closure(gens).size() == 4);
}

TEST_CASE("continuous covariant density integrates to the identity") {
  // midpoint rule for the integral of 2 U|0><0|U^dag sin(theta) dtheta dphi / (4 pi)
  const int nt = 200, np = 400;
  const double dt = M_PI / nt, dp = 2 * M_PI / np;
  Matrix acc = Matrix::Zero(2, 2);
  for (int i = 0; i < nt; ++i) {
    double theta = (i + 0.5) * dt;
    for (int j = 0; j < np; ++j) {
      Eigen::VectorXcd v = orbit_unitary(theta, (j + 0.5) * dp).matrix().col(0);
      acc += 2.0 * projector(v) * std::sin(theta) * dt * dp / (4 * M_PI);
    }
  }
  CHECK((acc - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-4);
}
