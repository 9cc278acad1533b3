#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qte/bayes.hpp"

using namespace qte;

namespace {

oracle::M2 to_m2(const DensityMatrix& r) {
  const auto& m = r.matrix();
  return {m(0, 0), m(0, 1), m(1, 0), m(1, 1)};
}

// Posterior mean by direct summation over the prior, independent of bayes_estimator.
oracle::M2 posterior_mean(const std::vector<BlochVector>& pts, const std::vector<double>& w, const Povm& p,
                          std::size_t k) {
  oracle::M2 acc{0, 0, 0, 0};
  double mass = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto rho = oracle::from_bloch(pts[i].x, pts[i].y, pts[i].z);
    const auto& e = p.effects[k].op();
    oracle::M2 em{e(0, 0), e(0, 1), e(1, 0), e(1, 1)};
    double pk = oracle::trace(oracle::mul(em, rho)).real();
    acc = oracle::add(acc, oracle::scale(rho, w[i] * pk));
    mass += w[i] * pk;
  }
  return oracle::scale(acc, 1.0 / mass);
}

double brute_risk(const DensityMatrix& rho, const Estimator& est, const Povm& p, bool entropy) {
  double total = 0.0;
  auto r = to_m2(rho);
  for (std::size_t k = 0; k < p.size(); ++k) {
    const auto& e = p.effects[k].op();
    oracle::M2 em{e(0, 0), e(0, 1), e(1, 0), e(1, 1)};
    double pk = oracle::trace(oracle::mul(em, r)).real();
    if (pk <= 0) continue;
    auto s = to_m2(est[k]);
    total += pk * (entropy ? oracle::relative_entropy(r, s) : oracle::hs_sq(r, s));
  }
  return total;
}

}  // namespace

TEST_CASE("discrete prior validation") {
  auto a = bloch_to_density({0, 0, 1});
  CHECK_THROWS_AS(DiscretePrior({{0.5, a, std::nullopt}, {0.4, a, std::nullopt}}), Error);
  CHECK_THROWS_AS(DiscretePrior({{1.0, a, std::nullopt}, {0.0, a, std::nullopt}}), Error);
  CHECK_THROWS_AS(DiscretePrior({{0.5, a, std::nullopt}, {0.5, random_density(3, Purity::Mixed, 1), std::nullopt}}),
                  Error);
  auto n = DiscretePrior::normalized({{2.0, a, std::nullopt}, {6.0, a, std::nullopt}});
  CHECK(n.weights()[1] == doctest::Approx(0.75));
  auto o = octahedron_prior();
  CHECK(o.size() == 6);
  CHECK(o.mean().matrix().isApprox(0.5 * Matrix::Identity(2, 2), 1e-14));
}

TEST_CASE("uniform-sphere Bayes estimator under the pauli POVM") {
  auto p = pauli_design_povm();
  auto est = bayes_estimator(octahedron_prior(), p);
  REQUIRE(est.size() == 6);
  for (std::size_t k = 0; k < 6; ++k) {
    auto x = *p.effects[k].bloch;
    // (I + x.sigma / 3) / 2
    auto v = density_to_bloch(est[k]);
    CHECK(v.x == doctest::Approx(x.x / 3));
    CHECK(v.y == doctest::Approx(x.y / 3));
    CHECK(v.z == doctest::Approx(x.z / 3));
  }
}

TEST_CASE("bayes estimator matches direct posterior means") {
  for (std::uint64_t s = 1; s <= 30; ++s) {
    std::vector<BlochVector> pts;
    std::vector<double> w;
    for (int i = 0; i < 5; ++i) {
      pts.push_back(density_to_bloch(random_density(2, Purity::Mixed, s * 10 + i)));
      w.push_back(1.0 + i);
    }
    double tot = 15.0;
    for (auto& x : w) x /= tot;
    auto prior = DiscretePrior::from_bloch(pts, w);
    auto p = random_povm(2, 4, s, s % 2 == 0);
    auto est = bayes_estimator(prior, p);
    for (std::size_t k = 0; k < p.size(); ++k) {
      auto ref = posterior_mean(pts, w, p, k);
      const auto& m = est[k].matrix();
      CHECK(std::abs(m(0, 0) - ref.a) < 1e-12);
      CHECK(std::abs(m(0, 1) - ref.b) < 1e-12);
    }
  }
}

TEST_CASE("null outcomes") {
  auto zero = bloch_to_density({0, 0, 1});
  DiscretePrior prior({{1.0, zero, std::nullopt}});
  auto z = z_povm();
  try {
    posterior(prior, z, 1);
    FAIL("expected NullSet");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NullSet);
  }
  auto est = bayes_estimator(prior, z);
  CHECK(est[1].matrix().isApprox(prior.mean().matrix()));
  auto m = marginal_probabilities(prior, z);
  CHECK(m[0] == doctest::Approx(1.0));
  CHECK(m[1] == doctest::Approx(0.0));
}

TEST_CASE("risk agrees with brute-force sums") {
  auto hs = hs_generator();
  auto ent = entropy_generator();
  for (std::uint64_t s = 1; s <= 50; ++s) {
    auto p = random_povm(2, 3 + static_cast<int>(s % 3), s, s % 2 == 1);
    auto prior = DiscretePrior::from_bloch(fibonacci_sphere(8));
    auto est = bayes_estimator(prior, p);
    auto rho = random_density(2, s % 3 == 0 ? Purity::Pure : Purity::Mixed, s + 100);
    CHECK(risk(rho, est, p, hs) == doctest::Approx(brute_risk(rho, est, p, false)).epsilon(1e-11));
    CHECK(risk(rho, est, p, ent) == doctest::Approx(brute_risk(rho, est, p, true)).epsilon(1e-10));
    RiskEvaluator fast_hs(est, p, hs), fast_ent(est, p, ent);
    CHECK(fast_hs(rho) == doctest::Approx(risk(rho, est, p, hs)).epsilon(1e-12));
    CHECK(fast_ent(rho) == doctest::Approx(risk(rho, est, p, ent)).epsilon(1e-12));
  }
}

TEST_CASE("infinite risk from a rank-deficient estimate") {
  auto z = z_povm();
  Estimator est({bloch_to_density({0, 0, 1}), bloch_to_density({0, 0, -1})});
  auto plus = bloch_to_density({1, 0, 0});
  CHECK(std::isinf(risk(plus, est, z, entropy_generator())));
  CHECK(std::isfinite(risk(plus, est, z, hs_generator())));
  CHECK(risk(bloch_to_density({0, 0, 1}), est, z, entropy_generator()) == doctest::Approx(0.0));
}

TEST_CASE("monte carlo risk is consistent with the exact risk") {
  auto p = sic_povm();
  auto est = bayes_estimator(octahedron_prior(), p);
  for (std::uint64_t s = 1; s <= 10; ++s) {
    auto rho = random_density(2, Purity::Mixed, s);
    for (const auto& g : {hs_generator(), entropy_generator()}) {
      double exact = risk(rho, est, p, g);
      auto mc = monte_carlo_risk(rho, est, p, g, 200000, s);
      CHECK(mc.shots == 200000);
      CHECK(std::abs(mc.mean - exact) < 5 * mc.standard_error + 1e-12);
      auto again = monte_carlo_risk(rho, est, p, g, 200000, s);
      CHECK(again.mean == mc.mean);
    }
  }
}

TEST_CASE("worst case picks the first maximizer") {
  auto p = pauli_design_povm();
  auto est = bayes_estimator(octahedron_prior(), p);
  std::vector<BlochVector> pts{{0, 0, 0}, {0, 0, 1}, {1, 0, 0}, {0, 0.5, 0}};
  auto states = states_from_bloch(pts);
  auto wc = worst_case_risk(est, p, hs_generator(), states);
  CHECK(wc.index == 1);
  CHECK(wc.value == doctest::Approx(4.0 / 9));
}

TEST_CASE("grids") {
  auto f = fibonacci_sphere(500);
  CHECK(f.size() == 500);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& v : f) {
    CHECK(v.norm() == doctest::Approx(1.0));
    mean += v.vec();
  }
  CHECK((mean / 500.0).norm() < 1e-2);
  std::vector<double> radii{0.0, 0.5, 1.0};
  auto b = ball_grid(100, radii);
  CHECK(b.size() == 201);
  CHECK(b[0].norm() == 0.0);
}

TEST_CASE("bayes optimality gap") {
  for (std::uint64_t s = 1; s <= 20; ++s) {
    std::vector<PriorPoint> pts;
    for (int i = 0; i < 4; ++i) pts.push_back({1.0 + i, random_density(2, Purity::Mixed, s * 7 + i), std::nullopt});
    auto prior = DiscretePrior::normalized(std::move(pts));
    auto p = random_povm(2, 4, s, true);
    for (const auto& g : {hs_generator(), entropy_generator()}) {
      std::vector<DensityMatrix> rival;
      for (int k = 0; k < 4; ++k) rival.push_back(random_density(2, Purity::Mixed, s * 100 + k));
      auto gap = bayes_optimality_gap(prior, p, g, Estimator(rival));
      CHECK(gap.risk_difference >= -1e-12);
      CHECK(gap.risk_difference == doctest::Approx(gap.divergence_sum).epsilon(1e-9));
      // the Bayes estimator itself has zero gap
      auto self = bayes_optimality_gap(prior, p, g, bayes_estimator(prior, p));
      CHECK(std::abs(self.risk_difference) < 1e-12);
    }
  }
}

TEST_CASE("bayes estimator discontinuity") {
  std::vector<int> ns{10, 100, 1000};
  auto r = discontinuity_demo(ns);
  REQUIRE(r.rows.size() == 3);
  for (const auto& row : r.rows) {
    CHECK(row.pi_outcome1.z == doctest::Approx(-1.0));
    CHECK(row.mu_outcome1.x == doctest::Approx(1.0));
    CHECK(row.mu_outcome1.z == doctest::Approx(0.0));
    double n = row.n;
    // outcome 0 posterior under pi is exactly |0><0|; under mu it mixes in |+>
    CHECK(row.pi_outcome0.z == doctest::Approx(1.0));
    double w = (1.0 / n) * 0.5 / ((1 - 1.0 / n) + (1.0 / n) * 0.5);
    CHECK(row.mu_outcome0.x == doctest::Approx(w));
  }
  // hand 2x2 oracle: |1><1| - |+><+| = [[-1/2, -1/2], [-1/2, 1/2]], Tr of its square = 1
  auto d = oracle::add(oracle::from_bloch(0, 0, -1), oracle::scale(oracle::from_bloch(1, 0, 0), -1.0));
  double ref = oracle::trace(oracle::mul(d, d)).real();
  CHECK(ref == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(r.limit_distance_sq - ref) < 1e-12);
  CHECK(r.limits_differ);
  std::vector<int> bad{1};
  CHECK_THROWS_AS(discontinuity_demo(bad), Error);
}
