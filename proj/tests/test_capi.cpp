#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include <json.hpp>

#include "qte/qte.h"

TEST_CASE("states and divergences") {
  qte_state a = nullptr, b = nullptr;
  REQUIRE(qte_state_from_bloch(0, 0, 1, &a) == QTE_OK);
  REQUIRE(qte_state_from_bloch(1, 0, 0, &b) == QTE_OK);
  CHECK(qte_state_dim(a) == 2);
  double v = 0;
  int finite = 1;
  CHECK(qte_divergence(QTE_LOSS_REL, b, a, &v, &finite) == QTE_OK);
  CHECK(finite == 0);
  CHECK(std::isinf(v));
  CHECK(qte_divergence(QTE_LOSS_HS, b, a, &v, &finite) == QTE_OK);
  CHECK(v == doctest::Approx(1.0));
  double m[8];
  CHECK(qte_state_matrix(b, m) == QTE_OK);
  CHECK(m[2] == doctest::Approx(0.5));
  qte_state_free(a);
  qte_state_free(b);

  qte_state bad = nullptr;
  CHECK(qte_state_from_bloch(1, 1, 0, &bad) == QTE_INVALID_STATE);
  CHECK(bad == nullptr);
  CHECK(std::strlen(qte_last_error()) > 0);
  double notrace[8] = {1, 0, 0, 0, 0, 0, 1, 0};
  CHECK(qte_state_from_matrix(2, notrace, &bad) == QTE_INVALID_STATE);
  CHECK(qte_state_from_bloch(0, 0, 1, nullptr) == QTE_INVALID_ARGUMENT);
}

TEST_CASE("estimation through handles") {
  qte_povm p = nullptr;
  REQUIRE(qte_povm_builtin("pauli", &p) == QTE_OK);
  CHECK(qte_povm_size(p) == 6);
  qte_prior prior = nullptr;
  REQUIRE(qte_prior_uniform_sphere(&prior) == QTE_OK);
  qte_estimator est = nullptr;
  REQUIRE(qte_bayes_estimator(prior, p, &est) == QTE_OK);

  qte_state out = nullptr;
  REQUIRE(qte_estimator_state(est, 0, &out) == QTE_OK);
  double xyz[3];
  CHECK(qte_state_bloch(out, xyz) == QTE_OK);
  CHECK(xyz[2] == doctest::Approx(1.0 / 3));
  qte_state_free(out);
  CHECK(qte_estimator_state(est, 6, &out) == QTE_INVALID_ARGUMENT);

  qte_state rho = nullptr;
  REQUIRE(qte_state_from_bloch(0, 0, 1, &rho) == QTE_OK);
  double r = 0;
  CHECK(qte_risk(QTE_LOSS_HS, rho, est, p, &r) == QTE_OK);
  CHECK(r == doctest::Approx(4.0 / 9));
  double theta[3] = {0, 0, 1};
  double closed = 0;
  CHECK(qte_qubit_risk_closed_form(QTE_LOSS_REL, p, theta, &closed) == QTE_OK);
  CHECK(qte_risk(QTE_LOSS_REL, rho, est, p, &r) == QTE_OK);
  CHECK(closed == doctest::Approx(r).epsilon(1e-12));
  CHECK(qte_average_risk(QTE_LOSS_HS, prior, est, p, &r) == QTE_OK);
  CHECK(r == doctest::Approx(4.0 / 9));

  double probs[6];
  CHECK(qte_born(p, rho, probs) == QTE_OK);
  CHECK(probs[0] == doctest::Approx(1.0 / 3));
  std::uint64_t counts[6];
  CHECK(qte_sample(p, rho, 1000, 1, counts) == QTE_OK);
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  CHECK(total == 1000);
  CHECK(counts[1] == 0);

  qte_state_free(rho);
  qte_estimator_free(est);
  qte_prior_free(prior);
  qte_povm_free(p);
  CHECK(qte_povm_builtin("nope", &p) == QTE_INVALID_ARGUMENT);
}

TEST_CASE("POVM JSON through the C API") {
  qte_povm p = nullptr;
  REQUIRE(qte_povm_random(2, 4, 5, 1, &p) == QTE_OK);
  char* json = nullptr;
  REQUIRE(qte_povm_to_json(p, &json) == QTE_OK);
  qte_povm q = nullptr;
  CHECK(qte_povm_from_json(json, &q) == QTE_OK);
  CHECK(qte_povm_size(q) == 4);
  qte_string_free(json);
  qte_povm_free(p);
  qte_povm_free(q);
  CHECK(qte_povm_from_json("{not json", &q) == QTE_IO);
}

TEST_CASE("prior from bloch points") {
  double pts[6] = {0, 0, 1, 0, 0, -1};
  double w[2] = {1, 3};
  qte_prior prior = nullptr;
  CHECK(qte_prior_from_bloch(2, pts, w, &prior) == QTE_OK);
  qte_prior_free(prior);
  double outside[3] = {0, 0, 2};
  CHECK(qte_prior_from_bloch(1, outside, nullptr, &prior) == QTE_INVALID_STATE);
}

TEST_CASE("run command") {
  char* report = nullptr;
  CHECK(qte_run_command("verify-designs", nullptr, &report) == QTE_OK);
  REQUIRE(report != nullptr);
  auto doc = nlohmann::json::parse(report);
  CHECK(doc["passed"].get<bool>());
  qte_string_free(report);

  report = nullptr;
  CHECK(qte_run_command("qubit-risk", R"({"theta": [0, 0, 0], "shots": 1000})", &report) == QTE_OK);
  REQUIRE(report != nullptr);
  CHECK(nlohmann::json::parse(report)["exact"].get<double>() == doctest::Approx(1.0 / 18));
  qte_string_free(report);

  report = nullptr;
  CHECK(qte_run_command("qubit-risk", R"({"bogus": 1})", &report) == QTE_INVALID_ARGUMENT);
  CHECK(report == nullptr);
  CHECK(std::string(qte_last_error()).find("bogus") != std::string::npos);
  CHECK(qte_run_command("nope", nullptr, &report) == QTE_INVALID_ARGUMENT);
  CHECK(qte_run_command("demos", "{", &report) == QTE_IO);
}
