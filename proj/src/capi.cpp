#include "qte/qte.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "qte/commands.hpp"

struct qte_state_s {
  qte::DensityMatrix value;
};
struct qte_povm_s {
  qte::Povm value;
};
struct qte_prior_s {
  qte::DiscretePrior value;
};
struct qte_estimator_s {
  qte::Estimator value;
};

namespace {

thread_local std::string last_error;

qte_status to_status(qte::ErrorCode c) {
  switch (c) {
    case qte::ErrorCode::InvalidArgument: return QTE_INVALID_ARGUMENT;
    case qte::ErrorCode::DimensionMismatch: return QTE_DIMENSION;
    case qte::ErrorCode::InvalidState: return QTE_INVALID_STATE;
    case qte::ErrorCode::Domain: return QTE_DOMAIN;
    case qte::ErrorCode::NotConverged: return QTE_NOT_CONVERGED;
    case qte::ErrorCode::NullSet: return QTE_NULL_SET;
    case qte::ErrorCode::SeedNormalization: return QTE_SEED_NORMALIZATION;
    case qte::ErrorCode::Internal: return QTE_INTERNAL;
    case qte::ErrorCode::Io: return QTE_IO;
  }
  return QTE_INTERNAL;
}

template <class F>
qte_status guard(F&& f) {
  try {
    last_error.clear();
    return f();
  } catch (const qte::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const qte::Json::exception& e) {
    last_error = std::string("malformed JSON: ") + e.what();
    return QTE_IO;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return QTE_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return QTE_INTERNAL;
  }
}

qte_status null_arg(const char* what) {
  last_error = std::string(what) + " is NULL";
  return QTE_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

qte::GeneratorFunction generator(qte_loss loss) {
  if (loss == QTE_LOSS_HS) return qte::hs_generator();
  if (loss == QTE_LOSS_REL) return qte::entropy_generator();
  throw qte::Error(qte::ErrorCode::InvalidArgument, "unknown loss");
}

qte::Matrix read_matrix(int dim, const double* re_im) {
  qte::Matrix m(dim, dim);
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) {
      const double* e = re_im + 2 * (a * dim + b);
      m(a, b) = qte::Complex(e[0], e[1]);
    }
  return m;
}

}  // namespace

extern "C" {

const char* qte_last_error(void) { return last_error.c_str(); }

const char* qte_status_name(qte_status s) {
  switch (s) {
    case QTE_OK: return "ok";
    case QTE_INVALID_ARGUMENT: return "invalid argument";
    case QTE_DIMENSION: return "dimension mismatch";
    case QTE_INVALID_STATE: return "invalid state";
    case QTE_DOMAIN: return "domain error";
    case QTE_NOT_CONVERGED: return "not converged";
    case QTE_NULL_SET: return "null set";
    case QTE_SEED_NORMALIZATION: return "seed normalization";
    case QTE_INTERNAL: return "internal error";
    case QTE_IO: return "io error";
    case QTE_CHECK_FAILED: return "check failed";
  }
  return "unknown status";
}

void qte_string_free(char* s) { std::free(s); }

qte_status qte_state_from_matrix(int dim, const double* re_im, qte_state* out) {
  if (!re_im) return null_arg("matrix");
  if (!out) return null_arg("out");
  return guard([&] {
    if (dim < 1) throw qte::Error(qte::ErrorCode::InvalidArgument, "dimension must be positive");
    *out = new qte_state_s{qte::DensityMatrix(read_matrix(dim, re_im))};
    return QTE_OK;
  });
}

qte_status qte_state_from_bloch(double x, double y, double z, qte_state* out) {
  if (!out) return null_arg("out");
  return guard([&] {
    *out = new qte_state_s{qte::bloch_to_density({x, y, z})};
    return QTE_OK;
  });
}

qte_status qte_state_random(int dim, int pure, uint64_t seed, qte_state* out) {
  if (!out) return null_arg("out");
  return guard([&] {
    if (dim < 1) throw qte::Error(qte::ErrorCode::InvalidArgument, "dimension must be positive");
    *out = new qte_state_s{qte::random_density(dim, pure ? qte::Purity::Pure : qte::Purity::Mixed, seed)};
    return QTE_OK;
  });
}

void qte_state_free(qte_state s) { delete s; }

int qte_state_dim(qte_state s) { return s ? s->value.dim() : 0; }

qte_status qte_state_matrix(qte_state s, double* re_im) {
  if (!s) return null_arg("state");
  if (!re_im) return null_arg("matrix");
  const auto& m = s->value.matrix();
  const int d = s->value.dim();
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      re_im[2 * (a * d + b)] = m(a, b).real();
      re_im[2 * (a * d + b) + 1] = m(a, b).imag();
    }
  return QTE_OK;
}

qte_status qte_state_bloch(qte_state s, double xyz[3]) {
  if (!s) return null_arg("state");
  if (!xyz) return null_arg("xyz");
  return guard([&] {
    auto v = qte::density_to_bloch(s->value);
    xyz[0] = v.x;
    xyz[1] = v.y;
    xyz[2] = v.z;
    return QTE_OK;
  });
}

qte_status qte_divergence(qte_loss loss, qte_state rho, qte_state sigma, double* value, int* finite) {
  if (!rho || !sigma) return null_arg("state");
  if (!value) return null_arg("value");
  return guard([&] {
    auto d = qte::bregman(generator(loss), rho->value, sigma->value);
    *value = d.as_double();
    if (finite) *finite = d.finite ? 1 : 0;
    return QTE_OK;
  });
}

qte_status qte_povm_builtin(const char* name, qte_povm* out) {
  if (!name) return null_arg("name");
  if (!out) return null_arg("out");
  return guard([&] {
    const std::string n(name);
    if (n == "pauli") *out = new qte_povm_s{qte::pauli_design_povm()};
    else if (n == "sic") *out = new qte_povm_s{qte::sic_povm()};
    else if (n == "z") *out = new qte_povm_s{qte::z_povm()};
    else throw qte::Error(qte::ErrorCode::InvalidArgument, "unknown POVM '" + n + "'");
    return QTE_OK;
  });
}

qte_status qte_povm_from_json(const char* json, qte_povm* out) {
  if (!json) return null_arg("json");
  if (!out) return null_arg("out");
  return guard([&] {
    *out = new qte_povm_s{qte::povm_from_json(qte::Json::parse(json))};
    return QTE_OK;
  });
}

qte_status qte_povm_random(int dim, int outcomes, uint64_t seed, int rank_one, qte_povm* out) {
  if (!out) return null_arg("out");
  return guard([&] {
    *out = new qte_povm_s{qte::random_povm(dim, outcomes, seed, rank_one != 0)};
    return QTE_OK;
  });
}

void qte_povm_free(qte_povm p) { delete p; }

size_t qte_povm_size(qte_povm p) { return p ? p->value.size() : 0; }

int qte_povm_dim(qte_povm p) { return p ? p->value.dim : 0; }

qte_status qte_povm_to_json(qte_povm p, char** json) {
  if (!p) return null_arg("povm");
  if (!json) return null_arg("json");
  return guard([&] {
    *json = dup_string(qte::povm_to_json(p->value).dump(-1, ' ', false, qte::Json::error_handler_t::replace));
    return QTE_OK;
  });
}

qte_status qte_born(qte_povm p, qte_state rho, double* probs) {
  if (!p) return null_arg("povm");
  if (!rho) return null_arg("state");
  if (!probs) return null_arg("probs");
  return guard([&] {
    auto v = qte::born_probabilities(p->value, rho->value);
    std::copy(v.begin(), v.end(), probs);
    return QTE_OK;
  });
}

qte_status qte_sample(qte_povm p, qte_state rho, uint64_t shots, uint64_t seed, uint64_t* counts) {
  if (!p) return null_arg("povm");
  if (!rho) return null_arg("state");
  if (!counts) return null_arg("counts");
  return guard([&] {
    auto samples = qte::sample_outcomes(p->value, rho->value, shots, seed);
    std::fill(counts, counts + p->value.size(), uint64_t{0});
    for (const auto& s : samples) counts[s.index] = s.count;
    return QTE_OK;
  });
}

qte_status qte_prior_from_bloch(size_t n, const double* xyz, const double* weights, qte_prior* out) {
  if (!xyz) return null_arg("xyz");
  if (!out) return null_arg("out");
  return guard([&] {
    std::vector<qte::BlochVector> pts(n);
    for (size_t i = 0; i < n; ++i) pts[i] = {xyz[3 * i], xyz[3 * i + 1], xyz[3 * i + 2]};
    std::vector<double> w;
    if (weights) w.assign(weights, weights + n);
    *out = new qte_prior_s{qte::DiscretePrior::from_bloch(pts, w)};
    return QTE_OK;
  });
}

qte_status qte_prior_uniform_sphere(qte_prior* out) {
  if (!out) return null_arg("out");
  return guard([&] {
    *out = new qte_prior_s{qte::octahedron_prior()};
    return QTE_OK;
  });
}

void qte_prior_free(qte_prior p) { delete p; }

qte_status qte_bayes_estimator(qte_prior prior, qte_povm p, qte_estimator* out) {
  if (!prior) return null_arg("prior");
  if (!p) return null_arg("povm");
  if (!out) return null_arg("out");
  return guard([&] {
    *out = new qte_estimator_s{qte::bayes_estimator(prior->value, p->value)};
    return QTE_OK;
  });
}

void qte_estimator_free(qte_estimator e) { delete e; }

qte_status qte_estimator_state(qte_estimator e, size_t outcome, qte_state* out) {
  if (!e) return null_arg("estimator");
  if (!out) return null_arg("out");
  return guard([&] {
    if (outcome >= e->value.size()) throw qte::Error(qte::ErrorCode::InvalidArgument, "outcome index out of range");
    *out = new qte_state_s{e->value[outcome]};
    return QTE_OK;
  });
}

qte_status qte_risk(qte_loss loss, qte_state rho, qte_estimator e, qte_povm p, double* value) {
  if (!rho) return null_arg("state");
  if (!e) return null_arg("estimator");
  if (!p) return null_arg("povm");
  if (!value) return null_arg("value");
  return guard([&] {
    *value = qte::risk(rho->value, e->value, p->value, generator(loss));
    return QTE_OK;
  });
}

qte_status qte_average_risk(qte_loss loss, qte_prior prior, qte_estimator e, qte_povm p, double* value) {
  if (!prior) return null_arg("prior");
  if (!e) return null_arg("estimator");
  if (!p) return null_arg("povm");
  if (!value) return null_arg("value");
  return guard([&] {
    *value = qte::average_risk(prior->value, e->value, p->value, generator(loss));
    return QTE_OK;
  });
}

qte_status qte_qubit_risk_closed_form(qte_loss loss, qte_povm p, const double theta[3], double* value) {
  if (!p) return null_arg("povm");
  if (!theta) return null_arg("theta");
  if (!value) return null_arg("value");
  return guard([&] {
    generator(loss);
    qte::QubitRiskParams params{{theta[0], theta[1], theta[2]},
                                loss == QTE_LOSS_HS ? qte::Loss::HilbertSchmidt : qte::Loss::RelativeEntropy,
                                qte::PovmMoments::of(p->value)};
    *value = qte::qubit_risk_closed_form(params);
    return QTE_OK;
  });
}

qte_status qte_run_command(const char* command, const char* config_json, char** report_json) {
  if (!command) return null_arg("command");
  if (!report_json) return null_arg("report_json");
  return guard([&] {
    qte::Json cfg_doc = config_json && *config_json ? qte::Json::parse(config_json) : qte::Json();
    auto cfg = qte::RunConfig::from_json(cfg_doc);
    auto result = qte::run_command(command, cfg);
    *report_json = dup_string(result.report.dump(-1, ' ', false, qte::Json::error_handler_t::replace));
    switch (result.status) {
      case qte::CommandStatus::Pass: return QTE_OK;
      case qte::CommandStatus::CheckFailed: return QTE_CHECK_FAILED;
      case qte::CommandStatus::Internal: last_error = result.report.value("error", "internal error"); return QTE_INTERNAL;
    }
    return QTE_INTERNAL;
  });
}

}  // extern "C"
