#ifndef QTE_QTE_H
#define QTE_QTE_H

#include <stddef.h>
#include <stdint.h>

#if defined(QTE_BUILDING_LIBRARY)
#define QTE_API __attribute__((visibility("default")))
#else
#define QTE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qte_status {
  QTE_OK = 0,
  QTE_INVALID_ARGUMENT = 1,
  QTE_DIMENSION = 2,
  QTE_INVALID_STATE = 3,
  QTE_DOMAIN = 4,
  QTE_NOT_CONVERGED = 5,
  QTE_NULL_SET = 6,
  QTE_SEED_NORMALIZATION = 7,
  QTE_INTERNAL = 8,
  QTE_IO = 9,
  QTE_CHECK_FAILED = 10
} qte_status;

typedef enum qte_loss { QTE_LOSS_HS = 0, QTE_LOSS_REL = 1 } qte_loss;

typedef struct qte_state_s* qte_state;
typedef struct qte_povm_s* qte_povm;
typedef struct qte_prior_s* qte_prior;
typedef struct qte_estimator_s* qte_estimator;

/* Message for the last failing call on this thread; never NULL. */
QTE_API const char* qte_last_error(void);
QTE_API const char* qte_status_name(qte_status s);
QTE_API void qte_string_free(char* s);

/* States. Matrices are row-major arrays of interleaved (re, im) pairs, 2*dim*dim doubles. */
QTE_API qte_status qte_state_from_matrix(int dim, const double* re_im, qte_state* out);
QTE_API qte_status qte_state_from_bloch(double x, double y, double z, qte_state* out);
QTE_API qte_status qte_state_random(int dim, int pure, uint64_t seed, qte_state* out);
QTE_API void qte_state_free(qte_state s);
QTE_API int qte_state_dim(qte_state s);
QTE_API qte_status qte_state_matrix(qte_state s, double* re_im);
QTE_API qte_status qte_state_bloch(qte_state s, double xyz[3]);

/* Bregman divergence D(rho || sigma); *finite is 0 when the value is +inf. */
QTE_API qte_status qte_divergence(qte_loss loss, qte_state rho, qte_state sigma, double* value, int* finite);

/* POVMs. name is one of "pauli", "sic", "z". */
QTE_API qte_status qte_povm_builtin(const char* name, qte_povm* out);
QTE_API qte_status qte_povm_from_json(const char* json, qte_povm* out);
QTE_API qte_status qte_povm_random(int dim, int outcomes, uint64_t seed, int rank_one, qte_povm* out);
QTE_API void qte_povm_free(qte_povm p);
QTE_API size_t qte_povm_size(qte_povm p);
QTE_API int qte_povm_dim(qte_povm p);
QTE_API qte_status qte_povm_to_json(qte_povm p, char** json);
QTE_API qte_status qte_born(qte_povm p, qte_state rho, double* probs);
QTE_API qte_status qte_sample(qte_povm p, qte_state rho, uint64_t shots, uint64_t seed, uint64_t* counts);

/* Discrete priors on the Bloch ball; weights are normalized. */
QTE_API qte_status qte_prior_from_bloch(size_t n, const double* xyz, const double* weights, qte_prior* out);
QTE_API qte_status qte_prior_uniform_sphere(qte_prior* out);
QTE_API void qte_prior_free(qte_prior p);

QTE_API qte_status qte_bayes_estimator(qte_prior prior, qte_povm p, qte_estimator* out);
QTE_API void qte_estimator_free(qte_estimator e);
QTE_API qte_status qte_estimator_state(qte_estimator e, size_t outcome, qte_state* out);
QTE_API qte_status qte_risk(qte_loss loss, qte_state rho, qte_estimator e, qte_povm p, double* value);
QTE_API qte_status qte_average_risk(qte_loss loss, qte_prior prior, qte_estimator e, qte_povm p, double* value);

/* Closed-form qubit risk of the uniform-sphere Bayes estimator. */
QTE_API qte_status qte_qubit_risk_closed_form(qte_loss loss, qte_povm p, const double theta[3], double* value);

/* Runs a named command. config_json may be NULL. On QTE_OK, QTE_CHECK_FAILED, or
 * a QTE_INTERNAL raised while the command ran, *report_json receives a JSON
 * report to release with qte_string_free; otherwise it is left untouched. */
QTE_API qte_status qte_run_command(const char* command, const char* config_json, char** report_json);

#ifdef __cplusplus
}
#endif

#endif
