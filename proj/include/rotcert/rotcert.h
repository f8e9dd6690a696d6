#ifndef ROTCERT_H
#define ROTCERT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define RC_API __declspec(dllexport)
#else
#define RC_API __attribute__((visibility("default")))
#endif

/* Values mirror rotcert::ErrorCode. */
typedef enum rc_status {
  RC_OK = 0,
  RC_ERR_VALIDATION = 1,
  RC_ERR_DIMENSION,
  RC_ERR_DEGENERATE_SET,
  RC_ERR_CONFIG,
  RC_ERR_PARSE,
  RC_ERR_ORDER,
  RC_ERR_UNSUPPORTED,
  RC_ERR_PARAMETER,
  RC_ERR_OUT_OF_REGIME,
  RC_ERR_NO_NONTRIVIAL_ETA,
  RC_ERR_INFINITE_BOUND,
  RC_ERR_VACUOUS_BOUND,
  RC_ERR_EMPTY_SUPPORT,
  RC_ERR_ROUNDING_FAILURE,
  RC_ERR_DESK_SCALE_EXCEEDED,
  RC_ERR_IO,
  RC_ERR_USAGE,
  RC_ERR_INTERNAL = 100
} rc_status;

typedef struct rc_instance rc_instance;
typedef struct rc_outcome rc_outcome;
typedef struct rc_hypotheses rc_hypotheses;
typedef struct rc_config rc_config;
typedef struct rc_record rc_record;

/* Message of the most recent failure on the calling thread ("" if none). */
RC_API const char* rc_last_error(void);
RC_API const char* rc_status_name(rc_status s);
/* Frees strings returned through char** out-parameters. */
RC_API void rc_string_free(char* s);

/* ---- instances ---- */
/* mode: "random", "consistent" or "multi:K". */
RC_API rc_status rc_instance_generate(int n, double beta, const char* mode, uint64_t seed, double noise_sigma_sq,
                                      double c_bar_sq, rc_instance** out);
/* Pair CSV with columns ax,ay,az,bx,by,bz (optional header, # comments). */
RC_API rc_status rc_instance_load_csv(const char* path, rc_instance** out);
RC_API rc_status rc_instance_from_json(const char* text, rc_instance** out);
RC_API rc_status rc_instance_to_json(const rc_instance* inst, char** out);
RC_API int rc_instance_size(const rc_instance* inst);
/* Ground-truth quaternion, scalar part last; RC_ERR_VALIDATION when unlabeled. */
RC_API rc_status rc_instance_truth(const rc_instance* inst, double q[4]);
RC_API void rc_instance_free(rc_instance* inst);

/* ---- estimators ---- */
typedef struct rc_solve_options {
  double tol;  /* 0 selects the estimator default */
  int max_iter;
  double time_limit;
  int verbose;
} rc_solve_options;

RC_API rc_solve_options rc_solve_options_default(void);

RC_API rc_status rc_solve_tls(const rc_instance* inst, const rc_solve_options* opts, rc_outcome** out);
RC_API rc_status rc_solve_slides(const rc_instance* inst, double alpha, const rc_solve_options* opts,
                                 rc_hypotheses** hyps, rc_outcome** out);
/* kind: "MC1", "TLS1", "LTS2" or "LDR"; n <= 8. */
RC_API rc_status rc_solve_dense(const rc_instance* inst, const char* kind, double alpha, const rc_solve_options* opts,
                                rc_outcome** out);

RC_API int rc_outcome_estimate_count(const rc_outcome* o);
RC_API rc_status rc_outcome_estimate(const rc_outcome* o, int k, double q[4]);
RC_API double rc_outcome_gap(const rc_outcome* o);
RC_API double rc_outcome_f_sdp(const rc_outcome* o);
RC_API double rc_outcome_f_hat(const rc_outcome* o);
RC_API int rc_outcome_iterations(const rc_outcome* o);
RC_API double rc_outcome_seconds(const rc_outcome* o);
/* Copies up to cap selected indices; returns the total count. */
RC_API int rc_outcome_selected(const rc_outcome* o, int* idx, int cap);
/* Pass inst to include truth-based fields, or NULL. */
RC_API rc_status rc_outcome_to_json(const rc_outcome* o, const rc_instance* inst, char** out);
RC_API void rc_outcome_free(rc_outcome* o);

RC_API int rc_hypotheses_count(const rc_hypotheses* h);
RC_API rc_status rc_hypotheses_get(const rc_hypotheses* h, int k, double q[4], double* weight, int* valid);
RC_API rc_status rc_hypotheses_to_json(const rc_hypotheses* h, const rc_instance* inst, char** out);
RC_API void rc_hypotheses_free(rc_hypotheses* h);

RC_API double rc_geodesic_error_deg(const double q1[4], const double q2[4]);

/* ---- certificates and bounds ---- */
/* Wahba matrices of the instance inliers (all rows when unlabeled). */
RC_API rc_status rc_check_hyper(const rc_instance* inst, double C, int* holds, double* seconds);
/* set: "triplet" or "wahba"; uses the first round((1-beta) n) measurements. */
RC_API rc_status rc_check_anticon_generated(const char* set, int n, double beta, double eta, double c2,
                                            uint64_t seed, double time_limit, int* holds, int* failed_condition,
                                            double* seconds);
RC_API rc_status rc_eta_threshold(double alpha, double* out);
RC_API rc_status rc_apriori_bound_lts_mc(double alpha, double eta, double M_x, double* out);
RC_API rc_status rc_lts_beta_max(int k, double C, double* out);
RC_API rc_status rc_lts_objective_coeffs(int k, double beta, double C, double* C1_pow, double* C2_pow);
/* A-posteriori TLS bound over d_J-subsets of the selected set. */
RC_API rc_status rc_aposteriori_bound(const rc_instance* inst, const int* selected, int n_selected, int d_J,
                                      double gamma0, double* bound, int* preconditions_met);

/* ---- experiment harness ---- */
RC_API rc_status rc_config_new(rc_config** out);
RC_API rc_status rc_config_parse(const char* text, rc_config** out);
RC_API rc_status rc_config_load(const char* path, rc_config** out);
RC_API rc_status rc_config_set(rc_config* cfg, const char* key, const char* value);
RC_API rc_status rc_config_to_text(const rc_config* cfg, char** out);
RC_API void rc_config_free(rc_config* cfg);

RC_API rc_status rc_run(const rc_config* cfg, rc_record** out);
/* Writes results.csv and summary.json into dir. */
RC_API rc_status rc_record_write(const rc_record* rec, const char* dir);
RC_API rc_status rc_record_csv(const rc_record* rec, char** out);
RC_API rc_status rc_record_summary(const rc_record* rec, char** out);
RC_API int rc_record_failure_count(const rc_record* rec);
RC_API void rc_record_free(rc_record* rec);

RC_API rc_status rc_emit_bound_curves(const char* path);

#ifdef __cplusplus
}
#endif

#endif
