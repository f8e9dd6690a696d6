#include "rotcert/rotcert.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "rotcert/certify.hpp"
#include "rotcert/error.hpp"
#include "rotcert/estimators.hpp"
#include "rotcert/geometry.hpp"
#include "rotcert/harness.hpp"

struct rc_instance {
  rotcert::RotationSearchInstance inst;
};
struct rc_outcome {
  rotcert::SolveOutcome out;
};
struct rc_hypotheses {
  rotcert::HypothesisList list;
};
struct rc_config {
  rotcert::ExperimentConfig cfg;
};
struct rc_record {
  rotcert::RunRecord rec;
};

namespace {

thread_local std::string g_last_error;

rc_status fail(rc_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
rc_status guard(F&& f) {
  g_last_error.clear();
  try {
    f();
    return RC_OK;
  } catch (const rotcert::Error& e) {
    return fail(static_cast<rc_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(RC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(RC_ERR_INTERNAL, e.what());
  }
}

void need(const void* p, const char* name) {
  if (!p) throw rotcert::Error(rotcert::ErrorCode::Validation, std::string(name) + " is null");
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void put_quat(const rotcert::UnitQuaternion& q, double out[4]) {
  for (int i = 0; i < 4; ++i) out[i] = q[i];
}

rotcert::EstimatorOptions convert(const rc_solve_options* o) {
  rotcert::EstimatorOptions e;
  if (o) {
    e.tol = o->tol;
    e.max_iter = o->max_iter;
    e.time_limit = o->time_limit;
    e.verbose = o->verbose;
  }
  return e;
}

rotcert::DenseKind parse_kind(const char* kind) {
  need(kind, "kind");
  for (auto k : {rotcert::DenseKind::MC1, rotcert::DenseKind::TLS1, rotcert::DenseKind::LTS2, rotcert::DenseKind::LDR})
    if (std::strcmp(kind, rotcert::dense_kind_name(k)) == 0) return k;
  throw rotcert::Error(rotcert::ErrorCode::Usage, std::string("unknown dense estimator '") + kind + "'");
}

}  // namespace

extern "C" {

const char* rc_last_error(void) { return g_last_error.c_str(); }

const char* rc_status_name(rc_status s) {
  if (s == RC_OK) return "Ok";
  if (s == RC_ERR_INTERNAL) return "InternalError";
  return rotcert::error_code_name(static_cast<rotcert::ErrorCode>(s));
}

void rc_string_free(char* s) { std::free(s); }

rc_status rc_instance_generate(int n, double beta, const char* mode, uint64_t seed, double noise_sigma_sq,
                               double c_bar_sq, rc_instance** out) {
  return guard([&] {
    need(out, "out");
    auto m = rotcert::parse_outlier_mode(mode ? mode : "random");
    *out = new rc_instance{rotcert::generate_instance(n, beta, m, seed, noise_sigma_sq, c_bar_sq)};
  });
}

rc_status rc_instance_load_csv(const char* path, rc_instance** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new rc_instance{rotcert::load_pairs_csv(path)};
  });
}

rc_status rc_instance_from_json(const char* text, rc_instance** out) {
  return guard([&] {
    need(text, "text");
    need(out, "out");
    *out = new rc_instance{rotcert::instance_from_json(text)};
  });
}

rc_status rc_instance_to_json(const rc_instance* inst, char** out) {
  return guard([&] {
    need(inst, "instance");
    need(out, "out");
    *out = dup(rotcert::instance_to_json(inst->inst));
  });
}

int rc_instance_size(const rc_instance* inst) { return inst ? inst->inst.n() : 0; }

rc_status rc_instance_truth(const rc_instance* inst, double q[4]) {
  return guard([&] {
    need(inst, "instance");
    need(q, "q");
    if (!inst->inst.ground_truth) throw rotcert::Error(rotcert::ErrorCode::Validation, "instance has no ground truth");
    put_quat(*inst->inst.ground_truth, q);
  });
}

void rc_instance_free(rc_instance* inst) { delete inst; }

rc_solve_options rc_solve_options_default(void) {
  rotcert::EstimatorOptions e;
  return {e.tol, e.max_iter, e.time_limit, e.verbose};
}

rc_status rc_solve_tls(const rc_instance* inst, const rc_solve_options* opts, rc_outcome** out) {
  return guard([&] {
    need(inst, "instance");
    need(out, "out");
    *out = new rc_outcome{rotcert::solve_tls_sparse(inst->inst, convert(opts))};
  });
}

rc_status rc_solve_slides(const rc_instance* inst, double alpha, const rc_solve_options* opts, rc_hypotheses** hyps,
                          rc_outcome** out) {
  return guard([&] {
    need(inst, "instance");
    auto [list, o] = rotcert::slides(inst->inst, alpha, convert(opts));
    if (hyps) *hyps = new rc_hypotheses{std::move(list)};
    if (out) *out = new rc_outcome{std::move(o)};
  });
}

rc_status rc_solve_dense(const rc_instance* inst, const char* kind, double alpha, const rc_solve_options* opts,
                         rc_outcome** out) {
  return guard([&] {
    need(inst, "instance");
    need(out, "out");
    *out = new rc_outcome{rotcert::solve_dense(inst->inst, parse_kind(kind), alpha, convert(opts))};
  });
}

int rc_outcome_estimate_count(const rc_outcome* o) { return o ? static_cast<int>(o->out.estimates.size()) : 0; }

rc_status rc_outcome_estimate(const rc_outcome* o, int k, double q[4]) {
  return guard([&] {
    need(o, "outcome");
    need(q, "q");
    if (k < 0 || k >= static_cast<int>(o->out.estimates.size()))
      throw rotcert::Error(rotcert::ErrorCode::Dimension, "estimate index out of range");
    put_quat(o->out.estimates[k], q);
  });
}

double rc_outcome_gap(const rc_outcome* o) { return o ? o->out.gap : std::nan(""); }
double rc_outcome_f_sdp(const rc_outcome* o) { return o ? o->out.f_sdp : std::nan(""); }
double rc_outcome_f_hat(const rc_outcome* o) { return o ? o->out.f_hat : std::nan(""); }
int rc_outcome_iterations(const rc_outcome* o) { return o ? o->out.iterations : 0; }
double rc_outcome_seconds(const rc_outcome* o) { return o ? o->out.seconds : 0.0; }

int rc_outcome_selected(const rc_outcome* o, int* idx, int cap) {
  if (!o) return 0;
  const auto& s = o->out.selected_inliers;
  for (int i = 0; idx && i < cap && i < static_cast<int>(s.size()); ++i) idx[i] = s[i];
  return static_cast<int>(s.size());
}

rc_status rc_outcome_to_json(const rc_outcome* o, const rc_instance* inst, char** out) {
  return guard([&] {
    need(o, "outcome");
    need(out, "out");
    *out = dup(o->out.to_json(inst ? &inst->inst : nullptr));
  });
}

void rc_outcome_free(rc_outcome* o) { delete o; }

int rc_hypotheses_count(const rc_hypotheses* h) { return h ? static_cast<int>(h->list.entries.size()) : 0; }

rc_status rc_hypotheses_get(const rc_hypotheses* h, int k, double q[4], double* weight, int* valid) {
  return guard([&] {
    need(h, "hypotheses");
    if (k < 0 || k >= static_cast<int>(h->list.entries.size()))
      throw rotcert::Error(rotcert::ErrorCode::Dimension, "hypothesis index out of range");
    const auto& e = h->list.entries[k];
    if (q) put_quat(e.estimate, q);
    if (weight) *weight = e.weight;
    if (valid) *valid = e.valid ? 1 : 0;
  });
}

rc_status rc_hypotheses_to_json(const rc_hypotheses* h, const rc_instance* inst, char** out) {
  return guard([&] {
    need(h, "hypotheses");
    need(out, "out");
    *out = dup(h->list.to_json(inst ? &inst->inst : nullptr));
  });
}

void rc_hypotheses_free(rc_hypotheses* h) { delete h; }

double rc_geodesic_error_deg(const double q1[4], const double q2[4]) {
  try {
    rotcert::UnitQuaternion a(rotcert::Vec4(q1[0], q1[1], q1[2], q1[3]));
    rotcert::UnitQuaternion b(rotcert::Vec4(q2[0], q2[1], q2[2], q2[3]));
    return rotcert::geodesic_error_deg(a, b);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return std::nan("");
  }
}

rc_status rc_check_hyper(const rc_instance* inst, double C, int* holds, double* seconds) {
  return guard([&] {
    need(inst, "instance");
    std::vector<Eigen::MatrixXd> At;
    const auto& in = inst->inst;
    for (int i = 0; i < in.n(); ++i)
      if (in.labels.empty() || in.labels[i] == 0) At.push_back(rotcert::wahba_matrix(in.measurements[i]));
    auto r = rotcert::check_hypercontractivity(At, {4, C});
    if (holds) *holds = r.holds ? 1 : 0;
    if (seconds) *seconds = r.seconds;
  });
}

rc_status rc_check_anticon_generated(const char* set, int n, double beta, double eta, double c2, uint64_t seed,
                                     double time_limit, int* holds, int* failed_condition, double* seconds) {
  return guard([&] {
    auto At = rotcert::anticon_inputs(set ? set : "triplet", n, beta, seed);
    rotcert::AntiConParams p;
    p.alpha = 1.0 - beta;
    p.eta = eta;
    p.c2 = c2;
    rotcert::AntiConOptions o;
    o.time_limit = time_limit;
    auto r = rotcert::check_anticoncentration(At, p, o);
    if (holds) *holds = r.holds ? 1 : 0;
    if (failed_condition) *failed_condition = r.failed_condition;
    if (seconds) *seconds = r.seconds;
  });
}

rc_status rc_eta_threshold(double alpha, double* out) {
  return guard([&] {
    need(out, "out");
    *out = rotcert::eta_threshold(alpha);
  });
}

rc_status rc_apriori_bound_lts_mc(double alpha, double eta, double M_x, double* out) {
  return guard([&] {
    need(out, "out");
    *out = rotcert::apriori_bound_lts_mc(alpha, eta, M_x);
  });
}

rc_status rc_lts_beta_max(int k, double C, double* out) {
  return guard([&] {
    need(out, "out");
    *out = rotcert::lts_beta_max(k, C);
  });
}

rc_status rc_lts_objective_coeffs(int k, double beta, double C, double* C1_pow, double* C2_pow) {
  return guard([&] {
    auto c = rotcert::lts_objective_coeffs(k, beta, C);
    if (C1_pow) *C1_pow = c.C1_pow;
    if (C2_pow) *C2_pow = c.C2_pow;
  });
}

rc_status rc_aposteriori_bound(const rc_instance* inst, const int* selected, int n_selected, int d_J, double gamma0,
                               double* bound, int* preconditions_met) {
  return guard([&] {
    need(inst, "instance");
    if (n_selected > 0) need(selected, "selected");
    std::vector<int> sel(selected, selected + std::max(0, n_selected));
    auto r = rotcert::aposteriori_bound(inst->inst, sel, d_J, rotcert::ContractMode::tls(gamma0));
    if (bound) *bound = r.bound;
    if (preconditions_met) *preconditions_met = r.preconditions_met ? 1 : 0;
  });
}

rc_status rc_config_new(rc_config** out) {
  return guard([&] {
    need(out, "out");
    *out = new rc_config{};
  });
}

rc_status rc_config_parse(const char* text, rc_config** out) {
  return guard([&] {
    need(text, "text");
    need(out, "out");
    *out = new rc_config{rotcert::parse_config(text)};
  });
}

rc_status rc_config_load(const char* path, rc_config** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new rc_config{rotcert::load_config(path)};
  });
}

rc_status rc_config_set(rc_config* cfg, const char* key, const char* value) {
  return guard([&] {
    need(cfg, "config");
    need(key, "key");
    need(value, "value");
    rotcert::apply_config_value(cfg->cfg, key, value);
  });
}

rc_status rc_config_to_text(const rc_config* cfg, char** out) {
  return guard([&] {
    need(cfg, "config");
    need(out, "out");
    *out = dup(cfg->cfg.to_text());
  });
}

void rc_config_free(rc_config* cfg) { delete cfg; }

rc_status rc_run(const rc_config* cfg, rc_record** out) {
  return guard([&] {
    need(cfg, "config");
    need(out, "out");
    *out = new rc_record{rotcert::run(cfg->cfg)};
  });
}

rc_status rc_record_write(const rc_record* rec, const char* dir) {
  return guard([&] {
    need(rec, "record");
    need(dir, "dir");
    rotcert::write_record(rec->rec, dir);
  });
}

rc_status rc_record_csv(const rc_record* rec, char** out) {
  return guard([&] {
    need(rec, "record");
    need(out, "out");
    *out = dup(rec->rec.to_csv());
  });
}

rc_status rc_record_summary(const rc_record* rec, char** out) {
  return guard([&] {
    need(rec, "record");
    need(out, "out");
    *out = dup(rec->rec.to_json());
  });
}

int rc_record_failure_count(const rc_record* rec) { return rec ? static_cast<int>(rec->rec.failures.size()) : 0; }

void rc_record_free(rc_record* rec) { delete rec; }

rc_status rc_emit_bound_curves(const char* path) {
  return guard([&] {
    need(path, "path");
    rotcert::emit_bound_curves(path);
  });
}

}  // extern "C"
