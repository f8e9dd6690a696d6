#include <rotcert/rotcert.h>

#include <cmath>
#include <cstring>
#include <string>

#include "doctest.h"

TEST_CASE("status names and last error") {
  CHECK(std::string(rc_status_name(RC_OK)) == "Ok");
  CHECK(std::string(rc_status_name(RC_ERR_DEGENERATE_SET)) == "DegenerateSetError");
  rc_instance* inst = nullptr;
  CHECK(rc_instance_generate(10, 0.2, "sideways", 0, 1e-4, 0.0021, &inst) == RC_ERR_CONFIG);
  CHECK(inst == nullptr);
  CHECK(std::strlen(rc_last_error()) > 0);
  CHECK(rc_instance_generate(10, 0.2, "random", 0, 1e-4, 0.0021, nullptr) == RC_ERR_VALIDATION);
}

TEST_CASE("instance round trip and TLS solve") {
  rc_instance* inst = nullptr;
  REQUIRE(rc_instance_generate(10, 0.2, "random", 3, 1e-4, 0.0021, &inst) == RC_OK);
  CHECK(rc_instance_size(inst) == 10);
  char* json = nullptr;
  REQUIRE(rc_instance_to_json(inst, &json) == RC_OK);
  rc_instance* back = nullptr;
  CHECK(rc_instance_from_json(json, &back) == RC_OK);
  rc_string_free(json);
  CHECK(rc_instance_size(back) == 10);
  rc_instance_free(back);

  rc_solve_options o = rc_solve_options_default();
  rc_outcome* out = nullptr;
  REQUIRE(rc_solve_tls(inst, &o, &out) == RC_OK);
  double q[4], truth[4];
  CHECK(rc_outcome_estimate_count(out) == 1);
  REQUIRE(rc_outcome_estimate(out, 0, q) == RC_OK);
  REQUIRE(rc_instance_truth(inst, truth) == RC_OK);
  CHECK(rc_geodesic_error_deg(q, truth) < 2.0);
  CHECK(rc_outcome_gap(out) < 1e-5);
  int idx[10];
  CHECK(rc_outcome_selected(out, idx, 10) == 8);
  CHECK(rc_outcome_estimate(out, 5, q) == RC_ERR_DIMENSION);
  char* oj = nullptr;
  CHECK(rc_outcome_to_json(out, inst, &oj) == RC_OK);
  CHECK(std::string(oj).find("gap") != std::string::npos);
  rc_string_free(oj);
  rc_outcome_free(out);
  rc_instance_free(inst);
}

TEST_CASE("bounds through the C API") {
  double v = 0.0;
  CHECK(rc_apriori_bound_lts_mc(1.0, 0.01, 1.0, &v) == RC_OK);
  CHECK(v == doctest::Approx(0.005));
  CHECK(rc_apriori_bound_lts_mc(0.0, 0.01, 1.0, &v) == RC_ERR_INFINITE_BOUND);
  CHECK(rc_eta_threshold(0.4, &v) == RC_ERR_NO_NONTRIVIAL_ETA);
  CHECK(rc_lts_beta_max(4, 6.0, &v) == RC_OK);
  double c1, c2;
  CHECK(rc_lts_objective_coeffs(4, 2 * v, 6.0, &c1, &c2) == RC_ERR_OUT_OF_REGIME);
}

TEST_CASE("certificates through the C API") {
  rc_instance* inst = nullptr;
  REQUIRE(rc_instance_generate(20, 0.0, "random", 1, 1e-4, 0.0021, &inst) == RC_OK);
  int holds = -1;
  double secs = 0;
  CHECK(rc_check_hyper(inst, 6.0, &holds, &secs) == RC_OK);
  CHECK(holds == 1);
  CHECK(rc_check_hyper(inst, 1.0, &holds, &secs) == RC_OK);
  CHECK(holds == 0);
  rc_instance_free(inst);
  int failed = -1;
  CHECK(rc_check_anticon_generated("square", 10, 0.1, 3.75, -0.1, 0, 10, &holds, &failed, &secs) == RC_ERR_CONFIG);
}

TEST_CASE("config and run through the C API") {
  rc_config* cfg = nullptr;
  REQUIRE(rc_config_parse("experiment=tls_sweep\nn=6\nbeta_list=0.2\nseeds=0,1\nmax_iter=200\nthreads=1\n", &cfg) ==
          RC_OK);
  CHECK(rc_config_set(cfg, "nonsense", "1") == RC_ERR_CONFIG);
  CHECK(rc_config_set(cfg, "experiment", "nonsense") == RC_ERR_USAGE);
  rc_record* rec = nullptr;
  REQUIRE(rc_run(cfg, &rec) == RC_OK);
  char* csv = nullptr;
  REQUIRE(rc_record_csv(rec, &csv) == RC_OK);
  CHECK(std::string(csv).rfind("seed,beta,metric,value\n", 0) == 0);
  rc_string_free(csv);
  CHECK(rc_record_failure_count(rec) == 0);
  CHECK(rc_record_write(rec, "/proc/definitely/not/writable") == RC_ERR_IO);
  rc_record_free(rec);
  rc_config_free(cfg);
  rc_config* missing = nullptr;
  CHECK(rc_config_load("/nonexistent.cfg", &missing) == RC_ERR_IO);
}
