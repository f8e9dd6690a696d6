#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "rotcert/certify.hpp"
#include "rotcert/error.hpp"
#include "rotcert/harness.hpp"

using namespace rotcert;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

ExperimentConfig small_tls() {
  ExperimentConfig c;
  c.experiment = Experiment::TlsSweep;
  c.n = 8;
  c.beta_list = {0.1, 0.2, 0.3, 0.4, 0.5};
  c.seeds = {0, 1};
  c.max_iter = 400;
  c.threads = 2;
  return c;
}

}  // namespace

TEST_CASE("config parsing") {
  ExperimentConfig c = parse_config(
      "# sweep\nexperiment = slides_sweep\nn=30\nbeta_list=0.6, 0.8\nnum_seeds=3\noutlier_mode=consistent\n"
      "alpha_for_ldr=0.3\ntol=1e-6\nmax_iter=100\noutput=/tmp/x\n");
  CHECK(c.experiment == Experiment::SlidesSweep);
  CHECK(c.n == 30);
  CHECK(c.beta_list == std::vector<double>{0.6, 0.8});
  CHECK(c.seeds == std::vector<std::uint64_t>{0, 1, 2});
  CHECK(c.outlier_mode == "consistent");
  CHECK(c.alpha_for_ldr == 0.3);
  CHECK(c.output == "/tmp/x");
  ExperimentConfig back = parse_config(c.to_text());
  CHECK(back.to_text() == c.to_text());

  try {
    parse_config("n=3\nbogus=1\n");
    FAIL("expected config error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  try {
    parse_config("experiment=nope\n");
    FAIL("expected usage error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Usage);
  }
  CHECK_THROWS_AS(parse_config("n=abc\n"), Error);
  CHECK_THROWS_AS(parse_config("just text\n"), Error);
}

TEST_CASE("config validation") {
  ExperimentConfig c;
  c.beta_list = {0.2, 1.0};
  CHECK_THROWS_AS(c.validate(), Error);
  c.beta_list = {0.2};
  c.seeds.clear();
  CHECK_THROWS_AS(c.validate(), Error);
  c.seeds = {1};
  c.outlier_mode = "multi:0";
  CHECK_THROWS_AS(c.validate(), Error);
  c.outlier_mode = "multi:3";
  CHECK_NOTHROW(c.validate());
  CHECK(outlier_mode_name(parse_outlier_mode("multi:3")) == "multi:3");
}

TEST_CASE("percentiles") {
  CHECK(percentile({1, 2, 3, 4, 5}, 50) == 3.0);
  CHECK(percentile({1, 2, 3, 4}, 25) == doctest::Approx(1.75));
  CHECK(percentile({7}, 90) == 7.0);
  std::vector<MetricRow> rows;
  for (int s = 0; s < 9; ++s) rows.push_back({static_cast<std::uint64_t>(s), 0.1, "m", double((s * 7) % 9)});
  auto ag = aggregate(rows);
  REQUIRE(ag.size() == 1);
  CHECK(ag[0].count == 9);
  CHECK(ag[0].p25 <= ag[0].p50);
  CHECK(ag[0].p50 <= ag[0].p75);
  CHECK(ag[0].p75 <= ag[0].p90);
}

TEST_CASE("tls sweep: rows, schema and replay") {
  ExperimentConfig c = small_tls();
  RunRecord a = run(c);
  CHECK(a.failures.empty());
  CHECK(a.metric("error_deg").size() == 10);
  CHECK(a.metric("gap").size() == 10);
  std::string csv = a.to_csv();
  CHECK(csv.rfind("seed,beta,metric,value\n", 0) == 0);

  c.threads = 1;
  RunRecord b = run(c);
  CHECK(b.to_csv().size() > 0);
  // timing rows differ between runs; every other metric is replayed exactly
  auto strip = [](const RunRecord& r) {
    std::vector<std::tuple<std::uint64_t, double, std::string, double>> out;
    for (const auto& m : r.rows)
      if (m.metric != "seconds") out.emplace_back(m.seed, m.beta, m.metric, m.value);
    return out;
  };
  CHECK(strip(a) == strip(b));

  for (const auto& ag : a.aggregates) {
    CHECK(ag.p25 <= ag.p50);
    CHECK(ag.p50 <= ag.p75);
    CHECK(ag.p75 <= ag.p90);
  }

  auto dir = std::filesystem::temp_directory_path() / "rotcert_harness_test";
  std::filesystem::remove_all(dir);
  write_record(a, dir.string());
  CHECK(slurp(dir / "results.csv") == csv);
  std::string js = slurp(dir / "summary.json");
  CHECK(js.find("\"aggregates\"") != std::string::npos);
  CHECK(js.find("\"tls_sweep\"") != std::string::npos);
}

TEST_CASE("solver failures are recorded and the run continues") {
  ExperimentConfig c = small_tls();
  c.experiment = Experiment::SlidesSweep;
  c.beta_list = {0.2};
  c.seeds = {0, 1};
  c.alpha_for_ldr = 0.01;  // alpha n < 1 is rejected per seed
  c.max_iter = 50;
  RunRecord r = run(c);
  CHECK(r.failures.size() == 2);
  CHECK(r.metric("failed").size() == 2);
}

TEST_CASE("aposteriori bounds rows") {
  ExperimentConfig c = small_tls();
  c.experiment = Experiment::AposterioriBounds;
  c.n = 12;
  c.beta_list = {0.1};
  c.seeds = {0};
  c.max_iter = 20000;
  RunRecord r = run(c);
  REQUIRE(r.failures.empty());
  for (const char* m : {"error_vec", "bound_dJ", "bound_J", "trivial_bound"}) CHECK(r.metric(m).size() == 1);
  CHECK(r.metric("trivial_bound")[0].value == doctest::Approx(2 * std::sqrt(3.0)));
}

TEST_CASE("hyper survey metric names") {
  ExperimentConfig c;
  c.experiment = Experiment::HyperSurvey;
  c.n_list = {5, 10};
  c.c_list = {1, 6};
  c.seeds = {0};
  c.threads = 1;
  RunRecord r = run(c);
  CHECK(r.metric("holds_n5_C1").size() == 1);
  CHECK(r.metric("holds_n10_C6").size() == 1);
  CHECK(r.metric("holds_n10_C6")[0].value == 1.0);
}

TEST_CASE("bound curves") {
  std::string csv = bound_curves_csv();
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "curve,k,C,x,value");
  bool found_alpha1 = false, found_marker = false;
  std::map<std::pair<int, double>, double> last_beta;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string s; std::getline(ss, s, ',');) f.push_back(s);
    REQUIRE(f.size() == 5);
    if (f[0] == "apriori_lts_mc" && std::stod(f[3]) == 1.0) {
      found_alpha1 = true;
      CHECK(std::stod(f[4]) == doctest::Approx(0.005));
    }
    if (f[0] == "lts_C1") last_beta[{std::stoi(f[1]), std::stod(f[2])}] = std::stod(f[3]);
    if (f[0] == "beta_max") {
      int k = std::stoi(f[1]);
      double C = std::stod(f[2]);
      CHECK(std::stod(f[4]) == doctest::Approx(lts_beta_max(k, C)).epsilon(1e-8));
      CHECK(last_beta[{k, C}] < std::stod(f[4]));
      if (k == 4 && C == 6.0) {
        found_marker = true;
        CHECK(std::stod(f[4]) == doctest::Approx(1.0 / (6 * 2048.0)).epsilon(1e-8));
      }
    }
  }
  CHECK(found_alpha1);
  CHECK(found_marker);
  CHECK(last_beta.size() == 16);
  auto path = std::filesystem::temp_directory_path() / "rotcert_curves.csv";
  emit_bound_curves(path.string());
  CHECK(slurp(path) == csv);
  CHECK_THROWS_AS(emit_bound_curves("/nonexistent-dir/x.csv"), Error);
}
