#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rotcert/geometry.hpp"

namespace rotcert {

enum class Experiment { TlsSweep, SlidesSweep, AposterioriBounds, HyperSurvey, AnticonSurvey, MultiRotation };
const char* experiment_name(Experiment e);
Experiment parse_experiment(const std::string& name);

// Parses "random", "consistent" or "multi:K".
OutlierMode parse_outlier_mode(const std::string& text);
std::string outlier_mode_name(const OutlierMode& mode);

struct ExperimentConfig {
  Experiment experiment = Experiment::TlsSweep;
  int n = 20;
  std::vector<double> beta_list = {0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::string outlier_mode = "random";
  // SLIDES inlier rate; non-positive means 1 - beta.
  double alpha_for_ldr = 0.0;
  double c_bar_sq = 0.0021;
  double noise_sigma_sq = 1e-4;
  double tol = 0.0;  // 0 selects the estimator default
  int max_iter = 50000;
  // Wall-clock budget per solve in seconds.
  double time_limit = 300.0;
  std::string output = "out";
  // aposteriori_bounds
  int d_J = 5;
  // hyper_survey
  std::vector<double> c_list = {1, 2, 3, 4, 5, 6};
  std::vector<int> n_list;  // empty means {n}
  // anticon_survey
  double eta = 3.75;
  double c2 = -0.1;
  std::string anticon_set = "triplet";  // or "wahba"
  int threads = 0;                      // 0 means hardware concurrency

  void validate() const;
  // Flat key=value listing, parseable by parse_config.
  std::string to_text() const;
};

// Lines of key=value; '#' starts a comment.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
// Applies one key=value pair; unknown keys raise a config error.
void apply_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

struct MetricRow {
  std::uint64_t seed = 0;
  double beta = 0.0;
  std::string metric;
  double value = 0.0;
};

struct Aggregate {
  double beta = 0.0;
  std::string metric;
  int count = 0;
  double mean = 0.0;
  double p25 = 0.0, p50 = 0.0, p75 = 0.0, p90 = 0.0;
};

struct RunRecord {
  ExperimentConfig config;
  std::vector<MetricRow> rows;
  std::vector<Aggregate> aggregates;
  std::vector<std::string> failures;  // "seed/beta: message"
  double seconds = 0.0;

  std::string to_csv() const;
  std::string to_json() const;
  // Rows for one metric, in emission order.
  std::vector<MetricRow> metric(const std::string& name) const;
};

// Linear-interpolation percentile of unsorted values (q in [0, 100]).
double percentile(std::vector<double> values, double q);
std::vector<Aggregate> aggregate(const std::vector<MetricRow>& rows);

// A_i^T matrices of the first round((1 - beta) n) members of a generated
// "triplet" or "wahba" set, as checked by anticon_survey.
std::vector<Eigen::MatrixXd> anticon_inputs(const std::string& set, int n, double beta, std::uint64_t seed,
                                            double noise_sigma_sq = 1e-4, double c_bar_sq = 0.0021);

RunRecord run(const ExperimentConfig& cfg);
// Writes results.csv and summary.json into dir (created if missing).
void write_record(const RunRecord& rec, const std::string& dir);

// A-priori LTS/MC bound over alpha and LTS objective coefficient curves.
std::string bound_curves_csv();
void emit_bound_curves(const std::string& path);

}  // namespace rotcert
