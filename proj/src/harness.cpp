#include "rotcert/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "rotcert/certify.hpp"
#include "rotcert/error.hpp"
#include "rotcert/estimators.hpp"

namespace rotcert {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw Error(ErrorCode::Parse, "bad number for " + key + ": '" + v + "'");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    long long x = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw Error(ErrorCode::Parse, "bad integer for " + key + ": '" + v + "'");
  }
}

std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  for (size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

template <class T>
std::string join_int(const std::vector<T>& v) {
  std::ostringstream os;
  for (size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct TaskResult {
  std::vector<MetricRow> rows;
  std::string failure;
};

struct Task {
  std::uint64_t seed;
  double beta;
  std::function<void(TaskResult&)> body;
};

EstimatorOptions estimator_options(const ExperimentConfig& cfg) {
  EstimatorOptions o;
  o.tol = cfg.tol;
  o.max_iter = cfg.max_iter;
  o.time_limit = cfg.time_limit;
  return o;
}

RotationSearchInstance make_instance(const ExperimentConfig& cfg, double beta, std::uint64_t seed) {
  return generate_instance(cfg.n, beta, parse_outlier_mode(cfg.outlier_mode), seed, cfg.noise_sigma_sq,
                           cfg.c_bar_sq);
}

double gamma0_of(const RotationSearchInstance& inst) {
  double g = 0.0;
  for (int i = 0; i < inst.n(); ++i)
    if (inst.labels[i] == 0) g += squared_residual(inst.measurements[i], *inst.ground_truth);
  return g;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

// Each task fills its own slot; aggregation happens in task order, so the
// output does not depend on the thread count.
std::vector<TaskResult> execute(std::vector<Task>& tasks, int threads) {
  std::vector<TaskResult> results(tasks.size());
  auto run_one = [&](size_t k) {
    TaskResult& r = results[k];
    try {
      tasks[k].body(r);
    } catch (const std::exception& e) {
      r.rows.push_back({tasks[k].seed, tasks[k].beta, "failed", 1.0});
      r.failure = "seed " + std::to_string(tasks[k].seed) + ", beta " + fmt(tasks[k].beta) + ": " + e.what();
    }
  };
  int nt = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  nt = std::min<int>(nt, static_cast<int>(tasks.size()));
  if (nt <= 1) {
    for (size_t k = 0; k < tasks.size(); ++k) run_one(k);
    return results;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < nt; ++t)
    pool.emplace_back([&] {
      for (size_t k = next++; k < tasks.size(); k = next++) run_one(k);
    });
  for (auto& th : pool) th.join();
  return results;
}

void add_tls_tasks(const ExperimentConfig& cfg, std::vector<Task>& tasks, bool bounds) {
  for (double beta : cfg.beta_list)
    for (auto seed : cfg.seeds)
      tasks.push_back({seed, beta, [&cfg, beta, seed, bounds](TaskResult& r) {
                         auto put = [&](const std::string& m, double v) { r.rows.push_back({seed, beta, m, v}); };
                         RotationSearchInstance inst = make_instance(cfg, beta, seed);
                         SolveOutcome out = solve_tls_sparse(inst, estimator_options(cfg));
                         const UnitQuaternion& q = out.estimates.at(0);
                         put("error_deg", geodesic_error_deg(q, *inst.ground_truth));
                         put("gap", out.gap);
                         if (!bounds) {
                           put("f_sdp", out.f_sdp);
                           put("f_hat", out.f_hat);
                           put("n_selected", static_cast<double>(out.selected_inliers.size()));
                           put("iterations", out.iterations);
                           put("optimal", out.status == SdpStatus::Optimal ? 1.0 : 0.0);
                           put("seconds", out.seconds);
                           return;
                         }
                         const ContractMode mode = ContractMode::tls(gamma0_of(inst));
                         ContractReport all = aposteriori_bound(inst, out.selected_inliers, cfg.d_J, mode);
                         std::vector<int> J;
                         for (int i : out.selected_inliers)
                           if (inst.labels[i] == 0) J.push_back(i);
                         ContractReport fixed =
                             aposteriori_bound_fixed(inst, J, mode, static_cast<int>(out.selected_inliers.size()));
                         put("error_vec", vec_rotation_error(q, *inst.ground_truth));
                         put("bound_dJ", all.bound);
                         put("bound_J", fixed.bound);
                         put("trivial_bound", 2.0 * std::sqrt(3.0));
                         put("preconditions_met", all.preconditions_met ? 1.0 : 0.0);
                         put("preconditions_met_J", fixed.preconditions_met ? 1.0 : 0.0);
                         put("d_J_fixed", static_cast<double>(J.size()));
                       }});
}

void add_slides_tasks(const ExperimentConfig& cfg, std::vector<Task>& tasks) {
  for (double beta : cfg.beta_list)
    for (auto seed : cfg.seeds)
      tasks.push_back({seed, beta, [&cfg, beta, seed](TaskResult& r) {
                         auto put = [&](const std::string& m, double v) { r.rows.push_back({seed, beta, m, v}); };
                         RotationSearchInstance inst = make_instance(cfg, beta, seed);
                         double alpha = cfg.alpha_for_ldr > 0.0 ? cfg.alpha_for_ldr : 1.0 - beta;
                         auto [list, out] = slides(inst, alpha, estimator_options(cfg));
                         double best = 180.0, best2 = 180.0;
                         for (const auto& q : out.estimates) {
                           best = std::min(best, geodesic_error_deg(q, *inst.ground_truth));
                           for (const auto& t : inst.secondary_truths) best2 = std::min(best2, geodesic_error_deg(q, t));
                         }
                         put("min_error_deg", best);
                         if (!inst.secondary_truths.empty()) put("min_error_secondary_deg", best2);
                         put("gap", out.gap);
                         put("f_sdp", out.f_sdp);
                         put("n_valid", static_cast<double>(out.estimates.size()));
                         put("optimal", out.status == SdpStatus::Optimal ? 1.0 : 0.0);
                         put("seconds", out.seconds);
                       }});
}

void add_multi_tasks(const ExperimentConfig& cfg, std::vector<Task>& tasks) {
  OutlierMode mode = parse_outlier_mode(cfg.outlier_mode);
  if (mode.kind != OutlierMode::Kind::Multi)
    throw Error(ErrorCode::Config, "multi_rotation needs outlier_mode=multi:K");
  const int K = static_cast<int>(mode.fractions.size());
  const double beta = 1.0 - mode.fractions[0];
  for (auto seed : cfg.seeds)
    tasks.push_back({seed, beta, [&cfg, mode, K, beta, seed](TaskResult& r) {
                       auto put = [&](const std::string& m, double v) { r.rows.push_back({seed, beta, m, v}); };
                       RotationSearchInstance inst =
                           generate_instance(cfg.n, beta, mode, seed, cfg.noise_sigma_sq, cfg.c_bar_sq);
                       double alpha = cfg.alpha_for_ldr > 0.0 ? cfg.alpha_for_ldr : 1.0 / K;
                       auto [list, out] = slides(inst, alpha, estimator_options(cfg));
                       std::vector<UnitQuaternion> truths = {*inst.ground_truth};
                       truths.insert(truths.end(), inst.secondary_truths.begin(), inst.secondary_truths.end());
                       double worst = 0.0;
                       int recovered = 0;
                       for (size_t k = 0; k < truths.size(); ++k) {
                         double best = 180.0;
                         for (const auto& q : out.estimates) best = std::min(best, geodesic_error_deg(q, truths[k]));
                         put("error_rot" + std::to_string(k) + "_deg", best);
                         worst = std::max(worst, best);
                         if (best <= 5.0) ++recovered;
                       }
                       put("max_error_deg", worst);
                       put("recovered_within_5deg", recovered);
                       put("gap", out.gap);
                       put("seconds", out.seconds);
                     }});
}

std::vector<Eigen::MatrixXd> inlier_matrices(const RotationSearchInstance& inst) {
  std::vector<Eigen::MatrixXd> At;
  for (int i = 0; i < inst.n(); ++i)
    if (inst.labels.empty() || inst.labels[i] == 0) At.push_back(wahba_matrix(inst.measurements[i]));
  return At;
}

void add_hyper_tasks(const ExperimentConfig& cfg, std::vector<Task>& tasks) {
  std::vector<int> ns = cfg.n_list.empty() ? std::vector<int>{cfg.n} : cfg.n_list;
  for (int n : ns)
    for (auto seed : cfg.seeds)
      tasks.push_back({seed, 0.0, [&cfg, n, seed](TaskResult& r) {
                         RotationSearchInstance inst =
                             generate_instance(n, 0.0, OutlierMode::random(), seed, cfg.noise_sigma_sq, cfg.c_bar_sq);
                         auto At = inlier_matrices(inst);
                         for (double C : cfg.c_list) {
                           HyperResult h = check_hypercontractivity(At, {4, C});
                           std::string tag = "_n" + std::to_string(n) + "_C" + fmt(C);
                           r.rows.push_back({seed, 0.0, "holds" + tag, h.holds ? 1.0 : 0.0});
                           r.rows.push_back({seed, 0.0, "seconds" + tag, h.seconds});
                         }
                       }});
}

void add_anticon_tasks(const ExperimentConfig& cfg, std::vector<Task>& tasks) {
  for (double beta : cfg.beta_list)
    for (auto seed : cfg.seeds)
      tasks.push_back({seed, beta, [&cfg, beta, seed](TaskResult& r) {
                         auto put = [&](const std::string& m, double v) { r.rows.push_back({seed, beta, m, v}); };
                         const double alpha = 1.0 - beta;
                         auto At = anticon_inputs(cfg.anticon_set, cfg.n, beta, seed, cfg.noise_sigma_sq,
                                                  cfg.c_bar_sq);
                         AntiConParams p;
                         p.alpha = alpha;
                         p.eta = cfg.eta;
                         p.c_bar = std::sqrt(cfg.c_bar_sq);
                         p.c2 = cfg.c2;
                         AntiConOptions o;
                         o.time_limit = cfg.time_limit;
                         AntiConResult res = check_anticoncentration(At, p, o);
                         put("holds", res.holds ? 1.0 : 0.0);
                         put("failed_condition", res.failed_condition);
                         if (res.failed_condition != 1) put("condition2_bound", res.condition2_bound);
                         put("seconds", res.seconds);
                       }});
}

}  // namespace

std::vector<Eigen::MatrixXd> anticon_inputs(const std::string& set, int n, double beta, std::uint64_t seed,
                                            double noise_sigma_sq, double c_bar_sq) {
  if (set != "triplet" && set != "wahba") throw Error(ErrorCode::Config, "anticon set must be triplet or wahba");
  if (n < 1) throw Error(ErrorCode::Validation, "n must be positive");
  if (!(beta >= 0.0 && beta < 1.0)) throw Error(ErrorCode::Validation, "beta must lie in [0, 1)");
  const int k = std::max(1, static_cast<int>(std::lround((1.0 - beta) * n)));
  std::vector<Eigen::MatrixXd> At;
  if (set == "triplet") {
    auto triplets = generate_triplet_set(n, seed);
    for (int i = 0; i < k; ++i) At.push_back(triplets[i].stacked_transpose());
  } else {
    RotationSearchInstance inst = generate_instance(n, 0.0, OutlierMode::random(), seed, noise_sigma_sq, c_bar_sq);
    for (int i = 0; i < k; ++i) At.push_back(wahba_matrix(inst.measurements[i]));
  }
  return At;
}

const char* experiment_name(Experiment e) {
  switch (e) {
    case Experiment::TlsSweep: return "tls_sweep";
    case Experiment::SlidesSweep: return "slides_sweep";
    case Experiment::AposterioriBounds: return "aposteriori_bounds";
    case Experiment::HyperSurvey: return "hyper_survey";
    case Experiment::AnticonSurvey: return "anticon_survey";
    case Experiment::MultiRotation: return "multi_rotation";
  }
  return "?";
}

Experiment parse_experiment(const std::string& name) {
  for (Experiment e : {Experiment::TlsSweep, Experiment::SlidesSweep, Experiment::AposterioriBounds,
                       Experiment::HyperSurvey, Experiment::AnticonSurvey, Experiment::MultiRotation})
    if (name == experiment_name(e)) return e;
  throw Error(ErrorCode::Usage, "unknown experiment '" + name + "'");
}

OutlierMode parse_outlier_mode(const std::string& text) {
  if (text == "random") return OutlierMode::random();
  if (text == "consistent") return OutlierMode::consistent();
  if (text.rfind("multi:", 0) == 0) {
    long long k = to_int("mode", text.substr(6));
    if (k < 1) throw Error(ErrorCode::Config, "multi mode needs K >= 1");
    return OutlierMode::multi(static_cast<int>(k));
  }
  throw Error(ErrorCode::Config, "unknown outlier mode '" + text + "'");
}

std::string outlier_mode_name(const OutlierMode& mode) {
  switch (mode.kind) {
    case OutlierMode::Kind::Random: return "random";
    case OutlierMode::Kind::Consistent: return "consistent";
    case OutlierMode::Kind::Multi: return "multi:" + std::to_string(mode.fractions.size());
  }
  return "?";
}

void ExperimentConfig::validate() const {
  if (n < 3) throw Error(ErrorCode::Config, "n must be at least 3");
  if (seeds.empty()) throw Error(ErrorCode::Config, "seeds must be nonempty");
  if (beta_list.empty() && experiment != Experiment::HyperSurvey && experiment != Experiment::MultiRotation)
    throw Error(ErrorCode::Config, "beta_list must be nonempty");
  for (double b : beta_list)
    if (!(b >= 0.0 && b < 1.0)) throw Error(ErrorCode::Config, "beta values must lie in [0, 1)");
  if (!(c_bar_sq > 0.0)) throw Error(ErrorCode::Config, "c_bar_sq must be positive");
  if (max_iter < 1) throw Error(ErrorCode::Config, "max_iter must be positive");
  if (d_J < 1) throw Error(ErrorCode::Config, "d_J must be positive");
  if (anticon_set != "triplet" && anticon_set != "wahba")
    throw Error(ErrorCode::Config, "anticon_set must be triplet or wahba");
  parse_outlier_mode(outlier_mode);
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream os;
  os << "experiment=" << experiment_name(experiment) << "\n"
     << "n=" << n << "\n"
     << "beta_list=" << join(beta_list) << "\n"
     << "seeds=" << join_int(seeds) << "\n"
     << "outlier_mode=" << outlier_mode << "\n"
     << "alpha_for_ldr=" << alpha_for_ldr << "\n"
     << "c_bar_sq=" << c_bar_sq << "\n"
     << "noise_sigma_sq=" << noise_sigma_sq << "\n"
     << "tol=" << tol << "\n"
     << "max_iter=" << max_iter << "\n"
     << "time_limit=" << time_limit << "\n"
     << "output=" << output << "\n"
     << "d_j=" << d_J << "\n"
     << "c_list=" << join(c_list) << "\n"
     << "n_list=" << join_int(n_list) << "\n"
     << "eta=" << eta << "\n"
     << "c2=" << c2 << "\n"
     << "anticon_set=" << anticon_set << "\n"
     << "threads=" << threads << "\n";
  return os.str();
}

void apply_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const std::string& v = value;
  if (key == "experiment") {
    cfg.experiment = parse_experiment(v);
  } else if (key == "n") {
    cfg.n = static_cast<int>(to_int(key, v));
  } else if (key == "beta_list" || key == "beta") {
    cfg.beta_list.clear();
    for (const auto& s : split_list(v)) cfg.beta_list.push_back(to_double(key, s));
  } else if (key == "seeds") {
    cfg.seeds.clear();
    for (const auto& s : split_list(v)) cfg.seeds.push_back(static_cast<std::uint64_t>(to_int(key, s)));
  } else if (key == "num_seeds") {
    long long k = to_int(key, v);
    if (k < 1) throw Error(ErrorCode::Config, "num_seeds must be positive");
    cfg.seeds.clear();
    for (long long s = 0; s < k; ++s) cfg.seeds.push_back(static_cast<std::uint64_t>(s));
  } else if (key == "outlier_mode" || key == "mode") {
    cfg.outlier_mode = v;
  } else if (key == "alpha_for_ldr" || key == "alpha") {
    cfg.alpha_for_ldr = to_double(key, v);
  } else if (key == "c_bar_sq") {
    cfg.c_bar_sq = to_double(key, v);
  } else if (key == "noise_sigma_sq") {
    cfg.noise_sigma_sq = to_double(key, v);
  } else if (key == "tol") {
    cfg.tol = to_double(key, v);
  } else if (key == "max_iter") {
    cfg.max_iter = static_cast<int>(to_int(key, v));
  } else if (key == "time_limit") {
    cfg.time_limit = to_double(key, v);
  } else if (key == "output" || key == "out") {
    cfg.output = v;
  } else if (key == "d_j" || key == "dj") {
    cfg.d_J = static_cast<int>(to_int(key, v));
  } else if (key == "c_list") {
    cfg.c_list.clear();
    for (const auto& s : split_list(v)) cfg.c_list.push_back(to_double(key, s));
  } else if (key == "n_list") {
    cfg.n_list.clear();
    for (const auto& s : split_list(v)) cfg.n_list.push_back(static_cast<int>(to_int(key, s)));
  } else if (key == "eta") {
    cfg.eta = to_double(key, v);
  } else if (key == "c2") {
    cfg.c2 = to_double(key, v);
  } else if (key == "anticon_set") {
    cfg.anticon_set = v;
  } else if (key == "threads") {
    cfg.threads = static_cast<int>(to_int(key, v));
  } else {
    throw Error(ErrorCode::Config, "unknown config key '" + key + "'");
  }
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::Parse, "line " + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    try {
      apply_config_value(cfg, key, value);
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot open config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  double pos = q / 100.0 * (values.size() - 1);
  size_t lo = static_cast<size_t>(std::floor(pos));
  size_t hi = std::min(lo + 1, values.size() - 1);
  double t = pos - lo;
  if (std::isinf(values[lo]) || std::isinf(values[hi])) return t < 0.5 ? values[lo] : values[hi];
  return values[lo] + t * (values[hi] - values[lo]);
}

std::vector<Aggregate> aggregate(const std::vector<MetricRow>& rows) {
  std::vector<std::pair<double, std::string>> keys;
  std::map<std::pair<double, std::string>, std::vector<double>> groups;
  for (const auto& r : rows) {
    auto key = std::make_pair(r.beta, r.metric);
    if (!groups.count(key)) keys.push_back(key);
    groups[key].push_back(r.value);
  }
  std::vector<Aggregate> out;
  for (const auto& key : keys) {
    const auto& v = groups[key];
    Aggregate a;
    a.beta = key.first;
    a.metric = key.second;
    a.count = static_cast<int>(v.size());
    double s = 0.0;
    for (double x : v) s += x;
    a.mean = s / v.size();
    a.p25 = percentile(v, 25);
    a.p50 = percentile(v, 50);
    a.p75 = percentile(v, 75);
    a.p90 = percentile(v, 90);
    out.push_back(a);
  }
  return out;
}

std::string RunRecord::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "seed,beta,metric,value\n";
  for (const auto& r : rows) os << r.seed << "," << r.beta << "," << r.metric << "," << r.value << "\n";
  return os.str();
}

namespace {
nlohmann::json number_or_string(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}
}  // namespace

std::string RunRecord::to_json() const {
  nlohmann::json j;
  nlohmann::json c;
  std::istringstream in(config.to_text());
  std::string line;
  while (std::getline(in, line)) {
    size_t eq = line.find('=');
    c[line.substr(0, eq)] = line.substr(eq + 1);
  }
  j["config"] = c;
  j["seconds"] = seconds;
  auto& ag = j["aggregates"] = nlohmann::json::array();
  for (const auto& a : aggregates)
    ag.push_back({{"beta", a.beta},
                  {"metric", a.metric},
                  {"count", a.count},
                  {"mean", number_or_string(a.mean)},
                  {"percentiles", {{"25", number_or_string(a.p25)},
                                   {"50", number_or_string(a.p50)},
                                   {"75", number_or_string(a.p75)},
                                   {"90", number_or_string(a.p90)}}}});
  j["failures"] = failures;
  return j.dump(1);
}

std::vector<MetricRow> RunRecord::metric(const std::string& name) const {
  std::vector<MetricRow> out;
  for (const auto& r : rows)
    if (r.metric == name) out.push_back(r);
  return out;
}

RunRecord run(const ExperimentConfig& cfg) {
  cfg.validate();
  auto t0 = std::chrono::steady_clock::now();
  std::vector<Task> tasks;
  switch (cfg.experiment) {
    case Experiment::TlsSweep: add_tls_tasks(cfg, tasks, false); break;
    case Experiment::AposterioriBounds: add_tls_tasks(cfg, tasks, true); break;
    case Experiment::SlidesSweep: add_slides_tasks(cfg, tasks); break;
    case Experiment::MultiRotation: add_multi_tasks(cfg, tasks); break;
    case Experiment::HyperSurvey: add_hyper_tasks(cfg, tasks); break;
    case Experiment::AnticonSurvey: add_anticon_tasks(cfg, tasks); break;
  }
  std::vector<TaskResult> results = execute(tasks, cfg.threads);
  RunRecord rec;
  rec.config = cfg;
  for (auto& r : results) {
    rec.rows.insert(rec.rows.end(), r.rows.begin(), r.rows.end());
    if (!r.failure.empty()) rec.failures.push_back(r.failure);
  }
  rec.aggregates = aggregate(rec.rows);
  rec.seconds = elapsed(t0);
  return rec;
}

void write_record(const RunRecord& rec, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create directory " + dir + ": " + ec.message());
  auto write = [&](const std::string& name, const std::string& body) {
    std::string path = (std::filesystem::path(dir) / name).string();
    std::ofstream f(path);
    if (!f) throw Error(ErrorCode::Io, "cannot write " + path);
    f << body;
    if (!f) throw Error(ErrorCode::Io, "failed writing " + path);
  };
  write("results.csv", rec.to_csv());
  write("summary.json", rec.to_json());
}

std::string bound_curves_csv() {
  std::ostringstream os;
  os.precision(17);
  os << "curve,k,C,x,value\n";
  const double M_x = 1.0, eta = 0.01;
  for (int i = 1; i <= 100; ++i) {
    double a = i / 100.0;
    try {
      os << "apriori_lts_mc,,," << a << "," << apriori_bound_lts_mc(a, eta, M_x) << "\n";
    } catch (const Error&) {
      // no finite bound at this alpha
    }
    os << "trivial,,," << a << "," << 2.0 * M_x << "\n";
  }
  for (int k : {4, 6, 8, 10})
    for (double C : {1.0, 2.0, 4.0, 6.0}) {
      double bmax = lts_beta_max(k, C);
      const int steps = 50;
      for (int s = 0; s < steps; ++s) {
        double beta = bmax * s / steps;
        LtsCoefficients co = lts_objective_coeffs(k, beta, C);
        os << "lts_C1," << k << "," << C << "," << beta << "," << co.C1_pow << "\n";
        os << "lts_C2," << k << "," << C << "," << beta << "," << co.C2_pow << "\n";
      }
      os << "beta_max," << k << "," << C << "," << bmax << "," << bmax << "\n";
    }
  return os.str();
}

void emit_bound_curves(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path);
  f << bound_curves_csv();
  if (!f) throw Error(ErrorCode::Io, "failed writing " + path);
}

}  // namespace rotcert
