// Command-line front end. Talks to the library only through rotcert.h.
#include <rotcert/rotcert.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct CallFailed {
  rc_status status;
};

void check(rc_status s) {
  if (s != RC_OK) throw CallFailed{s};
}

std::string take(char* s) {
  std::string out = s ? s : "";
  rc_string_free(s);
  return out;
}

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
};

using Instance = Handle<rc_instance, rc_instance_free>;
using Outcome = Handle<rc_outcome, rc_outcome_free>;
using Hypotheses = Handle<rc_hypotheses, rc_hypotheses_free>;
using Config = Handle<rc_config, rc_config_free>;
using Record = Handle<rc_record, rc_record_free>;

struct Flags {
  int n = 20;
  double beta = 0.2;
  std::string beta_list;
  std::optional<double> alpha;
  std::uint64_t seed = 0;
  std::string seeds;
  std::string mode = "random";
  std::string input;
  std::string out;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<int> dj;
  double eta = 3.75;
  double c2 = -0.1;
  double C = 6.0;
  std::string config;
  std::string experiment;
  std::optional<double> cbar2;
  std::optional<int> threads;
  double time_limit = 300.0;
};

void write_file(const std::string& path, const std::string& body) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << body;
}

// --out names a directory for solves; created on demand.
std::string out_path(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / name).string();
}

rc_solve_options solve_options(const Flags& f) {
  rc_solve_options o = rc_solve_options_default();
  if (f.tol) o.tol = *f.tol;
  if (f.max_iter) o.max_iter = *f.max_iter;
  o.time_limit = f.time_limit;
  return o;
}

void load_instance(const Flags& f, Instance& inst) {
  if (!f.input.empty()) {
    check(rc_instance_load_csv(f.input.c_str(), &inst.p));
    return;
  }
  check(rc_instance_generate(f.n, f.beta, f.mode.c_str(), f.seed, 1e-4, f.cbar2.value_or(0.0021), &inst.p));
}

std::optional<double> truth_error(const rc_instance* inst, const double q[4]) {
  double truth[4];
  if (rc_instance_truth(inst, truth) != RC_OK) return std::nullopt;
  return rc_geodesic_error_deg(q, truth);
}

int cmd_solve_tls(const Flags& f) {
  Instance inst;
  load_instance(f, inst);
  Outcome out;
  rc_solve_options o = solve_options(f);
  check(rc_solve_tls(inst.p, &o, &out.p));
  double q[4];
  check(rc_outcome_estimate(out.p, 0, q));
  int selected = rc_outcome_selected(out.p, nullptr, 0);
  auto err = truth_error(inst.p, q);
  std::printf("solve-tls n=%d", rc_instance_size(inst.p));
  if (err) std::printf(" error_deg=%.4f", *err);
  std::printf(" gap=%.3e selected=%d iterations=%d seconds=%.2f\n", rc_outcome_gap(out.p), selected,
              rc_outcome_iterations(out.p), rc_outcome_seconds(out.p));
  if (!f.out.empty()) write_file(out_path(f.out, "tls.json"), take([&] {
                                   char* s = nullptr;
                                   check(rc_outcome_to_json(out.p, inst.p, &s));
                                   return s;
                                 }()));
  return 0;
}

int cmd_solve_slides(const Flags& f) {
  Instance inst;
  load_instance(f, inst);
  double alpha = f.alpha ? *f.alpha : 1.0 - f.beta;
  if (!f.input.empty() && !f.alpha) throw CLI::ValidationError("--alpha", "required with --input");
  Hypotheses hyps;
  Outcome out;
  rc_solve_options o = solve_options(f);
  check(rc_solve_slides(inst.p, alpha, &o, &hyps.p, &out.p));
  char* s = nullptr;
  check(rc_hypotheses_to_json(hyps.p, f.input.empty() ? inst.p : nullptr, &s));
  std::string json = take(s);
  std::cout << json << "\n";
  int valid = 0;
  double best = 180.0;
  bool have_truth = false;
  for (int k = 0; k < rc_hypotheses_count(hyps.p); ++k) {
    double q[4], w;
    int ok;
    check(rc_hypotheses_get(hyps.p, k, q, &w, &ok));
    if (!ok) continue;
    ++valid;
    if (auto e = truth_error(inst.p, q)) {
      have_truth = true;
      best = std::min(best, *e);
    }
  }
  std::fprintf(stderr, "solve-slides n=%d alpha=%g hypotheses=%d", rc_instance_size(inst.p), alpha, valid);
  if (have_truth) std::fprintf(stderr, " min_error_deg=%.4f", best);
  std::fprintf(stderr, " gap=%.3e seconds=%.2f\n", rc_outcome_gap(out.p), rc_outcome_seconds(out.p));
  if (!f.out.empty()) write_file(out_path(f.out, "hypotheses.json"), json);
  return 0;
}

int cmd_gen(const Flags& f) {
  Instance inst;
  check(rc_instance_generate(f.n, f.beta, f.mode.c_str(), f.seed, 1e-4, f.cbar2.value_or(0.0021), &inst.p));
  char* s = nullptr;
  check(rc_instance_to_json(inst.p, &s));
  std::string json = take(s);
  if (f.out.empty()) {
    std::cout << json << "\n";
  } else {
    std::string path = out_path(f.out, "instance.json");
    write_file(path, json);
    std::printf("gen n=%d beta=%g mode=%s seed=%llu -> %s\n", f.n, f.beta, f.mode.c_str(),
                static_cast<unsigned long long>(f.seed), path.c_str());
  }
  return 0;
}

int cmd_check_hyper(const Flags& f) {
  Instance inst;
  load_instance(f, inst);
  int holds = 0;
  double seconds = 0.0;
  check(rc_check_hyper(inst.p, f.C, &holds, &seconds));
  std::printf("check-hyper n=%d C=%g: %s (%.2f s)\n", rc_instance_size(inst.p), f.C, holds ? "Holds" : "Fails",
              seconds);
  return 0;
}

int cmd_check_anticon(const Flags& f) {
  int holds = 0, failed = 0;
  double seconds = 0.0;
  check(rc_check_anticon_generated(f.mode.c_str(), f.n, f.beta, f.eta, f.c2, f.seed, f.time_limit, &holds, &failed,
                                   &seconds));
  std::printf("check-anticon set=%s n=%d beta=%g eta=%g: %s", f.mode.c_str(), f.n, f.beta, f.eta,
              holds ? "Holds" : "Fails");
  if (!holds) std::printf(" (condition %d)", failed);
  std::printf(" (%.2f s)\n", seconds);
  return 0;
}

int cmd_bounds(const Flags& f) {
  std::string path = f.out.empty() ? "bound_curves.csv" : f.out;
  if (std::filesystem::is_directory(path) || (!path.empty() && path.back() == '/'))
    path = out_path(path, "bound_curves.csv");
  check(rc_emit_bound_curves(path.c_str()));
  double at_one = 0.0, bmax = 0.0;
  check(rc_apriori_bound_lts_mc(1.0, 0.01, 1.0, &at_one));
  check(rc_lts_beta_max(4, 6.0, &bmax));
  std::printf("bounds -> %s (alpha=1: %g, beta_max k=4 C=6: %.4e)\n", path.c_str(), at_one, bmax);
  return 0;
}

int cmd_run(const Flags& f, const std::vector<std::string>& sets) {
  Config cfg;
  if (!f.config.empty())
    check(rc_config_load(f.config.c_str(), &cfg.p));
  else
    check(rc_config_new(&cfg.p));
  auto set = [&](const char* key, const std::string& v) { check(rc_config_set(cfg.p, key, v.c_str())); };
  auto num = [](double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
  };
  if (!f.experiment.empty()) set("experiment", f.experiment);
  for (const auto& kv : sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected key=value, got '" + kv + "'");
    set(kv.substr(0, eq).c_str(), kv.substr(eq + 1));
  }
  if (!f.beta_list.empty()) set("beta_list", f.beta_list);
  if (!f.seeds.empty()) set("seeds", f.seeds);
  if (f.alpha) set("alpha_for_ldr", num(*f.alpha));
  if (f.tol) set("tol", num(*f.tol));
  if (f.max_iter) set("max_iter", std::to_string(*f.max_iter));
  if (f.dj) set("d_j", std::to_string(*f.dj));
  if (f.cbar2) set("c_bar_sq", num(*f.cbar2));
  if (f.threads) set("threads", std::to_string(*f.threads));
  if (!f.out.empty()) set("output", f.out);
  Record rec;
  check(rc_run(cfg.p, &rec.p));
  char* text = nullptr;
  check(rc_config_to_text(cfg.p, &text));
  std::string dir;
  std::istringstream in(take(text));
  for (std::string line; std::getline(in, line);)
    if (line.rfind("output=", 0) == 0) dir = line.substr(7);
  check(rc_record_write(rec.p, dir.c_str()));
  char* csv = nullptr;
  check(rc_record_csv(rec.p, &csv));
  std::string rows = take(csv);
  long lines = static_cast<long>(std::count(rows.begin(), rows.end(), '\n')) - 1;
  std::printf("run: %ld rows, %d failures -> %s/results.csv, %s/summary.json\n", lines,
              rc_record_failure_count(rec.p), dir.c_str(), dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certifiable rotation search: estimators, contracts and experiments"};
  app.require_subcommand(1);
  Flags f;
  std::vector<std::string> sets;

  auto add_instance_flags = [&](CLI::App* c, bool with_input) {
    auto* n = c->add_option("--n", f.n, "number of measurements")->check(CLI::PositiveNumber);
    auto* beta = c->add_option("--beta", f.beta, "outlier rate")->check(CLI::Range(0.0, 1.0));
    auto* seed = c->add_option("--seed", f.seed, "generator seed");
    auto* mode = c->add_option("--mode", f.mode, "outlier mode: random, consistent or multi:K");
    c->add_option("--cbar2", f.cbar2, "inlier threshold c_bar^2");
    if (with_input) {
      auto* input = c->add_option("--input", f.input, "pairs CSV (ax,ay,az,bx,by,bz)")->check(CLI::ExistingFile);
      for (auto* o : {n, beta, seed, mode}) input->excludes(o);
    }
  };
  auto add_solver_flags = [&](CLI::App* c) {
    c->add_option("--tol", f.tol, "solver tolerance (0 keeps the default)");
    c->add_option("--max-iter", f.max_iter, "solver iteration cap");
    c->add_option("--time-limit", f.time_limit, "wall-clock limit per solve in seconds");
    c->add_option("--out", f.out, "output directory");
  };

  auto* run = app.add_subcommand("run", "run an experiment and write results.csv and summary.json");
  run->add_option("--config", f.config, "key=value config file")->check(CLI::ExistingFile);
  run->add_option("--experiment", f.experiment,
                  "tls_sweep, slides_sweep, aposteriori_bounds, hyper_survey, anticon_survey or multi_rotation");
  run->add_option("--set", sets, "extra key=value config entries");
  run->add_option("--n", f.n)->each([&](const std::string& v) { sets.push_back("n=" + v); });
  run->add_option("--beta", f.beta_list, "comma-separated outlier rates");
  run->add_option("--seed", f.seeds, "comma-separated seeds");
  run->add_option("--mode", f.mode)->each([&](const std::string& v) { sets.push_back("outlier_mode=" + v); });
  run->add_option("--alpha", f.alpha, "SLIDES inlier rate");
  run->add_option("--dj", f.dj, "subset size for a-posteriori bounds");
  run->add_option("--eta", f.eta)->each([&](const std::string& v) { sets.push_back("eta=" + v); });
  run->add_option("--c2", f.c2)->each([&](const std::string& v) { sets.push_back("c2=" + v); });
  run->add_option("--cbar2", f.cbar2);
  run->add_option("--threads", f.threads);
  run->add_option("--tol", f.tol);
  run->add_option("--max-iter", f.max_iter);
  run->add_option("--out", f.out, "output directory");

  auto* bounds = app.add_subcommand("bounds", "write the a-priori and LTS bound curves CSV");
  bounds->add_option("--out", f.out, "CSV path or directory");

  auto* hyper = app.add_subcommand("check-hyper", "certify hypercontractivity of the inlier Wahba matrices");
  add_instance_flags(hyper, true);
  hyper->add_option("--C", f.C, "C(2)^2");

  auto* anticon = app.add_subcommand("check-anticon", "certify anti-concentration of a generated set");
  anticon->add_option("--mode", f.mode, "measurement set: triplet or wahba")
      ->check(CLI::IsMember({"triplet", "wahba"}));
  anticon->add_option("--n", f.n)->check(CLI::PositiveNumber);
  anticon->add_option("--beta", f.beta, "outlier rate; the first (1-beta)n members are used")
      ->check(CLI::Range(0.0, 1.0));
  anticon->add_option("--seed", f.seed);
  anticon->add_option("--eta", f.eta);
  anticon->add_option("--c2", f.c2, "p(a) = 1 + c2 a^2");
  anticon->add_option("--time-limit", f.time_limit);

  auto* tls = app.add_subcommand("solve-tls", "TLS sparse relaxation");
  add_instance_flags(tls, true);
  add_solver_flags(tls);

  auto* sl = app.add_subcommand("solve-slides", "list-decodable SLIDES relaxation; prints hypotheses JSON");
  add_instance_flags(sl, true);
  add_solver_flags(sl);
  sl->add_option("--alpha", f.alpha, "inlier rate (defaults to 1 - beta)");

  auto* gen = app.add_subcommand("gen", "generate a synthetic instance as JSON");
  add_instance_flags(gen, false);
  gen->add_option("--out", f.out, "output directory (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  if (anticon->parsed() && anticon->count("--mode") == 0) f.mode = "triplet";

  try {
    if (run->parsed()) return cmd_run(f, sets);
    if (bounds->parsed()) return cmd_bounds(f);
    if (hyper->parsed()) return cmd_check_hyper(f);
    if (anticon->parsed()) return cmd_check_anticon(f);
    if (tls->parsed()) return cmd_solve_tls(f);
    if (sl->parsed()) return cmd_solve_slides(f);
    if (gen->parsed()) return cmd_gen(f);
  } catch (const CallFailed& e) {
    std::fprintf(stderr, "error: %s: %s\n", rc_status_name(e.status), rc_last_error());
    return e.status == RC_ERR_USAGE ? kExitUsage : kExitFailure;
  } catch (const CLI::Error& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  return kExitUsage;
}
