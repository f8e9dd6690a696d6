#include "rotcert/certify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "rotcert/error.hpp"

namespace rotcert {

namespace {

constexpr int kVars = 9;

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void check_At(const Eigen::MatrixXd& At) {
  if (At.cols() != kVars || At.rows() < 1)
    throw Error(ErrorCode::Dimension, "measurement matrices must have 9 columns");
}

// |A^T v|^2 as a quadratic form in v.
Polynomial squared_norm_form(const Eigen::MatrixXd& At) {
  check_At(At);
  Eigen::MatrixXd Q = At.transpose() * At;
  Polynomial p(kVars);
  for (int a = 0; a < kVars; ++a)
    for (int b = a; b < kVars; ++b) {
      double c = a == b ? Q(a, a) : 2.0 * Q(a, b);
      if (c == 0.0) continue;
      Monomial m = Monomial::one(kVars);
      m.exponents[a] += 1;
      m.exponents[b] += 1;
      p.add_term(m, c);
    }
  return p;
}

Polynomial vnorm_sq() {
  Polynomial p(kVars);
  for (int k = 0; k < kVars; ++k) {
    Monomial m = Monomial::one(kVars);
    m.exponents[k] = 2;
    p.add_term(m, 1.0);
  }
  return p;
}

// Stops a solve once its optimum is clearly positive or clearly negative.
std::function<bool(const IterationInfo&)> sign_settled() {
  return [](const IterationInfo& it) {
    if (it.iteration < 50 || it.residuals.max() > 1e-4) return false;
    double scale = 1.0 + std::abs(it.primal_objective);
    double lo = std::min(it.primal_objective, it.dual_objective);
    double hi = std::max(it.primal_objective, it.dual_objective);
    return lo > 1e-2 * scale || hi < -1e-2 * scale;
  };
}

double solve_pop_bound(const Pop& pop, int r, const AntiConOptions& opts) {
  SolveOptions so;
  so.max_iter = opts.max_iter;
  so.time_limit = opts.time_limit;
  so.objective_weight = 10.0;
  if (opts.stop_on_sign) so.early_stop = sign_settled();
  PopBound pb = pop_lower_bound(pop, r, opts.tol, so);
  // Conservative reading of an approximate primal-dual pair.
  return std::min(pb.m_star, pb.dual_bound);
}

}  // namespace

Polynomial hypercontractivity_polynomial(const std::vector<Eigen::MatrixXd>& At_list, double C) {
  if (At_list.empty()) throw Error(ErrorCode::Validation, "empty measurement list");
  const double inv_n = 1.0 / static_cast<double>(At_list.size());
  Polynomial mean_q(kVars), mean_q2(kVars);
  for (const auto& At : At_list) {
    Polynomial q = squared_norm_form(At);
    mean_q += q * inv_n;
    mean_q2 += (q * q) * inv_n;
  }
  return (mean_q * mean_q) * C - mean_q2;
}

HyperResult check_hypercontractivity(const std::vector<Eigen::MatrixXd>& At_list,
                                     const HyperParams& params, double tol) {
  if (params.k % 2 != 0 || params.k < 4)
    throw Error(ErrorCode::Parameter, "k must be an even integer >= 4");
  if (params.k != 4)
    throw Error(ErrorCode::Unsupported, "only k = 4 is supported; degree-k Gram matrices exceed desk scale");
  if (!(params.C_t_pow_t >= 1.0)) throw Error(ErrorCode::Parameter, "C(t)^t must be >= 1");
  auto t0 = std::chrono::steady_clock::now();
  HyperResult out;
  out.h = hypercontractivity_polynomial(At_list, params.C_t_pow_t);
  out.sos = is_sos(out.h, tol);
  out.holds = out.sos.is_sos;
  out.seconds = elapsed(t0);
  return out;
}

double AntiConParams::C() const {
  double s = 1.0 - 2.0 * c_bar;
  return alpha * alpha * eta * eta * s * s / (32.0 * c_bar);
}

void AntiConParams::validate() const {
  if (!(c_bar > 0.0) || 2.0 * c_bar >= 1.0)
    throw Error(ErrorCode::Parameter, "anti-concentration needs 0 < 2 c_bar < 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorCode::Parameter, "alpha must lie in (0, 1]");
  if (!(eta > 0.0)) throw Error(ErrorCode::Parameter, "eta must be positive");
  if (!(M_x > 0.0)) throw Error(ErrorCode::Parameter, "M_x must be positive");
}

Pop anticoncentration_pop1(const Eigen::MatrixXd& At, const AntiConParams& params) {
  params.validate();
  Polynomial q = squared_norm_form(At);
  Polynomial one = Polynomial::constant(kVars, 1.0);
  Polynomial p = one + q * params.c2;
  double d = params.delta();
  Pop pop(kVars);
  pop.objective = p * p - Polynomial::constant(kVars, (1.0 - d) * (1.0 - d));
  pop.inequalities.push_back(Polynomial::constant(kVars, d * d) - q);
  double M = params.M();
  pop.add_ball_constraint(M * M);
  return pop;
}

Pop anticoncentration_pop2(const std::vector<Eigen::MatrixXd>& At_list, const AntiConParams& params) {
  params.validate();
  if (At_list.empty()) throw Error(ErrorCode::Validation, "empty measurement list");
  const double inv_n = 1.0 / static_cast<double>(At_list.size());
  Polynomial mean_q(kVars), mean_q2(kVars);
  for (const auto& At : At_list) {
    Polynomial q = squared_norm_form(At);
    mean_q += q * inv_n;
    mean_q2 += (q * q) * inv_n;
  }
  const double c2 = params.c2;
  Polynomial mean_p2 = Polynomial::constant(kVars, 1.0) + mean_q * (2.0 * c2) + mean_q2 * (c2 * c2);
  double M = params.M();
  Pop pop(kVars);
  pop.objective = Polynomial::constant(kVars, params.C() * params.delta() * M * M) - vnorm_sq() * mean_p2;
  pop.add_ball_constraint(M * M);
  return pop;
}

AntiConResult check_anticoncentration(const std::vector<Eigen::MatrixXd>& At_list,
                                      const AntiConParams& params, const AntiConOptions& opts) {
  params.validate();
  if (At_list.empty()) throw Error(ErrorCode::Validation, "empty measurement list");
  if (opts.r1 < 2 || opts.r2 < 3)
    throw Error(ErrorCode::Order, "anti-concentration needs r1 >= 2 and r2 >= 3");
  auto t0 = std::chrono::steady_clock::now();
  AntiConResult out;
  out.r1 = opts.r1;
  out.r2 = opts.r2;
  out.holds = true;
  for (size_t i = 0; i < At_list.size(); ++i) {
    double lb = solve_pop_bound(anticoncentration_pop1(At_list[i], params), opts.r1, opts);
    out.condition1_bounds.push_back(lb);
    if (!(lb > 0.0) && out.holds) {
      out.holds = false;
      out.failed_condition = 1;
      out.failed_index = static_cast<int>(i);
      if (opts.short_circuit) {
        out.seconds = elapsed(t0);
        return out;
      }
    }
  }
  out.condition2_bound = solve_pop_bound(anticoncentration_pop2(At_list, params), opts.r2, opts);
  if (!(out.condition2_bound > 0.0) && out.holds) {
    out.holds = false;
    out.failed_condition = 2;
  }
  out.seconds = elapsed(t0);
  return out;
}

AntiConResult check_anticoncentration(const std::vector<Eigen::MatrixXd>& At_list,
                                      const AntiConParams& params, int r1, int r2) {
  AntiConOptions o;
  o.r1 = r1;
  o.r2 = r2;
  return check_anticoncentration(At_list, params, o);
}

double eta_threshold(double alpha) {
  if (!(alpha > 0.5)) throw Error(ErrorCode::NoNontrivialEta, "no nontrivial eta for alpha <= 0.5");
  if (alpha > 1.0) throw Error(ErrorCode::Parameter, "alpha must not exceed 1");
  return (2.0 / alpha) * (2.0 - 2.0 * (1.0 - alpha) / alpha);
}

double apriori_bound_lts_mc(double alpha, double eta, double M_x) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::InfiniteBound, "alpha = 0 gives an infinite bound");
  if (alpha > 1.0) throw Error(ErrorCode::Parameter, "alpha must not exceed 1");
  return alpha * eta * M_x / 2.0 + 2.0 * M_x * (1.0 - alpha) / alpha;
}

double apriori_bound_tls(double alpha, double eta, double M_x, int n, double gamma0, double c_bar_sq) {
  if (!(c_bar_sq > 0.0)) throw Error(ErrorCode::Parameter, "c_bar_sq must be positive");
  double denom = alpha * n - gamma0 / c_bar_sq;
  if (!(denom > 0.0)) throw Error(ErrorCode::VacuousBound, "alpha n - gamma0 / c_bar^2 must be positive");
  return (alpha * alpha * eta * M_x * n / 2.0 + 2.0 * n * M_x * (1.0 - alpha)) / denom;
}

double lts_beta_max(int k, double C) {
  if (k < 4 || k % 2 != 0) throw Error(ErrorCode::Parameter, "k must be an even integer >= 4");
  if (!(C > 0.0)) throw Error(ErrorCode::Parameter, "C must be positive");
  double h = k / 2.0;
  return std::pow(1.0 / (C * std::pow(2.0, 3.0 * k - 1.0)), 1.0 / (h - 1.0));
}

LtsCoefficients lts_objective_coeffs(int k, double beta, double C) {
  LtsCoefficients out;
  out.beta_max = lts_beta_max(k, C);
  if (beta < 0.0) throw Error(ErrorCode::Parameter, "beta must be nonnegative");
  if (beta >= out.beta_max)
    throw OutOfRegimeError(out.beta_max, "beta >= beta_max = " + std::to_string(out.beta_max));
  double h = k / 2.0;
  double base = std::pow(2.0 * beta, h - 1.0);
  double coeff = std::pow(2.0, h) * base * C * std::pow(2.0, 2.0 * k);
  double C1 = coeff / (1.0 - coeff);
  double C2 = base * (std::pow(2.0, k) + C * std::pow(2.0, 2.0 * k)) / (1.0 - coeff);
  out.C1_pow = std::pow(C1, 2.0 / k);
  out.C2_pow = std::pow(C2, 2.0 / k);
  return out;
}

const char* contract_kind_name(ContractKind k) {
  switch (k) {
    case ContractKind::AposterioriMC: return "AposterioriMC";
    case ContractKind::AposterioriTLS: return "AposterioriTLS";
    case ContractKind::AprioriLTS: return "AprioriLTS";
    case ContractKind::AprioriMC: return "AprioriMC";
    case ContractKind::AprioriTLS: return "AprioriTLS";
    case ContractKind::LtsObjective: return "LtsObjective";
  }
  return "?";
}

std::string ContractReport::to_json() const {
  nlohmann::json j;
  j["kind"] = contract_kind_name(kind);
  j["bound"] = std::isfinite(bound) ? nlohmann::json(bound) : nlohmann::json("inf");
  j["preconditions_met"] = preconditions_met;
  auto& pc = j["preconditions"] = nlohmann::json::array();
  for (const auto& p : preconditions) pc.push_back({{"name", p.name}, {"met", p.met}, {"detail", p.detail}});
  j["d_J"] = d_J;
  j["sigma_min"] = sigma_min;
  j["subset"] = subset;
  j["degenerate"] = degenerate;
  j["subsets_scanned"] = subsets_scanned;
  return j.dump(1);
}

double stacked_sigma_min(const RotationSearchInstance& inst, const std::vector<int>& J) {
  Mat3 S = Mat3::Zero();
  for (int i : J) {
    if (i < 0 || i >= inst.n()) throw Error(ErrorCode::Dimension, "subset index out of range");
    const Vec3& a = inst.measurements[i].a;
    S += a * a.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(S, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(es.eigenvalues()[0], 0.0));
}

namespace {

constexpr double kDegenerateSigma = 1e-9;

void fill_preconditions(ContractReport& rep, const RotationSearchInstance& inst, const ContractMode& mode,
                        int d_J, int n_selected) {
  const int n = inst.n();
  double alpha = mode.alpha >= 0.0 ? mode.alpha : static_cast<double>(n_selected) / n;
  rep.preconditions.push_back({"d_J >= 3", d_J >= 3, "d_J = " + std::to_string(d_J)});
  double cap = (2.0 * alpha - 1.0) * n;
  std::string name = "d_J <= (2 alpha - 1) n";
  if (mode.kind == ContractMode::Kind::TLS) {
    cap -= mode.gamma0 / inst.c_bar_sq;
    name = "d_J <= (2 alpha - 1) n - gamma0 / c_bar^2";
  }
  rep.preconditions.push_back({name, d_J <= cap + 1e-9, "cap = " + std::to_string(cap)});
  rep.preconditions.push_back({"nondegenerate subsets", !rep.degenerate,
                               "sigma_min = " + std::to_string(rep.sigma_min)});
  rep.preconditions_met = true;
  for (const auto& p : rep.preconditions) rep.preconditions_met = rep.preconditions_met && p.met;
}

void finish_bound(ContractReport& rep, const RotationSearchInstance& inst) {
  rep.degenerate = rep.sigma_min <= kDegenerateSigma;
  rep.bound = rep.degenerate ? std::numeric_limits<double>::infinity()
                             : 2.0 * std::sqrt(static_cast<double>(rep.d_J)) * std::sqrt(inst.c_bar_sq) /
                                   rep.sigma_min;
}

}  // namespace

ContractReport aposteriori_bound(const RotationSearchInstance& inst, const std::vector<int>& selected,
                                 int d_J, const ContractMode& mode) {
  ContractReport rep;
  rep.kind = mode.kind == ContractMode::Kind::MC ? ContractKind::AposterioriMC : ContractKind::AposterioriTLS;
  rep.d_J = d_J;
  const int s = static_cast<int>(selected.size());
  if (d_J < 1 || d_J > s) {
    rep.sigma_min = 0.0;
    rep.degenerate = true;
    rep.bound = std::numeric_limits<double>::infinity();
    rep.preconditions.push_back({"d_J <= |selected|", false, "no subset of the requested size"});
    fill_preconditions(rep, inst, mode, d_J, s);
    return rep;
  }
  for (int i : selected)
    if (i < 0 || i >= inst.n()) throw Error(ErrorCode::Dimension, "selected index out of range");

  // Depth-first lexicographic enumeration with running scatter sums.
  std::vector<Mat3> partial(d_J + 1, Mat3::Zero());
  std::vector<int> idx(d_J);
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> best_subset;
  long long count = 0;
  std::function<void(int, int)> rec = [&](int depth, int start) {
    if (depth == d_J) {
      ++count;
      Eigen::SelfAdjointEigenSolver<Mat3> es(partial[depth], Eigen::EigenvaluesOnly);
      double sg = std::sqrt(std::max(es.eigenvalues()[0], 0.0));
      if (sg < best) {
        best = sg;
        best_subset.clear();
        for (int k : idx) best_subset.push_back(selected[k]);
      }
      return;
    }
    for (int k = start; k <= s - (d_J - depth); ++k) {
      idx[depth] = k;
      const Vec3& a = inst.measurements[selected[k]].a;
      partial[depth + 1] = partial[depth] + a * a.transpose();
      rec(depth + 1, k + 1);
    }
  };
  rec(0, 0);
  rep.subsets_scanned = count;
  rep.sigma_min = best;
  rep.subset = best_subset;
  finish_bound(rep, inst);
  fill_preconditions(rep, inst, mode, d_J, s);
  return rep;
}

ContractReport aposteriori_bound_fixed(const RotationSearchInstance& inst, const std::vector<int>& J,
                                       const ContractMode& mode, int n_selected) {
  ContractReport rep;
  rep.kind = mode.kind == ContractMode::Kind::MC ? ContractKind::AposterioriMC : ContractKind::AposterioriTLS;
  rep.d_J = static_cast<int>(J.size());
  rep.subset = J;
  rep.subsets_scanned = 1;
  rep.sigma_min = J.empty() ? 0.0 : stacked_sigma_min(inst, J);
  finish_bound(rep, inst);
  fill_preconditions(rep, inst, mode, rep.d_J, n_selected);
  return rep;
}

}  // namespace rotcert
