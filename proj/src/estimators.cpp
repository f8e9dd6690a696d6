#include "rotcert/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "json.hpp"
#include "rotcert/error.hpp"

namespace rotcert {

namespace {

constexpr double kSlidesTol = 1e-6;
constexpr double kDefaultTol = 1e-7;

double resolve_tol(const EstimatorOptions& o, double fallback) { return o.tol > 0.0 ? o.tol : fallback; }

SolveOptions solver_options(const EstimatorOptions& o, double fallback_tol, double objective_weight) {
  SolveOptions so;
  so.objective_weight = objective_weight;
  so.tol = resolve_tol(o, fallback_tol);
  so.max_iter = o.max_iter;
  so.time_limit = o.time_limit;
  so.verbose = o.verbose;
  return so;
}

double norms_sq(const Measurement& m) { return m.a.squaredNorm() + m.b.squaredNorm(); }

// Writes coefficients of the sparse moment matrix through the basis layout.
struct Emitter {
  const SparseBasis& B;
  void add(LinearForm& f, int p, int q, double c) const {
    auto [bp, lp] = B.locate(p);
    auto [bq, lq] = B.locate(q);
    if (bp != bq) throw Error(ErrorCode::Validation, "mixed-parity entry in a split program");
    f.add(bp, lp, lq, c);
  }
};

// Families shared by the list-decodable and TLS programs.
void add_structure(SparseProgram& prog, const RotationSearchInstance& inst) {
  const SparseBasis& B = prog.basis;
  MultiBlockSdp& sdp = prog.sdp;
  Emitter E{B};
  const int n = B.n;
  const double cbar2 = inst.c_bar_sq;

  // X[1] = 1
  {
    LinearForm f;
    E.add(f, B.one(), B.one(), 1.0);
    sdp.add_row(f, 1.0);
  }
  // tr(X[q, q^T]) = 1
  {
    LinearForm f;
    for (int a = 0; a < 4; ++a) E.add(f, B.q(a), B.q(a), 1.0);
    sdp.add_row(f, 1.0);
  }
  for (int i = 0; i < n; ++i) {
    // X[w_i, w_i] = X[w_i]
    LinearForm f;
    E.add(f, B.omega(i), B.omega(i), 1.0);
    E.add(f, B.omega(i), B.one(), -1.0);
    sdp.add_row(f, 0.0);
  }
  for (int i = 0; i < n; ++i) {
    // X[w_i] (|b|^2 + |a|^2) - 2 tr(M_i^T X[q, w_i q^T]) + s_i = c_bar^2
    const Mat4 M = cost_matrix(inst.measurements[i]);
    LinearForm f;
    E.add(f, B.omega(i), B.one(), norms_sq(inst.measurements[i]));
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) E.add(f, B.q(a), B.omega_q(i, b), -2.0 * M(a, b));
    f.add(prog.slack_blocks[i], 0, 0, 1.0);
    sdp.add_row(f, cbar2);
  }
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        // X[w_i q, w_i q^T] = X[q, w_i q^T]
        LinearForm f;
        E.add(f, B.omega_q(i, a), B.omega_q(i, b), 1.0);
        E.add(f, B.q(a), B.omega_q(i, b), -1.0);
        sdp.add_row(f, 0.0);
      }
  if (!B.split) {
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < 4; ++a) {
        // X[w_i q^T] = X[w_i, q^T] = X[w_i, w_i q^T]
        LinearForm f1, f2;
        E.add(f1, B.one(), B.omega_q(i, a), 1.0);
        E.add(f1, B.omega(i), B.q(a), -1.0);
        sdp.add_row(f1, 0.0);
        E.add(f2, B.omega(i), B.q(a), 1.0);
        E.add(f2, B.omega(i), B.omega_q(i, a), -1.0);
        sdp.add_row(f2, 0.0);
      }
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) {
          // X[w_i q, w_j q^T] is symmetric
          LinearForm f;
          E.add(f, B.omega_q(i, a), B.omega_q(j, b), 1.0);
          E.add(f, B.omega_q(i, b), B.omega_q(j, a), -1.0);
          sdp.add_row(f, 0.0);
        }
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      // tr(X[w_i q, w_j q^T]) = X[w_i, w_j]
      LinearForm f;
      for (int a = 0; a < 4; ++a) E.add(f, B.omega_q(i, a), B.omega_q(j, a), 1.0);
      E.add(f, B.omega(i), B.omega(j), -1.0);
      sdp.add_row(f, 0.0);
    }
}

SparseProgram start_program(const RotationSearchInstance& inst, const SparseOptions& opts) {
  SparseProgram prog;
  prog.basis.n = inst.n();
  prog.basis.split = opts.split_parity;
  const int n = inst.n();
  if (opts.split_parity) {
    prog.sdp.add_block(n + 1);
    prog.sdp.add_block(4 * (n + 1));
  } else {
    prog.sdp.add_block(prog.basis.side());
  }
  for (int i = 0; i < n; ++i) prog.slack_blocks.push_back(prog.sdp.add_block(1));
  return prog;
}

Mat4 top_block(const Eigen::MatrixXd& X, const SparseBasis& B, int i) {
  Mat4 M;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) M(a, b) = X(B.omega_q(i, a), B.omega_q(i, b));
  return M;
}

Vec4 leading_eigenvector(const Mat4& M) {
  Eigen::SelfAdjointEigenSolver<Mat4> es(0.5 * (M + M.transpose()));
  return es.eigenvectors().col(3);
}

nlohmann::json quat_json(const UnitQuaternion& q) { return {q[0], q[1], q[2], q[3]}; }

}  // namespace

std::pair<int, int> SparseBasis::locate(int pos) const {
  if (pos < 0 || pos >= side()) throw Error(ErrorCode::Dimension, "sparse basis index out of range");
  if (!split) return {0, pos};
  return odd(pos) ? std::make_pair(1, pos - (n + 1)) : std::make_pair(0, pos);
}

std::vector<std::string> SparseBasis::labels() const {
  std::vector<std::string> out(side());
  out[one()] = "1";
  for (int i = 0; i < n; ++i) out[omega(i)] = "w" + std::to_string(i + 1);
  for (int a = 0; a < 4; ++a) {
    out[q(a)] = "q" + std::to_string(a + 1);
    for (int i = 0; i < n; ++i) out[omega_q(i, a)] = "w" + std::to_string(i + 1) + "q" + std::to_string(a + 1);
  }
  return out;
}

Eigen::VectorXd SparseBasis::monomials(const std::vector<double>& w, const Vec4& qv) const {
  if (static_cast<int>(w.size()) != n) throw Error(ErrorCode::Dimension, "weight vector has wrong length");
  Eigen::VectorXd m(side());
  m[one()] = 1.0;
  for (int i = 0; i < n; ++i) m[omega(i)] = w[i];
  for (int a = 0; a < 4; ++a) {
    m[q(a)] = qv[a];
    for (int i = 0; i < n; ++i) m[omega_q(i, a)] = w[i] * qv[a];
  }
  return m;
}

Eigen::MatrixXd SparseProgram::moment_matrix(const std::vector<Eigen::MatrixXd>& blocks) const {
  const int n = basis.n;
  if (!basis.split) return blocks.at(0);
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(basis.side(), basis.side());
  X.topLeftCorner(n + 1, n + 1) = blocks.at(0);
  X.bottomRightCorner(4 * (n + 1), 4 * (n + 1)) = blocks.at(1);
  return X;
}

std::vector<Eigen::MatrixXd> SparseProgram::lift(const RotationSearchInstance& inst, const std::vector<double>& w,
                                                 const Vec4& qv) const {
  const int n = basis.n;
  Eigen::VectorXd m = basis.monomials(w, qv);
  Eigen::MatrixXd X = m * m.transpose();
  std::vector<Eigen::MatrixXd> out;
  if (basis.split) {
    out.push_back(X.topLeftCorner(n + 1, n + 1));
    out.push_back(X.bottomRightCorner(4 * (n + 1), 4 * (n + 1)));
  } else {
    out.push_back(X);
  }
  for (int i = 0; i < n; ++i) {
    const Measurement& ms = inst.measurements[i];
    double r2 = norms_sq(ms) * qv.squaredNorm() - 2.0 * qv.dot(cost_matrix(ms) * qv);
    out.push_back(Eigen::MatrixXd::Constant(1, 1, inst.c_bar_sq - w[i] * r2));
  }
  for (int i = 0; i < static_cast<int>(epigraph_blocks.size()); ++i) {
    Eigen::MatrixXd T(2, 2);
    T << w[i] * w[i], w[i], w[i], 1.0;
    out.push_back(T);
  }
  return out;
}

SparseProgram build_slides_program(const RotationSearchInstance& inst, double alpha, const SparseOptions& opts) {
  const int n = inst.n();
  if (!(alpha > 0.0)) throw Error(ErrorCode::Config, "alpha must be positive");
  if (alpha * n > n + 1e-12) throw Error(ErrorCode::Config, "alpha n exceeds n");
  if (alpha * n < 1.0 - 1e-12) throw Error(ErrorCode::Config, "alpha n must be at least 1");
  SparseProgram prog = start_program(inst, opts);
  add_structure(prog, inst);
  Emitter E{prog.basis};
  {
    LinearForm f;
    for (int i = 0; i < n; ++i) E.add(f, prog.basis.omega(i), prog.basis.one(), 1.0);
    prog.sdp.add_row(f, alpha * n);
  }
  // min sum_i X[w_i]^2 through [[t_i, X[w_i]], [X[w_i], 1]] >= 0.
  for (int i = 0; i < n; ++i) {
    int blk = prog.sdp.add_block(2);
    prog.epigraph_blocks.push_back(blk);
    LinearForm link, unit;
    link.add(blk, 0, 1, 1.0);
    E.add(link, prog.basis.omega(i), prog.basis.one(), -1.0);
    prog.sdp.add_row(link, 0.0);
    unit.add(blk, 1, 1, 1.0);
    prog.sdp.add_row(unit, 1.0);
    prog.sdp.objective.add(blk, 0, 0, 1.0);
  }
  return prog;
}

MultiBlockSdp build_slides_sdp(const RotationSearchInstance& inst, double alpha) {
  return build_slides_program(inst, alpha).sdp;
}

SparseProgram build_tls_sparse_program(const RotationSearchInstance& inst, const SparseOptions& opts) {
  if (inst.n() < 3) throw Error(ErrorCode::Validation, "TLS needs n >= 3");
  SparseProgram prog = start_program(inst, opts);
  add_structure(prog, inst);
  Emitter E{prog.basis};
  const double cbar2 = inst.c_bar_sq;
  LinearForm obj;
  for (int i = 0; i < inst.n(); ++i) {
    const Mat4 M = cost_matrix(inst.measurements[i]);
    E.add(obj, prog.basis.omega(i), prog.basis.one(), norms_sq(inst.measurements[i]) - cbar2);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) E.add(obj, prog.basis.q(a), prog.basis.omega_q(i, b), -2.0 * M(a, b));
  }
  prog.sdp.objective = obj;
  prog.sdp.objective_constant = inst.n() * cbar2;
  return prog;
}

MultiBlockSdp build_tls_sparse_sdp(const RotationSearchInstance& inst) { return build_tls_sparse_program(inst).sdp; }

double relaxation_gap(double f_sdp, double f_hat) {
  return std::abs(f_sdp - f_hat) / (1.0 + std::abs(f_sdp) + std::abs(f_hat));
}

HypothesisList hypotheses_from_blocks(const std::vector<double>& weights, const std::vector<Mat4>& blocks) {
  if (weights.size() != blocks.size()) throw Error(ErrorCode::Dimension, "weights and blocks differ in length");
  HypothesisList list;
  for (size_t i = 0; i < weights.size(); ++i) {
    Hypothesis h;
    h.source_index = static_cast<int>(i);
    h.weight = weights[i];
    if (weights[i] > kWeightEps) {
      Vec4 v = leading_eigenvector(blocks[i] / weights[i]);
      if (v.norm() > 0.0) {
        h.estimate = UnitQuaternion::normalized(v).canonical();
        h.valid = true;
      }
    }
    list.entries.push_back(h);
  }
  return list;
}

std::pair<UnitQuaternion, std::vector<int>> round_weighted(const std::vector<double>& weights,
                                                           const std::vector<Mat4>& blocks) {
  HypothesisList list = hypotheses_from_blocks(weights, blocks);
  Mat4 acc = Mat4::Zero();
  double total = 0.0;
  std::vector<int> selected;
  for (const auto& h : list.entries) {
    if (h.weight > 0.5) selected.push_back(h.source_index);
    if (!h.valid) continue;
    const Vec4& v = h.estimate.coeffs();
    acc += h.weight * v * v.transpose();
    total += h.weight;
  }
  if (!(total > kWeightEps)) throw Error(ErrorCode::RoundingFailure, "all weights are numerically zero");
  return {UnitQuaternion::normalized(leading_eigenvector(acc / total)).canonical(), selected};
}

std::vector<double> sparse_weights(const Eigen::MatrixXd& X, const SparseBasis& B) {
  std::vector<double> w(B.n);
  for (int i = 0; i < B.n; ++i) w[i] = X(B.omega(i), B.one());
  return w;
}

std::vector<Mat4> sparse_blocks(const Eigen::MatrixXd& X, const SparseBasis& B) {
  std::vector<Mat4> out;
  for (int i = 0; i < B.n; ++i) out.push_back(top_block(X, B, i));
  return out;
}

std::pair<UnitQuaternion, std::vector<int>> round_weighted(const Eigen::MatrixXd& X, const SparseBasis& B) {
  return round_weighted(sparse_weights(X, B), sparse_blocks(X, B));
}

double tls_cost(const RotationSearchInstance& inst, const UnitQuaternion& q) {
  double s = 0.0;
  for (const auto& m : inst.measurements) s += std::min(squared_residual(m, q), inst.c_bar_sq);
  return s;
}

std::pair<HypothesisList, SolveOutcome> slides(const RotationSearchInstance& inst, double alpha,
                                               const EstimatorOptions& opts) {
  SparseOptions so;
  so.split_parity = opts.split_parity;
  SparseProgram prog = build_slides_program(inst, alpha, so);
  SdpSolution sol = solve(prog.sdp, solver_options(opts, kSlidesTol, 1.0));
  Eigen::MatrixXd X = prog.moment_matrix(sol.X);

  SolveOutcome out;
  out.weights = sparse_weights(X, prog.basis);
  HypothesisList list = hypotheses_from_blocks(out.weights, sparse_blocks(X, prog.basis));
  for (const auto& h : list.entries) {
    if (h.valid) out.estimates.push_back(h.estimate);
    if (h.weight > 0.5) out.selected_inliers.push_back(h.source_index);
  }
  out.f_sdp = sol.objective;
  // Every feasible binary point of the non-relaxed problem has |w|^2 = alpha n.
  out.f_hat = alpha * inst.n();
  out.gap = relaxation_gap(out.f_sdp, out.f_hat);
  out.residuals = sol.residuals;
  out.status = sol.status;
  out.iterations = sol.iterations;
  out.seconds = sol.seconds;
  if (sol.status != SdpStatus::Optimal) out.warning = std::string("solver stopped with status ") + sdp_status_name(sol.status);
  return {list, out};
}

SolveOutcome solve_tls_sparse(const RotationSearchInstance& inst, const EstimatorOptions& opts) {
  SparseOptions so;
  so.split_parity = opts.split_parity;
  SparseProgram prog = build_tls_sparse_program(inst, so);
  SdpSolution sol = solve(prog.sdp, solver_options(opts, kDefaultTol, 10.0));
  Eigen::MatrixXd X = prog.moment_matrix(sol.X);
  SolveOutcome out;
  out.weights = sparse_weights(X, prog.basis);
  auto [q, sel] = round_weighted(X, prog.basis);
  out.estimates = {q};
  out.selected_inliers = sel;
  out.f_sdp = sol.objective;
  out.f_hat = tls_cost(inst, q);
  out.gap = relaxation_gap(out.f_sdp, out.f_hat);
  out.residuals = sol.residuals;
  out.status = sol.status;
  out.iterations = sol.iterations;
  out.seconds = sol.seconds;
  if (sol.status != SdpStatus::Optimal) out.warning = std::string("solver stopped with status ") + sdp_status_name(sol.status);
  return out;
}

int sample_count(double alpha, int N) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorCode::Parameter, "alpha must lie in (0, 1]");
  if (N < 1) throw Error(ErrorCode::Parameter, "N must be at least 1");
  return static_cast<int>(std::ceil(N / alpha - 1e-9));
}

double sampling_success_probability(double alpha, int N) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorCode::Parameter, "alpha must lie in (0, 1]");
  return 1.0 - std::pow(1.0 - alpha / 2.0, N / alpha);
}

HypothesisList sample_hypotheses(const HypothesisList& list, double alpha, int N, std::uint64_t seed) {
  const int draws = sample_count(alpha, N);
  std::vector<double> w;
  double total = 0.0;
  for (const auto& h : list.entries) {
    double x = h.valid ? std::max(h.weight, 0.0) : 0.0;
    w.push_back(x);
    total += x;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::EmptySupport, "no hypothesis carries positive weight");
  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> dist(w.begin(), w.end());
  HypothesisList out;
  for (int k = 0; k < draws; ++k) out.entries.push_back(list.entries[dist(rng)]);
  return out;
}

std::string HypothesisList::to_json(const RotationSearchInstance* inst) const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& h : entries) {
    nlohmann::json e = {{"source_index", h.source_index}, {"weight", h.weight}, {"valid", h.valid}};
    if (h.valid) {
      e["quaternion"] = quat_json(h.estimate);
      if (inst && inst->ground_truth) {
        e["error_deg"] = geodesic_error_deg(h.estimate, *inst->ground_truth);
        double best = e["error_deg"];
        for (const auto& t : inst->secondary_truths) best = std::min(best, geodesic_error_deg(h.estimate, t));
        e["min_error_any_truth_deg"] = best;
      }
    }
    j.push_back(e);
  }
  return nlohmann::json{{"hypotheses", j}}.dump(1);
}

std::string SolveOutcome::to_json(const RotationSearchInstance* inst) const {
  nlohmann::json j;
  auto& est = j["estimates"] = nlohmann::json::array();
  for (const auto& q : estimates) {
    nlohmann::json e = {{"quaternion", quat_json(q)}};
    if (inst && inst->ground_truth) e["error_deg"] = geodesic_error_deg(q, *inst->ground_truth);
    est.push_back(e);
  }
  j["f_sdp"] = f_sdp;
  j["f_hat"] = f_hat;
  j["gap"] = gap;
  j["selected_inliers"] = selected_inliers;
  j["weights"] = weights;
  j["residuals"] = {{"primal", residuals.primal}, {"dual", residuals.dual}, {"gap", residuals.gap}};
  j["status"] = sdp_status_name(status);
  j["iterations"] = iterations;
  j["seconds"] = seconds;
  if (!warning.empty()) j["warning"] = warning;
  return j.dump(1);
}

const char* dense_kind_name(DenseKind k) {
  switch (k) {
    case DenseKind::MC1: return "MC1";
    case DenseKind::TLS1: return "TLS1";
    case DenseKind::LTS2: return "LTS2";
    case DenseKind::LDR: return "LDR";
  }
  return "?";
}

namespace {

// Squared residual as a quadratic form in q; equals |b - R(q) a|^2 on |q| = 1.
Polynomial residual_poly(const Measurement& m, int d, int q0) {
  Mat4 M = cost_matrix(m);
  Mat4 Ms = 0.5 * (M + M.transpose());
  Polynomial p(d);
  double c = norms_sq(m);
  for (int a = 0; a < 4; ++a)
    for (int b = a; b < 4; ++b) {
      double coef = (a == b ? c : 0.0) - 2.0 * (a == b ? Ms(a, a) : 2.0 * Ms(a, b));
      Monomial mono = Monomial::one(d);
      mono.exponents[q0 + a] += 1;
      mono.exponents[q0 + b] += 1;
      p.add_term(mono, coef);
    }
  return p;
}

double residual_at(const Measurement& m, const UnitQuaternion& q) { return squared_residual(m, q); }

}  // namespace

DenseProgram build_dense_program(const RotationSearchInstance& inst, DenseKind kind, double alpha, int r) {
  const int n = inst.n();
  if (n > kDenseMaxN)
    throw Error(ErrorCode::DeskScaleExceeded, "dense relaxation limited to n <= " + std::to_string(kDenseMaxN) +
                                                  "; use the sparse estimators for larger n");
  if ((kind == DenseKind::LTS2 || kind == DenseKind::LDR) && !(alpha > 0.0 && alpha <= 1.0))
    throw Error(ErrorCode::Config, "alpha must lie in (0, 1]");
  DenseProgram dp;
  dp.n = n;
  const int d = n + 4;
  Pop& pop = dp.pop;
  pop = Pop(d);
  std::vector<Polynomial> w, res;
  for (int i = 0; i < n; ++i) {
    w.push_back(Polynomial::variable(d, dp.omega_var(i)));
    res.push_back(residual_poly(inst.measurements[i], d, dp.q_var(0)));
  }
  Polynomial qn(d);
  for (int a = 0; a < 4; ++a) {
    Polynomial x = Polynomial::variable(d, dp.q_var(a));
    qn += x * x;
  }
  const Polynomial cb = Polynomial::constant(d, inst.c_bar_sq);
  for (int i = 0; i < n; ++i) pop.equalities.push_back(w[i] * w[i] - w[i]);
  pop.equalities.push_back(qn - Polynomial::constant(d, 1.0));
  for (int i = 0; i < n; ++i) pop.inequalities.push_back(cb - w[i] * res[i]);
  if (kind == DenseKind::LTS2 || kind == DenseKind::LDR) {
    Polynomial s(d);
    for (int i = 0; i < n; ++i) s += w[i];
    pop.equalities.push_back(s - Polynomial::constant(d, alpha * n));
  }
  Polynomial obj(d);
  for (int i = 0; i < n; ++i) {
    switch (kind) {
      case DenseKind::MC1: obj -= w[i]; break;
      case DenseKind::TLS1: obj += w[i] * res[i] + (Polynomial::constant(d, 1.0) - w[i]) * inst.c_bar_sq; break;
      case DenseKind::LTS2: obj += w[i] * res[i] * (1.0 / n); break;
      case DenseKind::LDR: obj += w[i] * w[i]; break;
    }
  }
  pop.objective = obj;
  pop.add_ball_constraint(n + 1.0);
  dp.relaxation = build_moment_relaxation(pop, r);
  return dp;
}

MultiBlockSdp build_dense_estimator(const RotationSearchInstance& inst, DenseKind kind, double alpha, int r) {
  return build_dense_program(inst, kind, alpha, r).relaxation.sdp;
}

double dense_objective(const RotationSearchInstance& inst, DenseKind kind, const std::vector<double>& w,
                       const UnitQuaternion& q) {
  const int n = inst.n();
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    double r2 = residual_at(inst.measurements[i], q);
    switch (kind) {
      case DenseKind::MC1: s -= w[i]; break;
      case DenseKind::TLS1: s += w[i] * r2 + (1.0 - w[i]) * inst.c_bar_sq; break;
      case DenseKind::LTS2: s += w[i] * r2 / n; break;
      case DenseKind::LDR: s += w[i] * w[i]; break;
    }
  }
  return s;
}

SolveOutcome solve_dense(const RotationSearchInstance& inst, DenseKind kind, double alpha,
                         const EstimatorOptions& opts, int r) {
  DenseProgram dp = build_dense_program(inst, kind, alpha, r);
  SdpSolution sol = solve(dp.relaxation.sdp, solver_options(opts, kDefaultTol, 10.0));
  PseudoMomentMatrix X(sol.X[dp.relaxation.moment_block], dp.relaxation.basis, dp.relaxation.order);
  const int n = inst.n();
  const int d = n + 4;
  std::vector<double> weights(n);
  std::vector<Mat4> blocks(n);
  for (int i = 0; i < n; ++i) {
    Monomial wi = Monomial::var(d, dp.omega_var(i));
    weights[i] = X.extract(wi);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        Monomial m = wi;
        m.exponents[dp.q_var(a)] += 1;
        m.exponents[dp.q_var(b)] += 1;
        blocks[i](a, b) = X.extract(m);
      }
  }
  SolveOutcome out;
  out.weights = weights;
  auto [q, sel] = round_weighted(weights, blocks);
  out.estimates = {q};
  out.selected_inliers = sel;
  out.f_sdp = sol.objective;
  std::vector<double> r2(n);
  for (int i = 0; i < n; ++i) r2[i] = residual_at(inst.measurements[i], q);
  std::vector<double> w_hat(n, 0.0);
  switch (kind) {
    case DenseKind::MC1:
    case DenseKind::TLS1:
      for (int i = 0; i < n; ++i) w_hat[i] = r2[i] <= inst.c_bar_sq ? 1.0 : 0.0;
      break;
    case DenseKind::LTS2: {
      std::vector<int> idx(n);
      std::iota(idx.begin(), idx.end(), 0);
      std::sort(idx.begin(), idx.end(), [&](int a, int b) { return r2[a] < r2[b]; });
      int k = static_cast<int>(std::lround(alpha * n));
      for (int t = 0; t < k && t < n; ++t) w_hat[idx[t]] = 1.0;
      break;
    }
    case DenseKind::LDR:
      for (int i : sel) w_hat[i] = 1.0;
      break;
  }
  out.f_hat = dense_objective(inst, kind, w_hat, q);
  out.gap = relaxation_gap(out.f_sdp, out.f_hat);
  out.residuals = sol.residuals;
  out.status = sol.status;
  out.iterations = sol.iterations;
  out.seconds = sol.seconds;
  if (sol.status != SdpStatus::Optimal) out.warning = std::string("solver stopped with status ") + sdp_status_name(sol.status);
  return out;
}

}  // namespace rotcert
