#include "rotcert/moment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rotcert/error.hpp"

namespace rotcert {

namespace {

// Degree-overflow-safe division: mono / alpha if alpha divides mono.
bool divides(const Monomial& alpha, const Monomial& mono, Monomial& out) {
  out = mono;
  for (int k = 0; k < mono.nvars(); ++k) {
    out.exponents[k] -= alpha.exponents[k];
    if (out.exponents[k] < 0) return false;
  }
  return true;
}

void require_nvars(const Polynomial& p, int d, const char* what) {
  if (p.nvars() != d)
    throw Error(ErrorCode::Dimension, std::string(what) + " has the wrong number of variables");
}

Eigen::VectorXd eval_basis(const std::vector<Monomial>& basis, const std::vector<double>& z) {
  Eigen::VectorXd v(basis.size());
  for (size_t a = 0; a < basis.size(); ++a) v[a] = Polynomial::monomial(basis[a]).eval(z);
  return v;
}

}  // namespace

void Pop::add_ball_constraint(double radius_sq) {
  Polynomial g = Polynomial::constant(nvars, radius_sq);
  for (int k = 0; k < nvars; ++k) {
    Polynomial x = Polynomial::variable(nvars, k);
    g -= x * x;
  }
  inequalities.push_back(g);
}

int Pop::max_degree() const {
  int d = objective.degree();
  for (const auto& h : equalities) d = std::max(d, h.degree());
  for (const auto& g : inequalities) d = std::max(d, g.degree());
  return d;
}

bool Pop::feasible_at(const std::vector<double>& z, double tol) const {
  for (const auto& h : equalities)
    if (std::abs(h.eval(z)) > tol) return false;
  for (const auto& g : inequalities)
    if (g.eval(z) < -tol) return false;
  return true;
}

std::vector<Eigen::MatrixXd> MomentRelaxation::lift(const std::vector<double>& z) const {
  std::vector<Eigen::MatrixXd> out(sdp.blocks.size());
  for (size_t k = 0; k < sdp.blocks.size(); ++k)
    out[k] = Eigen::MatrixXd::Zero(sdp.blocks[k], sdp.blocks[k]);
  Eigen::VectorXd m = eval_basis(basis, z);
  out[moment_block] = m * m.transpose();
  for (size_t j = 0; j < localizers.size(); ++j) {
    Eigen::VectorXd u = eval_basis(localizers[j].second, z);
    out[localizer_blocks[j]] = localizers[j].first.eval(z) * u * u.transpose();
  }
  return out;
}

MomentRelaxation build_moment_relaxation(const Pop& pop, int r, const RelaxationOptions& opts) {
  const int d = pop.nvars;
  if (d < 1) throw Error(ErrorCode::Dimension, "POP needs at least one variable");
  if (r < 0) throw Error(ErrorCode::Order, "relaxation order must be nonnegative");
  require_nvars(pop.objective, d, "objective");
  for (const auto& h : pop.equalities) require_nvars(h, d, "equality");
  for (const auto& g : pop.inequalities) require_nvars(g, d, "inequality");
  auto check_order = [&](const Polynomial& p, const std::string& what) {
    if (p.degree() > 2 * r)
      throw Error(ErrorCode::Order, "relaxation order " + std::to_string(r) + " too small: " + what +
                                        " has degree " + std::to_string(p.degree()) +
                                        " > 2r = " + std::to_string(2 * r));
  };
  check_order(pop.objective, "objective");
  for (size_t i = 0; i < pop.equalities.size(); ++i)
    check_order(pop.equalities[i], "equality " + std::to_string(i));
  for (size_t j = 0; j < pop.inequalities.size(); ++j)
    check_order(pop.inequalities[j], "inequality " + std::to_string(j));

  MomentRelaxation rel;
  rel.nvars = d;
  rel.order = r;
  rel.basis = basis(d, r);
  const int N = static_cast<int>(rel.basis.size());
  MultiBlockSdp& sdp = rel.sdp;
  rel.moment_block = sdp.add_block(N);

  // Moment consistency: every entry equals the canonical entry of its monomial.
  for (int a = 0; a < N; ++a) {
    for (int b = a; b < N; ++b) {
      Monomial g = rel.basis[a] * rel.basis[b];
      auto it = rel.canonical.find(g);
      if (it == rel.canonical.end()) {
        rel.canonical.emplace(g, std::make_pair(a, b));
      } else {
        LinearForm f;
        f.add(rel.moment_block, a, b, 1.0).add(rel.moment_block, it->second.first, it->second.second, -1.0);
        sdp.add_row(f, 0.0);
      }
    }
  }
  {
    LinearForm f;
    f.add(rel.moment_block, 0, 0, 1.0);
    sdp.add_row(f, 1.0);
  }
  rel.moment_rows = sdp.num_rows();

  auto moment_form = [&](const Polynomial& p, LinearForm& f, double scale) {
    for (const auto& [mono, c] : p.terms()) {
      const auto& pos = rel.canonical.at(mono);
      f.add(rel.moment_block, pos.first, pos.second, scale * c);
    }
  };

  for (const auto& h : pop.equalities) {
    int dh = std::max(h.degree(), 0);
    for (const auto& beta : basis(d, 2 * r - dh)) {
      LinearForm f;
      moment_form(h * Polynomial::monomial(beta), f, 1.0);
      if (!f.empty()) sdp.add_row(f, 0.0);
    }
  }
  rel.equality_rows = sdp.num_rows() - rel.moment_rows;

  std::vector<Polynomial> loc_polys = pop.inequalities;
  if (opts.set_products) {
    const int l = static_cast<int>(pop.inequalities.size());
    if (l > 20) throw Error(ErrorCode::Unsupported, "too many inequalities for set products");
    for (unsigned mask = 1; mask < (1u << l); ++mask) {
      if (__builtin_popcount(mask) < 2) continue;
      Polynomial prod = Polynomial::constant(d, 1.0);
      for (int j = 0; j < l; ++j)
        if (mask & (1u << j)) prod = prod * pop.inequalities[j];
      if (prod.degree() <= 2 * r) loc_polys.push_back(prod);
    }
  }
  for (const auto& g : loc_polys) {
    int s = (std::max(g.degree(), 0) + 1) / 2;
    auto lb = basis(d, r - s);
    int blk = sdp.add_block(static_cast<int>(lb.size()));
    for (size_t a = 0; a < lb.size(); ++a) {
      for (size_t b = a; b < lb.size(); ++b) {
        LinearForm f;
        f.add(blk, static_cast<int>(a), static_cast<int>(b), 1.0);
        moment_form(g * Polynomial::monomial(lb[a] * lb[b]), f, -1.0);
        sdp.add_row(f, 0.0);
      }
    }
    rel.localizers.emplace_back(g, lb);
    rel.localizer_blocks.push_back(blk);
  }
  rel.localizing_rows = sdp.num_rows() - rel.moment_rows - rel.equality_rows;

  LinearForm obj;
  for (const auto& [mono, c] : pop.objective.terms()) {
    if (mono.degree() == 0) {
      sdp.objective_constant += c;
      continue;
    }
    const auto& pos = rel.canonical.at(mono);
    obj.add(rel.moment_block, pos.first, pos.second, c);
  }
  sdp.objective = obj;
  return rel;
}

MultiBlockSdp build_relaxation(const Pop& pop, int r, const RelaxationOptions& opts) {
  return build_moment_relaxation(pop, r, opts).sdp;
}

PseudoMomentMatrix::PseudoMomentMatrix(Eigen::MatrixXd X, std::vector<Monomial> basis, int r)
    : X_(std::move(X)), basis_(std::move(basis)), r_(r) {
  if (X_.rows() != static_cast<long>(basis_.size()) || X_.cols() != X_.rows())
    throw Error(ErrorCode::Dimension, "moment matrix does not match its basis");
  for (size_t a = 0; a < basis_.size(); ++a) index_.emplace(basis_[a], static_cast<int>(a));
}

double PseudoMomentMatrix::extract(const Monomial& mono) const {
  if (basis_.empty()) throw Error(ErrorCode::Dimension, "empty moment matrix");
  if (mono.nvars() != basis_[0].nvars()) throw Error(ErrorCode::Dimension, "monomial nvars mismatch");
  if (mono.degree() > 2 * r_)
    throw Error(ErrorCode::Order, "monomial degree " + std::to_string(mono.degree()) +
                                      " exceeds 2r = " + std::to_string(2 * r_));
  Monomial rest;
  for (size_t a = 0; a < basis_.size(); ++a) {
    if (!divides(basis_[a], mono, rest)) continue;
    auto it = index_.find(rest);
    if (it != index_.end()) return X_(a, it->second);
  }
  throw Error(ErrorCode::Order, "monomial not representable in the moment matrix");
}

double PseudoMomentMatrix::eigen_ratio() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X_, Eigen::EigenvaluesOnly);
  const auto& w = es.eigenvalues();
  int n = static_cast<int>(w.size());
  if (n < 2) return std::numeric_limits<double>::infinity();
  double l2 = std::max(w[n - 2], 0.0);
  return l2 == 0.0 ? std::numeric_limits<double>::infinity() : w[n - 1] / l2;
}

double PseudoMomentMatrix::consistency_error() const {
  std::map<Monomial, std::pair<double, double>, GradedLex> span;
  for (size_t a = 0; a < basis_.size(); ++a)
    for (size_t b = a; b < basis_.size(); ++b) {
      Monomial g = basis_[a] * basis_[b];
      double v = X_(a, b);
      auto [it, fresh] = span.emplace(g, std::make_pair(v, v));
      if (!fresh) {
        it->second.first = std::min(it->second.first, v);
        it->second.second = std::max(it->second.second, v);
      }
    }
  double e = 0.0;
  for (const auto& [g, mm] : span) e = std::max(e, mm.second - mm.first);
  return e;
}

double extract(const PseudoMomentMatrix& X, const Monomial& mono) { return X.extract(mono); }

PopBound pop_lower_bound(const Pop& pop, int r, double tol, SolveOptions opts,
                         const RelaxationOptions& ropts) {
  MomentRelaxation rel = build_moment_relaxation(pop, r, ropts);
  opts.tol = tol;
  PopBound out;
  out.solution = solve(rel.sdp, opts);
  out.m_star = out.solution.objective;
  out.dual_bound = out.solution.dual_objective;
  out.X = PseudoMomentMatrix(out.solution.X[rel.moment_block], rel.basis, r);
  return out;
}

SosResult is_sos(const Polynomial& p, double tol, SolveOptions opts) {
  SosResult res;
  const int d = p.nvars();
  if (p.is_zero()) {
    res.is_sos = true;
    res.reason = "zero polynomial";
    res.status = SdpStatus::Optimal;
    return res;
  }
  int deg = p.degree();
  if (deg % 2 != 0) {
    res.reason = "odd degree " + std::to_string(deg);
    return res;
  }
  if (d < 1) throw Error(ErrorCode::Dimension, "polynomial has no variables");
  // Homogeneous forms only need monomials of exactly half the degree.
  res.basis = p.is_homogeneous() ? homogeneous_basis(d, deg / 2) : basis(d, deg / 2);
  const auto& B = res.basis;
  const int N = static_cast<int>(B.size());

  std::map<Monomial, std::vector<std::pair<int, int>>, GradedLex> support;
  for (int a = 0; a < N; ++a)
    for (int b = a; b < N; ++b) support[B[a] * B[b]].emplace_back(a, b);
  for (const auto& [mono, c] : p.terms())
    if (!support.count(mono)) {
      res.reason = "term " + Polynomial::monomial(mono, c).to_string() + " outside the Gram support";
      return res;
    }

  // Any symmetric Gram matrix of p, shifted to PSD, gives a feasible start
  // for lambda and hence a finite offset lambda0.
  Eigen::MatrixXd G0 = Eigen::MatrixXd::Zero(N, N);
  for (const auto& [mono, pos] : support) {
    double c = p.coeff(mono);
    if (c == 0.0) continue;
    double w = 0.0;
    for (const auto& [a, b] : pos) w += a == b ? 1.0 : 2.0;
    for (const auto& [a, b] : pos) {
      G0(a, b) = c / w;
      G0(b, a) = c / w;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es0(G0, Eigen::EigenvaluesOnly);
  const double lambda0 = std::max(0.0, -es0.eigenvalues()[0]) + 1.0;

  // p - (t - lambda0) * sum_a m_a^2 = m^T G m,  G >= 0,  t >= 0,  max t.
  MultiBlockSdp sdp;
  int gb = sdp.add_block(N);
  int tb = sdp.add_block(1);
  for (const auto& [mono, pos] : support) {
    LinearForm f;
    double theta = 0.0;
    for (const auto& [a, b] : pos) {
      f.add(gb, a, b, a == b ? 1.0 : 2.0);
      if (a == b) theta += 1.0;
    }
    if (theta != 0.0) f.add(tb, 0, 0, theta);
    sdp.add_row(f, p.coeff(mono) + lambda0 * theta);
  }
  sdp.objective.add(tb, 0, 0, -1.0);

  opts.tol = std::min(opts.tol, 1e-2 * tol);
  SdpSolution sol = solve(sdp, opts);
  res.status = sol.status;
  res.margin = sol.X[tb](0, 0) - lambda0;
  Eigen::MatrixXd Gp = sol.X[gb] + res.margin * Eigen::MatrixXd::Identity(N, N);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Gp);
  res.min_eigenvalue = es.eigenvalues()[0];
  Eigen::VectorXd w = es.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd Gc = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();

  double mismatch = 0.0;
  for (const auto& [mono, pos] : support) {
    double s = 0.0;
    for (const auto& [a, b] : pos) s += (a == b ? 1.0 : 2.0) * Gc(a, b);
    mismatch += std::abs(s - p.coeff(mono));
  }
  res.coefficient_residual = mismatch;
  res.is_sos = mismatch <= tol * (1.0 + p.l1_norm());
  if (res.is_sos) {
    res.gram = Gc;
    res.reason = "PSD Gram matrix found";
  } else {
    res.reason = "no PSD Gram matrix within tolerance (margin " + std::to_string(res.margin) + ")";
  }
  return res;
}

}  // namespace rotcert
