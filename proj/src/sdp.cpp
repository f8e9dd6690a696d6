#include "rotcert/sdp.hpp"

#include <lapacke.h>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "rotcert/error.hpp"

namespace rotcert {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

// Packed upper-triangular layout of all blocks; off-diagonal entries are
// scaled by sqrt(2) so the Euclidean inner product matches the trace one.
struct Layout {
  std::vector<int> dims;
  std::vector<long long> offset;
  long long total = 0;

  explicit Layout(const std::vector<int>& blocks) : dims(blocks) {
    for (int d : blocks) {
      offset.push_back(total);
      total += static_cast<long long>(d) * (d + 1) / 2;
    }
  }
  long long index(int b, int i, int j) const {
    if (i > j) std::swap(i, j);
    return offset[b] + static_cast<long long>(j) * (j + 1) / 2 + i;
  }
  static double scale(int i, int j) { return i == j ? 1.0 : 1.0 / kSqrt2; }

  void to_dense(const Vec& v, int b, Eigen::MatrixXd& M) const {
    int d = dims[b];
    M.resize(d, d);
    const double* p = v.data() + offset[b];
    for (int j = 0; j < d; ++j) {
      for (int i = 0; i < j; ++i) {
        double x = p[j * (j + 1) / 2 + i] / kSqrt2;
        M(i, j) = x;
        M(j, i) = x;
      }
      M(j, j) = p[j * (j + 1) / 2 + j];
    }
  }
  void from_dense(const Eigen::MatrixXd& M, int b, Vec& v) const {
    int d = dims[b];
    double* p = v.data() + offset[b];
    for (int j = 0; j < d; ++j) {
      for (int i = 0; i < j; ++i) p[j * (j + 1) / 2 + i] = 0.5 * (M(i, j) + M(j, i)) * kSqrt2;
      p[j * (j + 1) / 2 + j] = M(j, j);
    }
  }
};

void check_term(const MultiBlockSdp& sdp, const SdpTerm& t) {
  if (t.block < 0 || t.block >= static_cast<int>(sdp.blocks.size()))
    throw Error(ErrorCode::Dimension, "term references a missing block");
  int d = sdp.blocks[t.block];
  if (t.i < 0 || t.j < 0 || t.i >= d || t.j >= d)
    throw Error(ErrorCode::Dimension, "term index outside its block");
  if (!std::isfinite(t.coeff)) throw Error(ErrorCode::Validation, "non-finite coefficient");
}

Vec form_vector(const Layout& L, const LinearForm& f) {
  Vec v = Vec::Zero(L.total);
  for (const auto& t : f.terms()) v[L.index(t.block, t.i, t.j)] += t.coeff * Layout::scale(t.i, t.j);
  return v;
}

SpMat rows_matrix(const Layout& L, const MultiBlockSdp& sdp) {
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < sdp.num_rows(); ++k)
    for (const auto& t : sdp.rows[k].terms())
      trip.emplace_back(k, static_cast<int>(L.index(t.block, t.i, t.j)),
                        t.coeff * Layout::scale(t.i, t.j));
  SpMat A(sdp.num_rows(), static_cast<int>(L.total));
  A.setFromTriplets(trip.begin(), trip.end());
  A.prune(0.0);
  return A;
}

// Symmetric eigendecomposition; eigenvalues ascending.
void eig_sym(Eigen::MatrixXd& M, Vec& w) {
  int d = static_cast<int>(M.rows());
  w.resize(d);
  if (d >= 24) {
    int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', d, M.data(), d, w.data());
    if (info == 0) return;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  w = es.eigenvalues();
  M = es.eigenvectors();
}

// Eigenpairs of the symmetric M with eigenvalues in (lo, hi]; M is destroyed.
// Returns the count, or -1 if LAPACK fails.
int eig_range(Eigen::MatrixXd& M, double lo, double hi, Vec& w, Eigen::MatrixXd& Z) {
  const int d = static_cast<int>(M.rows());
  w.resize(d);
  Z.resize(d, d);
  std::vector<lapack_int> support(2 * d);
  lapack_int found = 0;
  int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'V', 'L', d, M.data(), d, lo, hi, 0, 0, 0.0, &found,
                            w.data(), Z.data(), d, support.data());
  return info == 0 ? static_cast<int>(found) : -1;
}

// Splits V into its PSD part P and the remainder V - P (which is NSD).
// On return pos holds P and neg holds -(V - P) = Pi_psd(-V).
struct Projector {
  Eigen::MatrixXd V, Z, W, T;
  Vec w;
  // Per block: which eigenspace was smaller last time (+1 positive, -1
  // negative) and its dimension.
  std::vector<int> small_side, small_count;

  // Low-rank part sum_k |w_k| z_k z_k^T from the first cnt pairs.
  void low_rank(int cnt, Eigen::MatrixXd& P) {
    const int d = static_cast<int>(V.rows());
    W = Z.leftCols(cnt);
    for (int k = 0; k < cnt; ++k) W.col(k) *= std::sqrt(std::abs(w[k]));
    P = Eigen::MatrixXd::Zero(d, d);
    if (cnt > 0) P.selfadjointView<Eigen::Lower>().rankUpdate(W);
    P = P.selfadjointView<Eigen::Lower>();
  }

  // Large blocks whose smaller eigenspace was thin last time: compute only
  // that eigenspace.
  bool split_partial(const Layout& L, int b, Vec& pos, Vec& neg) {
    const int d = static_cast<int>(V.rows());
    if (small_side[b] == 0 || 8 * small_count[b] > d) return false;
    const bool neg_side = small_side[b] < 0;
    const double bound = V.norm() + 1.0;
    T = V;
    int cnt = neg_side ? eig_range(T, -bound, 0.0, w, Z) : eig_range(T, 0.0, bound, w, Z);
    if (cnt < 0 || 4 * cnt > d) return false;
    small_count[b] = cnt;
    Eigen::MatrixXd P;
    low_rank(cnt, P);
    if (neg_side) {
      L.from_dense(P, b, neg);
      L.from_dense(V + P, b, pos);
    } else {
      L.from_dense(P, b, pos);
      L.from_dense(P - V, b, neg);
    }
    return true;
  }

  void split(const Layout& L, int b, const Vec& v, Vec& pos, Vec& neg) {
    int d = L.dims[b];
    long long o = L.offset[b];
    if (d == 1) {
      double x = v[o];
      pos[o] = std::max(x, 0.0);
      neg[o] = std::max(-x, 0.0);
      return;
    }
    L.to_dense(v, b, V);
    if (small_side.size() < L.dims.size()) {
      small_side.assign(L.dims.size(), 0);
      small_count.assign(L.dims.size(), 0);
    }
    if (d >= 24 && split_partial(L, b, pos, neg)) return;
    Z = V;
    eig_sym(Z, w);
    int npos = 0;
    for (int k = 0; k < d; ++k)
      if (w[k] > 0) ++npos;
    int nneg = d - npos;
    small_side[b] = npos <= nneg ? 1 : -1;
    small_count[b] = std::min(npos, nneg);
    Eigen::MatrixXd P;
    if (npos <= nneg) {
      W = Z.rightCols(npos);
      for (int k = 0; k < npos; ++k) W.col(k) *= std::sqrt(w[nneg + k]);
      P = Eigen::MatrixXd::Zero(d, d);
      if (npos > 0) P.selfadjointView<Eigen::Lower>().rankUpdate(W);
      P = P.selfadjointView<Eigen::Lower>();
      L.from_dense(P, b, pos);
      L.from_dense(P - V, b, neg);
    } else {
      W = Z.leftCols(nneg);
      for (int k = 0; k < nneg; ++k) W.col(k) *= std::sqrt(-w[k]);
      P = Eigen::MatrixXd::Zero(d, d);
      if (nneg > 0) P.selfadjointView<Eigen::Lower>().rankUpdate(W);
      P = P.selfadjointView<Eigen::Lower>();
      L.from_dense(P, b, neg);
      L.from_dense(V + P, b, pos);
    }
  }
};

// Type-II Anderson extrapolation over the last few fixed-point steps.
class Anderson {
 public:
  explicit Anderson(int memory) : mem_(memory) {}
  void reset() {
    dz_.clear();
    dg_.clear();
    gram_.resize(0, 0);
    have_prev_ = false;
  }
  // z is the current point, g = T(z) - z. Returns false when no extrapolation
  // is available; otherwise out holds the accelerated point.
  bool step(const Vec& z, const Vec& g, Vec& out) {
    if (mem_ <= 0) return false;
    if (have_prev_) {
      if (static_cast<int>(dz_.size()) == mem_) {
        dz_.erase(dz_.begin());
        dg_.erase(dg_.begin());
        const int k = static_cast<int>(dg_.size());
        Eigen::MatrixXd G = gram_.bottomRightCorner(k, k);
        gram_ = G;
      }
      dz_.push_back(z - z_prev_);
      dg_.push_back(g - g_prev_);
      const int k = static_cast<int>(dg_.size());
      gram_.conservativeResize(k, k);
      for (int a = 0; a < k; ++a) gram_(a, k - 1) = gram_(k - 1, a) = dg_[a].dot(dg_[k - 1]);
    }
    z_prev_ = z;
    g_prev_ = g;
    have_prev_ = true;
    const int k = static_cast<int>(dg_.size());
    if (k == 0) return false;
    Vec r(k);
    for (int a = 0; a < k; ++a) r[a] = dg_[a].dot(g);
    Eigen::MatrixXd G = gram_;
    G.diagonal().array() += 1e-10 * (G.trace() / k) + 1e-300;
    Vec gamma = G.ldlt().solve(r);
    // Huge weights mean the recent steps are nearly collinear, as on a
    // diverging (infeasible) run; plain steps are safer there.
    if (!gamma.allFinite() || gamma.lpNorm<Eigen::Infinity>() > 1e4) return false;
    out = z + g;
    for (int a = 0; a < k; ++a) out -= gamma[a] * (dz_[a] + dg_[a]);
    return out.allFinite();
  }

 private:
  int mem_;
  std::vector<Vec> dz_, dg_;
  Eigen::MatrixXd gram_;
  Vec z_prev_, g_prev_;
  bool have_prev_ = false;
};

double max_eig_block(const Layout& L, int b, const Vec& v) {
  Eigen::MatrixXd M;
  L.to_dense(v, b, M);
  if (M.rows() == 1) return M(0, 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[M.rows() - 1];
}

}  // namespace

LinearForm& LinearForm::add(int block, int i, int j, double coeff) {
  if (coeff == 0.0) return *this;
  if (i > j) std::swap(i, j);
  terms_.push_back({block, i, j, coeff});
  return *this;
}

double LinearForm::apply(const std::vector<Eigen::MatrixXd>& X) const {
  double s = 0.0;
  for (const auto& t : terms_) s += t.coeff * X.at(t.block)(t.i, t.j);
  return s;
}

int MultiBlockSdp::add_block(int dim) {
  if (dim < 1) throw Error(ErrorCode::Dimension, "block dimension must be positive");
  blocks.push_back(dim);
  return static_cast<int>(blocks.size()) - 1;
}

int MultiBlockSdp::add_row(const LinearForm& f, double rhs) {
  rows.push_back(f);
  b.push_back(rhs);
  return static_cast<int>(rows.size()) - 1;
}

int MultiBlockSdp::total_dimension() const {
  int s = 0;
  for (int d : blocks) s += d;
  return s;
}

long long MultiBlockSdp::num_entries() const { return Layout(blocks).total; }

namespace {
Eigen::MatrixXd dense_of(const LinearForm& f, int block, int d) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(d, d);
  for (const auto& t : f.terms()) {
    if (t.block != block) continue;
    if (t.i == t.j) {
      M(t.i, t.i) += t.coeff;
    } else {
      M(t.i, t.j) += 0.5 * t.coeff;
      M(t.j, t.i) += 0.5 * t.coeff;
    }
  }
  return M;
}
}  // namespace

Eigen::MatrixXd MultiBlockSdp::cost_matrix(int block) const {
  return dense_of(objective, block, blocks.at(block));
}

Eigen::MatrixXd MultiBlockSdp::constraint_matrix(int row, int block) const {
  return dense_of(rows.at(row), block, blocks.at(block));
}

void MultiBlockSdp::validate() const {
  if (rows.size() != b.size()) throw Error(ErrorCode::Dimension, "rows and b differ in length");
  for (int d : blocks)
    if (d < 1) throw Error(ErrorCode::Dimension, "block dimension must be positive");
  for (const auto& t : objective.terms()) check_term(*this, t);
  for (const auto& r : rows)
    for (const auto& t : r.terms()) check_term(*this, t);
  for (double v : b)
    if (!std::isfinite(v)) throw Error(ErrorCode::Validation, "non-finite right-hand side");
}

std::string MultiBlockSdp::dump() const {
  std::ostringstream os;
  os.precision(17);
  os << "blocks " << blocks.size();
  for (int d : blocks) os << ' ' << d;
  os << "\nrows " << rows.size() << "\nconst " << objective_constant << '\n';
  for (const auto& t : objective.terms())
    os << "c " << t.block << ' ' << t.i << ' ' << t.j << ' ' << t.coeff << '\n';
  for (size_t k = 0; k < rows.size(); ++k) {
    for (const auto& t : rows[k].terms())
      os << "a " << k << ' ' << t.block << ' ' << t.i << ' ' << t.j << ' ' << t.coeff << '\n';
    os << "b " << k << ' ' << b[k] << '\n';
  }
  return os.str();
}

MultiBlockSdp MultiBlockSdp::parse_dump(const std::string& text) {
  MultiBlockSdp sdp;
  std::istringstream in(text);
  std::string tag;
  int lineno = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    if (!(ls >> tag) || tag[0] == '#') continue;
    bool ok = true;
    if (tag == "blocks") {
      size_t l = 0;
      ok = static_cast<bool>(ls >> l);
      for (size_t k = 0; ok && k < l; ++k) {
        int d;
        ok = static_cast<bool>(ls >> d);
        if (ok) sdp.add_block(d);
      }
    } else if (tag == "rows") {
      size_t m = 0;
      ok = static_cast<bool>(ls >> m);
      sdp.rows.assign(m, LinearForm());
      sdp.b.assign(m, 0.0);
    } else if (tag == "const") {
      ok = static_cast<bool>(ls >> sdp.objective_constant);
    } else if (tag == "c") {
      int blk, i, j;
      double c;
      ok = static_cast<bool>(ls >> blk >> i >> j >> c);
      if (ok) sdp.objective.add(blk, i, j, c);
    } else if (tag == "a") {
      size_t k;
      int blk, i, j;
      double c;
      ok = static_cast<bool>(ls >> k >> blk >> i >> j >> c) && k < sdp.rows.size();
      if (ok) sdp.rows[k].add(blk, i, j, c);
    } else if (tag == "b") {
      size_t k;
      double v;
      ok = static_cast<bool>(ls >> k >> v) && k < sdp.b.size();
      if (ok) sdp.b[k] = v;
    } else {
      ok = false;
    }
    if (!ok) throw Error(ErrorCode::Parse, "sdp dump line " + std::to_string(lineno));
  }
  sdp.validate();
  return sdp;
}

const char* sdp_status_name(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal: return "Optimal";
    case SdpStatus::MaxIter: return "MaxIter";
    case SdpStatus::Infeasible: return "Infeasible";
  }
  return "?";
}

Eigen::VectorXd row_residuals(const MultiBlockSdp& sdp, const std::vector<Eigen::MatrixXd>& X) {
  Vec r(sdp.num_rows());
  for (int k = 0; k < sdp.num_rows(); ++k) r[k] = sdp.rows[k].apply(X) - sdp.b[k];
  return r;
}

KktResiduals kkt_residuals(const MultiBlockSdp& sdp, const std::vector<Eigen::MatrixXd>& X,
                           const Eigen::VectorXd& y, const std::vector<Eigen::MatrixXd>& S) {
  sdp.validate();
  const size_t l = sdp.blocks.size();
  if (X.size() != l || S.size() != l || y.size() != sdp.num_rows())
    throw Error(ErrorCode::Dimension, "solution shapes do not match the program");
  for (size_t k = 0; k < l; ++k)
    if (X[k].rows() != sdp.blocks[k] || X[k].cols() != sdp.blocks[k] ||
        S[k].rows() != sdp.blocks[k] || S[k].cols() != sdp.blocks[k])
      throw Error(ErrorCode::Dimension, "block shape mismatch");
  Layout L(sdp.blocks);
  SpMat A = rows_matrix(L, sdp);
  Vec c = form_vector(L, sdp.objective);
  Vec x(L.total), s(L.total);
  for (size_t k = 0; k < l; ++k) {
    L.from_dense(X[k], static_cast<int>(k), x);
    L.from_dense(S[k], static_cast<int>(k), s);
  }
  Vec bv = Eigen::Map<const Vec>(sdp.b.data(), sdp.b.size());
  KktResiduals r;
  r.primal = (A * x - bv).norm() / (1.0 + bv.norm());
  r.dual = (Vec(A.transpose() * y) + s - c).norm() / (1.0 + c.norm());
  double pc = c.dot(x), db = bv.dot(y);
  r.gap = std::abs(pc - db) / (1.0 + std::abs(pc) + std::abs(db));
  return r;
}

SdpSolution solve(const MultiBlockSdp& sdp, const SolveOptions& opts) {
  sdp.validate();
  auto t_start = std::chrono::steady_clock::now();
  Layout L(sdp.blocks);
  const int m = sdp.num_rows();
  const int nb = static_cast<int>(sdp.blocks.size());

  SpMat A = rows_matrix(L, sdp);
  Vec c = form_vector(L, sdp.objective);
  Vec b = Eigen::Map<const Vec>(sdp.b.data(), m);

  SdpSolution sol;
  auto finish_time = [&] {
    sol.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  };

  // Row normalization; an empty row with nonzero rhs is infeasible outright.
  Vec rnorm(m);
  for (int k = 0; k < m; ++k) rnorm[k] = 0.0;
  for (int j = 0; j < A.outerSize(); ++j)
    for (SpMat::InnerIterator it(A, j); it; ++it) rnorm[it.row()] += it.value() * it.value();
  for (int k = 0; k < m; ++k) {
    rnorm[k] = std::sqrt(rnorm[k]);
    if (rnorm[k] == 0.0) {
      if (b[k] != 0.0) {
        sol.status = SdpStatus::Infeasible;
        sol.certificate = Vec::Zero(m);
        sol.certificate[k] = b[k] > 0 ? 1.0 : -1.0;
        for (int blk = 0; blk < nb; ++blk) {
          sol.X.push_back(Eigen::MatrixXd::Zero(sdp.blocks[blk], sdp.blocks[blk]));
          sol.S.push_back(Eigen::MatrixXd::Zero(sdp.blocks[blk], sdp.blocks[blk]));
        }
        sol.y = Vec::Zero(m);
        finish_time();
        return sol;
      }
      rnorm[k] = 1.0;
    }
  }
  Vec dinv = rnorm.cwiseInverse();
  SpMat As = dinv.asDiagonal() * A;
  SpMat AsT = As.transpose();
  Vec bs = dinv.cwiseProduct(b);
  const double sig_b = std::max(1.0, bs.norm());
  const double sig_c = std::max(1.0, c.norm()) / opts.objective_weight;
  bs /= sig_b;
  Vec cs = c / sig_c;

  // Normal equations; redundant rows make A A^T singular, and the small
  // shift turns the solve into a least-squares projection onto range(A).
  SpMat K = As * AsT;
  SpMat I(m, m);
  I.setIdentity();
  K += 1e-10 * I;
  Eigen::SimplicialLDLT<SpMat> chol;
  if (m > 0) {
    chol.compute(K);
    if (chol.info() != Eigen::Success) throw Error(ErrorCode::Validation, "normal equations factorization failed");
  }

  const double bnorm = b.norm(), cnorm = c.norm();
  Vec x = Vec::Zero(L.total), s = Vec::Zero(L.total), y = Vec::Zero(m);
  auto warm = [&](const std::vector<Eigen::MatrixXd>& src, Vec& dst, double scale) {
    if (src.empty()) return;
    if (static_cast<int>(src.size()) != nb) throw Error(ErrorCode::Dimension, "warm start has wrong block count");
    for (int blk = 0; blk < nb; ++blk) {
      if (src[blk].rows() != sdp.blocks[blk] || src[blk].cols() != sdp.blocks[blk])
        throw Error(ErrorCode::Dimension, "warm start block has wrong size");
      L.from_dense(src[blk], blk, dst);
    }
    dst /= scale;
  };
  warm(opts.X0, x, sig_b);
  warm(opts.S0, s, sig_c);
  Vec v(L.total), pos(L.total), neg(L.total), xn(L.total);
  Vec rhs(m), Asx(m);
  Projector proj;
  double mu = opts.mu0;
  const double rho = opts.relaxation;
  double log_ratio_sum = 0.0;
  int ratio_count = 0;

  Vec y_window = y;
  double dobj_window = 0.0;
  const int inf_window = 100;

  auto unscaled = [&](KktResiduals& r, double& pobj, double& dobj, const Vec& xk, const Vec& yk,
                      const Vec& sk) {
    Vec rp = As * xk - bs;
    double pr = sig_b * rnorm.cwiseProduct(rp).norm();
    double du = sig_c * (Vec(AsT * yk) + sk - cs).norm();
    pobj = sig_b * sig_c * cs.dot(xk);
    dobj = sig_b * sig_c * bs.dot(yk);
    r.primal = pr / (1.0 + bnorm);
    r.dual = du / (1.0 + cnorm);
    r.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
  };

  // One pass of the splitting map on the state (x, s).
  const long long N = L.total;
  Vec z(2 * N), zt(2 * N), za(2 * N), fallback(2 * N), g(2 * N);
  z << x, s;
  auto apply_map = [&](const Vec& zin, Vec& zout) {
    auto xin = zin.head(N);
    auto sin = zin.tail(N);
    Asx = As * xin;
    rhs = mu * (bs - Asx) + As * (cs - sin);
    y = m > 0 ? Vec(chol.solve(rhs)) : Vec(0);
    v = cs - AsT * y - mu * xin;
    for (int blk = 0; blk < nb; ++blk) proj.split(L, blk, v, pos, neg);
    xn = neg / mu;
    zout.head(N) = (1.0 - rho) * xin + rho * xn;
    zout.tail(N) = pos;
  };
  Anderson aa(opts.anderson_memory);
  bool pending = false;
  double gnorm_ref = 0.0;
  int rejected = 0;

  int iter = 0;
  KktResiduals res;
  double pobj = 0.0, dobj = 0.0;
  bool converged = false, infeasible = false;
  for (iter = 1; iter <= opts.max_iter; ++iter) {
    apply_map(z, zt);
    g = zt - z;
    if (pending) {
      pending = false;
      // Reject an extrapolated point that made the fixed-point residual worse.
      if (g.norm() > opts.anderson_safeguard * gnorm_ref) {
        ++rejected;
        aa.reset();
        z = fallback;
        apply_map(z, zt);
        g = zt - z;
      }
    }
    s = zt.tail(N);

    unscaled(res, pobj, dobj, xn, y, s);
    sol.objective_history.push_back(pobj + sdp.objective_constant);
    if (opts.verbose > 1 && (iter % 100 == 0 || iter == 1))
      std::fprintf(stderr, "it %6d mu %.2e pobj %+.9e dobj %+.9e rp %.2e rd %.2e gap %.2e\n", iter,
                   mu, pobj, dobj, res.primal, res.dual, res.gap);
    if (res.max() <= opts.tol) {
      converged = true;
      break;
    }
    if (opts.early_stop) {
      IterationInfo info{iter, pobj + sdp.objective_constant, dobj + sdp.objective_constant, res};
      if (opts.early_stop(info)) break;
    }
    if (opts.time_limit > 0.0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count() >
            opts.time_limit)
      break;

    // Balance the two residuals through the penalty parameter.
    double prs = (As * xn - bs).norm() / (1.0 + bs.norm());
    double drs = (Vec(AsT * y) + s - cs).norm() / (1.0 + cs.norm());
    if (prs > 0 && drs > 0) {
      log_ratio_sum += std::log(prs / drs);
      ++ratio_count;
    }
    bool mu_changed = false;
    if (ratio_count == 20) {
      double lr = log_ratio_sum / ratio_count;
      double mu_old = mu;
      if (lr > std::log(1.5))
        mu = std::min(mu * 1.6, 1e6);
      else if (lr < -std::log(1.5))
        mu = std::max(mu / 1.6, 1e-6);
      mu_changed = mu != mu_old;
      log_ratio_sum = 0.0;
      ratio_count = 0;
    }

    // Diverging dual iterates along a ray with A^* d <= 0 and <b, d> > 0
    // certify primal infeasibility.
    if (iter % inf_window == 0) {
      double dob = bs.dot(y);
      if (iter >= 2 * inf_window && dob - dobj_window > 1.0) {
        Vec d = y - y_window;
        double bd = bs.dot(d);
        if (bd > 0) {
          Vec ad = AsT * d;
          double lam = -1e300;
          for (int blk = 0; blk < nb; ++blk) lam = std::max(lam, max_eig_block(L, blk, ad));
          if (lam <= 1e-6 * bd) {
            sol.certificate = dinv.cwiseProduct(d) / bd;
            infeasible = true;
            break;
          }
        }
      }
      y_window = y;
      dobj_window = dob;
    }

    if (mu_changed) {
      aa.reset();
      z = zt;
    } else if (aa.step(z, g, za)) {
      fallback = zt;
      gnorm_ref = g.norm();
      pending = true;
      z = za;
    } else {
      z = zt;
    }
  }
  sol.iterations = std::min(iter, opts.max_iter);
  sol.status = converged ? SdpStatus::Optimal
                         : (infeasible ? SdpStatus::Infeasible : SdpStatus::MaxIter);

  Vec xu = sig_b * xn, su = sig_c * s;
  sol.y = sig_c * dinv.cwiseProduct(y);
  for (int blk = 0; blk < nb; ++blk) {
    Eigen::MatrixXd M;
    L.to_dense(xu, blk, M);
    sol.X.push_back(M);
    L.to_dense(su, blk, M);
    sol.S.push_back(M);
  }
  sol.residuals = res;
  sol.objective = pobj + sdp.objective_constant;
  sol.dual_objective = dobj + sdp.objective_constant;
  finish_time();
  if (opts.verbose > 0)
    std::fprintf(stderr, "sdp: %s after %d iterations (%d rejected extrapolations), %.2fs, obj %.9g, res %.1e/%.1e/%.1e\n",
                 sdp_status_name(sol.status), sol.iterations, rejected, sol.seconds, sol.objective,
                 res.primal, res.dual, res.gap);
  return sol;
}

}  // namespace rotcert
