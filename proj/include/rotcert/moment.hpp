#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rotcert/poly.hpp"
#include "rotcert/sdp.hpp"

namespace rotcert {

// min objective  s.t.  equalities == 0,  inequalities >= 0.
struct Pop {
  int nvars = 0;
  Polynomial objective;
  std::vector<Polynomial> equalities;
  std::vector<Polynomial> inequalities;

  Pop() = default;
  explicit Pop(int d) : nvars(d), objective(d) {}
  // Appends M^2 - |x|^2 >= 0.
  void add_ball_constraint(double radius_sq);
  int max_degree() const;
  double objective_at(const std::vector<double>& z) const { return objective.eval(z); }
  bool feasible_at(const std::vector<double>& z, double tol) const;
};

struct RelaxationOptions {
  // Adds localizing blocks for products of two or more inequalities.
  bool set_products = false;
};

// A built relaxation together with the indexing needed to read it back.
struct MomentRelaxation {
  MultiBlockSdp sdp;
  int nvars = 0;
  int order = 0;
  std::vector<Monomial> basis;
  int moment_block = 0;
  // One per localizing block: the polynomial and its multiplier basis.
  std::vector<std::pair<Polynomial, std::vector<Monomial>>> localizers;
  std::vector<int> localizer_blocks;
  int moment_rows = 0;
  int equality_rows = 0;
  int localizing_rows = 0;
  std::map<Monomial, std::pair<int, int>, GradedLex> canonical;

  // Block matrices of the relaxation evaluated on the point z (rank one).
  std::vector<Eigen::MatrixXd> lift(const std::vector<double>& z) const;
};

MomentRelaxation build_moment_relaxation(const Pop& pop, int r, const RelaxationOptions& opts = {});
MultiBlockSdp build_relaxation(const Pop& pop, int r, const RelaxationOptions& opts = {});

class PseudoMomentMatrix {
 public:
  PseudoMomentMatrix() = default;
  PseudoMomentMatrix(Eigen::MatrixXd X, std::vector<Monomial> basis, int r);

  const Eigen::MatrixXd& matrix() const { return X_; }
  const std::vector<Monomial>& basis() const { return basis_; }
  int order() const { return r_; }
  // Entry for x^mono from the canonical split: the earliest basis element
  // alpha (lowest degree, then graded-lex) with mono - alpha in the basis.
  double extract(const Monomial& mono) const;
  // lambda_1 / lambda_2; infinity when the second eigenvalue vanishes.
  double eigen_ratio() const;
  // Largest spread among entries that represent the same monomial.
  double consistency_error() const;

 private:
  Eigen::MatrixXd X_;
  std::vector<Monomial> basis_;
  int r_ = 0;
  std::map<Monomial, int, GradedLex> index_;
};

double extract(const PseudoMomentMatrix& X, const Monomial& mono);

struct PopBound {
  double m_star = 0.0;
  double dual_bound = 0.0;
  PseudoMomentMatrix X;
  SdpSolution solution;
};

PopBound pop_lower_bound(const Pop& pop, int r, double tol = 1e-7, SolveOptions opts = {},
                         const RelaxationOptions& ropts = {});

struct SosResult {
  bool is_sos = false;
  std::string reason;
  std::vector<Monomial> basis;
  // PSD Gram matrix (eigenvalues clamped at zero) when is_sos.
  Eigen::MatrixXd gram;
  // Largest lambda with p - lambda * sum(m_a^2) SOS over the basis.
  double margin = 0.0;
  double coefficient_residual = 0.0;
  double min_eigenvalue = 0.0;
  SdpStatus status = SdpStatus::MaxIter;
};

SosResult is_sos(const Polynomial& p, double tol = 1e-6, SolveOptions opts = {});

}  // namespace rotcert
