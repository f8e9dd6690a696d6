#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace rotcert {

// One coefficient of a linear functional on block-diagonal X:
// contributes coeff * X_block(i, j) with i <= j after normalization.
struct SdpTerm {
  int block;
  int i;
  int j;
  double coeff;
};

class LinearForm {
 public:
  // Adds coeff * X_block(i, j). Order of i and j is irrelevant.
  LinearForm& add(int block, int i, int j, double coeff);
  const std::vector<SdpTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  // Value on explicit block matrices.
  double apply(const std::vector<Eigen::MatrixXd>& X) const;

 private:
  std::vector<SdpTerm> terms_;
};

// min <C, X> + objective_constant  s.t.  <A_k, X> = b_k,  X = diag(X_1..X_l) >= 0.
struct MultiBlockSdp {
  std::vector<int> blocks;
  LinearForm objective;
  double objective_constant = 0.0;
  std::vector<LinearForm> rows;
  std::vector<double> b;

  int add_block(int dim);
  int add_row(const LinearForm& f, double rhs);
  int num_rows() const { return static_cast<int>(rows.size()); }
  int total_dimension() const;
  // Number of scalar unknowns in the symmetric blocks.
  long long num_entries() const;

  // Dense symmetric matrices represented by the functionals.
  Eigen::MatrixXd cost_matrix(int block) const;
  Eigen::MatrixXd constraint_matrix(int row, int block) const;

  // Throws Dimension on any out-of-range index.
  void validate() const;
  std::string dump() const;
  static MultiBlockSdp parse_dump(const std::string& text);
};

enum class SdpStatus { Optimal, MaxIter, Infeasible };
const char* sdp_status_name(SdpStatus s);

struct KktResiduals {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  double max() const { return std::max(primal, std::max(dual, gap)); }
};

struct IterationInfo {
  int iteration;
  double primal_objective;
  double dual_objective;
  KktResiduals residuals;
};

struct SolveOptions {
  double tol = 1e-7;
  int max_iter = 20000;
  double tol_psd = 1e-8;
  // Over-relaxation factor for the multiplier step, in (0, 1.618).
  double relaxation = 1.6;
  double mu0 = 1.0;
  // Anderson acceleration memory (0 disables) and the residual growth factor
  // above which an extrapolated step is rejected.
  int anderson_memory = 20;
  double anderson_safeguard = 2.0;
  // Norm of the cost vector after internal scaling. Programs whose optimum
  // needs large dual slacks relative to the cost converge faster with a
  // larger weight.
  double objective_weight = 1.0;
  // Wall-clock budget in seconds; 0 disables it.
  double time_limit = 0.0;
  int verbose = 0;
  // Returning true stops the iteration early (status MaxIter unless converged).
  std::function<bool(const IterationInfo&)> early_stop;
  // Optional starting point (per block); empty means a cold start.
  std::vector<Eigen::MatrixXd> X0;
  std::vector<Eigen::MatrixXd> S0;
};

struct SdpSolution {
  std::vector<Eigen::MatrixXd> X;
  Eigen::VectorXd y;
  std::vector<Eigen::MatrixXd> S;
  double objective = 0.0;       // <C, X> + constant
  double dual_objective = 0.0;  // <b, y> + constant
  KktResiduals residuals;
  SdpStatus status = SdpStatus::MaxIter;
  int iterations = 0;
  double seconds = 0.0;
  std::vector<double> objective_history;
  // For Infeasible: y with A^*(y) <= 0 and <b, y> > 0.
  Eigen::VectorXd certificate;
};

SdpSolution solve(const MultiBlockSdp& sdp, const SolveOptions& opts = {});

KktResiduals kkt_residuals(const MultiBlockSdp& sdp, const std::vector<Eigen::MatrixXd>& X,
                           const Eigen::VectorXd& y, const std::vector<Eigen::MatrixXd>& S);

// Residual of every row at X: <A_k, X> - b_k.
Eigen::VectorXd row_residuals(const MultiBlockSdp& sdp, const std::vector<Eigen::MatrixXd>& X);

}  // namespace rotcert
