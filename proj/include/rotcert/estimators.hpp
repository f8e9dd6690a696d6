#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "rotcert/geometry.hpp"
#include "rotcert/moment.hpp"
#include "rotcert/sdp.hpp"

namespace rotcert {

// Index arithmetic for [1, w_1..w_n, q, w_1 q, .., w_n q] (0-based).
struct SparseBasis {
  int n = 0;
  // Keep the even monomials (1, w_i) and the odd ones (q, w_i q) in two
  // separate PSD blocks. The relaxation is invariant under q -> -q, so the
  // mixed entries can be taken as zero without changing the optimum.
  bool split = false;

  int side() const { return 5 * (n + 1); }
  int one() const { return 0; }
  int omega(int i) const { return 1 + i; }
  int q(int a) const { return n + 1 + a; }
  int omega_q(int i, int a) const { return n + 5 + 4 * i + a; }
  bool odd(int pos) const { return pos > n; }
  // (block, local index) in the emitted program.
  std::pair<int, int> locate(int pos) const;
  std::vector<std::string> labels() const;
  // Moment vector m(w, q).
  Eigen::VectorXd monomials(const std::vector<double>& w, const Vec4& q) const;
};

struct SparseProgram {
  MultiBlockSdp sdp;
  SparseBasis basis;
  std::vector<int> slack_blocks;
  std::vector<int> epigraph_blocks;  // SLIDES only

  // Full 5(n+1) moment matrix from solver blocks (mixed entries zero when split).
  Eigen::MatrixXd moment_matrix(const std::vector<Eigen::MatrixXd>& blocks) const;
  // Block values of the rank-one point (w, q); slacks and epigraph variables
  // are set to their implied values.
  std::vector<Eigen::MatrixXd> lift(const RotationSearchInstance& inst, const std::vector<double>& w,
                                    const Vec4& q) const;
};

struct SparseOptions {
  bool split_parity = false;
};

SparseProgram build_slides_program(const RotationSearchInstance& inst, double alpha,
                                   const SparseOptions& opts = {});
MultiBlockSdp build_slides_sdp(const RotationSearchInstance& inst, double alpha);
SparseProgram build_tls_sparse_program(const RotationSearchInstance& inst, const SparseOptions& opts = {});
MultiBlockSdp build_tls_sparse_sdp(const RotationSearchInstance& inst);

struct Hypothesis {
  UnitQuaternion estimate;
  double weight = 0.0;
  int source_index = -1;
  bool valid = false;
};

struct HypothesisList {
  std::vector<Hypothesis> entries;
  std::string to_json(const RotationSearchInstance* inst = nullptr) const;
};

struct SolveOutcome {
  std::vector<UnitQuaternion> estimates;
  double f_sdp = 0.0;
  double f_hat = 0.0;
  double gap = 0.0;
  std::vector<int> selected_inliers;
  std::vector<double> weights;  // X[w_i]
  KktResiduals residuals;
  SdpStatus status = SdpStatus::MaxIter;
  int iterations = 0;
  double seconds = 0.0;
  std::string warning;

  std::string to_json(const RotationSearchInstance* inst = nullptr) const;
};

struct EstimatorOptions {
  double tol = 0.0;  // 0 selects the estimator default (1e-6 SLIDES, 1e-7 otherwise)
  int max_iter = 50000;
  double time_limit = 300.0;
  int verbose = 0;
  bool split_parity = true;
};

double relaxation_gap(double f_sdp, double f_hat);

constexpr double kWeightEps = 1e-6;

// Hypotheses from the w_i-weighted quaternion blocks E[w_i q q^T]: v_i is the
// leading eigenvector, valid when X[w_i] > eps_w.
HypothesisList hypotheses_from_blocks(const std::vector<double>& weights, const std::vector<Mat4>& blocks);
// Leading eigenvector of sum_i X[w_i] v_i v_i^T and the set {i : X[w_i] > 0.5}.
std::pair<UnitQuaternion, std::vector<int>> round_weighted(const std::vector<double>& weights,
                                                           const std::vector<Mat4>& blocks);
std::pair<UnitQuaternion, std::vector<int>> round_weighted(const Eigen::MatrixXd& X, const SparseBasis& basis);

// Weights X[w_i] and blocks X[w_i q, w_i q^T] of a sparse moment matrix.
std::vector<double> sparse_weights(const Eigen::MatrixXd& X, const SparseBasis& basis);
std::vector<Mat4> sparse_blocks(const Eigen::MatrixXd& X, const SparseBasis& basis);

double tls_cost(const RotationSearchInstance& inst, const UnitQuaternion& q);

std::pair<HypothesisList, SolveOutcome> slides(const RotationSearchInstance& inst, double alpha,
                                               const EstimatorOptions& opts = {});
SolveOutcome solve_tls_sparse(const RotationSearchInstance& inst, const EstimatorOptions& opts = {});

HypothesisList sample_hypotheses(const HypothesisList& list, double alpha, int N, std::uint64_t seed);
int sample_count(double alpha, int N);
double sampling_success_probability(double alpha, int N);

enum class DenseKind { MC1, TLS1, LTS2, LDR };
const char* dense_kind_name(DenseKind k);

struct DenseProgram {
  Pop pop;
  MomentRelaxation relaxation;
  int n = 0;
  // Variable order: w_1..w_n, q_1..q_4.
  int omega_var(int i) const { return i; }
  int q_var(int a) const { return n + a; }
};

constexpr int kDenseMaxN = 8;

DenseProgram build_dense_program(const RotationSearchInstance& inst, DenseKind kind, double alpha = 1.0,
                                 int r = 2);
MultiBlockSdp build_dense_estimator(const RotationSearchInstance& inst, DenseKind kind, double alpha = 1.0,
                                    int r = 2);
// MC1 needs r = 3 to be tight in general; r = 2 can overshoot the count.
SolveOutcome solve_dense(const RotationSearchInstance& inst, DenseKind kind, double alpha = 1.0,
                         const EstimatorOptions& opts = {}, int r = 2);
// Objective of the non-relaxed problem at (w, q).
double dense_objective(const RotationSearchInstance& inst, DenseKind kind, const std::vector<double>& w,
                       const UnitQuaternion& q);

}  // namespace rotcert
