#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "rotcert/geometry.hpp"
#include "rotcert/moment.hpp"

namespace rotcert {

// k-certifiable C-hypercontractivity; C_t_pow_t is C(t)^t at t = k/2.
struct HyperParams {
  int k = 4;
  double C_t_pow_t = 6.0;
};

struct HyperResult {
  bool holds = false;
  Polynomial h;
  SosResult sos;
  double seconds = 0.0;
};

// h(v) = C (mean |A_i^T v|^2)^2 - mean |A_i^T v|^4 over the listed A_i^T (rows x 9).
Polynomial hypercontractivity_polynomial(const std::vector<Eigen::MatrixXd>& At_list, double C);
HyperResult check_hypercontractivity(const std::vector<Eigen::MatrixXd>& At_list,
                                     const HyperParams& params, double tol = 1e-6);

struct AntiConParams {
  double alpha = 1.0;
  double eta = 1.0;
  double c_bar = 0.045825756949558;  // sqrt(0.0021)
  double M_x = 1.7320508075688772;   // sqrt(3)
  double c2 = -0.1;                  // p(a) = 1 + c2 a^2

  double C() const;
  double delta() const { return 2.0 * c_bar; }
  double M() const { return 2.0 * M_x; }
  void validate() const;
};

struct AntiConResult {
  bool holds = false;
  int failed_condition = 0;  // 0 when holds
  int failed_index = -1;     // measurement index for condition 1
  std::vector<double> condition1_bounds;
  double condition2_bound = 0.0;
  int r1 = 2;
  int r2 = 3;
  double seconds = 0.0;
};

// Condition 1 for one matrix: min p(|A^T v|)^2 - (1-delta)^2
// s.t. |A^T v|^2 <= delta^2, |v|^2 <= M^2.
Pop anticoncentration_pop1(const Eigen::MatrixXd& At, const AntiConParams& params);
// Condition 2: min C delta M^2 - |v|^2 mean p(|A_i^T v|)^2  s.t. |v|^2 <= M^2.
Pop anticoncentration_pop2(const std::vector<Eigen::MatrixXd>& At_list, const AntiConParams& params);

struct AntiConOptions {
  int r1 = 2;
  int r2 = 3;
  double tol = 1e-6;
  int max_iter = 20000;
  double time_limit = 300.0;
  // Stop a solve once the sign of its optimum is settled.
  bool stop_on_sign = true;
  // Skip condition 2 when condition 1 already fails.
  bool short_circuit = true;
};

AntiConResult check_anticoncentration(const std::vector<Eigen::MatrixXd>& At_list,
                                      const AntiConParams& params, const AntiConOptions& opts = {});
AntiConResult check_anticoncentration(const std::vector<Eigen::MatrixXd>& At_list,
                                      const AntiConParams& params, int r1, int r2);

double eta_threshold(double alpha);
double apriori_bound_lts_mc(double alpha, double eta, double M_x);
double apriori_bound_tls(double alpha, double eta, double M_x, int n, double gamma0, double c_bar_sq);

struct LtsCoefficients {
  double C1_pow = 0.0;  // C1^(2/k)
  double C2_pow = 0.0;  // C2^(2/k)
  double beta_max = 0.0;
};
double lts_beta_max(int k, double C_half_k);
LtsCoefficients lts_objective_coeffs(int k, double beta, double C_half_k);

enum class ContractKind { AposterioriMC, AposterioriTLS, AprioriLTS, AprioriMC, AprioriTLS, LtsObjective };
const char* contract_kind_name(ContractKind k);

struct Precondition {
  std::string name;
  bool met = false;
  std::string detail;
};

struct ContractReport {
  ContractKind kind = ContractKind::AposterioriMC;
  double bound = 0.0;
  bool preconditions_met = false;
  std::vector<Precondition> preconditions;
  int d_J = 0;
  double sigma_min = 0.0;
  std::vector<int> subset;  // minimizing subset, or the fixed J
  bool degenerate = false;
  long long subsets_scanned = 0;

  std::string to_json() const;
};

struct ContractMode {
  enum class Kind { MC, TLS } kind = Kind::MC;
  double gamma0 = 0.0;
  // Inlier rate used in the d_J range check; negative means |selected| / n.
  double alpha = -1.0;
  static ContractMode mc() { return {}; }
  static ContractMode tls(double gamma0) { return {Kind::TLS, gamma0, -1.0}; }
};

// sigma_min of the stacked A_J^T, i.e. sqrt(lambda_min(sum_{i in J} a_i a_i^T)).
double stacked_sigma_min(const RotationSearchInstance& inst, const std::vector<int>& J);

// Minimum over all d_J-subsets of the selected set (exhaustive).
ContractReport aposteriori_bound(const RotationSearchInstance& inst, const std::vector<int>& selected,
                                 int d_J, const ContractMode& mode);
// Bound for one fixed subset J (for instance truth intersected with selection).
ContractReport aposteriori_bound_fixed(const RotationSearchInstance& inst, const std::vector<int>& J,
                                       const ContractMode& mode, int n_selected);

}  // namespace rotcert
