#include <cmath>
#include <random>

#include "doctest.h"
#include "rotcert/certify.hpp"
#include "rotcert/error.hpp"

using namespace rotcert;

namespace {

std::vector<Eigen::MatrixXd> wahba_set(int n, std::uint64_t seed) {
  RotationSearchInstance inst = generate_instance(n, 0.0, OutlierMode::random(), seed);
  std::vector<Eigen::MatrixXd> At;
  for (const auto& m : inst.measurements) At.push_back(wahba_matrix(m));
  return At;
}

// sigma_min of the stacked [A_i^T] via a full SVD.
double stacked_svd_min(const RotationSearchInstance& inst, const std::vector<int>& J) {
  Eigen::MatrixXd S(3 * J.size(), 9);
  for (size_t k = 0; k < J.size(); ++k) S.middleRows(3 * k, 3) = wahba_matrix(inst.measurements[J[k]]);
  return Eigen::JacobiSVD<Eigen::MatrixXd>(S).singularValues().minCoeff();
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::Validation;
}

}  // namespace

TEST_CASE("eta threshold") {
  const double alphas[] = {0.55, 0.6, 0.7, 0.8};
  const double expected[] = {1.32, 2.22, 3.26, 3.75};
  // The published list truncates to two decimals (3.2653 reads 3.26).
  for (int i = 0; i < 4; ++i) CHECK(std::floor(eta_threshold(alphas[i]) * 100) / 100 == doctest::Approx(expected[i]));
  CHECK(eta_threshold(1.0) == doctest::Approx(4.0));
  CHECK(code_of([] { eta_threshold(0.5); }) == ErrorCode::NoNontrivialEta);
  CHECK(code_of([] { eta_threshold(0.3); }) == ErrorCode::NoNontrivialEta);
  double prev = -1.0;
  for (int i = 1; i <= 100; ++i) {
    double a = 0.5 + 0.5 * i / 100;
    double e = eta_threshold(a);
    CHECK(e > prev);
    prev = e;
  }
}

TEST_CASE("a-priori LTS/MC bound") {
  CHECK(apriori_bound_lts_mc(1.0, 0.01, 1.0) == doctest::Approx(0.005));
  CHECK(apriori_bound_lts_mc(0.5, 0.0, 1.0) == doctest::Approx(2.0));
  const double mx = std::sqrt(3.0);
  CHECK(apriori_bound_lts_mc(0.8, 3.75, mx) == doctest::Approx(2.0 * mx).epsilon(1e-12));
  CHECK(code_of([] { apriori_bound_lts_mc(0.0, 1.0, 1.0); }) == ErrorCode::InfiniteBound);
  for (int i = 1; i <= 100; ++i) {
    double a = 0.5 + 0.5 * i / 100;
    double eta = 0.99 * eta_threshold(a);
    CHECK(apriori_bound_lts_mc(a, eta, mx) < 2.0 * mx);
  }
}

TEST_CASE("a-priori TLS bound") {
  const double cb = 0.0021, mx = std::sqrt(3.0);
  for (double a : {0.6, 0.8, 1.0})
    CHECK(apriori_bound_tls(a, 2.0, mx, 50, 0.0, cb) == doctest::Approx(apriori_bound_lts_mc(a, 2.0, mx)));
  double num = 0.64 * 3.0 * mx * 50 / 2.0 + 2.0 * 50 * mx * 0.2;
  CHECK(apriori_bound_tls(0.8, 3.0, mx, 50, 10 * cb, cb) == doctest::Approx(num / 30.0));
  double near = apriori_bound_tls(0.8, 3.0, mx, 50, (40 - 1e-6) * cb, cb);
  CHECK(near > 1e6);
  CHECK(code_of([&] { apriori_bound_tls(0.8, 3.0, mx, 50, 40 * cb, cb); }) == ErrorCode::VacuousBound);
}

TEST_CASE("LTS objective coefficients") {
  CHECK(lts_beta_max(4, 6.0) == doctest::Approx(1.0 / (6.0 * 2048.0)));
  CHECK(lts_beta_max(4, 6.0) == doctest::Approx(8.14e-5).epsilon(1e-3));
  double b10 = lts_beta_max(10, 6.0);
  CHECK(b10 > 1e-3);
  CHECK(b10 < 1e-2);
  LtsCoefficients zero = lts_objective_coeffs(4, 0.0, 6.0);
  CHECK(zero.C1_pow == 0.0);
  CHECK(zero.C2_pow == 0.0);
  try {
    lts_objective_coeffs(4, 1e-3, 6.0);
    FAIL("expected out-of-regime");
  } catch (const OutOfRegimeError& e) {
    CHECK(e.code() == ErrorCode::OutOfRegime);
    CHECK(e.beta_max() == doctest::Approx(lts_beta_max(4, 6.0)));
  }
  // coefficients blow up toward beta_max
  double bm = lts_beta_max(6, 2.0);
  CHECK(lts_objective_coeffs(6, 0.999 * bm, 2.0).C1_pow > lts_objective_coeffs(6, 0.5 * bm, 2.0).C1_pow);
}

TEST_CASE("hypercontractivity: trivial and unsupported cases") {
  auto one = wahba_set(3, 3);
  one.resize(1);
  HyperResult r = check_hypercontractivity(one, {4, 1.0});
  CHECK(r.holds);
  CHECK(r.h.is_zero());
  CHECK(code_of([&] { check_hypercontractivity(one, {6, 6.0}); }) == ErrorCode::Unsupported);
  CHECK(code_of([&] { check_hypercontractivity({}, {4, 6.0}); }) == ErrorCode::Validation);
}

TEST_CASE("hypercontractivity polynomial matches its definition") {
  auto At = wahba_set(7, 4);
  Polynomial h = hypercontractivity_polynomial(At, 2.5);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd v(9);
    for (int i = 0; i < 9; ++i) v[i] = g(rng);
    double m2 = 0, m4 = 0;
    for (const auto& A : At) {
      double s = (A * v).squaredNorm();
      m2 += s / At.size();
      m4 += s * s / At.size();
    }
    std::vector<double> z(v.data(), v.data() + 9);
    CHECK(h.eval(z) == doctest::Approx(2.5 * m2 * m2 - m4).epsilon(1e-10));
  }
}

TEST_CASE("hypercontractivity is monotone in C") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto At = wahba_set(30, seed);
    bool held = false;
    for (double C : {1.0, 2.0, 3.0, 4.0, 5.0, 6.0}) {
      bool h = check_hypercontractivity(At, {4, C}).holds;
      if (held) CHECK(h);
      held = held || h;
    }
    CHECK(held);
  }
}

TEST_CASE("anti-concentration parameters") {
  AntiConParams p;
  p.c_bar = 0.5;
  CHECK(code_of([&] { p.validate(); }) == ErrorCode::Parameter);
  AntiConParams ok;
  ok.alpha = 0.9;
  ok.eta = 3.75;
  CHECK_NOTHROW(ok.validate());
  CHECK(ok.delta() == doctest::Approx(2 * std::sqrt(0.0021)));
  CHECK(ok.M() == doctest::Approx(2 * std::sqrt(3.0)));
}

TEST_CASE("anti-concentration fails condition 2 when p grows past the cap") {
  // Orthogonal A gives |A^T v| = |v|, so condition 2 reduces to a 1-D check:
  // C delta M^2 - s^2 p(s)^2 on s <= M, negative near s = M for c2 = 1.
  AntiConParams p;
  p.alpha = 0.9;
  p.eta = 3.75;
  p.c2 = 1.0;
  double M = p.M();
  CHECK(p.C() * p.delta() * M * M - M * M * std::pow(1 + M * M, 2) < 0.0);
  std::vector<Eigen::MatrixXd> At = {Eigen::MatrixXd::Identity(9, 9)};
  AntiConResult r = check_anticoncentration(At, p);
  CHECK_FALSE(r.holds);
  CHECK(r.failed_condition == 2);
  CHECK(r.condition2_bound < 0.0);
}

TEST_CASE("condition-1 program at the origin") {
  AntiConParams p;
  p.alpha = 0.9;
  p.eta = 3.75;
  p.c2 = -1.0;
  Pop pop = anticoncentration_pop1(Eigen::MatrixXd::Identity(9, 9), p);
  std::vector<double> zero(9, 0.0);
  CHECK(pop.feasible_at(zero, 0.0));
  CHECK(pop.objective_at(zero) == doctest::Approx(1.0 - std::pow(1 - p.delta(), 2)));
}

TEST_CASE("stacked sigma and degenerate subsets") {
  RotationSearchInstance inst = generate_instance(6, 0.0, OutlierMode::random(), 1);
  for (int k = 0; k < 4; ++k) inst.measurements[k].a = Vec3(1, 1, 0).normalized();
  std::vector<int> J = {0, 1, 2, 3};
  CHECK(stacked_sigma_min(inst, J) < 1e-9);
  ContractReport r = aposteriori_bound_fixed(inst, J, ContractMode::mc(), 6);
  CHECK(r.degenerate);
  CHECK(std::isinf(r.bound));
  CHECK_FALSE(r.preconditions_met);

  std::vector<int> K = {3, 4, 5};
  CHECK(stacked_sigma_min(inst, K) == doctest::Approx(stacked_svd_min(inst, K)).epsilon(1e-10));
}

TEST_CASE("exhaustive a-posteriori bound matches a brute-force scan") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    RotationSearchInstance inst = generate_instance(12, 0.25, OutlierMode::random(), seed);
    std::vector<int> sel = inst.truth_inliers();
    for (int d : {3, 4, 5}) {
      ContractReport r = aposteriori_bound(inst, sel, d, ContractMode::mc());
      double best = std::numeric_limits<double>::infinity();
      const int s = static_cast<int>(sel.size());
      long long scanned = 0;
      for (unsigned mask = 0; mask < (1u << s); ++mask) {
        if (__builtin_popcount(mask) != d) continue;
        std::vector<int> J;
        for (int k = 0; k < s; ++k)
          if (mask >> k & 1) J.push_back(sel[k]);
        best = std::min(best, stacked_svd_min(inst, J));
        ++scanned;
      }
      CHECK(r.subsets_scanned == scanned);
      CHECK(r.sigma_min == doctest::Approx(best).epsilon(1e-9));
      CHECK(r.bound == doctest::Approx(2.0 * std::sqrt(d * inst.c_bar_sq) / best).epsilon(1e-9));
    }
  }
}

TEST_CASE("a-posteriori preconditions") {
  RotationSearchInstance inst = generate_instance(20, 0.5, OutlierMode::random(), 2);
  std::vector<int> sel = inst.truth_inliers();  // alpha = 0.5 leaves no room for d_J
  ContractReport r = aposteriori_bound(inst, sel, 3, ContractMode::mc());
  CHECK_FALSE(r.preconditions_met);
  RotationSearchInstance good = generate_instance(20, 0.1, OutlierMode::random(), 2);
  ContractReport g = aposteriori_bound(good, good.truth_inliers(), 5, ContractMode::tls(0.0));
  CHECK(g.preconditions_met);
  ContractReport tight = aposteriori_bound(good, good.truth_inliers(), 5, ContractMode::tls(good.c_bar_sq * 12));
  CHECK_FALSE(tight.preconditions_met);
  CHECK(code_of([&] { aposteriori_bound(good, {0, 1, 99}, 3, ContractMode::mc()); }) == ErrorCode::Dimension);
  CHECK(g.to_json().find("\"bound\"") != std::string::npos);
}
