#include <random>

#include "doctest.h"
#include "pops.hpp"
#include "rotcert/error.hpp"
#include "rotcert/moment.hpp"

using namespace rotcert;

namespace {
Polynomial x1() { return Polynomial::variable(1, 0); }
}  // namespace

TEST_CASE("row and block counts") {
  Pop free(2);
  free.objective = Polynomial::variable(2, 0);
  MomentRelaxation r = build_moment_relaxation(free, 2);
  CHECK(r.sdp.blocks == std::vector<int>{6});
  CHECK(r.moment_rows == 7);

  Pop circle(2);
  Polynomial x = Polynomial::variable(2, 0), y = Polynomial::variable(2, 1);
  circle.objective = x;
  circle.equalities.push_back(x * x + y * y - Polynomial::constant(2, 1));
  CHECK(build_moment_relaxation(circle, 1).equality_rows == 1);

  Pop ball(2);
  ball.objective = x;
  ball.inequalities.push_back(Polynomial::constant(2, 1) - x * x);
  MomentRelaxation rb = build_moment_relaxation(ball, 2);
  REQUIRE(rb.localizer_blocks.size() == 1);
  CHECK(rb.sdp.blocks[rb.localizer_blocks[0]] == 3);
}

TEST_CASE("order too small") {
  Pop p(1);
  p.objective = x1().pow(4);
  try {
    build_moment_relaxation(p, 1);
    FAIL("expected an order error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Order);
    CHECK(std::string(e.what()).find("4") != std::string::npos);
  }
}

TEST_CASE("rank-one lifts satisfy every row") {
  std::mt19937_64 rng(31);
  for (auto& c : testpops::cases()) {
    CAPTURE(c.name);
    for (bool products : {false, true}) {
      RelaxationOptions ro;
      ro.set_products = products;
      MomentRelaxation rel = build_moment_relaxation(c.pop, c.order, ro);
      for (int t = 0; t < 10; ++t) {
        auto z = c.sample(rng);
        REQUIRE(c.pop.feasible_at(z, 1e-12));
        auto res = row_residuals(rel.sdp, rel.lift(z));
        CHECK(res.cwiseAbs().maxCoeff() <= 1e-12);
        double obj = rel.sdp.objective.apply(rel.lift(z)) + rel.sdp.objective_constant;
        CHECK(obj == doctest::Approx(c.pop.objective_at(z)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("relaxation bounds sit below the grid oracle") {
  for (auto& c : testpops::cases()) {
    CAPTURE(c.name);
    PopBound b = pop_lower_bound(c.pop, c.order);
    CHECK(b.solution.status == SdpStatus::Optimal);
    CHECK(b.m_star <= c.grid_min + 1e-4);
  }
}

TEST_CASE("pop_lower_bound examples") {
  Polynomial x = x1();
  Pop sq(1);
  sq.objective = x * x;
  sq.equalities.push_back(x * x - Polynomial::constant(1, 1));
  CHECK(pop_lower_bound(sq, 1).m_star == doctest::Approx(1.0).epsilon(1e-5));

  Pop quartic(1);
  quartic.objective = x.pow(4) - x * x;
  quartic.inequalities.push_back(Polynomial::constant(1, 1) - x * x);
  PopBound b = pop_lower_bound(quartic, 2);
  CHECK(std::abs(b.m_star + 0.25) < 1e-5);
  CHECK(b.X.extract(Monomial({2})) == doctest::Approx(0.5).epsilon(1e-3));

  Pop mot(2);
  mot.objective = motzkin();
  mot.add_ball_constraint(4.0);
  CHECK(pop_lower_bound(mot, 3).m_star <= 1e-5);

  Pop shifted(1);
  shifted.objective = (x - Polynomial::constant(1, 2)).pow(2);
  shifted.inequalities.push_back(Polynomial::constant(1, 9) - x * x);
  PopBound s = pop_lower_bound(shifted, 1);
  CHECK(std::abs(s.m_star) < 1e-5);
  CHECK(s.X.extract(Monomial({1})) == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(s.X.extract(Monomial({0})) == doctest::Approx(1.0));
}

TEST_CASE("bounds are monotone in the order") {
  Polynomial x = Polynomial::variable(2, 0), y = Polynomial::variable(2, 1);
  std::vector<Pop> suite;
  for (int k = 0; k < 10; ++k) {
    Pop p(2);
    double a = 0.3 * k - 1.0, b = 0.2 * (k % 4) - 0.3;
    p.objective = x.pow(2) * y.pow(2) + a * x * y + b * x - 0.1 * k * y * y + x.pow(4) * 0.2;
    p.add_ball_constraint(1.0 + 0.1 * k);
    suite.push_back(p);
  }
  for (const auto& p : suite) {
    double prev = pop_lower_bound(p, 2).m_star;
    double next = pop_lower_bound(p, 3).m_star;
    CHECK(next >= prev - 1e-5);
  }
}

TEST_CASE("is_sos") {
  Polynomial x = x1();
  SosResult sq = is_sos(x * x + 2.0 * x + Polynomial::constant(1, 1));
  CHECK(sq.is_sos);
  Eigen::Vector2d v(1.0, -1.0);  // basis [1, x] at x = -1
  CHECK(std::abs(v.dot(sq.gram * v)) < 1e-5);
  CHECK_FALSE(is_sos(motzkin()).is_sos);
  CHECK_FALSE(is_sos(-(x * x)).is_sos);
  SosResult odd = is_sos(x.pow(3));
  CHECK_FALSE(odd.is_sos);
  CHECK_FALSE(odd.reason.empty());
}

TEST_CASE("SOS verdicts are nonnegative on samples") {
  Polynomial x = Polynomial::variable(2, 0), y = Polynomial::variable(2, 1);
  std::vector<Polynomial> polys = {(x - y).pow(2) + (x * y - Polynomial::constant(2, 1)).pow(2),
                                   x.pow(4) + y.pow(4) + Polynomial::constant(2, 0.1),
                                   (x + 2.0 * y).pow(2) * 3.0, motzkin() + (x * x + y * y).pow(3) * 0.01};
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g(0.0, 2.0);
  for (const auto& p : polys) {
    SosResult r = is_sos(p);
    if (!r.is_sos) continue;
    for (int t = 0; t < 1000; ++t) {
      std::vector<double> z = {g(rng), g(rng)};
      double nz = std::hypot(z[0], z[1]);
      CHECK(p.eval(z) >= -1e-6 * (1.0 + std::pow(nz, p.degree())));
    }
  }
}

TEST_CASE("pseudo-moment matrix accessors") {
  auto b = basis(2, 1);
  Eigen::VectorXd m(3);
  m << 1.0, 2.0, -1.0;
  PseudoMomentMatrix X(m * m.transpose(), b, 1);
  CHECK(X.extract(Monomial({0, 0})) == 1.0);
  CHECK(X.extract(Monomial({1, 1})) == -2.0);
  CHECK(extract(X, Monomial({2, 0})) == 4.0);
  CHECK(X.consistency_error() == 0.0);
  CHECK(std::isinf(X.eigen_ratio()));
}
