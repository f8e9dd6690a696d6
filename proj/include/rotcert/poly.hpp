#pragma once

#include <map>
#include <string>
#include <vector>

namespace rotcert {

// Exponent vector over a fixed number of variables.
struct Monomial {
  std::vector<int> exponents;

  Monomial() = default;
  explicit Monomial(std::vector<int> e);
  static Monomial one(int nvars) { return Monomial(std::vector<int>(nvars, 0)); }
  static Monomial var(int nvars, int k);

  int nvars() const { return static_cast<int>(exponents.size()); }
  int degree() const;
  Monomial operator*(const Monomial& o) const;
  bool operator==(const Monomial& o) const { return exponents == o.exponents; }
  bool operator!=(const Monomial& o) const { return exponents != o.exponents; }
};

// Graded lexicographic: lower degree first, then larger x1 exponent first,
// so basis(2,2) reads 1, x1, x2, x1^2, x1 x2, x2^2.
struct GradedLex {
  bool operator()(const Monomial& a, const Monomial& b) const;
};

class Polynomial {
 public:
  using Terms = std::map<Monomial, double, GradedLex>;

  explicit Polynomial(int nvars = 0) : nvars_(nvars) {}
  static Polynomial constant(int nvars, double c);
  static Polynomial variable(int nvars, int k);
  static Polynomial monomial(const Monomial& m, double c = 1.0);

  int nvars() const { return nvars_; }
  const Terms& terms() const { return terms_; }
  // Highest total degree; -1 for the zero polynomial.
  int degree() const;
  bool is_zero() const { return terms_.empty(); }
  bool is_homogeneous() const;
  double coeff(const Monomial& m) const;
  double l1_norm() const;

  void add_term(const Monomial& m, double c);
  double eval(const std::vector<double>& point) const;

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(double s);
  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(double s) const;
  Polynomial operator-() const;
  bool operator==(const Polynomial& o) const;
  Polynomial pow(int k) const;

  std::string to_string() const;

 private:
  void check_same(const Polynomial& o) const;
  int nvars_;
  Terms terms_;
};

inline Polynomial operator*(double s, const Polynomial& p) { return p * s; }

Polynomial mul(const Polynomial& p, const Polynomial& q);
double eval(const Polynomial& p, const std::vector<double>& point);

// Graded-lex monomials of degree <= r in d variables; C(d+r, r) entries.
std::vector<Monomial> basis(int d, int r);
// Monomials of degree exactly r.
std::vector<Monomial> homogeneous_basis(int d, int r);
long long binomial(int n, int k);

// x1^4 x2^2 + x1^2 x2^4 + 1 - 3 x1^2 x2^2
Polynomial motzkin();

}  // namespace rotcert
