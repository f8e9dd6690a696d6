#include "rotcert/poly.hpp"

#include <cmath>
#include <sstream>

#include "rotcert/error.hpp"

namespace rotcert {

Monomial::Monomial(std::vector<int> e) : exponents(std::move(e)) {
  for (int v : exponents)
    if (v < 0) throw Error(ErrorCode::Validation, "negative exponent");
}

Monomial Monomial::var(int nvars, int k) {
  if (k < 0 || k >= nvars) throw Error(ErrorCode::Dimension, "variable index out of range");
  Monomial m = one(nvars);
  m.exponents[k] = 1;
  return m;
}

int Monomial::degree() const {
  int s = 0;
  for (int v : exponents) s += v;
  return s;
}

Monomial Monomial::operator*(const Monomial& o) const {
  if (o.nvars() != nvars()) throw Error(ErrorCode::Dimension, "monomial nvars mismatch");
  Monomial r = *this;
  for (int k = 0; k < nvars(); ++k) r.exponents[k] += o.exponents[k];
  return r;
}

bool GradedLex::operator()(const Monomial& a, const Monomial& b) const {
  int da = a.degree(), db = b.degree();
  if (da != db) return da < db;
  return a.exponents > b.exponents;
}

Polynomial Polynomial::constant(int nvars, double c) {
  Polynomial p(nvars);
  p.add_term(Monomial::one(nvars), c);
  return p;
}

Polynomial Polynomial::variable(int nvars, int k) {
  Polynomial p(nvars);
  p.add_term(Monomial::var(nvars, k), 1.0);
  return p;
}

Polynomial Polynomial::monomial(const Monomial& m, double c) {
  Polynomial p(m.nvars());
  p.add_term(m, c);
  return p;
}

int Polynomial::degree() const {
  int d = -1;
  for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
  return d;
}

bool Polynomial::is_homogeneous() const {
  if (terms_.empty()) return true;
  int d = terms_.begin()->first.degree();
  for (const auto& [m, c] : terms_)
    if (m.degree() != d) return false;
  return true;
}

double Polynomial::coeff(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

double Polynomial::l1_norm() const {
  double s = 0.0;
  for (const auto& [m, c] : terms_) s += std::abs(c);
  return s;
}

void Polynomial::add_term(const Monomial& m, double c) {
  if (m.nvars() != nvars_) throw Error(ErrorCode::Dimension, "monomial nvars mismatch");
  if (c == 0.0) return;
  auto [it, fresh] = terms_.emplace(m, c);
  if (!fresh) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double Polynomial::eval(const std::vector<double>& point) const {
  if (static_cast<int>(point.size()) != nvars_)
    throw Error(ErrorCode::Dimension, "evaluation point has wrong dimension");
  double s = 0.0;
  for (const auto& [m, c] : terms_) {
    double t = c;
    for (int k = 0; k < nvars_; ++k)
      for (int e = 0; e < m.exponents[k]; ++e) t *= point[k];
    s += t;
  }
  return s;
}

void Polynomial::check_same(const Polynomial& o) const {
  if (o.nvars_ != nvars_)
    throw Error(ErrorCode::Dimension, "polynomials over different numbers of variables");
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  check_same(o);
  for (const auto& [m, c] : o.terms_) add_term(m, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  check_same(o);
  for (const auto& [m, c] : o.terms_) add_term(m, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [m, c] : terms_) c *= s;
  return *this;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  Polynomial r = *this;
  r += o;
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
  Polynomial r = *this;
  r -= o;
  return r;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  check_same(o);
  Polynomial r(nvars_);
  for (const auto& [ma, ca] : terms_)
    for (const auto& [mb, cb] : o.terms_) r.add_term(ma * mb, ca * cb);
  return r;
}

Polynomial Polynomial::operator*(double s) const {
  Polynomial r = *this;
  r *= s;
  return r;
}

Polynomial Polynomial::operator-() const { return *this * -1.0; }

bool Polynomial::operator==(const Polynomial& o) const {
  return nvars_ == o.nvars_ && terms_ == o.terms_;
}

Polynomial Polynomial::pow(int k) const {
  if (k < 0) throw Error(ErrorCode::Validation, "negative power");
  Polynomial r = constant(nvars_, 1.0);
  for (int i = 0; i < k; ++i) r = r * *this;
  return r;
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(12);
  bool first = true;
  for (const auto& [m, c] : terms_) {
    double a = c;
    if (!first) {
      os << (c < 0 ? " - " : " + ");
      a = std::abs(c);
    }
    first = false;
    bool is_const = m.degree() == 0;
    if (is_const || a != 1.0) {
      if (a == -1.0 && !is_const)
        os << "-";
      else
        os << a << (is_const ? "" : "*");
    }
    bool lead = true;
    for (int k = 0; k < m.nvars(); ++k) {
      if (m.exponents[k] == 0) continue;
      if (!lead) os << "*";
      lead = false;
      os << "x" << (k + 1);
      if (m.exponents[k] > 1) os << "^" << m.exponents[k];
    }
  }
  return os.str();
}

Polynomial mul(const Polynomial& p, const Polynomial& q) { return p * q; }
double eval(const Polynomial& p, const std::vector<double>& point) { return p.eval(point); }

namespace {
void fill_degree(int d, int remaining, int k, std::vector<int>& cur, std::vector<Monomial>& out) {
  if (k == d - 1) {
    cur[k] = remaining;
    out.emplace_back(cur);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    cur[k] = e;
    fill_degree(d, remaining - e, k + 1, cur, out);
  }
  cur[k] = 0;
}
}  // namespace

std::vector<Monomial> homogeneous_basis(int d, int r) {
  if (d < 1 || r < 0) throw Error(ErrorCode::Validation, "basis needs d >= 1 and r >= 0");
  std::vector<Monomial> out;
  std::vector<int> cur(d, 0);
  fill_degree(d, r, 0, cur, out);
  return out;
}

std::vector<Monomial> basis(int d, int r) {
  std::vector<Monomial> out;
  for (int deg = 0; deg <= r; ++deg) {
    auto h = homogeneous_basis(d, deg);
    out.insert(out.end(), h.begin(), h.end());
  }
  return out;
}

long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

Polynomial motzkin() {
  Polynomial p(2);
  p.add_term(Monomial({4, 2}), 1.0);
  p.add_term(Monomial({2, 4}), 1.0);
  p.add_term(Monomial({0, 0}), 1.0);
  p.add_term(Monomial({2, 2}), -3.0);
  return p;
}

}  // namespace rotcert
