/* Copyright (C) 2026 cmgreen contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "arith.hpp"

namespace cmgreen {


/** Converts an exact rational to a floating type (builtin or multiprecision). */
template <class R>
R rat_to(const mpq_class& q) {
  if constexpr (std::is_same_v<R, double>) {
    return q.get_d();
  } else if constexpr (std::is_floating_point_v<R>) {
    return std::stold(q.get_num().get_str()) / std::stold(q.get_den().get_str());
  } else {
    return R(q.get_num().get_str()) / R(q.get_den().get_str());
  }
}

/** log|q| without overflow, q != 0. */
inline double log_abs(const mpq_class& q) {
  auto lz = [](const mpz_class& z) {
    long e;
    double m = mpz_get_d_2exp(&e, z.get_mpz_t());
    return std::log(std::fabs(m)) + static_cast<double>(e) * std::log(2.0);
  };
  return lz(q.get_num()) - lz(q.get_den());
}

/**
 * Element x + y*sqrt(D) of the real quadratic field of discriminant D,
 * with exact rational coordinates.
 */
class FieldElem {
 public:
  FieldElem() = default;
  FieldElem(long D, mpq_class x, mpq_class y = 0) : D_(D), x_(std::move(x)), y_(std::move(y)) {
    x_.canonicalize();
    y_.canonicalize();
  }
  FieldElem(long D, long x) : D_(D), x_(x), y_(0) {}

  /** u + v*omega with omega = (D + sqrt D)/2. */
  static FieldElem from_omega(long D, const mpq_class& u, const mpq_class& v) {
    return FieldElem(D, u + v * mpq_class(D, 2), v / 2);
  }
  static FieldElem omega(long D) { return from_omega(D, 0, 1); }
  static FieldElem sqrt_disc(long D) { return FieldElem(D, 0, 1); }

  long disc() const { return D_; }
  const mpq_class& x() const { return x_; }
  const mpq_class& y() const { return y_; }

  std::pair<mpq_class, mpq_class> omega_coords() const {
    mpq_class v = 2 * y_;
    return {x_ - y_ * D_, v};
  }

  FieldElem conj() const { return FieldElem(D_, x_, -y_); }
  mpq_class norm() const { return x_ * x_ - y_ * y_ * D_; }
  mpq_class trace() const { return 2 * x_; }
  bool is_zero() const { return x_ == 0 && y_ == 0; }
  bool is_rational() const { return y_ == 0; }
  bool is_integral() const {
    auto [u, v] = omega_coords();
    return u.get_den() == 1 && v.get_den() == 1;
  }

  /** Sign under the embedding sqrt(D) > 0. */
  int sign() const {
    int sx = sgn(x_), sy = sgn(y_);
    if (sy == 0) return sx;
    if (sx == 0 || sx == sy) return sy;
    mpq_class d = x_ * x_ - y_ * y_ * D_;
    return d > 0 ? sx : sy;
  }
  int conj_sign() const { return conj().sign(); }
  bool totally_positive() const { return sign() > 0 && conj_sign() > 0; }

  /** Exact floor of the real value. */
  mpz_class floor() const {
    mpz_class r = lcm(mpz_class(x_.get_den()), mpz_class(y_.get_den()));
    mpz_class X = mpz_class(x_ * r), Y = mpz_class(y_ * r);
    mpz_class t = 0;
    if (Y > 0) t = isqrt(Y * Y * D_);
    if (Y < 0) t = -isqrt(Y * Y * D_) - 1;
    return fdiv(X + t, r);
  }

  /** log|value| in double precision, used for unit bookkeeping. */
  double log_abs_value() const {
    if (y_ == 0) return log_abs(x_);
    if (x_ == 0) return log_abs(y_) + 0.5 * std::log(static_cast<double>(D_));
    if (sgn(x_) == sgn(y_)) {
      double lx = log_abs(x_), ly = log_abs(y_) + 0.5 * std::log(static_cast<double>(D_));
      double hi = std::max(lx, ly), lo = std::min(lx, ly);
      return hi + std::log1p(std::exp(lo - hi));
    }
    return log_abs(norm()) - conj().log_abs_value();
  }

  template <class R>
  R to_real() const {
    using std::sqrt;
    R s = sqrt(R(D_));
    if (y_ != 0 && x_ != 0 && sgn(x_) != sgn(y_)) {
      // avoid cancellation: x + y s = N/(x - y s)
      return rat_to<R>(norm()) / (rat_to<R>(x_) - rat_to<R>(y_) * s);
    }
    return rat_to<R>(x_) + rat_to<R>(y_) * s;
  }

  FieldElem operator-() const { return FieldElem(D_, -x_, -y_); }
  FieldElem& operator+=(const FieldElem& o) {
    check(o);
    x_ += o.x_;
    y_ += o.y_;
    return *this;
  }
  FieldElem& operator-=(const FieldElem& o) {
    check(o);
    x_ -= o.x_;
    y_ -= o.y_;
    return *this;
  }
  FieldElem& operator*=(const FieldElem& o) {
    check(o);
    mpq_class nx = x_ * o.x_ + y_ * o.y_ * D_;
    y_ = x_ * o.y_ + y_ * o.x_;
    x_ = nx;
    return *this;
  }
  FieldElem& operator/=(const FieldElem& o) {
    check(o);
    mpq_class n = o.norm();
    if (n == 0) throw InvalidInput("division by zero in field");
    *this *= o.conj();
    x_ /= n;
    y_ /= n;
    return *this;
  }
  FieldElem& operator*=(const mpq_class& q) {
    x_ *= q;
    y_ *= q;
    return *this;
  }
  friend FieldElem operator+(FieldElem a, const FieldElem& b) { return a += b; }
  friend FieldElem operator-(FieldElem a, const FieldElem& b) { return a -= b; }
  friend FieldElem operator*(FieldElem a, const FieldElem& b) { return a *= b; }
  friend FieldElem operator/(FieldElem a, const FieldElem& b) { return a /= b; }
  friend FieldElem operator*(FieldElem a, const mpq_class& q) { return a *= q; }
  friend FieldElem operator*(const mpq_class& q, FieldElem a) { return a *= q; }
  friend bool operator==(const FieldElem& a, const FieldElem& b) {
    return a.D_ == b.D_ && a.x_ == b.x_ && a.y_ == b.y_;
  }
  friend bool operator!=(const FieldElem& a, const FieldElem& b) { return !(a == b); }
  friend bool operator<(const FieldElem& a, const FieldElem& b) {
    return std::tie(a.x_, a.y_) < std::tie(b.x_, b.y_);
  }

  FieldElem pow(long e) const {
    FieldElem base = e < 0 ? FieldElem(D_, 1) / *this : *this;
    unsigned long n = static_cast<unsigned long>(e < 0 ? -e : e);
    FieldElem r(D_, 1);
    while (n) {
      if (n & 1) r *= base;
      base *= base;
      n >>= 1;
    }
    return r;
  }

  /** Human readable form, e.g. "38+3*sqrt(161)". */
  std::string str() const {
    std::ostringstream os;
    if (y_ == 0) {
      os << x_.get_str();
      return os.str();
    }
    // print with the square-free radicand: y sqrt(D) = 2y sqrt(D/4) for even D
    long r = D_ % 4 == 0 ? D_ / 4 : D_;
    mpq_class y = D_ % 4 == 0 ? mpq_class(2 * y_) : y_;
    if (x_ != 0) os << x_.get_str();
    if (y > 0 && x_ != 0) os << "+";
    if (y == -1)
      os << "-";
    else if (y != 1)
      os << y.get_str() << "*";
    os << "sqrt(" << r << ")";
    return os.str();
  }

 private:
  void check(const FieldElem& o) const {
    if (D_ != o.D_) throw InvalidInput("field elements from different fields");
  }

  long D_ = 0;
  mpq_class x_, y_;
};

namespace detail {

/** Hermite normal form of the Z-span of integer vectors (u,v): Z(a,0) + Z(b,c). */
inline std::array<mpz_class, 3> hnf2(const std::vector<std::pair<mpz_class, mpz_class>>& rows) {
  mpz_class pu = 0, pv = 0, a = 0;
  for (const auto& [u, v] : rows) {
    if (v == 0) {
      a = gcd(a, u);
      continue;
    }
    if (pv == 0) {
      pu = u;
      pv = v;
      continue;
    }
    mpz_class s, t;
    mpz_class g = egcd(pv, v, s, t);
    mpz_class nu = s * pu + t * u;
    // the combination with vanishing second coordinate
    mpz_class zu = (v / g) * pu - (pv / g) * u;
    a = gcd(a, zu);
    pu = nu;
    pv = g;
  }
  if (pv < 0) {
    pu = -pu;
    pv = -pv;
  }
  a = abs(a);
  if (a == 0 || pv == 0) throw InvalidInput("lattice is not of full rank");
  return {a, mod(pu, a), pv};
}

}  // namespace detail

/**
 * Fractional ideal s*[a, b + c*omega] in Hermite normal form: the bracket is the
 * Z-module Za + Z(b + c*omega), 0 <= b < a, c | a, c | b, and s = 1/den with den
 * the least positive integer making the ideal integral.
 */
class FracIdeal {
 public:
  FracIdeal() = default;

  static FracIdeal unit(long D) { return from_hnf(D, 1, 0, 1); }

  static FracIdeal from_hnf(long D, const mpz_class& a, const mpz_class& b, const mpz_class& c,
                            const mpq_class& s = 1) {
    if (a <= 0 || c <= 0 || b < 0 || b >= a) throw InvalidInput("malformed HNF");
    std::vector<FieldElem> basis{FieldElem(D, s * mpq_class(a)),
                                 s * FieldElem::from_omega(D, mpq_class(b), mpq_class(c))};
    FracIdeal I = from_zbasis(D, basis);
    if (!I.closed_under_omega()) throw InvalidInput("HNF does not describe an ideal");
    return I;
  }

  /** Ideal generated over O_F by the given elements. */
  static FracIdeal from_generators(long D, const std::vector<FieldElem>& gens) {
    std::vector<FieldElem> z;
    FieldElem w = FieldElem::omega(D);
    for (const auto& g : gens) {
      z.push_back(g);
      z.push_back(g * w);
    }
    return from_zbasis(D, z);
  }

  static FracIdeal principal(const FieldElem& g) {
    if (g.is_zero()) throw InvalidInput("zero ideal");
    return from_generators(g.disc(), {g});
  }

  long disc() const { return D_; }
  const mpq_class& scale() const { return s_; }
  const mpz_class& a() const { return a_; }
  const mpz_class& b() const { return b_; }
  const mpz_class& c() const { return c_; }

  std::array<FieldElem, 2> zbasis() const {
    return {FieldElem(D_, s_ * mpq_class(a_)),
            s_ * FieldElem::from_omega(D_, mpq_class(b_), mpq_class(c_))};
  }

  mpq_class norm() const { return s_ * s_ * mpq_class(a_ * c_); }
  bool is_integral() const { return s_.get_den() == 1; }

  bool contains(const FieldElem& e) const {
    auto [u, v] = e.omega_coords();
    mpq_class U = u / s_, V = v / s_;
    if (U.get_den() != 1 || V.get_den() != 1) return false;
    mpz_class vi = V.get_num(), ui = U.get_num();
    if (!mpz_divisible_p(vi.get_mpz_t(), c_.get_mpz_t())) return false;
    mpz_class q = vi / c_;
    mpz_class r = ui - q * b_;
    return mpz_divisible_p(r.get_mpz_t(), a_.get_mpz_t()) != 0;
  }
  bool contains(const FracIdeal& J) const {
    auto bj = J.zbasis();
    return contains(bj[0]) && contains(bj[1]);
  }

  FracIdeal conj() const {
    auto z = zbasis();
    return from_zbasis(D_, {z[0].conj(), z[1].conj()});
  }
  FracIdeal inverse() const {
    FracIdeal r = conj();
    return r.scaled(1 / norm());
  }
  FracIdeal scaled(const mpq_class& q) const {
    if (q == 0) throw InvalidInput("zero scale");
    auto z = zbasis();
    return from_zbasis(D_, {z[0] * q, z[1] * q});
  }
  FracIdeal times(const FieldElem& g) const {
    auto z = zbasis();
    return from_zbasis(D_, {z[0] * g, z[1] * g});
  }

  friend FracIdeal operator*(const FracIdeal& I, const FracIdeal& J) {
    auto x = I.zbasis(), y = J.zbasis();
    return from_zbasis(I.D_, {x[0] * y[0], x[0] * y[1], x[1] * y[0], x[1] * y[1]});
  }
  friend FracIdeal operator/(const FracIdeal& I, const FracIdeal& J) { return I * J.inverse(); }
  friend bool operator==(const FracIdeal& I, const FracIdeal& J) {
    return I.D_ == J.D_ && I.s_ == J.s_ && I.a_ == J.a_ && I.b_ == J.b_ && I.c_ == J.c_;
  }
  friend bool operator!=(const FracIdeal& I, const FracIdeal& J) { return !(I == J); }
  friend bool operator<(const FracIdeal& I, const FracIdeal& J) {
    return std::tie(I.s_, I.a_, I.b_, I.c_) < std::tie(J.s_, J.a_, J.b_, J.c_);
  }

  FracIdeal pow(long e) const {
    FracIdeal base = e < 0 ? inverse() : *this;
    unsigned long n = static_cast<unsigned long>(e < 0 ? -e : e);
    FracIdeal r = unit(D_);
    while (n) {
      if (n & 1) r = r * base;
      base = base * base;
      n >>= 1;
    }
    return r;
  }

  std::string str() const {
    std::ostringstream os;
    if (s_ != 1) os << s_.get_str() << "*";
    os << "[" << a_.get_str() << "," << b_.get_str() << "," << c_.get_str() << "]";
    return os.str();
  }

  static FracIdeal from_zbasis(long D, const std::vector<FieldElem>& gens) {
    mpz_class den = 1;
    std::vector<std::pair<mpq_class, mpq_class>> co;
    for (const auto& g : gens) {
      co.push_back(g.omega_coords());
      den = lcm(den, mpz_class(co.back().first.get_den()));
      den = lcm(den, mpz_class(co.back().second.get_den()));
    }
    std::vector<std::pair<mpz_class, mpz_class>> rows;
    for (auto& [u, v] : co) rows.emplace_back(mpz_class(u * den), mpz_class(v * den));
    auto h = detail::hnf2(rows);
    mpz_class g = gcd(h[2], den);
    FracIdeal I;
    I.D_ = D;
    I.a_ = h[0] / g;
    I.b_ = h[1] / g;
    I.c_ = h[2] / g;
    I.s_ = mpq_class(1) / mpq_class(den / g);
    I.s_.canonicalize();
    return I;
  }

 private:
  bool closed_under_omega() const {
    FieldElem w = FieldElem::omega(D_);
    auto z = zbasis();
    return contains(z[0] * w) && contains(z[1] * w) && a_ % c_ == 0 && b_ % c_ == 0;
  }

  long D_ = 0;
  mpq_class s_ = 1;
  mpz_class a_ = 1, b_ = 0, c_ = 1;
};

enum class Splitting { Split, Inert, Ramified };

inline Splitting splitting(long D, const mpz_class& p) {
  if (!is_prime(p)) throw InvalidInput("splitting: " + p.get_str() + " is not prime");
  int k = kronecker(mpz_class(D), p);
  return k == 1 ? Splitting::Split : (k == -1 ? Splitting::Inert : Splitting::Ramified);
}

inline const char* splitting_name(Splitting s) {
  return s == Splitting::Split ? "split" : (s == Splitting::Inert ? "inert" : "ramified");
}

/** Primes of O_F above p; split primes ordered by increasing HNF entry b. */
inline std::vector<FracIdeal> primes_above(long D, const mpz_class& p) {
  Splitting t = splitting(D, p);
  if (t == Splitting::Inert) return {FracIdeal::from_hnf(D, p, 0, p)};
  // omega is a root of x^2 - D x + (D^2 - D)/4
  mpz_class c0 = mpz_class(D) * (D - 1) / 4;
  std::vector<mpz_class> roots;
  if (p == 2) {
    for (long r = 0; r < 2; ++r)
      if (mod(mpz_class(r * r) - D * r + c0, p) == 0) roots.push_back(r);
  } else {
    mpz_class s = sqrt_mod(mpz_class(D), p);
    mpz_class inv2 = (p + 1) / 2;
    roots.push_back(mod((D + s) * inv2, p));
    mpz_class r2 = mod((D - s) * inv2, p);
    if (r2 != roots[0]) roots.push_back(r2);
  }
  std::vector<FracIdeal> out;
  for (auto& r : roots) out.push_back(FracIdeal::from_hnf(D, p, mod(-r, p), 1));
  std::sort(out.begin(), out.end(), [](const FracIdeal& x, const FracIdeal& y) { return x.b() < y.b(); });
  return out;
}

/** Valuation of a fractional ideal at a prime ideal. */
inline int valuation(const FracIdeal& I, const FracIdeal& P) {
  mpz_class p = P.a();  // every prime ideal in HNF has a = p
  int e = P.norm() == p && splitting(I.disc(), p) == Splitting::Ramified ? 2 : 1;
  mpz_class den = I.scale().get_den();
  FracIdeal J = I.scaled(mpq_class(den));
  int v = 0;
  FracIdeal Pk = P;
  while (Pk.contains(J)) {
    ++v;
    Pk = Pk * P;
  }
  int vd = den == 1 ? 0 : (mpz_divisible_p(den.get_mpz_t(), p.get_mpz_t()) ? vp(den, p) : 0);
  return v - e * vd;
}

inline int valuation(const FieldElem& g, const FracIdeal& P) { return valuation(FracIdeal::principal(g), P); }

/** Prime ideal factorisation of a nonzero fractional ideal. */
inline std::vector<std::pair<FracIdeal, int>> factor_ideal(const FracIdeal& I) {
  mpz_class den = I.scale().get_den();
  mpz_class n = mpz_class(I.norm() * den * den);
  std::vector<std::pair<FracIdeal, int>> out;
  for (auto& [p, e] : factorize(n * den)) {
    for (auto& P : primes_above(I.disc(), p)) {
      int v = valuation(I, P);
      if (v != 0) out.emplace_back(P, v);
    }
  }
  return out;
}

/**
 * Real quadratic field of fundamental discriminant D with its units and the
 * cycles of reduced ideals used for equivalence and principality questions.
 */
class QuadField {
 public:
  explicit QuadField(long D) : D_(D) {
    if (D <= 1 || !is_fundamental(D)) throw InvalidInput("not a positive fundamental discriminant: " + std::to_string(D));
    if (D > kMaxDisc) throw InvalidInput("discriminant beyond supported range 1e6");
    compute_unit();
    build_cycles();
  }

  long disc() const { return D_; }
  FieldElem omega() const { return FieldElem::omega(D_); }
  FieldElem sqrt_disc() const { return FieldElem::sqrt_disc(D_); }
  const FieldElem& fundamental_unit() const { return eps_; }
  int unit_norm() const { return eps_norm_; }
  const FieldElem& totally_positive_unit() const { return eps_plus_; }
  /** Generator of the discriminant kernel, (eps^+)^2. */
  FieldElem eps_delta() const { return eps_plus_ * eps_plus_; }
  long class_number() const { return static_cast<long>(cycles_.size()); }
  long narrow_class_number() const { return class_number() * (eps_norm_ == 1 ? 2 : 1); }
  FracIdeal unit_ideal() const { return FracIdeal::unit(D_); }

  /** Position of an ideal on the reduced cycles: I = mult * (Z + theta Z). */
  struct Located {
    std::size_t cycle = 0, pos = 0;
    FieldElem mult;
  };

  Located locate(const FracIdeal& I) const {
    check(I);
    auto z = I.zbasis();
    FieldElem m = z[0];
    FieldElem theta = z[1] / z[0];
    for (int guard = 0; !is_reduced(theta); ++guard) {
      if (guard > 100000) throw std::runtime_error("reduction did not terminate");
      FieldElem t = theta - FieldElem(D_, mpq_class(theta.floor()));
      m *= t;
      theta = FieldElem(D_, 1) / t;
    }
    auto it = index_.find({theta.x(), theta.y()});
    if (it == index_.end()) throw std::runtime_error("reduced element missing from cycle table");
    return {it->second.first, it->second.second, m};
  }

  /** lambda with I = lambda * J, if I and J are in the same ideal class. */
  std::optional<FieldElem> equivalence(const FracIdeal& I, const FracIdeal& J) const {
    Located a = locate(I), b = locate(J);
    if (a.cycle != b.cycle) return std::nullopt;
    return a.mult * cycle_product(a.cycle, b.pos, a.pos) / b.mult;
  }

  /** Totally positive lambda with I = lambda * J, if one exists. */
  std::optional<FieldElem> narrow_equivalence(const FracIdeal& I, const FracIdeal& J) const {
    auto l = equivalence(I, J);
    if (!l) return std::nullopt;
    FieldElem lam = *l;
    if (lam.norm() < 0) {
      if (eps_norm_ == 1) return std::nullopt;
      lam *= eps_;
    }
    if (lam.sign() < 0) lam = -lam;
    return lam;
  }

  std::optional<FieldElem> wide_generator(const FracIdeal& I) const {
    auto g = equivalence(I, unit_ideal());
    if (!g) return std::nullopt;
    return normalize_wide(*g);
  }

  /** Totally positive generator normalised to 1 <= mu/mu' < eps_Delta. */
  std::optional<FieldElem> is_principal_tp(const FracIdeal& I) const {
    auto g = narrow_equivalence(I, unit_ideal());
    if (!g) return std::nullopt;
    return normalize_tp(*g);
  }

  /** Multiplies by powers of eps^+ until 1 <= mu/mu' < (eps^+)^2. */
  FieldElem normalize_tp(FieldElem mu) const {
    if (!mu.totally_positive()) throw InvalidInput("normalize_tp: not totally positive");
    return normalize_by(mu, eps_plus_);
  }

  /** Multiplies by +-eps^j until mu > 0 and 1 <= |mu/mu'| < eps^2. */
  FieldElem normalize_wide(FieldElem mu) const {
    mu = normalize_by(mu, eps_);
    if (mu.sign() < 0) mu = -mu;
    return mu;
  }

  /** Narrow class invariant: (cycle, sign of the connecting norm). */
  std::pair<std::size_t, int> narrow_key(const FracIdeal& I) const {
    Located l = locate(I);
    int s = 1;
    if (eps_norm_ == 1) {
      s = sgn(l.mult.norm());
      if (l.pos % 2) s = -s;
    }
    return {l.cycle, s};
  }

  /** Reduced elements theta on each cycle, in continued fraction order. */
  const std::vector<std::vector<FieldElem>>& cycles() const { return cycles_; }

 private:
  void check(const FracIdeal& I) const {
    if (I.disc() != D_) throw InvalidInput("ideal from a different field");
  }

  bool is_reduced(const FieldElem& t) const {
    return (t - FieldElem(D_, 1)).sign() > 0 && t.conj_sign() < 0 && (t.conj() + FieldElem(D_, 1)).sign() > 0;
  }

  FieldElem next(const FieldElem& t) const {
    return FieldElem(D_, 1) / (t - FieldElem(D_, mpq_class(t.floor())));
  }

  // product of the cycle entries taking position from to position to
  FieldElem cycle_product(std::size_t c, std::size_t from, std::size_t to) const {
    FieldElem r(D_, 1);
    const auto& cy = cycles_[c];
    if (to >= from) {
      for (std::size_t j = from + 1; j <= to; ++j) r *= cy[j];
    } else {
      for (std::size_t j = to + 1; j <= from; ++j) r *= cy[j];
      r = FieldElem(D_, 1) / r;
    }
    return r;
  }

  FieldElem normalize_by(FieldElem mu, const FieldElem& u) const {
    // ratio |mu/mu'| grows by u^2 per factor u (u has norm +-1)
    auto xy_sign = [](const FieldElem& e) { return sgn(e.x()) * sgn(e.y()); };
    double lr = mu.log_abs_value() - mu.conj().log_abs_value();
    double lu = 2 * u.log_abs_value();
    long j = static_cast<long>(std::floor(lr / lu));
    if (j != 0) mu *= u.pow(-j);
    FieldElem ui = FieldElem(D_, 1) / u;
    while (xy_sign(mu) < 0) mu *= u;
    while (xy_sign(mu * ui) >= 0) mu *= ui;
    return mu;
  }

  void compute_unit() {
    long delta = D_ % 2;
    FieldElem w0 = FieldElem(D_, mpq_class(delta, 2), mpq_class(1, 2));
    FieldElem w0c = w0.conj();
    FieldElem t = w0;
    mpz_class p_prev = 0, q_prev = 1, p = 1, q = 0;
    for (long n = 0;; ++n) {
      mpz_class an = t.floor();
      mpz_class pn = an * p + p_prev, qn = an * q + q_prev;
      p_prev = p;
      q_prev = q;
      p = pn;
      q = qn;
      FieldElem eta = FieldElem(D_, mpq_class(p)) - FieldElem(D_, mpq_class(q)) * w0c;
      mpq_class N = eta.norm();
      if (N == 1 || N == -1) {
        eps_ = eta;
        eps_norm_ = N == 1 ? 1 : -1;
        break;
      }
      t = FieldElem(D_, 1) / (t - FieldElem(D_, mpq_class(an)));
    }
    eps_plus_ = eps_norm_ == 1 ? eps_ : eps_ * eps_;
  }

  void build_cycles() {
    // every reduced theta is (b + omega)/a for a primitive ideal [a, b + omega]
    mpz_class c0 = mpz_class(D_) * (D_ - 1) / 4;
    long amax = static_cast<long>(std::sqrt(static_cast<double>(D_))) + 1;
    std::vector<FieldElem> reduced;
    for (long a = 1; a <= amax; ++a) {
      for (long b0 = 0; b0 < a; ++b0) {
        mpz_class N = mpz_class(b0) * b0 + mpz_class(D_) * b0 + c0;
        if (N % a != 0) continue;
        FieldElem th = (FieldElem(D_, b0) + FieldElem::omega(D_)) * mpq_class(1, a);
        // shift by an integer so that -1 < theta' < 0
        th += FieldElem(D_, mpq_class(-th.conj().floor() - 1));
        if (is_reduced(th)) reduced.push_back(th);
      }
    }
    std::map<std::pair<mpq_class, mpq_class>, bool> seen;
    for (auto& t : reduced) seen[{t.x(), t.y()}] = false;
    for (auto& t : reduced) {
      if (seen[{t.x(), t.y()}]) continue;
      std::vector<FieldElem> cy;
      FieldElem cur = t;
      do {
        auto key = std::make_pair(cur.x(), cur.y());
        auto it = seen.find(key);
        if (it == seen.end()) throw std::runtime_error("cycle left the reduced table");
        it->second = true;
        index_[key] = {cycles_.size(), cy.size()};
        cy.push_back(cur);
        cur = next(cur);
      } while (cur != t);
      cycles_.push_back(std::move(cy));
    }
  }

  long D_;
  FieldElem eps_, eps_plus_;
  int eps_norm_ = 1;
  std::vector<std::vector<FieldElem>> cycles_;
  std::map<std::pair<mpq_class, mpq_class>, std::pair<std::size_t, std::size_t>> index_;
};

/**
 * Narrow class group with representatives that are prime ideals coprime to the
 * different (the identity is represented by O_F).
 */
class NarrowClassGroup {
 public:
  explicit NarrowClassGroup(long D) : NarrowClassGroup(QuadField(D)) {}
  explicit NarrowClassGroup(QuadField F) : F_(std::move(F)) {
    const long D = F_.disc();
    add(F_.unit_ideal());
    const long target = F_.narrow_class_number();
    for (long p = 2; static_cast<long>(reps_.size()) < target; ++p) {
      if (p > 100000) throw std::runtime_error("no prime representative found for some narrow class");
      if (!is_prime(p) || D % p == 0 || kronecker(D, p) != 1) continue;
      for (auto& P : primes_above(D, p)) add(P);
    }
  }

  const QuadField& field() const { return F_; }
  std::size_t order() const { return reps_.size(); }
  const std::vector<FracIdeal>& representatives() const { return reps_; }

  std::size_t class_of(const FracIdeal& I) const {
    auto it = keys_.find(F_.narrow_key(I));
    if (it == keys_.end()) throw std::runtime_error("ideal class not resolved");
    return it->second;
  }
  std::size_t identity() const { return 0; }
  std::size_t mul(std::size_t i, std::size_t j) const { return class_of(reps_.at(i) * reps_.at(j)); }
  std::size_t inv(std::size_t i) const { return class_of(reps_.at(i).conj()); }

 private:
  void add(const FracIdeal& P) {
    auto k = F_.narrow_key(P);
    if (keys_.count(k)) return;
    keys_[k] = reps_.size();
    reps_.push_back(P);
  }

  QuadField F_;
  std::vector<FracIdeal> reps_;
  std::map<std::pair<std::size_t, int>, std::size_t> keys_;
};

}  // namespace cmgreen
