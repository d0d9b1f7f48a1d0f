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

#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <vector>

#include "finquad.hpp"
#include "mforms.hpp"

namespace cmgreen {

/** Binomial coefficient with rational top entry. */
inline mpq_class binomial_q(const mpq_class& x, unsigned long k) {
  mpq_class r = 1;
  for (unsigned long j = 0; j < k; ++j) r = r * (x - j) / (j + 1);
  return r;
}

/** Legendre polynomial P_n = sum_b c_{n,b} x^b with exact coefficients. */
struct LegendreP {
  int n = 0;
  std::vector<mpq_class> c;

  mpq_class operator()(const mpq_class& x) const {
    mpq_class s = 0;
    for (int b = n; b >= 0; --b) s = s * x + c[b];
    return s;
  }
};

/** c_{n,b} = 2^n C(n,b) C((n+b-1)/2, n). */
inline LegendreP legendre_P_exact(int n) {
  if (n < 0) throw InvalidInput("legendre_P: negative degree");
  LegendreP P;
  P.n = n;
  for (int b = 0; b <= n; ++b) {
    mpq_class top = frac(n + b - 1, 2);
    P.c.push_back(mpq_class(pow_z(2, n)) * mpq_class(binomial(n, b)) * binomial_q(top, n));
  }
  return P;
}

/** mu0 = (n + m sqrt(D))/2 with |n| < m sqrt(D), so mu0/sqrt(D) is totally positive with trace m. */
struct TraceSlice {
  long m = 0, D = 0;
  std::vector<FieldElem> elements;
};

inline TraceSlice trace_slice(long m, long D) {
  if (m < 1) throw InvalidInput("trace_slice: m must be positive");
  TraceSlice s{m, D, {}};
  mpz_class lim = isqrt(mpz_class(m) * m * D);
  for (long n = -to_long(lim); n <= to_long(lim); ++n) {
    if (mpz_class(n) * n >= mpz_class(m) * m * D) continue;
    if (((n - m * D) % 2 + 2) % 2) continue;
    s.elements.emplace_back(D, frac(n, 2), frac(m, 2));
  }
  return s;
}

/** Prime pair above a split l, ordered (l, l'). */
struct LabeledPrime {
  mpz_class p;
  FracIdeal P, Pc;
  FieldElem gen;  // generator of P^{h_F}
};

/**
 * Labels the primes above a split p: P is the one whose generator mu of P^{h_F},
 * normalised to 1 <= |mu/mu'| < eps^2, has |mu/mu'| < eps.
 */
inline LabeledPrime label_primes(const QuadField& F, const mpz_class& p) {
  auto Ps = primes_above(F.disc(), p);
  if (Ps.size() != 2) throw InvalidInput("label_primes: prime does not split");
  const long h = F.class_number();
  const FieldElem& eps = F.fundamental_unit();
  for (int i = 0; i < 2; ++i) {
    auto mu = F.wide_generator(Ps[i].pow(h));
    if (!mu) throw std::logic_error("P^h not principal");
    // |mu/mu'| < eps  <=>  mu^2 < eps^2 mu'^2 in absolute value
    FieldElem a = *mu * *mu, b = eps * eps * mu->conj() * mu->conj();
    if (a.sign() * (b.sign() * b - a.sign() * a).sign() >= 0 && (b.sign() * b - a.sign() * a).sign() > 0)
      return {p, Ps[i], Ps[1 - i], *mu};
  }
  throw std::logic_error("label_primes: no prime with small generator ratio");
}

struct ExponentEntry {
  mpz_class p;
  FracIdeal prime;
  bool conjugate = false;  // true when prime is l' in the labeling convention
  mpq_class e;             // ord(gamma_f)/kappa, positive
  FieldElem gen;           // generator of prime^{h_F}
};

struct FactorReport {
  long D = 0;
  int k = 0;
  GenusChar chi;
  mpz_class kappa = 1;
  std::vector<ExponentEntry> exponents;
  std::map<std::pair<mpz_class, bool>, mpq_class> raw;  // per labeled prime, before netting
  // filled by reconcile
  std::optional<double> unit_fitted;
  std::optional<mpq_class> unit_power;  // power of eps_F' in gamma_f
  std::optional<double> residual, lhs, L;
  double rhs_value = 0;
  double threshold = 0;
  bool success = false;
};

/** Weight ((sqrt(D) m)^{k-1}/2) P_{k-1}(n/(sqrt(D) m)) as an exact rational. */
inline mpq_class slice_weight(const LegendreP& P, long D, long m, const mpq_class& n) {
  mpq_class w = 0;
  for (int b = 0; b <= P.n; ++b) {
    if (P.c[b] == 0) continue;
    if ((P.n - b) % 2) throw std::logic_error("Legendre coefficient parity");
    mpz_class dm2 = mpz_class(D) * m * m;
    w += P.c[b] * mpq_class(pow_z(n.get_num(), b), pow_z(n.get_den(), b)) * mpq_class(pow_z(dm2, (P.n - b) / 2));
  }
  return w / 2;
}

/** Exponents of gamma_f at the split primes l with chi(l) = -1. */
inline FactorReport gamma_exponents(int k, const PrincipalPart& pp, long d1, long d2) {
  if (k < 2 || k % 2) throw InvalidInput("k must be even and at least 2");
  if (d1 >= 0 || d2 >= 0 || !is_fundamental(d1) || !is_fundamental(d2))
    throw InvalidInput("CM discriminants must be negative fundamental");
  if (std::gcd(d1, d2) != 1) throw InvalidInput("CM discriminants must be coprime");
  auto chk = check_principal_part(k, pp);
  if (!chk.valid) throw InvalidInput("principal part obstructed by cusp forms");
  const long D = d1 * d2;
  QuadField F(D);
  GenusChar chi(d1, d2);
  LegendreP P = legendre_P_exact(k - 1);
  FactorReport r;
  r.D = D;
  r.k = k;
  r.chi = chi;
  std::map<mpz_class, LabeledPrime> labels;
  for (auto& [m, c] : pp) {
    for (const auto& mu0 : trace_slice(m, D).elements) {
      mpq_class w = c * slice_weight(P, D, m, mu0.trace());
      if (w == 0) continue;
      FracIdeal I = FracIdeal::principal(mu0);
      for (auto& [L, e] : factor_ideal(I)) {
        mpz_class p = L.a();
        if (splitting(D, p) != Splitting::Split || chi.on_prime(p, 1) != -1) continue;
        if (!labels.count(p)) labels.emplace(p, label_primes(F, p));
        bool conj = !(L == labels.at(p).P);
        r.raw[{p, conj}] += w * mpq_class(rho_KF(chi, I * L)) * (1 + e);
      }
    }
  }
  for (auto& [p, lab] : labels) {
    mpq_class net = r.raw[{p, false}] - r.raw[{p, true}];
    if (net == 0) continue;
    bool conj = net < 0;
    r.exponents.push_back({p, conj ? lab.Pc : lab.P, conj, abs(net), conj ? lab.gen.conj() : lab.gen});
    r.kappa = lcm(r.kappa, mpz_class(r.exponents.back().e.get_den()));
  }
  return r;
}

/** Exponents of prod over ideal divisors a of (mu0) of a^{chi(a)}. */
inline std::map<FracIdeal, long> alt_exponent_check(const FieldElem& mu0, const GenusChar& chi) {
  std::map<FracIdeal, long> out;
  FracIdeal I = FracIdeal::principal(mu0);
  auto fac = factor_ideal(I);
  for (const auto& a : ideal_divisors(I)) {
    int x = chi_multiplicative(chi, a);
    for (auto& [L, e] : fac) out[L] += x * valuation(a, L);
  }
  for (auto it = out.begin(); it != out.end();) it = it->second == 0 ? out.erase(it) : std::next(it);
  return out;
}

/** Exponents rho((mu0) l)(1 + ord_l(mu0)) at primes l | mu0 with chi(l) = -1. */
inline std::map<FracIdeal, long> rho_exponents(const FieldElem& mu0, const GenusChar& chi) {
  std::map<FracIdeal, long> out;
  FracIdeal I = FracIdeal::principal(mu0);
  for (auto& [L, e] : factor_ideal(I)) {
    mpz_class p = L.a();
    int f = L.norm() == p ? 1 : 2;
    if (chi.on_prime(p, f) != -1) continue;
    long v = to_long(rho_KF(chi, I * L)) * (1 + e);
    if (v) out[L] = v;
  }
  return out;
}

/** sum over 0 <= s <= a, s - a <= r <= b - s of eps^r (a - b + 2r). */
inline long identity_sum(int eps, long a, long b) {
  long t = 0;
  for (long s = 0; s <= a; ++s)
    for (long r = s - a; r <= b - s; ++r) t += (eps < 0 && (r % 2 != 0) ? -1 : 1) * (a - b + 2 * r);
  return t;
}

/** Closed form of identity_sum for 0 <= a <= b. */
inline long identity_closed(int eps, long a, long b) {
  if (eps > 0) return 0;
  if ((a + 1) % 2 == 0 && b % 2 == 0) return a + 1;
  if (a % 2 == 0 && (b + 1) % 2 == 0) return -(b + 1);
  return 0;
}

/** Nearest rational to x with denominator at most qmax. */
inline mpq_class nearest_rational(double x, long qmax) {
  mpq_class best = frac(static_cast<long>(std::llround(x)), 1);
  double err = std::fabs(x - best.get_d());
  for (long q = 2; q <= qmax; ++q) {
    mpq_class c = frac(static_cast<long>(std::llround(x * q)), q);
    double e = std::fabs(x - c.get_d());
    if (e < err - 1e-15) {
      best = c;
      err = e;
    }
  }
  return best;
}

/** log|gamma/gamma'| of the ideal part, up to the unit: kappa * sum e log|mu/mu'| / h_F. */
inline double ideal_log_part(const FactorReport& r, long h) {
  double S = 0;
  for (const auto& x : r.exponents) S += x.e.get_d() * (x.gen.log_abs_value() - x.gen.conj().log_abs_value());
  return r.kappa.get_d() * S / static_cast<double>(h);
}

/**
 * Fits the power u of eps_F' with
 *   -kappa D^{(k-1)/2} lhs = kappa S / h_F - 2 u log(eps_F),
 * rounds it to a rational with denominator <= 2 h_F kappa and records the residual.
 */
inline void reconcile(FactorReport& r, double lhs, double tol) {
  QuadField F(r.D);
  const long h = F.class_number();
  const double logeps = F.fundamental_unit().log_abs_value();
  const double scale = std::pow(static_cast<double>(r.D), (r.k - 1) / 2.0);
  const double L = -r.kappa.get_d() * scale * lhs;
  const double I = ideal_log_part(r, h);
  const double u = (I - L) / (2 * logeps);
  mpq_class q = nearest_rational(u, 2 * h * to_long(r.kappa));
  r.lhs = lhs;
  r.L = L;
  r.unit_fitted = u;
  r.unit_power = q;
  r.residual = std::fabs(L - (I - 2 * q.get_d() * logeps));
  r.rhs_value = -(I - 2 * q.get_d() * logeps) / (scale * r.kappa.get_d());
  r.threshold = 10 * tol * scale;
  r.success = *r.residual < r.threshold;
}

/** Value predicted from the ideal part alone (unit power 0). */
inline double ideal_rhs(const FactorReport& r) {
  QuadField F(r.D);
  const double scale = std::pow(static_cast<double>(r.D), (r.k - 1) / 2.0);
  return -ideal_log_part(r, F.class_number()) / (scale * r.kappa.get_d());
}

}  // namespace cmgreen
