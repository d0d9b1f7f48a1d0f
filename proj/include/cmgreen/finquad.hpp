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

#include <algorithm>
#include <numeric>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "qfield.hpp"

namespace cmgreen {

/** Element (a,b) of Z/(D/g) x Z/g, g = gcd(D,2), standing for (a + b*omega)/sqrt(D). */
struct FQMElem {
  long a = 0, b = 0;
  friend bool operator==(const FQMElem& x, const FQMElem& y) { return x.a == y.a && x.b == y.b; }
  friend bool operator!=(const FQMElem& x, const FQMElem& y) { return !(x == y); }
  friend bool operator<(const FQMElem& x, const FQMElem& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); }
};

/**
 * The discriminant module A_D = d^{-1}/O_F with Q(h) = Nm(h) mod 1, the
 * involutions sigma_p and the group G_D of divisors d of D with gcd(d, D/d) = 1.
 */
class DiscModule {
 public:
  explicit DiscModule(long D) : D_(D) {
    if (D <= 1 || !is_fundamental(D)) throw InvalidInput("not a positive fundamental discriminant");
    g_ = D % 2 == 0 ? 2 : 1;
    A_ = D / g_;
    exp_ = A_;
    FracIdeal L = FracIdeal::principal(FieldElem::sqrt_disc(D));
    a0_ = to_long(L.a());
    b0_ = to_long(L.b());
    c0_ = to_long(L.c());
    if (a0_ != A_ || c0_ != g_) throw std::logic_error("unexpected shape of sqrt(D) O_F");
    for (auto& [p, e] : factorize(D)) primes_.push_back(to_long(p));
    ord2_ = D % 2 == 0 ? vp(mpz_class(D), 2) : 0;
    for (long p : primes_) {
      long pk = p == 2 ? (ord2_ == 2 ? 2 : 4) : p;  // p-part of the exponent
      long m = exp_ / pk;
      mpz_class inv;
      mpz_class mm = m;
      mpz_class mod_pk = pk;
      mpz_invert(inv.get_mpz_t(), mm.get_mpz_t(), mod_pk.get_mpz_t());
      idem_.push_back(mod(mpz_class(m) * inv, mpz_class(exp_)).get_si());
    }
    if (ord2_ == 2) {
      for (long a : {0L, A_ / 2})
        for (long b : {0L, 1L}) two_torsion_.push_back({a, b});
    }
  }

  long disc() const { return D_; }
  long size() const { return D_; }
  long exponent() const { return exp_; }
  const std::vector<long>& primes() const { return primes_; }

  std::vector<FQMElem> elements() const {
    std::vector<FQMElem> v;
    for (long b = 0; b < g_; ++b)
      for (long a = 0; a < A_; ++a) v.push_back({a, b});
    return v;
  }

  /** Class of (u + v*omega)/sqrt(D). */
  FQMElem reduce(const mpz_class& u, const mpz_class& v) const {
    mpz_class q = fdiv(v, mpz_class(c0_));
    mpz_class r = v - q * c0_;
    mpz_class a = mod(u - q * b0_, mpz_class(a0_));
    return {a.get_si(), r.get_si()};
  }

  /** Class of lambda in d^{-1} localised at the primes dividing D. */
  FQMElem from_lambda(const FieldElem& lambda) const {
    auto [u, v] = (lambda * FieldElem::sqrt_disc(D_)).omega_coords();
    mpz_class t = lcm(mpz_class(u.get_den()), mpz_class(v.get_den()));
    if (gcd(t, mpz_class(D_)) != 1) throw InvalidInput("element is not integral at the primes above D");
    FQMElem h = reduce(mpz_class(u * t), mpz_class(v * t));
    if (t == 1) return h;
    mpz_class inv;
    mpz_class te = mod(t, mpz_class(exp_));
    mpz_class E = exp_;
    mpz_invert(inv.get_mpz_t(), te.get_mpz_t(), E.get_mpz_t());
    return scale(inv.get_si(), h);
  }

  /** Representative lambda = (a + b*omega)/sqrt(D) of h. */
  FieldElem lift(const FQMElem& h) const {
    return FieldElem::from_omega(D_, h.a, h.b) / FieldElem::sqrt_disc(D_);
  }

  FQMElem add(const FQMElem& x, const FQMElem& y) const { return reduce(mpz_class(x.a) + y.a, mpz_class(x.b) + y.b); }
  FQMElem neg(const FQMElem& x) const { return reduce(-mpz_class(x.a), -mpz_class(x.b)); }
  FQMElem sub(const FQMElem& x, const FQMElem& y) const { return add(x, neg(y)); }
  FQMElem scale(long k, const FQMElem& x) const { return reduce(mpz_class(k) * x.a, mpz_class(k) * x.b); }
  /** Multiplication by alpha integral at the primes above D. */
  FQMElem mul(const FieldElem& alpha, const FQMElem& x) const { return from_lambda(alpha * lift(x)); }

  /** n in [0, D) with Q(h) = n/D mod 1. */
  long q_num(const FQMElem& h) const {
    mpz_class a = h.a, b = h.b;
    mpz_class N = a * a + mpz_class(D_) * a * b + b * b * (mpz_class(D_) * (D_ - 1) / 4);
    return mod(-N, mpz_class(D_)).get_si();
  }
  mpq_class Q(const FQMElem& h) const { return frac(q_num(h), D_); }

  /** p-component of h. */
  FQMElem component(long p, const FQMElem& h) const { return scale(idem_.at(index_of(p)), h); }

  FQMElem sigma_p(long p, const FQMElem& h) const {
    FQMElem hp = component(p, h);
    FQMElem rest = sub(h, hp);
    if (p != 2 || ord2_ == 3) return sub(rest, hp);
    // the 2-part is (Z/2)^2 with Q values 0, 1/4, 1/4, 1/2: swap the two of value 1/4
    if (q_num(hp) * 4 != D_) return h;
    for (const auto& t : two_torsion_)
      if (t != hp && q_num(t) * 4 == D_) return add(rest, t);
    throw std::logic_error("2-part of A_D has unexpected shape");
  }

  FQMElem sigma(long d, const FQMElem& h) const {
    FQMElem r = h;
    for (long p : primes_)
      if (d % p == 0) r = sigma_p(p, r);
    return r;
  }

  /** p* part of D: p for odd p, 2^ord_2(D) for p = 2 (as element of G_D). */
  long prime_part(long p) const { return p == 2 ? (1L << ord2_) : p; }

  std::vector<long> group() const {
    std::vector<long> G{1};
    for (long p : primes_) {
      std::size_t n = G.size();
      for (std::size_t i = 0; i < n; ++i) G.push_back(G[i] * prime_part(p));
    }
    std::sort(G.begin(), G.end());
    return G;
  }
  static long gmul(long d1, long d2) {
    long g = std::gcd(d1, d2);
    return d1 / g * (d2 / g);
  }

  long d_of(const FQMElem& h) const {
    long n = q_num(h);
    long d = 1;
    for (long p : primes_)
      if (n % p == 0) d *= prime_part(p);
    return d;
  }

  /** Square-free part of D. */
  long delta0() const { return D_ % 4 == 0 ? D_ / 4 : D_; }

  /** Element of G_D with the same prime support as n. */
  long support(long n) const {
    long d = 1;
    for (long p : primes_)
      if (n % p == 0) d *= prime_part(p);
    return d;
  }
  /** Whether sigma_e fixes every h that sigma_d fixes, i.e. supp(e) within supp(d). */
  bool divides(long e, long d) const { return support(d) % support(e) == 0; }

  /**
   * s_h given d0. Multiplication by -eps+ acts as sigma for d0*D0, so h fixed by
   * that element gets 0 as well.
   */
  int s_h(const FQMElem& h, long d0) const {
    long d = d_of(h);
    if (divides(delta0(), d) || divides(gmul(support(d0), support(delta0())), d)) return 0;
    if (divides(d0, d)) return 2;
    return 1;
  }

  /** The three-case closed form using only D0 and d0. */
  int s_h_closed(const FQMElem& h, long d0) const {
    long d = d_of(h);
    if (divides(delta0(), d)) return 0;
    if (divides(d0, d)) return 2;
    return 1;
  }

 private:
  std::size_t index_of(long p) const {
    for (std::size_t i = 0; i < primes_.size(); ++i)
      if (primes_[i] == p) return i;
    throw InvalidInput("prime does not divide the discriminant");
  }

  long D_, g_, A_, exp_, a0_, b0_, c0_;
  int ord2_ = 0;
  std::vector<long> primes_, idem_;
  std::vector<FQMElem> two_torsion_;
};

/** Product of the ramified primes above the primes dividing d. */
inline FracIdeal ramified_ideal(long D, long d) {
  FracIdeal r = FracIdeal::unit(D);
  for (auto& [p, e] : factorize(D))
    if (d % p.get_si() == 0) r = r * primes_above(D, p).at(0);
  return r;
}

/** The element d0 != 1 of G_D whose ramified ideal is narrowly principal. */
inline long d0_of(const QuadField& F) {
  DiscModule A(F.disc());
  long found = 0;
  for (long d : A.group()) {
    if (d == 1) continue;
    if (F.is_principal_tp(ramified_ideal(F.disc(), d))) {
      if (found) throw std::logic_error("d0 is not unique");
      found = d;
    }
  }
  if (!found) throw std::logic_error("d0 not found");
  return found;
}

/**
 * eps+ = 1 mod d/d_{d0}, and eps+ = -1 mod the ramified prime above each p | d0
 * (its cube for p = 2 when ord_2(D) = 3).
 */
inline bool eps_congruences_hold(const QuadField& F) {
  const long D = F.disc();
  const long d0 = d0_of(F);
  const FieldElem e = F.totally_positive_unit(), one(D, 1);
  FracIdeal different = FracIdeal::principal(F.sqrt_disc());
  if (!(different * ramified_ideal(D, d0).inverse()).contains(e - one)) return false;
  for (auto& [p, k] : factorize(D)) {
    if (d0 % p.get_si()) continue;
    FracIdeal P = primes_above(D, p).at(0);
    if (p == 2 && vp(mpz_class(D), mpz_class(2)) == 3) P = P.pow(3);
    if (!P.contains(e + one)) return false;
  }
  return true;
}

/** Direct count over {1, -1, eps+, -eps+} of symmetries fixing h, weighted by sign. */
inline int s_h_direct(const QuadField& F, const DiscModule& A, const FQMElem& h) {
  const long D = F.disc();
  int s = 0;
  for (int sg : {1, -1})
    for (bool e : {false, true}) {
      FieldElem u = e ? F.totally_positive_unit() : FieldElem(D, 1);
      if (sg < 0) u = -u;
      if (A.mul(u, h) == h) s += sg;
    }
  return s;
}

/** Genus character attached to D = D1*D2 with D1, D2 coprime fundamental (or 1). */
struct GenusChar {
  long D1 = 1, D2 = 1;

  GenusChar() = default;
  GenusChar(long d1, long d2) : D1(d1), D2(d2) {
    auto ok = [](long d) { return d == 1 || is_fundamental(d); };
    if (!ok(d1) || !ok(d2)) throw InvalidInput("genus character needs fundamental discriminants");
    if (std::gcd(std::labs(d1), std::labs(d2)) != 1) throw InvalidInput("genus character needs coprime discriminants");
  }
  long disc() const { return D1 * D2; }
  bool odd() const { return D1 < 0; }

  /** Value on an ideal of norm A coprime to D. */
  int on_norm(const mpz_class& A) const {
    if (gcd(A, mpz_class(disc())) != 1) throw InvalidInput("norm not coprime to the discriminant");
    return kronecker(mpz_class(D1), A);
  }
  /** Value on a prime ideal above the rational prime p with residue degree f. */
  int on_prime(const mpz_class& p, int f) const {
    mpz_class q = f == 2 ? mpz_class(p * p) : p;
    if (mpz_divisible_p(mpz_class(D1).get_mpz_t(), p.get_mpz_t())) return kronecker(mpz_class(D2), q);
    return kronecker(mpz_class(D1), q);
  }
  friend bool operator==(const GenusChar& a, const GenusChar& b) {
    return (a.D1 == b.D1 && a.D2 == b.D2) || (a.D1 == b.D2 && a.D2 == b.D1);
  }
};

/** All genus characters of discriminant D, each listed once. */
inline std::vector<GenusChar> genus_characters(long D) {
  std::vector<long> pstar;
  long odd = 1;
  for (auto& [p, e] : factorize(D)) {
    long q = p.get_si();
    if (q == 2) continue;
    long s = q % 4 == 1 ? q : -q;
    pstar.push_back(s);
    odd *= s;
  }
  if (D % 2 == 0) pstar.push_back(D / odd);
  std::vector<GenusChar> out;
  std::size_t n = pstar.size();
  for (unsigned long mask = 0; mask < (1UL << n); ++mask) {
    long d1 = 1;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) d1 *= pstar[i];
    long d2 = D / d1;
    GenusChar c(d1, d2);
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  return out;
}

/** chi on the narrow class of I, through the prime representative of the class. */
inline int chi_on_class(const NarrowClassGroup& G, const GenusChar& chi, const FracIdeal& I) {
  const FracIdeal& rep = G.representatives().at(G.class_of(I));
  return chi.on_norm(mpz_class(rep.norm()));
}

/** chi(I) from the prime factorisation of I. */
inline int chi_multiplicative(const GenusChar& chi, const FracIdeal& I) {
  int v = 1;
  for (auto& [P, e] : factor_ideal(I)) {
    mpz_class p = P.a();
    int f = P.norm() == p ? 1 : 2;
    if (e % 2) v *= chi.on_prime(p, f);
  }
  return v;
}

/** Number of ideals of K = F(sqrt D1) with relative norm I (I integral). */
inline mpz_class rho_KF(const GenusChar& chi, const FracIdeal& I) {
  if (!I.is_integral()) throw InvalidInput("rho_KF needs an integral ideal");
  mpz_class r = 1;
  for (auto& [P, e] : factor_ideal(I)) {
    mpz_class p = P.a();
    int f = P.norm() == p ? 1 : 2;
    int c = chi.on_prime(p, f);
    if (c == 1)
      r *= e + 1;
    else if (c == -1)
      r *= (e % 2 == 0) ? 1 : 0;
  }
  return r;
}

/** All integral ideals dividing I. */
inline std::vector<FracIdeal> ideal_divisors(const FracIdeal& I) {
  std::vector<FracIdeal> out{FracIdeal::unit(I.disc())};
  for (auto& [P, e] : factor_ideal(I)) {
    std::size_t n = out.size();
    FracIdeal Pk = P;
    for (int k = 1; k <= e; ++k) {
      for (std::size_t i = 0; i < n; ++i) out.push_back(out[i] * Pk);
      Pk = Pk * P;
    }
  }
  return out;
}

/** All integral ideals of norm n. */
inline std::vector<FracIdeal> ideals_of_norm(long D, const mpz_class& n) {
  std::vector<FracIdeal> out{FracIdeal::unit(D)};
  if (n < 1) return {};
  for (auto& [p, e] : factorize(n)) {
    auto Ps = primes_above(D, p);
    std::vector<FracIdeal> choices;
    Splitting t = splitting(D, p);
    if (t == Splitting::Inert) {
      if (e % 2) return {};
      choices.push_back(Ps[0].pow(e / 2));
    } else if (t == Splitting::Ramified) {
      choices.push_back(Ps[0].pow(e));
    } else {
      for (int i = 0; i <= e; ++i) choices.push_back(Ps[0].pow(i) * Ps[1].pow(e - i));
    }
    std::vector<FracIdeal> next;
    for (auto& a : out)
      for (auto& c : choices) next.push_back(a * c);
    out.swap(next);
  }
  return out;
}

/**
 * For each narrow class B = [b] of the given representatives: when
 * a * b'/b = (mu) with mu totally positive, the pair of classes of mu/sqrt(D)
 * and eps+ mu/sqrt(D) in A_D.
 */
inline std::vector<std::optional<std::pair<FQMElem, FQMElem>>> sqrt_data(const QuadField& F, const DiscModule& A,
                                                                         const std::vector<FracIdeal>& reps,
                                                                         const FracIdeal& a) {
  std::vector<std::optional<std::pair<FQMElem, FQMElem>>> out;
  FieldElem rt = F.sqrt_disc();
  for (const auto& b : reps) {
    auto mu = F.is_principal_tp(a * b.conj() / b);
    if (!mu) {
      out.emplace_back();
      continue;
    }
    FQMElem h1 = A.from_lambda(*mu / rt);
    FQMElem h2 = A.from_lambda(*mu * F.totally_positive_unit() / rt);
    out.emplace_back(std::make_pair(h1, h2));
  }
  return out;
}

/** Indices (into reps) of the classes in the support of sqrt(a, h). */
inline std::vector<std::size_t> sqrt_support(const QuadField& F, const DiscModule& A,
                                             const std::vector<FracIdeal>& reps, const FracIdeal& a,
                                             const FQMElem& h) {
  std::vector<std::size_t> out;
  auto sd = sqrt_data(F, A, reps, a);
  for (std::size_t i = 0; i < sd.size(); ++i)
    if (sd[i] && (sd[i]->first == h || sd[i]->second == h)) out.push_back(i);
  return out;
}

}  // namespace cmgreen
