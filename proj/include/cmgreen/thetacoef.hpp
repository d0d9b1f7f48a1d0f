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

#include <map>
#include <nlohmann/json.hpp>
#include <vector>

#include "finquad.hpp"

namespace cmgreen {

inline constexpr long kMaxLatticeRows = 50000000;

/**
 * All lambda in shift + L with Nm(lambda) = N and 1/eps+ <= |lambda/lambda'| < eps+.
 * Every <eps+>-orbit of solutions meets this range exactly once.
 */
inline std::vector<FieldElem> norm_solutions(const QuadField& F, const FracIdeal& L, const FieldElem& shift,
                                             const mpq_class& N, long box_scale = 1) {
  if (N == 0) throw InvalidInput("norm_solutions: zero norm");
  const long D = F.disc();
  const FieldElem& ep = F.totally_positive_unit();
  const FieldElem ep2 = ep * ep;
  auto z = L.zbasis();
  const mpq_class X1 = z[0].x(), X2 = z[1].x(), Y2 = z[1].y();
  const mpq_class tx = shift.x(), ty = shift.y();

  // |lambda|, |lambda'| <= sqrt(|N| eps+), so |Y| <= sqrt(|N| eps+ / D)
  mpz_class eu = ep.floor() + 1;
  mpq_class R = abs(N) * eu * box_scale * box_scale / D;
  mpz_class sq = isqrt(floor_q(R)) + 1;
  mpz_class ylo = floor_q((-sq - ty) / Y2) - 1;
  mpz_class yhi = floor_q((sq - ty) / Y2) + 1;
  if (yhi - ylo > kMaxLatticeRows) throw InvalidInput("lattice enumeration box too large");

  std::vector<FieldElem> out;
  for (long y = to_long(ylo); y <= to_long(yhi); ++y) {
    mpq_class Y = ty + Y2 * y;
    mpq_class V = N + Y * Y * D;
    if (V < 0) continue;
    mpz_class num = V.get_num(), den = V.get_den();
    if (!is_square(num) || !is_square(den)) continue;
    mpq_class r = frac(isqrt(num), isqrt(den));
    for (int s : {1, -1}) {
      if (s < 0 && r == 0) break;
      mpq_class X = s * r;
      mpq_class x = (X - tx - X2 * y) / X1;
      if (x.get_den() != 1) continue;
      FieldElem lam(D, X, Y);
      FieldElem a = lam * lam, b = lam.conj() * lam.conj();
      if ((ep2 * a - b).sign() >= 0 && (ep2 * b - a).sign() > 0) out.push_back(lam);
    }
  }
  return out;
}

/**
 * Coefficient of the theta series of the coset h + a at index m > 0:
 * signed count of lambda in h + a with Nm(lambda) = Nm(a) m, modulo (eps+)^2.
 */
inline long c_lattice(const QuadField& F, const FracIdeal& a, const mpq_class& m, const FieldElem& h,
                      long box_scale = 1) {
  if (m <= 0) throw InvalidInput("c_lattice: index must be positive");
  mpq_class N = a.norm() * m;
  long c = 0;
  // orbits under (eps+)^2 are represented by lambda and eps+ lambda with lambda in the eps+ range
  for (const FieldElem& t : {h, F.totally_positive_unit().conj() * h})
    for (const auto& lam : norm_solutions(F, a, t, N, box_scale)) c += lam.sign();
  return c;
}

/**
 * Signed counts, per class of A_D, of lambda in L d^{-1} with Nm(lambda) = N,
 * modulo (eps+)^2. L must be coprime to the different.
 */
inline std::map<FQMElem, long> lattice_table(const QuadField& F, const DiscModule& A, const FracIdeal& L,
                                             const mpq_class& N, long box_scale = 1) {
  const long D = F.disc();
  FracIdeal Ld = L * FracIdeal::principal(FieldElem(D, 1) / F.sqrt_disc());
  std::map<FQMElem, long> out;
  for (const auto& lam : norm_solutions(F, Ld, FieldElem(D, 0), N, box_scale)) {
    int s = lam.sign();
    out[A.from_lambda(lam)] += s;
    out[A.from_lambda(F.totally_positive_unit() * lam)] += s;
  }
  return out;
}

/** Coefficient query for c_chi(n/D, h). */
struct CoeffQuery {
  long n = 0;
  FQMElem h;
  GenusChar chi;
  std::vector<FracIdeal> S_F;
};

inline void check_class_reps(long D, const std::vector<FracIdeal>& S) {
  for (const auto& b : S)
    if (gcd(mpz_class(b.norm().get_num() * b.norm().get_den()), mpz_class(D)) != 1)
      throw InvalidInput("class representative not coprime to the discriminant");
}

/** c_chi(n/D, h) for every h at once through the lattices b/b'. */
inline std::map<FQMElem, long> c_chi_lattice_all(const QuadField& F, const DiscModule& A, const GenusChar& chi,
                                                 const std::vector<FracIdeal>& S_F, long n, long box_scale = 1) {
  check_class_reps(F.disc(), S_F);
  std::map<FQMElem, long> out;
  mpq_class N = frac(-n, F.disc());
  for (const auto& b : S_F) {
    int x = chi_multiplicative(chi, b);
    for (auto& [h, c] : lattice_table(F, A, b / b.conj(), N, box_scale)) out[h] += x * c;
  }
  for (auto it = out.begin(); it != out.end();) it = it->second == 0 ? out.erase(it) : std::next(it);
  return out;
}

inline long c_chi_lattice(const QuadField& F, const DiscModule& A, const CoeffQuery& q, long box_scale = 1) {
  auto t = c_chi_lattice_all(F, A, q.chi, q.S_F, q.n, box_scale);
  auto it = t.find(q.h);
  return it == t.end() ? 0 : it->second;
}

/** c_chi(n/D, h) through integral ideals of norm n; d0 as returned by d0_of. */
inline long c_chi_ideal(const QuadField& F, const DiscModule& A, const CoeffQuery& q, long d0) {
  if (!q.chi.odd() || q.n <= 0) return 0;
  if (A.q_num(q.h) != mod(mpz_class(-q.n), mpz_class(F.disc()))) return 0;
  int s = A.s_h(q.h, d0);
  if (s == 0) return 0;
  check_class_reps(F.disc(), q.S_F);
  long total = 0;
  for (const auto& a : ideals_of_norm(F.disc(), q.n)) {
    auto sd = sqrt_data(F, A, q.S_F, a);
    for (std::size_t i = 0; i < sd.size(); ++i)
      if (sd[i] && (sd[i]->first == q.h || sd[i]->second == q.h)) total += chi_multiplicative(q.chi, q.S_F[i]);
  }
  return 2 * s * total;
}

/** Sum of c_chi(Nm(mu0/t)/D, (mu0/t)/sqrt D) over rational t dividing mu0. */
inline long C_chi(const QuadField& F, const DiscModule& A, const GenusChar& chi, const std::vector<FracIdeal>& S_F,
                  const FieldElem& mu0, long d0) {
  if (mu0.is_zero() || !mu0.is_integral()) throw InvalidInput("C_chi needs a nonzero integral element");
  auto [u, v] = mu0.omega_coords();
  mpz_class content = gcd(mpz_class(u.get_num()), mpz_class(v.get_num()));
  long total = 0;
  for (const auto& t : divisors(content)) {
    FieldElem mu = mu0 * mpq_class(1 / mpq_class(t));
    mpq_class N = mu.norm();
    if (N <= 0) continue;
    CoeffQuery q{to_long(N.get_num()), A.from_lambda(mu / F.sqrt_disc()), chi, S_F};
    total += c_chi_ideal(F, A, q, d0);
  }
  return total;
}

/** JSON table {Delta, chi, entries:[{n, h, c}]} of nonzero c_chi(n/D, h), n <= n_max. */
inline nlohmann::json coefficient_table_json(const QuadField& F, const DiscModule& A, const GenusChar& chi,
                                             const std::vector<FracIdeal>& S_F, long n_max, long d0) {
  nlohmann::json entries = nlohmann::json::array();
  for (long n = 1; n <= n_max; ++n)
    for (const auto& h : A.elements()) {
      long c = c_chi_ideal(F, A, CoeffQuery{n, h, chi, S_F}, d0);
      if (c != 0) entries.push_back({{"n", n}, {"h", {h.a, h.b}}, {"c", c}});
    }
  return {{"Delta", F.disc()}, {"chi", {chi.D1, chi.D2}}, {"entries", entries}};
}

}  // namespace cmgreen
