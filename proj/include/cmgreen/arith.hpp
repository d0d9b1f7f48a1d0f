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

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cmgreen {

/** Raised for arguments outside the mathematical domain of an operation. */
/** Largest |discriminant| accepted anywhere in the library. */
inline constexpr long kMaxDisc = 1000000;

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline mpz_class gcd(const mpz_class& a, const mpz_class& b) {
  mpz_class g;
  mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return g;
}

inline mpz_class lcm(const mpz_class& a, const mpz_class& b) {
  mpz_class l;
  mpz_lcm(l.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return l;
}

/** Returns g = gcd(a,b) >= 0 and sets s,t with s*a + t*b = g. */
inline mpz_class egcd(const mpz_class& a, const mpz_class& b, mpz_class& s, mpz_class& t) {
  mpz_class g;
  mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return g;
}

/** Nonnegative residue of a modulo m > 0. */
inline mpz_class mod(const mpz_class& a, const mpz_class& m) {
  mpz_class r;
  mpz_mod(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
  return r;
}

inline mpz_class fdiv(const mpz_class& a, const mpz_class& b) {
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

inline mpz_class isqrt(const mpz_class& n) {
  if (n < 0) throw InvalidInput("isqrt of negative number");
  mpz_class r;
  mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
  return r;
}

inline bool is_square(const mpz_class& n) {
  return n >= 0 && mpz_perfect_square_p(n.get_mpz_t()) != 0;
}

/** Canonicalised fraction a/b. */
inline mpq_class frac(const mpz_class& a, const mpz_class& b) {
  mpq_class q(a, b);
  q.canonicalize();
  return q;
}

inline mpz_class floor_q(const mpq_class& q) {
  mpz_class r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

inline mpz_class pow_z(const mpz_class& b, unsigned long e) {
  mpz_class r;
  mpz_pow_ui(r.get_mpz_t(), b.get_mpz_t(), e);
  return r;
}

inline mpz_class binomial(long n, unsigned long k) {
  mpz_class r;
  if (n < 0) {
    // C(n,k) = (-1)^k C(k-n-1,k)
    mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(k - n - 1), k);
    return (k % 2) ? mpz_class(-r) : r;
  }
  mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), k);
  return r;
}

/** p-adic valuation of a nonzero integer. */
inline int vp(mpz_class n, const mpz_class& p) {
  if (n == 0) throw InvalidInput("valuation of zero");
  int v = 0;
  while (mpz_divisible_p(n.get_mpz_t(), p.get_mpz_t())) {
    n /= p;
    ++v;
  }
  return v;
}

inline int vp(const mpq_class& q, const mpz_class& p) {
  return vp(mpz_class(q.get_num()), p) - vp(mpz_class(q.get_den()), p);
}

/** Kronecker symbol (a/n) for arbitrary integers. */
inline int kronecker(long long a, long long n) {
  if (n == 0) return (a == 1 || a == -1) ? 1 : 0;
  int result = 1;
  if (n < 0) {
    n = -n;
    if (a < 0) result = -result;
  }
  int v = 0;
  while (n % 2 == 0) {
    n /= 2;
    ++v;
  }
  if (v > 0) {
    if (a % 2 == 0) return 0;
    long long r8 = ((a % 8) + 8) % 8;
    if ((v & 1) && (r8 == 3 || r8 == 5)) result = -result;
  }
  // Jacobi symbol (a/n) for odd n > 0
  long long x = a % n;
  if (x < 0) x += n;
  long long m = n;
  while (x != 0) {
    while (x % 2 == 0) {
      x /= 2;
      long long r = m % 8;
      if (r == 3 || r == 5) result = -result;
    }
    std::swap(x, m);
    if (x % 4 == 3 && m % 4 == 3) result = -result;
    x %= m;
  }
  return m == 1 ? result : 0;
}

inline int kronecker(const mpz_class& a, const mpz_class& n) {
  return mpz_kronecker(a.get_mpz_t(), n.get_mpz_t());
}

inline bool is_prime(const mpz_class& n) {
  return n >= 2 && mpz_probab_prime_p(n.get_mpz_t(), 30) > 0;
}

inline bool is_squarefree(long long n) {
  if (n < 0) n = -n;
  for (long long p = 2; p * p <= n; ++p) {
    if (n % (p * p) == 0) return false;
    if (n % p == 0) n /= p;
  }
  return true;
}

/** True for fundamental discriminants (either sign), 1 excluded. */
inline bool is_fundamental(long long d) {
  if (d == 0 || d == 1) return false;
  long long r = ((d % 4) + 4) % 4;
  if (r == 1) return is_squarefree(d);
  if (r != 0) return false;
  long long m = d / 4;
  long long rm = ((m % 4) + 4) % 4;
  return (rm == 2 || rm == 3) && is_squarefree(m);
}

namespace detail {

inline mpz_class pollard_brent(const mpz_class& n) {
  if (mpz_even_p(n.get_mpz_t())) return 2;
  for (unsigned long c = 1;; ++c) {
    mpz_class y = 2, x, g = 1, q = 1, ys;
    unsigned long r = 1, m = 64;
    auto f = [&](const mpz_class& v) { return mod(v * v + c, n); };
    do {
      x = y;
      for (unsigned long i = 0; i < r; ++i) y = f(y);
      unsigned long k = 0;
      while (k < r && g == 1) {
        ys = y;
        for (unsigned long i = 0; i < std::min(m, r - k); ++i) {
          y = f(y);
          q = mod(q * abs(mpz_class(x - y)), n);
        }
        g = gcd(q, n);
        k += m;
      }
      r *= 2;
    } while (g == 1);
    if (g == n) {
      do {
        ys = f(ys);
        g = gcd(abs(mpz_class(x - ys)), n);
      } while (g == 1);
    }
    if (g != n) return g;
  }
}

inline void factor_into(mpz_class n, std::map<mpz_class, int>& out) {
  static const unsigned small[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47};
  for (unsigned p : small) {
    while (mpz_divisible_ui_p(n.get_mpz_t(), p)) {
      ++out[mpz_class(p)];
      n /= p;
    }
  }
  if (n == 1) return;
  // trial division for moderate sizes is faster than rho
  for (unsigned long p = 53; p < 20000 && mpz_class(p) * p <= n; p += 2) {
    while (mpz_divisible_ui_p(n.get_mpz_t(), p)) {
      ++out[mpz_class(p)];
      n /= p;
    }
  }
  if (n == 1) return;
  if (is_prime(n)) {
    ++out[n];
    return;
  }
  mpz_class d = pollard_brent(n);
  factor_into(d, out);
  factor_into(n / d, out);
}

}  // namespace detail

/** Prime factorisation of |n|, n != 0, in increasing order of primes. */
inline std::vector<std::pair<mpz_class, int>> factorize(const mpz_class& n) {
  if (n == 0) throw InvalidInput("factorize(0)");
  std::map<mpz_class, int> m;
  mpz_class a = abs(n);
  if (a > 1) detail::factor_into(a, m);
  return {m.begin(), m.end()};
}

inline std::vector<mpz_class> divisors(const mpz_class& n) {
  std::vector<mpz_class> ds{1};
  for (auto& [p, e] : factorize(n)) {
    std::size_t cur = ds.size();
    mpz_class pk = 1;
    for (int k = 1; k <= e; ++k) {
      pk *= p;
      for (std::size_t i = 0; i < cur; ++i) ds.push_back(ds[i] * pk);
    }
  }
  std::sort(ds.begin(), ds.end());
  return ds;
}

inline mpz_class sigma1(const mpz_class& n) {
  mpz_class s = 0;
  for (auto& d : divisors(n)) s += d;
  return s;
}

/** Square root of a modulo an odd prime p, a a quadratic residue. */
inline mpz_class sqrt_mod(const mpz_class& a0, const mpz_class& p) {
  mpz_class a = mod(a0, p);
  if (a == 0) return 0;
  if (kronecker(a, p) != 1) throw InvalidInput("sqrt_mod: non-residue");
  mpz_class q = p - 1;
  int s = 0;
  while (mpz_even_p(q.get_mpz_t())) {
    q /= 2;
    ++s;
  }
  mpz_class z = 2;
  while (kronecker(z, p) != -1) ++z;
  auto pw = [&](const mpz_class& b, const mpz_class& e) {
    mpz_class r;
    mpz_powm(r.get_mpz_t(), b.get_mpz_t(), e.get_mpz_t(), p.get_mpz_t());
    return r;
  };
  mpz_class c = pw(z, q), x = pw(a, (q + 1) / 2), t = pw(a, q);
  int m = s;
  while (t != 1) {
    int i = 0;
    mpz_class tt = t;
    while (tt != 1) {
      tt = mod(tt * tt, p);
      ++i;
    }
    mpz_class b = c;
    for (int j = 0; j < m - i - 1; ++j) b = mod(b * b, p);
    x = mod(x * b, p);
    c = mod(b * b, p);
    t = mod(t * c, p);
    m = i;
  }
  return x;
}

inline long to_long(const mpz_class& z) {
  if (!z.fits_slong_p()) throw InvalidInput("integer out of range: " + z.get_str());
  return z.get_si();
}

}  // namespace cmgreen
