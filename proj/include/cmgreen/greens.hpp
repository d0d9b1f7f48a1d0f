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
#include <boost/math/quadrature/gauss.hpp>
#include <boost/multiprecision/mpfr.hpp>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mforms.hpp"

namespace cmgreen {

/** Working real type; precision is process wide and set through set_working_digits. */
using Real = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                           boost::multiprecision::et_off>;

/** Must be called before any worker thread starts. */
inline void set_working_digits(unsigned digits) {
  if (digits < 15) throw InvalidInput("working precision must be at least 15 digits");
  Real::default_precision(digits);
}

class SingularInput : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

template <class R>
struct HPoint {
  R x, y;
};

/** Reduced positive definite form (A, B, C) of discriminant d and its CM point. */
struct CMPoint {
  long A = 0, B = 0, C = 0, d = 0;
  int w = 2;

  template <class R>
  HPoint<R> point() const {
    using std::sqrt;
    return {R(-B) / R(2 * A), sqrt(R(-d)) / R(2 * A)};
  }
  std::string str() const {
    return "(" + std::to_string(A) + "," + std::to_string(B) + "," + std::to_string(C) + ")";
  }
};

inline std::vector<CMPoint> cm_points(long d) {
  if (d >= 0 || !is_fundamental(d)) throw InvalidInput("CM discriminant must be negative fundamental: " + std::to_string(d));
  if (-d > kMaxDisc) throw InvalidInput("CM discriminant beyond supported range");
  std::vector<CMPoint> out;
  int w = d == -4 ? 4 : d == -3 ? 6 : 2;
  for (long A = 1; 3 * A * A <= -d; ++A)
    for (long B = -A + 1; B <= A; ++B) {
      long num = B * B - d;
      if (num % (4 * A)) continue;
      long C = num / (4 * A);
      if (C < A || (A == C && B < 0)) continue;
      if (std::gcd(std::gcd(A, std::labs(B)), C) != 1) continue;
      out.push_back({A, B, C, d, w});
    }
  return out;
}

template <class R>
R legendre_P(int n, const R& t) {
  if (n == 0) return R(1);
  R p0 = 1, p1 = t;
  for (int j = 1; j < n; ++j) {
    R p2 = (R(2 * j + 1) * t * p1 - R(j) * p0) / R(j + 1);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

namespace detail {

/** Q_n(t) = (P_n(t)/2) log((t+1)/(t-1)) - sum_{m=1}^n P_{m-1}(t) P_{n-m}(t)/m. */
template <class R>
R legendre_Q_closed(int n, const R& t) {
  using std::log;
  R q = legendre_P(n, t) / 2 * log((t + 1) / (t - 1));
  for (int m = 1; m <= n; ++m) q -= legendre_P(m - 1, t) * legendre_P(n - m, t) / R(m);
  return q;
}

/** Descending hypergeometric series in 1/t^2. */
template <class R>
R legendre_Q_series(int n, const R& t) {
  using std::pow;
  // leading coefficient 2^n (n!)^2 / (2n+1)!
  mpz_class f = 1, f2 = 1;
  for (int j = 1; j <= n; ++j) f *= j;
  for (int j = 1; j <= 2 * n + 1; ++j) f2 *= j;
  mpq_class lead = frac(pow_z(2, n) * f * f, f2);
  R x = 1 / (t * t);
  R term = 1, sum = 1;
  const R eps = std::numeric_limits<R>::epsilon();
  for (int j = 0; j < 100000; ++j) {
    term *= R((n + 1 + 2 * j) * (n + 2 + 2 * j)) / R(2 * (2 * n + 3 + 2 * j) * (j + 1)) * x;
    sum += term;
    if (abs(term) < eps * abs(sum)) break;
  }
  return R(lead.get_num().get_str()) / R(lead.get_den().get_str()) * sum / pow(t, n + 1);
}

}  // namespace detail

/**
 * Legendre function of the second kind Q_n(t), t > 1. Closed form up to t = 2,
 * hypergeometric series in 1/t^2 beyond.
 */
template <class R>
R legendre_Q(int n, const R& t) {
  if (n < 0) throw InvalidInput("legendre_Q: negative degree");
  if (!(t > 1)) throw SingularInput("legendre_Q: argument must exceed 1");
  return t <= 2 ? detail::legendre_Q_closed(n, t) : detail::legendre_Q_series(n, t);
}

template <class R>
R cosh_distance(const HPoint<R>& z1, const HPoint<R>& z2) {
  R dx = z1.x - z2.x, dy = z1.y - z2.y;
  return 1 + (dx * dx + dy * dy) / (2 * z1.y * z2.y);
}

/** g_k(z1, z2) = -2 Q_{k-1}(cosh d(z1, z2)). */
template <class R>
R g_k(const HPoint<R>& z1, const HPoint<R>& z2, int k) {
  R t = cosh_distance(z1, z2);
  if (t < 1 + R(1e-10)) throw SingularInput("g_k: points coincide");
  return -2 * legendre_Q(k - 1, t);
}

template <class R>
HPoint<R> mobius(long a, long b, long c, long d, const HPoint<R>& z) {
  R re = R(c) * z.x + R(d), im = R(c) * z.y;
  R den = re * re + im * im;
  R nre = R(a) * z.x + R(b), nim = R(a) * z.y;
  return {(nre * re + nim * im) / den, (nim * re - nre * im) / den};
}

struct GreenParams {
  int k = 2;
  double tol = 1e-7;
  unsigned digits = 30;
  double T0 = 32;       // initial cutoff in cosh distance
  double T_max = 4e6;   // give up (converged = false) beyond this
  unsigned threads = 0; // 0 = hardware concurrency
};

struct HeckeEstimate {
  Real value;
  double T = 0;
  long terms = 0;
};

struct HeckeResult {
  Real value;
  double T = 0;
  long terms = 0;
  int doublings = 0;
  bool converged = false;
  std::vector<HeckeEstimate> history;
};

namespace detail {

/** C^4 ramp from 0 at x = 0 to 1 at x = 1. */
template <class R>
R ramp(const R& x) {
  if (x <= 0) return R(0);
  if (x >= 1) return R(1);
  R x2 = x * x;
  return x2 * x2 * x * (R(126) + x * (R(-420) + x * (R(540) + x * (R(-315) + x * R(70)))));
}

inline long egcd_l(long a, long b, long& x, long& y) {
  if (b == 0) {
    x = a >= 0 ? 1 : -1;
    y = 0;
    return std::labs(a);
  }
  long x1, y1;
  long g = egcd_l(b, a % b, x1, y1);
  x = y1;
  y = x1 - (a / b) * y1;
  return g;
}

/** Weighted sum over matrices with bottom row (c, d) for every d, one c. */
template <class R>
void hecke_row(const HPoint<R>& z1, const HPoint<R>& z2, int k, long m, double T, long c, R& sum, long& terms) {
  const double x1 = static_cast<double>(z1.x), y1 = static_cast<double>(z1.y);
  const double x2 = static_cast<double>(z2.x), y2 = static_cast<double>(z2.y);
  const double Tout = 2 * T;
  const double B = 2 * Tout * m * y2 / y1;
  const double rem = B - (c * y2) * (c * y2);
  if (rem < 0) return;
  const long dlo = static_cast<long>(std::floor(-c * x2 - std::sqrt(rem))) - 1;
  const long dhi = static_cast<long>(std::ceil(-c * x2 + std::sqrt(rem))) + 1;
  const double R2 = 2 * m * y1 * y2 * (Tout - 1);
  const R two_m_y1y2 = 2 * R(m) * z1.y * z2.y;
  const R Tr(T);
  for (long d = dlo; d <= dhi; ++d) {
    if (c == 0 && d <= 0) continue;
    long xg, yg;
    long g = egcd_l(d, -c, xg, yg);  // d*xg - c*yg = g
    if (m % g) continue;
    const long a0 = (m / g) * xg, b0 = (m / g) * yg;
    // z1 (c z2 + d) - (a z2 + b) = V - t u with (a, b) = (a0, b0) + t (c, d)/g
    const double ur = (c * x2 + d) / double(g), ui = c * y2 / double(g);
    const double wr = x1 * (c * x2 + d) - y1 * c * y2, wi = x1 * c * y2 + y1 * (c * x2 + d);
    const double Vr = wr - (a0 * x2 + b0), Vi = wi - a0 * y2;
    const double uu = ur * ur + ui * ui;
    const double tc = (Vr * ur + Vi * ui) / uu;
    const double cross = (Vi * ur - Vr * ui);
    const double disc = R2 - cross * cross / uu;
    if (disc < -1e-9 * R2) continue;
    const double r = std::sqrt(std::max(0.0, disc) / uu);
    const long tlo = static_cast<long>(std::floor(tc - r)) - 1, thi = static_cast<long>(std::ceil(tc + r)) + 1;
    for (long t = tlo; t <= thi; ++t) {
      const long a = a0 + t * (c / g), b = b0 + t * (d / g);
      const R Xr = z1.x * R(c) * z2.x + z1.x * R(d) - z1.y * R(c) * z2.y - (R(a) * z2.x + R(b));
      const R Xi = z1.x * R(c) * z2.y + z1.y * (R(c) * z2.x + R(d)) - R(a) * z2.y;
      const R ch = 1 + (Xr * Xr + Xi * Xi) / two_m_y1y2;
      if (ch > 2 * Tr) continue;
      if (ch < 1 + R(1e-10)) {
        std::ostringstream os;
        os << "singular configuration: matrix [[" << a << "," << b << "],[" << c << "," << d << "]] maps z2 onto z1";
        throw SingularInput(os.str());
      }
      R gv = -2 * legendre_Q(k - 1, ch);
      if (ch > Tr) gv *= 1 - ramp(ch / Tr - 1);
      sum += gv;
      ++terms;
    }
  }
}

}  // namespace detail

/** Continuum part 6 sigma_1(m) * int g_k(t) (1 - weight(t/T)) dt of the cut-off sum. */
template <class R>
R hecke_tail(int k, long m, double T) {
  const int n = k - 1;
  const R Tr(T);
  auto f = [&](const R& t) -> R { return -2 * legendre_Q(n, t) * detail::ramp(t / Tr - 1); };
  R inner = boost::math::quadrature::gauss<R, 40>::integrate(f, Tr, 2 * Tr);
  R outer = -2 * (legendre_Q(n - 1 < 0 ? 0 : n - 1, 2 * Tr) - legendre_Q(n + 1, 2 * Tr)) / R(2 * n + 1);
  if (n == 0) throw InvalidInput("k must be at least 2");
  return R(6) * R(sigma1(mpz_class(m)).get_si()) * (inner + outer);
}

/** Smoothly cut off sum of g_k(z1, M z2) over det M = m, with continuum correction, at fixed T. */
inline HeckeEstimate hecke_fixed(const HPoint<Real>& z1, const HPoint<Real>& z2, int k, long m, double T,
                                 unsigned threads = 0) {
  if (k < 2 || k % 2) throw InvalidInput("k must be even and at least 2");
  if (m < 1) throw InvalidInput("Hecke index must be positive");
  const double y1 = static_cast<double>(z1.y), y2 = static_cast<double>(z2.y);
  const long cmax = static_cast<long>(std::sqrt(2 * 2 * T * m * y2 / y1) / y2) + 1;
  std::vector<Real> part(cmax + 1, Real(0));
  std::vector<long> cnt(cmax + 1, 0);
  unsigned W = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  W = std::min<unsigned>(W, static_cast<unsigned>(cmax + 1));
  std::vector<std::exception_ptr> err(W);
  auto work = [&](unsigned w) {
    try {
      for (long c = w; c <= cmax; c += W) detail::hecke_row(z1, z2, k, m, T, c, part[c], cnt[c]);
    } catch (...) {
      err[w] = std::current_exception();
    }
  };
  if (W <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < W; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : err)
    if (e) std::rethrow_exception(e);
  HeckeEstimate est;
  est.T = T;
  est.value = 0;
  for (long c = 0; c <= cmax; ++c) {
    est.value += part[c];
    est.terms += cnt[c];
  }
  est.value += hecke_tail<Real>(k, m, T);
  return est;
}

/**
 * G_k|T_m(z1, z2): the cutoff T doubles until two consecutive changes are
 * below tol/10.
 */
inline HeckeResult G_k_hecke(const HPoint<Real>& z1, const HPoint<Real>& z2, int k, long m, const GreenParams& p) {
  HeckeResult r;
  int streak = 0;
  for (double T = p.T0; T <= p.T_max; T *= 2) {
    HeckeEstimate e = hecke_fixed(z1, z2, k, m, T, p.threads);
    if (!r.history.empty()) {
      Real diff = abs(e.value - r.history.back().value);
      streak = diff < Real(p.tol / 10) ? streak + 1 : 0;
      ++r.doublings;
    }
    r.history.push_back(e);
    r.value = e.value;
    r.T = e.T;
    r.terms = e.terms;
    if (streak >= 2) {
      r.converged = true;
      break;
    }
  }
  return r;
}

struct CycleTerm {
  CMPoint P1, P2;
  long m = 1;
  HeckeResult result;
};

struct CycleResult {
  Real value;
  bool converged = true;
  std::vector<CycleTerm> terms;
};

/** (4/(w1 w2)) sum over CM pairs of sum_m c_f(-m) m^{k-1} G_k|T_m. */
inline CycleResult G_kf_at_cycle(int k, const PrincipalPart& pp, long d1, long d2, const GreenParams& p) {
  if (k < 2 || k % 2) throw InvalidInput("k must be even and at least 2");
  if (std::gcd(d1, d2) != 1) throw InvalidInput("CM discriminants must be coprime");
  auto chk = check_principal_part(k, pp);
  if (!chk.valid) {
    std::string v;
    for (auto& x : chk.obstruction) v += (v.empty() ? "" : ",") + x.get_str();
    throw InvalidInput("principal part obstructed by cusp forms of weight " + std::to_string(2 * k) + ": [" + v + "]");
  }
  auto Z1 = cm_points(d1), Z2 = cm_points(d2);
  const Real weight = Real(4) / Real(Z1[0].w * Z2[0].w);
  Real scale = 0;
  for (auto& [m, c] : pp) scale += abs(Real(c.get_str())) * pow(Real(m), k - 1);
  scale *= weight * Real(static_cast<long>(Z1.size() * Z2.size()));
  GreenParams q = p;
  q.k = k;
  q.tol = p.tol / std::max(1.0, static_cast<double>(scale));
  CycleResult out;
  out.value = 0;
  for (const auto& P1 : Z1)
    for (const auto& P2 : Z2)
      for (auto& [m, c] : pp) {
        CycleTerm t{P1, P2, m, G_k_hecke(P1.point<Real>(), P2.point<Real>(), k, m, q)};
        Real cf = Real(c.get_num().get_str()) / Real(c.get_den().get_str());
        out.value += weight * cf * pow(Real(m), k - 1) * t.result.value;
        out.converged = out.converged && t.result.converged;
        out.terms.push_back(std::move(t));
      }
  return out;
}

}  // namespace cmgreen
