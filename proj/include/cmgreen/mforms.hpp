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
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "arith.hpp"

namespace cmgreen {

/** Truncated Laurent series in q with rational coefficients, known for exponents < prec. */
class QSeries {
 public:
  QSeries() = default;
  QSeries(long start, long prec) : start_(start), prec_(prec), c_(std::max(0L, prec - start)) {}

  static QSeries constant(const mpq_class& c, long prec) {
    QSeries s(0, prec);
    if (prec > 0) s.c_[0] = c;
    return s;
  }

  long start() const { return start_; }
  long precision() const { return prec_; }

  mpq_class operator[](long m) const {
    if (m >= prec_) throw std::out_of_range("coefficient beyond precision");
    if (m < start_) return 0;
    return c_[m - start_];
  }
  void set(long m, const mpq_class& v) {
    if (m < start_ || m >= prec_) throw std::out_of_range("coefficient outside series range");
    c_[m - start_] = v;
  }

  /** Lowest exponent with a nonzero coefficient, or prec if none. */
  long valuation() const {
    for (long m = start_; m < prec_; ++m)
      if (c_[m - start_] != 0) return m;
    return prec_;
  }

  QSeries truncated(long prec) const {
    QSeries r(start_, std::min(prec, prec_));
    for (long m = start_; m < r.prec_; ++m) r.c_[m - start_] = c_[m - start_];
    return r;
  }

  friend QSeries operator+(const QSeries& a, const QSeries& b) {
    QSeries r(std::min(a.start_, b.start_), std::min(a.prec_, b.prec_));
    for (long m = r.start_; m < r.prec_; ++m) r.c_[m - r.start_] = a[m] + b[m];
    return r;
  }
  friend QSeries operator-(const QSeries& a, const QSeries& b) { return a + b * mpq_class(-1); }
  friend QSeries operator*(const QSeries& a, const mpq_class& x) {
    QSeries r = a;
    for (auto& v : r.c_) v *= x;
    return r;
  }

  friend QSeries operator*(const QSeries& a, const QSeries& b) {
    long va = a.valuation(), vb = b.valuation();
    long prec = std::min(a.prec_ + vb, b.prec_ + va);
    QSeries r(va + vb, prec);
    for (long i = va; i < a.prec_; ++i) {
      if (a.c_[i - a.start_] == 0) continue;
      for (long j = vb; j < b.prec_ && i + j < prec; ++j) r.c_[i + j - r.start_] += a.c_[i - a.start_] * b.c_[j - b.start_];
    }
    return r;
  }

  /** a / b for b with nonzero constant term. */
  friend QSeries operator/(const QSeries& a, const QSeries& b) {
    if (b.start_ > 0 || b[0] == 0) throw InvalidInput("division needs a unit series");
    long prec = std::min(a.prec_, b.prec_ + a.valuation());
    QSeries inv(0, b.prec_);
    mpq_class b0inv = 1 / b[0];
    for (long n = 0; n < b.prec_; ++n) {
      mpq_class s = n == 0 ? mpq_class(1) : mpq_class(0);
      for (long j = 1; j <= n; ++j) s -= b[j] * inv.c_[n - j];
      inv.c_[n] = s * b0inv;
    }
    return (a * inv).truncated(prec);
  }

  QSeries pow(unsigned e) const {
    QSeries r = constant(1, prec_ - valuation() + static_cast<long>(e) * valuation());
    QSeries b = *this;
    while (e) {
      if (e & 1) r = r * b;
      e >>= 1;
      if (e) b = b * b;
    }
    return r;
  }

  std::string str(long terms = 6) const {
    std::ostringstream os;
    int shown = 0;
    for (long m = start_; m < prec_ && shown < terms; ++m) {
      const mpq_class& v = c_[m - start_];
      if (v == 0) continue;
      if (shown++) os << (v > 0 ? " + " : " - ");
      else if (v < 0) os << "-";
      os << mpq_class(abs(v)).get_str() << "q^" << m;
    }
    os << " + O(q^" << prec_ << ")";
    return os.str();
  }

 private:
  long start_ = 0, prec_ = 0;
  std::vector<mpq_class> c_;
};

/** Bernoulli number B_n with B_1 = -1/2. */
inline mpq_class bernoulli(unsigned n) {
  std::vector<mpq_class> B(n + 1);
  B[0] = 1;
  for (unsigned m = 1; m <= n; ++m) {
    mpq_class s = 0;
    for (unsigned j = 0; j < m; ++j) s += mpq_class(binomial(m + 1, j)) * B[j];
    B[m] = -s / (m + 1);
  }
  return B[n];
}

/** Normalised Eisenstein series E_k to precision N. */
inline QSeries eisenstein(long k, long N) {
  if (k < 4 || k % 2) throw InvalidInput("eisenstein: weight must be even and at least 4");
  if (N < 1) throw InvalidInput("eisenstein: precision must be positive");
  mpq_class f = mpq_class(-2 * k) / bernoulli(static_cast<unsigned>(k));
  QSeries E = QSeries::constant(1, N);
  for (long n = 1; n < N; ++n) {
    mpz_class s = 0;
    for (const auto& d : divisors(mpz_class(n))) s += pow_z(d, static_cast<unsigned long>(k - 1));
    E.set(n, f * s);
  }
  return E;
}

/** q prod (1 - q^n)^24 to precision N. */
inline QSeries delta_form(long N) {
  if (N < 1) throw InvalidInput("delta_form: precision must be positive");
  QSeries P = QSeries::constant(1, N);
  for (long n = 1; n < N; ++n) {
    QSeries f = QSeries::constant(1, N);
    f.set(n, -1);
    P = P * f;
  }
  QSeries q(0, N + 1);
  q.set(1, 1);
  return (q * P.pow(24)).truncated(N);
}

/** Classical dimension of S_w, w even. */
inline long cusp_dimension(long w) {
  if (w < 12 || w % 2) return 0;
  long d = w / 12 + (w % 12 == 2 ? 0 : 1);
  return d - 1;
}

/** Echelon basis g_1, ..., g_d of S_w with g_j = q^j + O(q^{d+1}). */
inline std::vector<QSeries> cusp_basis(long w, long N) {
  if (w < 4 || w % 2) throw InvalidInput("cusp_basis: weight must be even and at least 4");
  long d = cusp_dimension(w);
  long prec = std::max(N, d + 2);
  QSeries E4 = eisenstein(4, prec), E6 = eisenstein(6, prec), Dl = delta_form(prec);
  std::vector<QSeries> B;
  for (long j = 1; j <= d; ++j) {
    long r = w - 12 * j;
    long b = r % 4 == 0 ? 0 : 1;
    long a = (r - 6 * b) / 4;
    QSeries g = Dl.pow(static_cast<unsigned>(j)) * E4.pow(static_cast<unsigned>(a)) * E6.pow(static_cast<unsigned>(b));
    B.push_back(g.truncated(prec));
  }
  for (long j = d - 1; j >= 0; --j) {
    B[j] = B[j] * (1 / B[j][j + 1]);
    for (long i = 0; i < d; ++i)
      if (i != j && B[i][j + 1] != 0) B[i] = B[i] - B[j] * B[i][j + 1];
  }
  return B;
}

/** Map m -> c_f(-m) of a weakly holomorphic form of weight 2 - 2k. */
using PrincipalPart = std::map<long, mpq_class>;

/** Parses "1=1,3=-2/5". */
inline PrincipalPart parse_principal_part(const std::string& s) {
  PrincipalPart pp;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw InvalidInput("principal part entry without '=': " + item);
    long m;
    try {
      std::size_t used = 0;
      m = std::stol(item.substr(0, eq), &used);
      if (used != eq) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidInput("bad index in principal part: " + item);
    }
    if (m < 1) throw InvalidInput("principal part indices must be positive");
    mpq_class c;
    if (c.set_str(item.substr(eq + 1), 10) != 0 || c.get_den() == 0) throw InvalidInput("bad coefficient: " + item);
    c.canonicalize();
    if (pp.count(m)) throw InvalidInput("repeated principal part index");
    if (c != 0) pp[m] = c;
  }
  if (pp.empty()) throw InvalidInput("principal part has no nonzero entry");
  return pp;
}

inline std::string principal_part_str(const PrincipalPart& pp) {
  std::string s;
  for (auto& [m, c] : pp) s += (s.empty() ? "" : ",") + std::to_string(m) + "=" + c.get_str();
  return s;
}

inline long max_index(const PrincipalPart& pp) { return pp.empty() ? 0 : pp.rbegin()->first; }

struct PrincipalPartCheck {
  bool valid = true;
  std::vector<mpq_class> obstruction;  // pairing with each echelon cusp form of weight 2k
};

/** f in M^!_{2-2k} with this principal part exists iff it pairs to zero with S_{2k}. */
inline PrincipalPartCheck check_principal_part(long k, const PrincipalPart& pp, long N = 0) {
  if (k < 2) throw InvalidInput("check_principal_part: k must be at least 2");
  if (N <= 0) N = 2 * max_index(pp) + 10;
  N = std::max(N, max_index(pp) + 1);
  PrincipalPartCheck r;
  for (const auto& g : cusp_basis(2 * k, N)) {
    mpq_class s = 0;
    for (auto& [m, c] : pp) s += c * g[m];
    r.obstruction.push_back(s);
    if (s != 0) r.valid = false;
  }
  return r;
}

}  // namespace cmgreen
