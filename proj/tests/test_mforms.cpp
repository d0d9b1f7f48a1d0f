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
#include <gtest/gtest.h>

#include <numeric>

#include "cmgreen/mforms.hpp"

using namespace cmgreen;

namespace {

mpz_class sigma_k(long n, unsigned k) {
  mpz_class s = 0;
  for (long d = 1; d <= n; ++d)
    if (n % d == 0) s += pow_z(mpz_class(d), k);
  return s;
}

// dim M_w = #{(a, b) : 4a + 6b = w}
long modular_dimension(long w) {
  long c = 0;
  for (long b = 0; 6 * b <= w; ++b)
    if ((w - 6 * b) % 4 == 0) ++c;
  return c;
}

}  // namespace

TEST(Bernoulli, SmallValues) {
  EXPECT_EQ(bernoulli(0), 1);
  EXPECT_EQ(bernoulli(1), mpq_class(-1, 2));
  EXPECT_EQ(bernoulli(2), mpq_class(1, 6));
  EXPECT_EQ(bernoulli(4), mpq_class(-1, 30));
  EXPECT_EQ(bernoulli(12), mpq_class(-691, 2730));
  EXPECT_EQ(bernoulli(7), 0);
}

TEST(Eisenstein, Coefficients) {
  QSeries E4 = eisenstein(4, 40), E6 = eisenstein(6, 40);
  EXPECT_EQ(E4[0], 1);
  EXPECT_EQ(E4[1], 240);
  EXPECT_EQ(E4[2], 2160);
  EXPECT_EQ(E6[1], -504);
  for (long n = 1; n < 40; ++n) {
    EXPECT_EQ(E4[n], 240 * sigma_k(n, 3));
    EXPECT_EQ(E6[n], -504 * sigma_k(n, 5));
  }
  EXPECT_THROW(eisenstein(2, 10), InvalidInput);
  EXPECT_THROW(eisenstein(5, 10), InvalidInput);
}

TEST(Delta, TauValues) {
  const long tau[] = {1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920};
  QSeries D = delta_form(50);
  EXPECT_EQ(D[0], 0);
  for (long n = 1; n <= 10; ++n) EXPECT_EQ(D[n], tau[n - 1]);
  QSeries E4 = eisenstein(4, 50), E6 = eisenstein(6, 50);
  QSeries lhs = E4.pow(3) - E6.pow(2);
  for (long n = 0; n < 50; ++n) EXPECT_EQ(lhs[n], 1728 * D[n]) << n;
}

TEST(Delta, TauMultiplicative) {
  QSeries D = delta_form(901);
  for (long m = 1; m <= 30; ++m)
    for (long n = 1; n <= 30; ++n)
      if (std::gcd(m, n) == 1) EXPECT_EQ(D[m * n], D[m] * D[n]) << m << " " << n;
  // Hecke relation at p = 2
  for (long n = 1; n <= 200; ++n) {
    mpq_class rhs = D[2] * D[n] - (n % 2 == 0 ? mpq_class(2048) * D[n / 2] : mpq_class(0));
    EXPECT_EQ(D[2 * n], rhs) << n;
  }
}

TEST(CuspForms, Dimension) {
  EXPECT_EQ(cusp_dimension(2), 0);
  for (long w = 4; w <= 60; w += 2) EXPECT_EQ(cusp_dimension(w), modular_dimension(w) - 1) << w;
}

TEST(CuspForms, EchelonBasis) {
  EXPECT_TRUE(cusp_basis(8, 20).empty());
  auto b12 = cusp_basis(12, 20);
  ASSERT_EQ(b12.size(), 1u);
  QSeries D = delta_form(20);
  for (long n = 0; n < 20; ++n) EXPECT_EQ(b12[0][n], D[n]);
  for (long w : {24L, 36L, 48L, 60L}) {
    auto B = cusp_basis(w, 30);
    ASSERT_EQ(static_cast<long>(B.size()), cusp_dimension(w));
    const long d = static_cast<long>(B.size());
    for (long i = 0; i < d; ++i) {
      EXPECT_EQ(B[i].valuation(), i + 1);
      for (long j = 1; j <= d; ++j) EXPECT_EQ(B[i][j], i + 1 == j ? 1 : 0) << w << " " << i << " " << j;
    }
  }
  // Delta * E_12 lies in S_24
  auto B = cusp_basis(24, 30);
  QSeries f = delta_form(30) * eisenstein(12, 30);
  QSeries g = B[0] * f[1] + B[1] * f[2];
  for (long n = 0; n < 30; ++n) EXPECT_EQ(g[n], f[n]) << n;
}

TEST(QSeriesOps, ProductAndInverse) {
  QSeries E4 = eisenstein(4, 30);
  QSeries inv = QSeries::constant(1, 30) / E4;
  QSeries one = E4 * inv;
  EXPECT_EQ(one[0], 1);
  for (long n = 1; n < 30; ++n) EXPECT_EQ(one[n], 0);
  EXPECT_THROW(E4[30], std::out_of_range);
}

TEST(PrincipalPart, ParseAndPrint) {
  auto pp = parse_principal_part("1=1,3=-2/5");
  ASSERT_EQ(pp.size(), 2u);
  EXPECT_EQ(pp.at(1), 1);
  EXPECT_EQ(pp.at(3), mpq_class(-2, 5));
  EXPECT_EQ(principal_part_str(pp), "1=1,3=-2/5");
  EXPECT_EQ(max_index(pp), 3);
  EXPECT_EQ(parse_principal_part("2=4/2,5=0").size(), 1u);
  for (const char* bad : {"", "1", "x=1", "0=1", "-1=2", "1=1,1=2", "1=a", "1=0", "1=1/0", "1.5=1"})
    EXPECT_THROW(parse_principal_part(bad), InvalidInput) << bad;
}

TEST(PrincipalPart, Obstruction) {
  for (long k : {2L, 3L, 4L, 5L, 7L}) EXPECT_TRUE(check_principal_part(k, parse_principal_part("1=1")).valid) << k;
  auto r12 = check_principal_part(12, parse_principal_part("1=1"));
  EXPECT_FALSE(r12.valid);
  EXPECT_EQ(r12.obstruction, (std::vector<mpq_class>{1, 0}));
  auto r6 = check_principal_part(6, parse_principal_part("1=1"));
  EXPECT_FALSE(r6.valid);
  EXPECT_EQ(r6.obstruction, std::vector<mpq_class>{1});
  // q^-2 + 24 q^-1 pairs to zero with Delta
  EXPECT_TRUE(check_principal_part(6, parse_principal_part("2=1,1=24")).valid);
  EXPECT_THROW(check_principal_part(1, parse_principal_part("1=1")), InvalidInput);
}

TEST(PrincipalPart, ObstructionIsLinear) {
  auto a = parse_principal_part("1=3,2=-1/2,4=7");
  auto b = parse_principal_part("1=-1,3=5");
  PrincipalPart s = a;
  for (auto& [m, c] : b) s[m] += 2 * c;
  for (long k : {12L, 18L, 24L}) {
    auto ra = check_principal_part(k, a), rb = check_principal_part(k, b), rs = check_principal_part(k, s);
    ASSERT_EQ(ra.obstruction.size(), rs.obstruction.size());
    for (std::size_t i = 0; i < rs.obstruction.size(); ++i)
      EXPECT_EQ(rs.obstruction[i], ra.obstruction[i] + 2 * rb.obstruction[i]);
  }
}
