#include <doctest.h>

#include <cmath>
#include <limits>

#include "oraclefdr/errors.hpp"
#include "oraclefdr/oracle.hpp"
#include "oraclefdr/procedures.hpp"
#include "oraclefdr/verification.hpp"
#include "test_support.hpp"

using namespace oraclefdr;
using oraclefdr::testing::gauss_jordan_inverse;
using oraclefdr::testing::scalar_lfdr;

namespace {

// Closed form evaluated term by term from an independently inverted Sigma.
std::vector<double> direct_log_u(const DenseMatrix& sigma, std::span<const double> x, double k, double p) {
  const DenseMatrix t = gauss_jordan_inverse(sigma);
  const std::size_t n = sigma.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double lin = 0.0;
    for (std::size_t j = 0; j < n; ++j) lin += t(j, i) * x[j];
    double logprod = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) logprod += std::log(p * std::exp(-k * k * t(j, i)) + (1 - p));
    out[i] = -(k * k / 2 * t(i, i) - k * lin) + logprod;
  }
  return out;
}

// Bivariate normal density up to a constant, written out explicitly.
double bvn_kernel(double x1, double x2, double m1, double m2, double rho) {
  const double a = x1 - m1, b = x2 - m2;
  return std::exp(-(a * a - 2 * rho * a * b + b * b) / (2 * (1 - rho * rho)));
}

}  // namespace

TEST_CASE("context column sums") {
  SUBCASE("identity has zero sums") {
    const auto ctx = build_context(precision(CovarianceSpec::identity(6)), 2.5, 0.1);
    for (double s : ctx.column_logterm_sums()) CHECK(s == 0.0);
  }
  SUBCASE("n = 1 is the empty product") {
    const auto ctx = build_context(precision(CovarianceSpec::equicorrelated(1, 0.4)), 2.5, 0.1);
    CHECK(ctx.column_logterm_sums()[0] == 0.0);
  }
  SUBCASE("equicorrelated n = 3") {
    const auto ctx = build_context(precision(CovarianceSpec::equicorrelated(3, 0.5)), 2.5, 0.1);
    // 2 ln(0.1 e^{6.25 * 0.5} + 0.9), summed term by term offline
    for (double s : ctx.column_logterm_sums()) CHECK(s == doctest::Approx(2.3112384805577806).epsilon(1e-14));
  }
  SUBCASE("dense sums are recomputable from the precision") {
    RandomStream st(21);
    const DenseMatrix sigma = random_correlation(12, st);
    const auto ctx = build_context(precision(CovarianceSpec::dense(sigma)), -1.5, 0.3);
    const DenseMatrix t = ctx.precision().to_dense();
    for (std::size_t i = 0; i < 12; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < 12; ++j)
        if (j != i) s += std::log(0.3 * std::exp(-2.25 * t(j, i)) + 0.7);
      CHECK(std::abs(ctx.column_logterm_sums()[i] - s) <= 1e-12);
    }
  }
  CHECK_THROWS_AS(build_context(precision(CovarianceSpec::identity(2)), 2.5, 1.0), InvalidArgument);
  CHECK_THROWS_AS(build_context(precision(CovarianceSpec::identity(2)), 0.0, 0.5), InvalidArgument);
}

TEST_CASE("log_u") {
  const double k = 2.5;
  SUBCASE("symmetry point") {
    const auto ctx = build_context(precision(CovarianceSpec::identity(1)), k, 0.2);
    const std::vector<double> x{k / 2};
    CHECK(log_u(x, ctx)[0] == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("identity gives the marginal likelihood-ratio exponent") {
    const auto ctx = build_context(precision(CovarianceSpec::identity(5)), k, 0.2);
    const std::vector<double> x{-3, -0.2, 0, 1.7, 6};
    const auto lu = log_u(x, ctx);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(lu[i] == doctest::Approx(-k * k / 2 + k * x[i]).epsilon(1e-15));
  }
  SUBCASE("dense Sigma matches the term-by-term formula") {
    RandomStream st(5);
    const DenseMatrix sigma = random_correlation(5, st);
    std::vector<double> x(5);
    st.fill_normal(x);
    const auto ctx = build_context(precision(CovarianceSpec::dense(sigma)), k, 0.3);
    const auto lu = log_u(x, ctx);
    const auto ref = direct_log_u(sigma, x, k, 0.3);
    for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(lu[i] - ref[i]) <= 1e-10 * std::max(1.0, std::abs(ref[i])));
  }
  SUBCASE("structured Sigma matches the term-by-term formula") {
    const auto spec = CovarianceSpec::block_diagonal({{4, 0.6}, {3, -0.3}});
    const std::vector<double> x{0.3, 2.2, -1.0, 3.1, 0.0, 1.4, -0.7};
    const auto lu = log_u(x, build_context(precision(spec), -1.5, 0.05));
    const auto ref = direct_log_u(build_covariance(spec), x, -1.5, 0.05);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(lu[i] == doctest::Approx(ref[i]).epsilon(1e-12));
  }
  SUBCASE("dimension mismatch") {
    const auto ctx = build_context(precision(CovarianceSpec::identity(3)), k, 0.2);
    const std::vector<double> x{1.0};
    CHECK_THROWS_AS(log_u(x, ctx), InvalidArgument);
  }
}

TEST_CASE("oracle_statistics") {
  const double k = 2.5;
  SUBCASE("equal prior, symmetric point") {
    const auto ctx = build_context(precision(CovarianceSpec::identity(1)), k, 0.5);
    const std::vector<double> x{1.25};
    CHECK(oracle_statistics(x, ctx).values[0] == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("limits") {
    const auto ctx = build_context(precision(CovarianceSpec::identity(2)), k, 0.1);
    const std::vector<double> x{40.0, -40.0};
    const auto t = oracle_statistics(x, ctx);
    CHECK(t.values[0] < 1e-40);
    CHECK(t.values[1] == doctest::Approx(1.0));
  }
  SUBCASE("identity n = 4 equals the scalar mixture posterior") {
    const auto ctx = build_context(precision(CovarianceSpec::identity(4)), k, 0.1);
    const std::vector<double> x{0, 1, 2.5, 4};
    const auto t = oracle_statistics(x, ctx);
    // (1-p) phi(x) / ((1-p) phi(x) + p phi(x-k)), scipy.stats.norm
    const double frozen[4] = {0.9951418354698982, 0.943865049476454, 0.2833762508817093, 0.009213991586092872};
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(t.values[i] == doctest::Approx(frozen[i]).epsilon(1e-13));
      CHECK(std::abs(t.values[i] - scalar_lfdr(x[i], 0.1, k)) <= 1e-12);
    }
    CHECK(t.scale == StatScale::posterior_null);
    CHECK(t.valid());
  }
}

TEST_CASE("independence reduction at n = 100") {
  RandomStream st(31);
  std::vector<double> x(100);
  for (auto& v : x) v = 2.5 * (st.uniform() < 0.2) + st.normal();
  for (double p : {0.01, 0.2, 0.9}) {
    const auto t = oracle_statistics(x, build_context(precision(CovarianceSpec::identity(100)), 2.5, p));
    const auto m = marginal_lfdr(x, p, 2.5);
    for (std::size_t i = 0; i < 100; ++i) CHECK(std::abs(t.values[i] - m.values[i]) <= 1e-12);
  }
}

TEST_CASE("bayes_lambda") {
  const StatisticVector t{{0.5, 1e-300, 0.8, 0.2, 0.21}, StatScale::posterior_null};
  const auto l = bayes_lambda(t);
  CHECK(l[0] == 1.0);
  CHECK(l[1] == doctest::Approx(1e-300));
  CHECK(l[2] == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(l[3] < l[4]);
  CHECK(std::isinf(bayes_lambda(StatisticVector{{1.0}, StatScale::posterior_null})[0]));
}

TEST_CASE("monotone link between ln U and T") {
  const auto ctx = build_context(precision(CovarianceSpec::equicorrelated(30, 0.4)), 2.5, 0.1);
  RandomStream st(2);
  std::vector<double> x(30);
  st.fill_normal(x);
  const auto lu = log_u(x, ctx);
  const auto t = oracle_statistics(x, ctx);
  const auto lam = bayes_lambda(t);
  for (std::size_t i = 0; i < 30; ++i)
    for (std::size_t j = 0; j < 30; ++j)
      if (lu[i] < lu[j]) {
        CHECK(t.values[i] >= t.values[j]);
        if (t.values[i] > t.values[j]) CHECK(lam[i] > lam[j]);
      }
}

TEST_CASE("no NaN or Inf on the stress grid") {
  // rho = 0.999 puts precision entries near 1e3.
  const std::vector<CovarianceSpec> specs{CovarianceSpec::equicorrelated(50, 0.999),
                                          CovarianceSpec::equicorrelated(50, -0.0204),
                                          CovarianceSpec::block_diagonal({{25, 0.999}, {25, 0.0}})};
  for (const auto& spec : specs) {
    for (double k : {-10.0, -0.1, 0.1, 10.0}) {
      for (double p : {0.001, 0.5, 0.999}) {
        const auto ctx = build_context(precision(spec), k, p);
        for (double scale : {-50.0, -1.0, 0.0, 1.0, 50.0}) {
          std::vector<double> x(50);
          for (std::size_t i = 0; i < 50; ++i) x[i] = scale * ((i % 3 == 0) ? 1.0 : (i % 3 == 1 ? -0.5 : 0.2));
          const auto t = oracle_statistics(x, ctx);
          CAPTURE(spec.label());
          CAPTURE(k);
          CAPTURE(p);
          CHECK(t.valid());
        }
      }
    }
  }
}

TEST_CASE("brute-force posterior") {
  SUBCASE("n = 1 is the scalar mixture") {
    DenseMatrix one = DenseMatrix::identity(1);
    for (double x : {-2.0, 0.0, 1.25, 3.0}) {
      const std::vector<double> xv{x};
      CHECK(brute_force_posterior(xv, one, 2.5, 0.3).values[0] ==
            doctest::Approx(scalar_lfdr(x, 0.3, 2.5)).epsilon(1e-13));
    }
  }
  SUBCASE("prior dominance as p -> 0") {
    RandomStream st(4);
    const DenseMatrix sigma = random_correlation(6, st);
    const std::vector<double> x{0.5, 2.0, -1.0, 2.5, 0.0, 1.0};
    for (double v : brute_force_posterior(x, sigma, 2.5, 1e-12).values) CHECK(v == doctest::Approx(1.0));
  }
  SUBCASE("n = 2 against the explicit bivariate density") {
    const double rho = 0.6, k = 2.5, p = 0.3;
    DenseMatrix s = DenseMatrix::identity(2);
    s(0, 1) = s(1, 0) = rho;
    const std::vector<double> x{1.9, 0.4};
    double w[2][2];
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        w[a][b] = (a ? p : 1 - p) * (b ? p : 1 - p) * bvn_kernel(x[0], x[1], k * a, k * b, rho);
    const double total = w[0][0] + w[0][1] + w[1][0] + w[1][1];
    const auto bf = brute_force_posterior(x, s, k, p);
    CHECK(bf.values[0] == doctest::Approx((w[0][0] + w[0][1]) / total).epsilon(1e-13));
    CHECK(bf.values[1] == doctest::Approx((w[0][0] + w[1][0]) / total).epsilon(1e-13));
  }
  SUBCASE("diagonal Sigma: closed form equals enumeration") {
    for (std::size_t n = 1; n <= 10; ++n) {
      RandomStream st(100 + n);
      std::vector<double> x(n);
      st.fill_normal(x);
      for (double p : {0.05, 0.3, 0.7})
        for (double k : {-1.5, 2.5}) {
          const auto closed = oracle_statistics(x, build_context(precision(CovarianceSpec::identity(n)), k, p));
          const auto exact = brute_force_posterior(x, DenseMatrix::identity(n), k, p);
          for (std::size_t i = 0; i < n; ++i) CHECK(relative_error(closed.values[i], exact.values[i]) <= 1e-10);
        }
    }
  }
  SUBCASE("enumeration bound") {
    const std::vector<double> x(21, 0.0);
    CHECK_THROWS_AS(brute_force_posterior(x, DenseMatrix::identity(21), 2.5, 0.3), InvalidArgument);
  }
}

// The product term in the closed form is the prior expectation of
// exp(-k^2 sum_j theta_j t_ji); the exact ratio uses the posterior one. They
// agree only when column i of the precision is zero off the diagonal.
TEST_CASE("closed form departs from enumeration when the precision has off-diagonal mass") {
  DenseMatrix s = DenseMatrix::identity(2);
  s(0, 1) = s(1, 0) = 0.6;
  const std::vector<double> x{1.9, 0.4};
  const auto closed = oracle_statistics(x, build_context(precision(CovarianceSpec::dense(s)), 2.5, 0.3));
  const auto exact = brute_force_posterior(x, s, 2.5, 0.3);
  CHECK(relative_error(closed.values[0], exact.values[0]) > 1e-3);
}
