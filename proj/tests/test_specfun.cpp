#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "core/specfun.hpp"
#include "doctest.h"

using namespace l0cs;

TEST_CASE("erfcx matches exp(x^2) erfc(x) where erfc is representable") {
  for (double x = -5.0; x <= 26.0; x += 0.03125) {
    const double ref = std::exp(x * x) * std::erfc(x);
    if (!std::isfinite(ref) || ref == 0.0) continue;
    CHECK(erfcx(x) == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("erfcx large-x asymptotics 1/(x sqrt(pi))") {
  for (double x : {50.0, 1e3, 1e6, 1e8}) {
    const double lead = 1.0 / (x * std::sqrt(M_PI));
    const double r = 0.5 / (x * x);
    CHECK(erfcx(x) == doctest::Approx(lead * (1.0 - r + 3.0 * r * r)).epsilon(1e-9));
  }
}

TEST_CASE("erfcx reflection erfcx(-x) = 2 exp(x^2) - erfcx(x)") {
  for (double x = 0.0; x <= 20.0; x += 0.25) {
    const double lhs = erfcx(-x);
    const double rhs = 2.0 * std::exp(x * x) - erfcx(x);
    if (!std::isfinite(rhs)) continue;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("log_erfcx finite everywhere and exp-consistent") {
  for (double x = -700.0; x <= 700.0; x += 1.0) {
    const double lx = log_erfcx(x);
    CHECK(std::isfinite(lx));
  }
  for (double x = -20.0; x <= 20.0; x += 0.1) {
    CHECK(std::exp(log_erfcx(x)) == doctest::Approx(erfcx(x)).epsilon(1e-11));
  }
  // deep negative regime: log erfcx(x) -> x^2 + log 2 - tiny
  const double x = -200.0;
  CHECK(log_erfcx(x) == doctest::Approx(x * x + std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("normal tail helpers") {
  CHECK(norm_cdf_upper(0.0) == doctest::Approx(0.5));
  CHECK(norm_pdf(0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)));
  for (double x = -8.0; x <= 8.0; x += 0.25) {
    CHECK(norm_cdf_upper(x) + norm_cdf_upper(-x) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::exp(log_norm_cdf_upper(x)) ==
          doctest::Approx(norm_cdf_upper(x)).epsilon(1e-12));
  }
  // Mills-ratio regime
  const double x = 40.0;
  const double mills = -0.5 * x * x - std::log(x) - 0.5 * std::log(2.0 * M_PI);
  CHECK(log_norm_cdf_upper(x) == doctest::Approx(mills).epsilon(1e-3));
  CHECK(log_norm_cdf_upper(x) < mills);
}

TEST_CASE("log_add") {
  CHECK(log_add(0.0, 0.0) == doctest::Approx(std::log(2.0)));
  CHECK(log_add(-1e308, 3.0) == doctest::Approx(3.0));
  CHECK(log_add(700.0, 710.0) == doctest::Approx(710.0 + std::log1p(std::exp(-10.0))));
}

TEST_CASE("SignedLogSum against plain summation") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> mag(-3.0, 3.0);
  std::bernoulli_distribution coin(0.5);
  for (int rep = 0; rep < 50; ++rep) {
    SignedLogSum acc;
    double direct = 0.0;
    for (int i = 0; i < 40; ++i) {
      const double v = (coin(rng) ? 1.0 : -1.0) * std::exp(mag(rng));
      direct += v;
      acc.add(v >= 0 ? 1.0 : -1.0, std::log(std::abs(v)));
    }
    if (std::abs(direct) < 1e-10) continue;  // cancellation-dominated draw
    const double got = acc.sign() * std::exp(acc.log_abs());
    CHECK(got == doctest::Approx(direct).epsilon(1e-9));
  }
}

TEST_CASE("SignedLogSum huge-scale cancellation") {
  SignedLogSum acc;
  acc.add(1.0, 5000.0);
  acc.add(-1.0, 5000.0);
  acc.add(1.0, 4990.0);
  CHECK(acc.sign() == 1.0);
  CHECK(acc.log_abs() == doctest::Approx(4990.0).epsilon(1e-12));
  CHECK(acc.scaled(4990.0) == doctest::Approx(1.0).epsilon(1e-9));
}
