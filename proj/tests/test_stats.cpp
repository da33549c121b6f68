#include <stdexcept>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "xeblab/stats.hpp"

using namespace xeblab;

TEST_CASE("mean and variances") {
  const std::vector<double> xs = {1.0, 2.0, 3.0, 4.0};
  CHECK(mean(xs) == doctest::Approx(2.5));
  CHECK(population_variance(xs) == doctest::Approx(1.25));
  CHECK(sample_variance(xs) == doctest::Approx(5.0 / 3.0));
  CHECK_THROWS_AS(mean(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(sample_variance(std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("pearson correlation") {
  const std::vector<double> a = {1.0, 2.0, 3.0};
  const std::vector<double> up = {2.0, 4.0, 6.0};
  const std::vector<double> down = {3.0, 2.0, 1.0};
  CHECK(pearson(a, up) == doctest::Approx(1.0));
  CHECK(pearson(a, down) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(pearson(a, std::vector<double>{1.0, 1.0, 1.0}), std::domain_error);
}

TEST_CASE("ks distance on a known step") {
  // All mass at 1 against Exp(1): sup gap is reached just below the jump.
  const double d =
      ks_distance(std::vector<double>(100, 1.0), [](double z) { return 1.0 - std::exp(-z); });
  CHECK(d == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("ks distance of exponential draws against their own law is small") {
  std::vector<double> values;
  for (int i = 0; i < 20000; ++i)
    values.push_back(-std::log(1.0 - (i + 0.5) / 20000.0));  // stratified quantiles
  const double d = ks_distance(values, [](double z) { return 1.0 - std::exp(-z); });
  CHECK(d < 0.001);
}

TEST_CASE("gamma and chi-squared tails match tabulated values") {
  // Q(1, x) = e^-x.
  CHECK(regularized_gamma_q(1.0, 2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
  // Classic 5% critical points.
  CHECK(chi_squared_survival(3.841, 1) == doctest::Approx(0.05).epsilon(2e-3));
  CHECK(chi_squared_survival(16.919, 9) == doctest::Approx(0.05).epsilon(2e-3));
  CHECK(chi_squared_survival(0.0, 4) == 1.0);
  CHECK(chi_squared_survival(1000.0, 4) < 1e-12);
  CHECK_THROWS_AS(chi_squared_survival(1.0, 0), std::invalid_argument);
}
