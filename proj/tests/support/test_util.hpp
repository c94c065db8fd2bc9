#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "mnar/dataset.hpp"
#include "mnar/error.hpp"

namespace mnar::testing {

// Asserts that `fn` throws mnar::Error with the given code.
inline void expect_error(ErrorCode code, const std::function<void()>& fn) {
  try {
    fn();
    ADD_FAILURE() << "expected mnar::Error " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

inline Dataset make_dataset(const std::vector<std::optional<double>>& y, const Eigen::MatrixXd& x) {
  return Dataset::from_outcomes(y, x);
}

inline Eigen::MatrixXd column(std::initializer_list<double> values) {
  Eigen::MatrixXd m(static_cast<Index>(values.size()), 1);
  Index i = 0;
  for (double v : values) m(i++, 0) = v;
  return m;
}

// Random dataset drawn from a logistic response model with a Gaussian
// outcome; used for property tests that need generic inputs.
inline Dataset random_dataset(std::uint64_t seed, Index n, Index d = 2, double gamma = 0.5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u;
  Eigen::MatrixXd x(n, d);
  std::vector<std::optional<double>> y(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    double mu = 1.0;
    for (Index j = 0; j < d; ++j) {
      x(i, j) = z(rng);
      mu += (j % 2 == 0 ? -0.7 : 1.2) * x(i, j);
    }
    const double yi = mu + 1.5 * z(rng);
    const double pi = 1.0 / (1.0 + std::exp(-0.6 - 0.3 * x(i, 0) + gamma * yi));
    if (u(rng) < pi) y[static_cast<std::size_t>(i)] = yi;
  }
  return Dataset::from_outcomes(std::move(y), std::move(x));
}

inline ModelConfig linear_model(Index d, std::vector<Index> x1 = {0}) {
  ModelConfig cfg;
  cfg.mean_basis = monomial_basis(d, 1);
  cfg.x1_columns = std::move(x1);
  return cfg;
}

}  // namespace mnar::testing
