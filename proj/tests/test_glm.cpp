#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "geocount/error.hpp"
#include "geocount/glm.hpp"
#include "test_support.hpp"

using namespace geocount;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd ones(Eigen::Index n) { return MatrixXd::Ones(n, 1); }

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Poisson pmf by direct multiplication; fine for the small y used here.
double poisson_pmf_direct(double lambda, int y) {
  double term = std::exp(-lambda);
  for (int k = 1; k <= y; ++k) term *= lambda / k;
  return term;
}

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Ok;
}

VectorXd numeric_gradient(Family family, const Params& params, const MatrixXd& X, const MatrixXd* Z,
                          const VectorXd& y, double h) {
  const VectorXd theta = join_params(params);
  VectorXd g(theta.size());
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    VectorXd up = theta, down = theta;
    up[j] += h;
    down[j] -= h;
    g[j] = (loglik(family, split_params(up, params.beta.size()), X, Z, y) -
            loglik(family, split_params(down, params.beta.size()), X, Z, y)) /
           (2.0 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("logit log-likelihood") {
  std::mt19937_64 rng(1);
  const MatrixXd X = geocount::testing::random_design(rng, 4, 3);
  CHECK(logit_loglik(VectorXd::Zero(3), X, vec({1, 0, 1, 1})) == doctest::Approx(4.0 * std::log(0.5)).epsilon(1e-12));
  CHECK(logit_loglik(vec({std::log(3.0)}), ones(1), vec({1})) == doctest::Approx(std::log(0.75)).epsilon(1e-12));
  CHECK(logit_loglik(vec({std::log(3.0)}), ones(1), vec({1})) == doctest::Approx(-0.2876821).epsilon(1e-7));

  // all ones: increasing in x'b, bounded by 0, no overflow far out
  double prev = -std::numeric_limits<double>::infinity();
  for (double b : {-1e4, -50.0, -1.0, 0.0, 1.0, 50.0, 1e4}) {
    const double v = logit_loglik(vec({b}), ones(2), vec({1, 1}));
    CHECK(std::isfinite(v));
    CHECK(v <= 0.0);
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(logit_loglik(vec({-1.0}), ones(1), vec({1})) < logit_loglik(vec({1.0}), ones(1), vec({1})));
  CHECK(logit_loglik(vec({-1e4}), ones(1), vec({1})) == doctest::Approx(-1e4));

  CHECK(code_of([&] { logit_loglik(VectorXd::Zero(2), ones(2), vec({1, 0})); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { logit_loglik(VectorXd::Zero(1), ones(2), vec({1})); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("poisson log-likelihood") {
  CHECK(poisson_loglik(vec({0.0}), ones(2), vec({0, 0})) == doctest::Approx(-2.0).epsilon(1e-14));
  const double oracle = std::log(std::exp(-2.0) * 8.0 / 6.0);
  CHECK(poisson_loglik(vec({std::log(2.0)}), ones(1), vec({3})) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(poisson_loglik(vec({std::log(2.0)}), ones(1), vec({3})) == doctest::Approx(-1.712318).epsilon(1e-6));
  CHECK(code_of([&] { poisson_loglik(vec({0.0}), ones(1), vec({-1})); }) == ErrorCode::NegativeCount);
  CHECK(code_of([&] { poisson_loglik(vec({0.0}), ones(2), vec({1})); }) == ErrorCode::DimensionMismatch);
  // large counts go through log-gamma
  CHECK(std::isfinite(poisson_loglik(vec({std::log(500.0)}), ones(1), vec({500}))));
  CHECK(log_factorial(200.0) == doctest::Approx(std::lgamma(201.0)));
}

TEST_CASE("zip pmf") {
  for (double lambda : {0.3, 1.0, 4.5}) {
    for (int y = 0; y < 12; ++y) {
      CHECK(zip_pmf(0.0, lambda, y) == doctest::Approx(poisson_pmf_direct(lambda, y)).epsilon(1e-12));
    }
  }
  CHECK(zip_pmf(1.0, 3.0, 0) == 1.0);
  CHECK(zip_pmf(1.0, 3.0, 1) == 0.0);
  CHECK(zip_pmf(1.0, 3.0, 7) == 0.0);
  CHECK(zip_pmf(0.5, 1.0, 0) == doctest::Approx(0.5 + 0.5 * std::exp(-1.0)).epsilon(1e-14));
  CHECK(zip_pmf(0.5, 1.0, 0) == doctest::Approx(0.6839397).epsilon(1e-7));

  CHECK(code_of([] { zip_pmf(-0.1, 1.0, 0); }) == ErrorCode::DomainError);
  CHECK(code_of([] { zip_pmf(1.1, 1.0, 0); }) == ErrorCode::DomainError);
  CHECK(code_of([] { zip_pmf(0.5, 0.0, 0); }) == ErrorCode::DomainError);
  CHECK(code_of([] { zip_pmf(0.5, 1.0, -1); }) == ErrorCode::DomainError);
}

TEST_CASE("property: zip pmf sums to one") {
  for (double p = 0.0; p <= 1.0001; p += 0.125) {
    for (double lambda : {0.01, 0.5, 1.0, 3.0, 7.5, 12.0, 20.0}) {
      // tail beyond 120 is far below 1e-12 for lambda <= 20
      double total = 0.0;
      for (int y = 0; y <= 120; ++y) total += zip_pmf(std::min(p, 1.0), lambda, y);
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("zip log-likelihood") {
  std::mt19937_64 rng(5);
  const MatrixXd X = geocount::testing::random_design(rng, 30, 3);
  const VectorXd beta = vec({0.4, 0.3, -0.2});
  VectorXd y(30);
  for (int i = 0; i < 30; ++i) y[i] = static_cast<double>(i % 5);
  // Z = intercept only, gamma = -40 -> p = sigmoid(-40)
  const double zip = zip_loglik(beta, vec({-40.0}), X, ones(30), y);
  CHECK(std::abs(zip - poisson_loglik(beta, X, y)) <= 1e-10);

  CHECK(zip_loglik(vec({0.0}), vec({0.0}), ones(1), ones(1), vec({0})) ==
        doctest::Approx(std::log(0.5 + 0.5 * std::exp(-1.0))).epsilon(1e-13));
  CHECK(zip_loglik(vec({0.0}), vec({0.0}), ones(1), ones(1), vec({0})) == doctest::Approx(-0.3798855).epsilon(1e-7));

  // p = 0.25 -> gamma = logit(0.25); lambda = 2
  const double oracle = std::log(0.25 + 0.75 * std::exp(-2.0)) + std::log(0.75 * std::exp(-2.0) * 2.0);
  CHECK(zip_loglik(vec({std::log(2.0)}), vec({std::log(0.25 / 0.75)}), ones(2), ones(2), vec({0, 2})) ==
        doctest::Approx(oracle).epsilon(1e-13));

  // extreme inflation does not underflow
  CHECK(std::isfinite(zip_loglik(vec({0.0}), vec({800.0}), ones(2), ones(2), vec({0, 0}))));
  CHECK(std::isfinite(zip_loglik(vec({0.0}), vec({-800.0}), ones(2), ones(2), vec({0, 3}))));

  CHECK(code_of([&] { zip_loglik(beta, vec({0.0}), X, ones(29), y); }) == ErrorCode::DimensionMismatch);
  VectorXd bad = y;
  bad[0] = -2;
  CHECK(code_of([&] { zip_loglik(beta, vec({0.0}), X, ones(30), bad); }) == ErrorCode::NegativeCount);
}

TEST_CASE("zip moments") {
  auto m = zip_moments(0.0, 3.0);
  CHECK(m.mean == doctest::Approx(3.0));
  CHECK(m.variance == doctest::Approx(3.0));
  m = zip_moments(1.0, 5.0);
  CHECK(m.mean == 0.0);
  CHECK(m.variance == 0.0);
  m = zip_moments(0.3, 2.0);
  CHECK(m.mean == doctest::Approx(1.4));
  CHECK(m.variance == doctest::Approx(2.24));
  CHECK(code_of([] { zip_moments(2.0, 1.0); }) == ErrorCode::DomainError);
  CHECK(code_of([] { zip_moments(0.5, -1.0); }) == ErrorCode::DomainError);
}

TEST_CASE("zip moments against a Monte Carlo oracle") {
  std::mt19937_64 rng(20240601);
  std::bernoulli_distribution structural(0.3);
  std::poisson_distribution<int> poisson(2.0);
  const int draws = 1000000;
  double sum = 0.0, sum_sq = 0.0, sum_4 = 0.0;
  std::vector<double> sample(draws);
  for (int i = 0; i < draws; ++i) {
    const double y = structural(rng) ? 0.0 : poisson(rng);
    sample[i] = y;
    sum += y;
  }
  const double mean = sum / draws;
  for (double y : sample) {
    const double d = y - mean;
    sum_sq += d * d;
    sum_4 += d * d * d * d;
  }
  const double var = sum_sq / (draws - 1);
  const double mean_se = std::sqrt(var / draws);
  const double var_se = std::sqrt((sum_4 / draws - var * var) / draws);
  const auto m = zip_moments(0.3, 2.0);
  CHECK(std::abs(mean - m.mean) <= 3.0 * mean_se);
  CHECK(std::abs(var - m.variance) <= 3.0 * var_se);
}

TEST_CASE("property: strict over-dispersion for positive inflation") {
  for (double p = 0.01; p < 1.0; p += 0.07) {
    for (double lambda : {0.05, 0.5, 2.0, 10.0, 40.0}) {
      const auto m = zip_moments(p, lambda);
      CHECK(m.variance > m.mean);
    }
  }
}

TEST_CASE("property: log-likelihoods are invariant to row order") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index n = 50;
    const MatrixXd X = geocount::testing::random_design(rng, n, 3);
    const MatrixXd Z = geocount::testing::random_design(rng, n, 2);
    const VectorXd beta = geocount::testing::random_vector(rng, 3, 0.5);
    const VectorXd gamma = geocount::testing::random_vector(rng, 2, 0.5);
    VectorXd y(n), y01(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      y[i] = static_cast<double>(rng() % 6);
      y01[i] = y[i] > 0 ? 1.0 : 0.0;
    }
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    MatrixXd Xp(n, 3), Zp(n, 2);
    VectorXd yp(n), y01p(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Xp.row(i) = X.row(perm[i]);
      Zp.row(i) = Z.row(perm[i]);
      yp[i] = y[perm[i]];
      y01p[i] = y01[perm[i]];
    }
    CHECK(std::abs(logit_loglik(beta, X, y01) - logit_loglik(beta, Xp, y01p)) <= 1e-9);
    CHECK(std::abs(poisson_loglik(beta, X, y) - poisson_loglik(beta, Xp, yp)) <= 1e-9);
    CHECK(std::abs(zip_loglik(beta, gamma, X, Z, y) - zip_loglik(beta, gamma, Xp, Zp, yp)) <= 1e-9);
  }
}

TEST_CASE("gradient at a symmetric point") {
  Params params{VectorXd::Zero(1), VectorXd()};
  const VectorXd g = grad_loglik(Family::Logit, params, ones(4), nullptr, vec({1, 0, 1, 0}));
  REQUIRE(g.size() == 1);
  CHECK(g[0] == doctest::Approx(0.0));
}

TEST_CASE("property: analytic gradient matches finite differences") {
  std::mt19937_64 rng(4242);
  const double h = 1e-6;
  for (Family family : {Family::Logit, Family::Poisson, Family::Zip}) {
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::Index n = 20 + static_cast<Eigen::Index>(rng() % 40);
      const Eigen::Index k = 1 + static_cast<Eigen::Index>(rng() % 4);
      const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng() % 3);
      const MatrixXd X = geocount::testing::random_design(rng, n, k);
      const MatrixXd Z = geocount::testing::random_design(rng, n, m);
      Params params{geocount::testing::random_vector(rng, k, 0.7),
                    family == Family::Zip ? geocount::testing::random_vector(rng, m, 0.7) : VectorXd()};
      VectorXd y(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        y[i] = family == Family::Logit ? static_cast<double>(rng() % 2) : static_cast<double>(rng() % 5);
        if (family == Family::Zip && rng() % 3 == 0) y[i] = 0.0;
      }
      const MatrixXd* Zp = family == Family::Zip ? &Z : nullptr;
      const VectorXd analytic = grad_loglik(family, params, X, Zp, y);
      const VectorXd numeric = numeric_gradient(family, params, X, Zp, y, h);
      REQUIRE(analytic.size() == numeric.size());
      // relative error against the gradient scale, with a unit floor for near-zero components
      const double scale = std::max(1.0, numeric.cwiseAbs().maxCoeff());
      const double rel = (analytic - numeric).cwiseAbs().maxCoeff() / scale;
      CHECK_MESSAGE(rel <= 1e-5, family_name(family), " trial ", trial, " rel ", rel);
    }
  }
}

TEST_CASE("predictions") {
  std::mt19937_64 rng(3);
  const MatrixXd X = geocount::testing::random_design(rng, 5, 2);
  const auto logit = predict(Family::Logit, {VectorXd::Zero(2), VectorXd()}, X, nullptr);
  for (Eigen::Index i = 0; i < 5; ++i) CHECK(logit.mean[i] == 0.5);
  CHECK(logit.inflation.size() == 0);

  const auto pois = predict(Family::Poisson, {vec({std::log(2.0)}), VectorXd()}, ones(3), nullptr);
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(pois.mean[i] == doctest::Approx(2.0).epsilon(1e-15));

  const MatrixXd Z = ones(2);
  const auto zip = predict(Family::Zip, {vec({std::log(4.0)}), vec({0.0})}, ones(2), &Z);
  CHECK(zip.mean[0] == doctest::Approx(zip_moments(0.5, 4.0).mean));
  CHECK(zip.mean[0] == doctest::Approx(2.0));
  CHECK(zip.inflation[1] == doctest::Approx(0.5));

  CHECK(code_of([&] { predict(Family::Poisson, {VectorXd::Zero(3), VectorXd()}, X, nullptr); }) ==
        ErrorCode::DimensionMismatch);
}

TEST_CASE("family names and model spec") {
  CHECK(parse_family("zip") == Family::Zip);
  CHECK(parse_family("logit") == Family::Logit);
  CHECK(parse_family("poisson") == Family::Poisson);
  CHECK_FALSE(parse_family("negbin").has_value());
  CHECK(family_name(Family::Zip) == "zip");

  ModelSpec spec;
  spec.family = Family::Poisson;
  spec.inflation_covariates = std::vector<std::string>{"x"};
  CHECK(code_of([&] { spec.validate(); }) == ErrorCode::InvalidArgument);
  spec.family = Family::Zip;
  CHECK_NOTHROW(spec.validate());
  spec.count_covariates = {"a", "b"};
  spec.inflation_covariates.reset();
  CHECK(spec.resolved_inflation_covariates() == spec.count_covariates);
}

TEST_CASE("scalar helpers stay finite") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(800.0) == 1.0);
  CHECK(sigmoid(-800.0) >= 0.0);
  CHECK(log_sigmoid(-1e4) == doctest::Approx(-1e4));
  CHECK(log_sigmoid(1e4) == doctest::Approx(0.0));
  CHECK(log_add_exp(std::log(0.25), std::log(0.5)) == doctest::Approx(std::log(0.75)));
  CHECK(log_add_exp(-std::numeric_limits<double>::infinity(), 1.0) == 1.0);
  CHECK(poisson_log_pmf(3.0, 2.0) == doctest::Approx(std::log(poisson_pmf_direct(2.0, 3))));
}

TEST_CASE("mean equals variance for simulated poisson data") {
  std::mt19937_64 rng(8);
  std::poisson_distribution<int> pois(3.7);
  const int n = 200000;
  double s = 0, ss = 0;
  for (int i = 0; i < n; ++i) {
    const double y = pois(rng);
    s += y;
    ss += y * y;
  }
  const double mean = s / n, var = (ss - n * mean * mean) / (n - 1);
  // sd of the sample variance for Poisson: sqrt((mu + 2 mu^2) / n)
  CHECK(std::abs(var - mean) <= 4.0 * std::sqrt((3.7 + 2 * 3.7 * 3.7) / n));
}
