#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace geocount {

enum class Family { Logit, Poisson, Zip };

std::string_view family_name(Family family) noexcept;
std::optional<Family> parse_family(std::string_view name) noexcept;

struct ModelSpec {
  Family family = Family::Poisson;
  std::vector<std::string> count_covariates;
  // ZIP only. nullopt reuses count_covariates; an empty list leaves an
  // intercept-only inflation equation.
  std::optional<std::vector<std::string>> inflation_covariates;
  bool add_intercept = true;

  // Throws InvalidArgument when inflation covariates are given for a
  // non-ZIP family.
  void validate() const;
  std::vector<std::string> resolved_inflation_covariates() const;
};

// beta drives the count (or binary outcome) index, gamma the ZIP inflation index.
struct Params {
  Eigen::VectorXd beta;
  Eigen::VectorXd gamma;
};

double sigmoid(double t) noexcept;
// log(sigmoid(t)) without overflow for large |t|.
double log_sigmoid(double t) noexcept;
double log_add_exp(double a, double b) noexcept;
// log(y!) via log-gamma.
double log_factorial(double y) noexcept;
double poisson_log_pmf(double y, double lambda) noexcept;

// Log-likelihoods. X (and Z) are n x k design matrices, y holds the outcome.
double logit_loglik(const Eigen::VectorXd& beta, const Eigen::MatrixXd& X, const Eigen::VectorXd& y01);
double poisson_loglik(const Eigen::VectorXd& beta, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);
double zip_loglik(const Eigen::VectorXd& beta, const Eigen::VectorXd& gamma, const Eigen::MatrixXd& X,
                  const Eigen::MatrixXd& Z, const Eigen::VectorXd& y);

// P(Y = y) under the zero-inflated Poisson with structural-zero probability p.
double zip_pmf(double p, double lambda, long long y);

struct ZipMoments {
  double mean = 0.0;
  double variance = 0.0;
};
ZipMoments zip_moments(double p, double lambda);

// Dispatch over the family. Z is ignored (and may be null) unless family is Zip.
double loglik(Family family, const Params& params, const Eigen::MatrixXd& X, const Eigen::MatrixXd* Z,
              const Eigen::VectorXd& y);

// Analytic score with respect to (beta, gamma) concatenated.
Eigen::VectorXd grad_loglik(Family family, const Params& params, const Eigen::MatrixXd& X,
                            const Eigen::MatrixXd* Z, const Eigen::VectorXd& y);

struct Prediction {
  Eigen::VectorXd mean;         // probability (logit), lambda (Poisson), (1-p) lambda (ZIP)
  Eigen::VectorXd inflation;    // p_i, ZIP only; empty otherwise
};
Prediction predict(Family family, const Params& params, const Eigen::MatrixXd& X, const Eigen::MatrixXd* Z);

// Splits a concatenated (beta, gamma) vector.
Params split_params(const Eigen::VectorXd& theta, Eigen::Index n_beta);
Eigen::VectorXd join_params(const Params& params);

}  // namespace geocount
