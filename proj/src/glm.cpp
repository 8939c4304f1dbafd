#include "geocount/glm.hpp"

#include <cmath>
#include <limits>

#include "geocount/error.hpp"

namespace geocount {

std::string_view family_name(Family family) noexcept {
  switch (family) {
    case Family::Logit: return "logit";
    case Family::Poisson: return "poisson";
    case Family::Zip: return "zip";
  }
  return "unknown";
}

std::optional<Family> parse_family(std::string_view name) noexcept {
  if (name == "logit") return Family::Logit;
  if (name == "poisson") return Family::Poisson;
  if (name == "zip") return Family::Zip;
  return std::nullopt;
}

void ModelSpec::validate() const {
  if (family != Family::Zip && inflation_covariates && !inflation_covariates->empty()) {
    fail(ErrorCode::InvalidArgument, "inflation covariates are only valid for the zip family");
  }
}

std::vector<std::string> ModelSpec::resolved_inflation_covariates() const {
  return inflation_covariates ? *inflation_covariates : count_covariates;
}

double sigmoid(double t) noexcept {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double log_sigmoid(double t) noexcept {
  if (t >= 0) return -std::log1p(std::exp(-t));
  return t - std::log1p(std::exp(t));
}

double log_add_exp(double a, double b) noexcept {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = a > b ? a : b;
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

double log_factorial(double y) noexcept { return std::lgamma(y + 1.0); }

double poisson_log_pmf(double y, double lambda) noexcept {
  if (y == 0.0) return -lambda;
  return -lambda + y * std::log(lambda) - log_factorial(y);
}

namespace {

void check_rows(const Eigen::MatrixXd& X, const Eigen::VectorXd& coef, const Eigen::VectorXd& y,
                const char* what) {
  if (X.cols() != coef.size() || X.rows() != y.size()) {
    fail(ErrorCode::DimensionMismatch,
         std::string(what) + ": design is " + std::to_string(X.rows()) + "x" + std::to_string(X.cols()) +
             ", coefficients " + std::to_string(coef.size()) + ", outcomes " + std::to_string(y.size()));
  }
}

void check_counts(const Eigen::VectorXd& y) {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] < 0) fail(ErrorCode::NegativeCount, "observation " + std::to_string(i) + " has a negative count");
    if (y[i] != std::floor(y[i])) {
      fail(ErrorCode::DomainError, "observation " + std::to_string(i) + " has a non-integer count");
    }
  }
}

void check_binary(const Eigen::VectorXd& y) {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 0.0 && y[i] != 1.0) {
      fail(ErrorCode::DomainError, "observation " + std::to_string(i) + " is not a 0/1 outcome");
    }
  }
}

void check_zip_args(double p, double lambda) {
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::DomainError, "p must lie in [0, 1]");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) fail(ErrorCode::DomainError, "lambda must be positive");
}

const Eigen::MatrixXd& require_z(const Eigen::MatrixXd* Z) {
  if (Z == nullptr) fail(ErrorCode::InvalidArgument, "zip requires an inflation design matrix");
  return *Z;
}

// Per-observation ZIP log-likelihood term and its derivatives with respect to
// the count index (eta_x) and the inflation index (eta_z).
struct ZipTerm {
  double value;
  double d_count;
  double d_inflation;
};

ZipTerm zip_term(double eta_x, double eta_z, double y) {
  const double lambda = std::exp(eta_x);
  const double log_p = log_sigmoid(eta_z);
  const double log_q = log_sigmoid(-eta_z);
  const double p = sigmoid(eta_z);
  if (y == 0.0) {
    const double log_d = log_add_exp(log_p, log_q - lambda);
    const double structural = std::exp(log_p - log_d);  // posterior P(structural zero | y = 0)
    return {log_d, -lambda * (1.0 - structural), structural - p};
  }
  return {log_q + y * eta_x - lambda - log_factorial(y), y - lambda, -p};
}

}  // namespace

double logit_loglik(const Eigen::VectorXd& beta, const Eigen::MatrixXd& X, const Eigen::VectorXd& y01) {
  check_rows(X, beta, y01, "logit_loglik");
  check_binary(y01);
  const Eigen::VectorXd eta = X * beta;
  double total = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    total += y01[i] == 1.0 ? log_sigmoid(eta[i]) : log_sigmoid(-eta[i]);
  }
  return total;
}

double poisson_loglik(const Eigen::VectorXd& beta, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  check_rows(X, beta, y, "poisson_loglik");
  check_counts(y);
  const Eigen::VectorXd eta = X * beta;
  double total = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    total += -std::exp(eta[i]) + y[i] * eta[i] - log_factorial(y[i]);
  }
  return total;
}

double zip_loglik(const Eigen::VectorXd& beta, const Eigen::VectorXd& gamma, const Eigen::MatrixXd& X,
                  const Eigen::MatrixXd& Z, const Eigen::VectorXd& y) {
  check_rows(X, beta, y, "zip_loglik (count)");
  check_rows(Z, gamma, y, "zip_loglik (inflation)");
  check_counts(y);
  const Eigen::VectorXd eta_x = X * beta;
  const Eigen::VectorXd eta_z = Z * gamma;
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) total += zip_term(eta_x[i], eta_z[i], y[i]).value;
  return total;
}

double zip_pmf(double p, double lambda, long long y) {
  check_zip_args(p, lambda);
  if (y < 0) fail(ErrorCode::DomainError, "y must be nonnegative");
  const double poisson = std::exp(poisson_log_pmf(static_cast<double>(y), lambda));
  return y == 0 ? p + (1.0 - p) * poisson : (1.0 - p) * poisson;
}

ZipMoments zip_moments(double p, double lambda) {
  check_zip_args(p, lambda);
  const double mean = (1.0 - p) * lambda;
  return {mean, mean * (1.0 + p * lambda)};
}

double loglik(Family family, const Params& params, const Eigen::MatrixXd& X, const Eigen::MatrixXd* Z,
              const Eigen::VectorXd& y) {
  switch (family) {
    case Family::Logit: return logit_loglik(params.beta, X, y);
    case Family::Poisson: return poisson_loglik(params.beta, X, y);
    case Family::Zip: return zip_loglik(params.beta, params.gamma, X, require_z(Z), y);
  }
  fail(ErrorCode::Internal, "unknown family");
}

Eigen::VectorXd grad_loglik(Family family, const Params& params, const Eigen::MatrixXd& X,
                            const Eigen::MatrixXd* Z, const Eigen::VectorXd& y) {
  const auto& beta = params.beta;
  switch (family) {
    case Family::Logit: {
      check_rows(X, beta, y, "logit score");
      check_binary(y);
      const Eigen::VectorXd eta = X * beta;
      Eigen::VectorXd resid(eta.size());
      for (Eigen::Index i = 0; i < eta.size(); ++i) resid[i] = y[i] - sigmoid(eta[i]);
      return X.transpose() * resid;
    }
    case Family::Poisson: {
      check_rows(X, beta, y, "poisson score");
      check_counts(y);
      const Eigen::VectorXd eta = X * beta;
      Eigen::VectorXd resid(eta.size());
      for (Eigen::Index i = 0; i < eta.size(); ++i) resid[i] = y[i] - std::exp(eta[i]);
      return X.transpose() * resid;
    }
    case Family::Zip: {
      const auto& Zm = require_z(Z);
      check_rows(X, beta, y, "zip score (count)");
      check_rows(Zm, params.gamma, y, "zip score (inflation)");
      check_counts(y);
      const Eigen::VectorXd eta_x = X * beta;
      const Eigen::VectorXd eta_z = Zm * params.gamma;
      Eigen::VectorXd d_count(y.size()), d_inflation(y.size());
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const auto term = zip_term(eta_x[i], eta_z[i], y[i]);
        d_count[i] = term.d_count;
        d_inflation[i] = term.d_inflation;
      }
      Eigen::VectorXd g(beta.size() + params.gamma.size());
      g.head(beta.size()) = X.transpose() * d_count;
      g.tail(params.gamma.size()) = Zm.transpose() * d_inflation;
      return g;
    }
  }
  fail(ErrorCode::Internal, "unknown family");
}

Prediction predict(Family family, const Params& params, const Eigen::MatrixXd& X, const Eigen::MatrixXd* Z) {
  if (X.cols() != params.beta.size()) fail(ErrorCode::DimensionMismatch, "predict: beta does not match X");
  const Eigen::VectorXd eta = X * params.beta;
  Prediction out;
  out.mean.resize(eta.size());
  switch (family) {
    case Family::Logit:
      for (Eigen::Index i = 0; i < eta.size(); ++i) out.mean[i] = sigmoid(eta[i]);
      break;
    case Family::Poisson:
      out.mean = eta.array().exp();
      break;
    case Family::Zip: {
      const auto& Zm = require_z(Z);
      if (Zm.cols() != params.gamma.size() || Zm.rows() != X.rows()) {
        fail(ErrorCode::DimensionMismatch, "predict: gamma does not match Z");
      }
      const Eigen::VectorXd eta_z = Zm * params.gamma;
      out.inflation.resize(eta.size());
      for (Eigen::Index i = 0; i < eta.size(); ++i) {
        out.inflation[i] = sigmoid(eta_z[i]);
        out.mean[i] = (1.0 - out.inflation[i]) * std::exp(eta[i]);
      }
      break;
    }
  }
  return out;
}

Params split_params(const Eigen::VectorXd& theta, Eigen::Index n_beta) {
  return {theta.head(n_beta), theta.tail(theta.size() - n_beta)};
}

Eigen::VectorXd join_params(const Params& params) {
  Eigen::VectorXd theta(params.beta.size() + params.gamma.size());
  theta << params.beta, params.gamma;
  return theta;
}

}  // namespace geocount
