#include "geocount/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geocount/error.hpp"

namespace geocount {

void OptimOptions::validate() const {
  if (max_iterations <= 0 || !(gradient_tolerance > 0) || step_halving_max <= 0 || !(ridge_floor > 0)) {
    fail(ErrorCode::InvalidArgument, "optimizer options must all be positive");
  }
}

Eigen::MatrixXd fd_hessian(const Gradient& gradient, const Eigen::VectorXd& theta) {
  const Eigen::Index k = theta.size();
  Eigen::MatrixXd H(k, k);
  Eigen::VectorXd probe = theta;
  for (Eigen::Index j = 0; j < k; ++j) {
    const double h = 1e-5 * (1.0 + std::abs(theta[j]));
    probe[j] = theta[j] + h;
    const Eigen::VectorXd up = gradient(probe);
    probe[j] = theta[j] - h;
    const Eigen::VectorXd down = gradient(probe);
    probe[j] = theta[j];
    H.col(j) = (up - down) / (2.0 * h);
  }
  return 0.5 * (H + H.transpose());
}

namespace {

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

// Relative rounding noise tolerated when comparing objective values.
constexpr double kObjectiveNoise = 64.0 * std::numeric_limits<double>::epsilon();

// Newton direction for the ascent problem, regularized until it is usable.
Eigen::VectorXd ascent_direction(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& g, double ridge_floor) {
  const Eigen::Index k = g.size();
  const Eigen::MatrixXd neg = -hessian;
  double tau = 0.0;
  for (int attempt = 0; attempt < 2100; ++attempt) {
    Eigen::LLT<Eigen::MatrixXd> llt(neg + tau * Eigen::MatrixXd::Identity(k, k));
    if (llt.info() == Eigen::Success) {
      Eigen::VectorXd d = llt.solve(g);
      if (d.allFinite() && g.dot(d) > 0.0) return d;
    }
    tau = tau == 0.0 ? ridge_floor : 2.0 * tau;
    if (!std::isfinite(tau)) break;
  }
  return g;
}

}  // namespace

MaximizeResult maximize(const Objective& objective, const Gradient& gradient, Eigen::VectorXd init,
                        const OptimOptions& options) {
  options.validate();
  MaximizeResult result;
  result.argmax = std::move(init);
  result.value = objective(result.argmax);
  if (!std::isfinite(result.value)) fail(ErrorCode::NonFiniteObjective, "objective is not finite at iteration 0");
  result.trace.push_back(result.value);

  Eigen::VectorXd g = gradient(result.argmax);
  for (int it = 1;; ++it) {
    if (!all_finite(g)) {
      fail(ErrorCode::NonFiniteObjective, "gradient is not finite at iteration " + std::to_string(it - 1));
    }
    result.max_abs_gradient = g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
    if (result.max_abs_gradient <= options.gradient_tolerance) {
      result.converged = true;
      break;
    }
    if (it > options.max_iterations) break;

    const Eigen::MatrixXd H = fd_hessian(gradient, result.argmax);
    const Eigen::VectorXd direction = ascent_direction(H, g, options.ridge_floor);

    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd candidate;
    double value = 0.0;
    for (int halving = 0; halving <= options.step_halving_max; ++halving, step *= 0.5) {
      candidate = result.argmax + step * direction;
      value = objective(candidate);
      if (std::isfinite(value) && value >= result.value) {
        accepted = true;
        break;
      }
      // Near the optimum the true gain of a full Newton step can fall below
      // the rounding noise of the objective; take it if the gradient shrinks.
      if (halving == 0 && std::isfinite(value) &&
          value >= result.value - kObjectiveNoise * (1.0 + std::abs(result.value))) {
        const Eigen::VectorXd g_candidate = gradient(candidate);
        if (all_finite(g_candidate) && g_candidate.cwiseAbs().maxCoeff() < result.max_abs_gradient) {
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) break;

    result.argmax = std::move(candidate);
    result.value = value;
    result.iterations = it;
    result.trace.push_back(value);
    g = gradient(result.argmax);
  }
  return result;
}

double normal_two_sided_p(double z) noexcept { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

std::string significance_stars(double p_value) {
  if (p_value <= 0.001) return "***";
  if (p_value <= 0.05) return "**";
  if (p_value <= 0.10) return "*";
  return "";
}

std::vector<CoefficientRow> wald_inference(const std::vector<std::string>& names, const Eigen::VectorXd& estimates,
                                           const Eigen::MatrixXd& covariance) {
  const auto k = estimates.size();
  if (static_cast<Eigen::Index>(names.size()) != k || covariance.rows() != k || covariance.cols() != k) {
    fail(ErrorCode::DimensionMismatch, "wald_inference: names, estimates and covariance disagree");
  }
  std::vector<CoefficientRow> rows;
  rows.reserve(names.size());
  for (Eigen::Index j = 0; j < k; ++j) {
    CoefficientRow row;
    row.name = names[static_cast<std::size_t>(j)];
    row.estimate = estimates[j];
    const double var = covariance(j, j);
    if (!(var > 0.0) || !std::isfinite(var)) {
      fail(ErrorCode::ZeroStandardError, "coefficient '" + row.name + "' has a zero standard error");
    }
    row.std_error = std::sqrt(var);
    row.z_stat = row.estimate / row.std_error;
    row.p_value = normal_two_sided_p(row.z_stat);
    row.stars = significance_stars(row.p_value);
    rows.push_back(std::move(row));
  }
  return rows;
}

Params FitResult::params() const {
  Eigen::VectorXd theta(static_cast<Eigen::Index>(coefficients.size()));
  for (std::size_t j = 0; j < coefficients.size(); ++j) theta[static_cast<Eigen::Index>(j)] = coefficients[j].estimate;
  return split_params(theta, n_beta);
}

ModelDesigns build_model_designs(const ModelSpec& model, const Dataset& dataset) {
  model.validate();
  ModelDesigns designs{build_design(dataset, model.count_covariates, model.add_intercept), std::nullopt, {}};
  if (model.family == Family::Zip) {
    designs.inflation = build_design(dataset, model.resolved_inflation_covariates(), model.add_intercept);
  }
  if (model.family == Family::Logit) {
    const auto y01 = binarize_counts(dataset);
    designs.y.resize(static_cast<Eigen::Index>(y01.size()));
    for (std::size_t i = 0; i < y01.size(); ++i) designs.y[static_cast<Eigen::Index>(i)] = y01[i];
  } else {
    designs.y = dataset.counts();
  }
  return designs;
}

void require_full_rank(const DesignMatrix& design) {
  if (design.rows() < design.cols()) {
    fail(ErrorCode::RankDeficientDesign, "design has more columns than observations");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.values);
  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(design.cols(), design.cols()).triangularView<Eigen::Upper>();
  const Eigen::VectorXd diag = R.diagonal().cwiseAbs();
  if (diag.size() == 0) return;
  const double tol = 1e-10 * diag.maxCoeff();
  std::string dependent;
  for (Eigen::Index j = 0; j < diag.size(); ++j) {
    if (diag[j] <= tol) {
      if (!dependent.empty()) dependent += ", ";
      dependent += design.column_names[static_cast<std::size_t>(qr.colsPermutation().indices()[j])];
    }
  }
  if (!dependent.empty()) fail(ErrorCode::RankDeficientDesign, "linearly dependent columns: " + dependent);
}

FitResult fit(const ModelSpec& model, const Dataset& dataset, const OptimOptions& options) {
  options.validate();
  dataset.require_fittable();
  const ModelDesigns designs = build_model_designs(model, dataset);
  require_full_rank(designs.count);
  if (designs.inflation) require_full_rank(*designs.inflation);

  const Eigen::MatrixXd& X = designs.count.values;
  const Eigen::MatrixXd* Z = designs.inflation ? &designs.inflation->values : nullptr;
  const Eigen::VectorXd& y = designs.y;
  const Family family = model.family;
  const Eigen::Index n_beta = X.cols();

  Params init{Eigen::VectorXd::Zero(n_beta), Eigen::VectorXd::Zero(Z ? Z->cols() : 0)};
  if (model.add_intercept && family != Family::Logit) {
    init.beta[0] = std::log(y.mean() + 0.01);
  }
  if (model.add_intercept && family == Family::Zip) {
    const double zero_share = std::clamp((y.array() == 0.0).cast<double>().mean(), 0.01, 0.99);
    init.gamma[0] = std::log(zero_share / (1.0 - zero_share));
  }

  auto objective = [&](const Eigen::VectorXd& theta) {
    return loglik(family, split_params(theta, n_beta), X, Z, y);
  };
  auto gradient = [&](const Eigen::VectorXd& theta) {
    return grad_loglik(family, split_params(theta, n_beta), X, Z, y);
  };

  const MaximizeResult opt = maximize(objective, gradient, join_params(init), options);

  // Under separation the logit score decays towards zero as the index
  // diverges, so the gradient test alone can report convergence; the size of
  // the index is the reliable signal.
  if (family == Family::Logit) {
    const double max_index = (X * opt.argmax).cwiseAbs().maxCoeff();
    if (max_index > 30.0) {
      fail(ErrorCode::SeparationSuspected,
           "linear index reaches " + std::to_string(max_index) + (opt.converged ? "" : " without convergence") +
               "; outcome may be separable");
    }
  }

  const Eigen::MatrixXd information = -fd_hessian(gradient, opt.argmax);
  Eigen::LLT<Eigen::MatrixXd> llt(information);
  if (llt.info() != Eigen::Success) {
    fail(ErrorCode::SingularInformation, "observed information is not positive definite at the optimum");
  }
  Eigen::MatrixXd covariance = llt.solve(Eigen::MatrixXd::Identity(information.rows(), information.cols()));
  covariance = 0.5 * (covariance + covariance.transpose());
  if (!covariance.allFinite()) fail(ErrorCode::SingularInformation, "covariance is not finite");

  std::vector<std::string> names = designs.count.column_names;
  if (designs.inflation) {
    for (const auto& name : designs.inflation->column_names) names.push_back(kInflationPrefix + name);
  }

  FitResult result;
  result.family = family;
  result.coefficients = wald_inference(names, opt.argmax, covariance);
  result.n_beta = n_beta;
  result.log_likelihood = opt.value;
  result.iterations = opt.iterations;
  result.converged = opt.converged;
  result.max_abs_gradient = opt.max_abs_gradient;
  result.n_observations = dataset.size();
  result.covariance = std::move(covariance);
  return result;
}

}  // namespace geocount
