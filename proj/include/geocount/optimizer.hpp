#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "geocount/data_model.hpp"
#include "geocount/glm.hpp"

namespace geocount {

struct OptimOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-8;  // on the max-abs gradient component
  int step_halving_max = 30;
  double ridge_floor = 1e-10;

  void validate() const;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;
using Gradient = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct MaximizeResult {
  Eigen::VectorXd argmax;
  double value = 0.0;
  int iterations = 0;  // accepted Newton steps
  bool converged = false;
  double max_abs_gradient = 0.0;
  std::vector<double> trace;  // objective after init and after each accepted step
};

/// Newton ascent on `objective` using a central-difference Hessian of the
/// analytic `gradient`.
///
/// When the negated Hessian is not positive definite a ridge tau*I is added,
/// tau doubling from `ridge_floor`, until the Newton system is solvable and
/// yields an ascent direction. Each step is halved (at most
/// `step_halving_max` times) until the objective does not decrease. A full
/// step whose objective change is within rounding noise (64 eps relative) is
/// also taken when it shrinks the gradient. Stops
/// when the max-abs gradient is within tolerance, when the iteration budget
/// runs out, or when no halving of the step is acceptable; the best point so
/// far is returned in every case. Throws NonFiniteObjective when the
/// objective or gradient is non-finite at an accepted point.
MaximizeResult maximize(const Objective& objective, const Gradient& gradient, Eigen::VectorXd init,
                        const OptimOptions& options = {});

// Central differences of the gradient with step 1e-5 * (1 + |theta_j|),
// symmetrized.
Eigen::MatrixXd fd_hessian(const Gradient& gradient, const Eigen::VectorXd& theta);

struct CoefficientRow {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double z_stat = 0.0;
  double p_value = 1.0;
  std::string stars;
};

// Two-sided normal tail probability 2 * (1 - Phi(|z|)).
double normal_two_sided_p(double z) noexcept;
// "***" for p <= 0.001, "**" for p <= 0.05, "*" for p <= 0.10, else "".
std::string significance_stars(double p_value);

std::vector<CoefficientRow> wald_inference(const std::vector<std::string>& names,
                                           const Eigen::VectorXd& estimates,
                                           const Eigen::MatrixXd& covariance);

inline constexpr const char* kInflationPrefix = "inflate:";

struct FitResult {
  Family family = Family::Poisson;
  std::vector<CoefficientRow> coefficients;  // beta rows, then "inflate:" gamma rows
  Eigen::Index n_beta = 0;
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  double max_abs_gradient = 0.0;
  std::size_t n_observations = 0;
  Eigen::MatrixXd covariance;

  Params params() const;
};

// Design matrices and outcome vector implied by a model on a dataset.
struct ModelDesigns {
  DesignMatrix count;
  std::optional<DesignMatrix> inflation;  // ZIP only
  Eigen::VectorXd y;                      // 0/1 for logit, counts otherwise
};

ModelDesigns build_model_designs(const ModelSpec& model, const Dataset& dataset);

// Throws RankDeficientDesign naming the dependent columns, based on a
// column-pivoted QR with tolerance 1e-10 * max |R_ii|.
void require_full_rank(const DesignMatrix& design);

FitResult fit(const ModelSpec& model, const Dataset& dataset, const OptimOptions& options = {});

}  // namespace geocount
