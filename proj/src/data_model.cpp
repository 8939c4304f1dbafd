#include "geocount/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "geocount/error.hpp"

namespace geocount {

Dataset::Dataset(std::vector<std::string> schema, std::vector<CountyObservation> observations,
                 std::vector<Standardization> scaling)
    : schema_(std::move(schema)),
      observations_(std::move(observations)),
      scaling_(std::move(scaling)) {
  std::unordered_set<std::string> names;
  for (const auto& name : schema_) {
    if (name.empty()) fail(ErrorCode::InvalidArgument, "empty covariate name in schema");
    if (!names.insert(name).second) fail(ErrorCode::NameCollision, "duplicate schema column '" + name + "'");
  }

  std::unordered_set<std::string> ids;
  for (std::size_t i = 0; i < observations_.size(); ++i) {
    const auto& obs = observations_[i];
    if (!ids.insert(obs.id).second) fail(ErrorCode::DuplicateId, "duplicate id '" + obs.id + "'");
    if (obs.count < 0) {
      fail(ErrorCode::NegativeCount, "row " + std::to_string(i) + ": negative count");
    }
    const auto [lat, lon] = obs.centroid;
    if (!(lat >= -90.0 && lat <= 90.0) || !(lon >= -180.0 && lon <= 180.0)) {
      fail(ErrorCode::InvalidCoordinate, "row " + std::to_string(i) + ": centroid out of range");
    }
    if (obs.covariates.size() != schema_.size()) {
      fail(ErrorCode::DimensionMismatch,
           "row " + std::to_string(i) + ": expected " + std::to_string(schema_.size()) +
               " covariates, got " + std::to_string(obs.covariates.size()));
    }
    for (std::size_t j = 0; j < obs.covariates.size(); ++j) {
      if (!std::isfinite(obs.covariates[j])) {
        fail(ErrorCode::NonNumericCell,
             "row " + std::to_string(i) + ", column '" + schema_[j] + "': non-finite value");
      }
    }
  }
}

std::optional<std::size_t> Dataset::column_index(std::string_view name) const {
  auto it = std::find(schema_.begin(), schema_.end(), name);
  if (it == schema_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - schema_.begin());
}

Eigen::VectorXd Dataset::column(std::string_view name) const {
  if (name == "count") return counts();
  auto j = column_index(name);
  if (!j) fail(ErrorCode::UnknownCovariate, "unknown covariate '" + std::string(name) + "'");
  Eigen::VectorXd v(static_cast<Eigen::Index>(size()));
  for (std::size_t i = 0; i < size(); ++i) v[static_cast<Eigen::Index>(i)] = observations_[i].covariates[*j];
  return v;
}

Eigen::VectorXd Dataset::counts() const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(size()));
  for (std::size_t i = 0; i < size(); ++i) {
    y[static_cast<Eigen::Index>(i)] = static_cast<double>(observations_[i].count);
  }
  return y;
}

std::vector<LatLon> Dataset::centroids() const {
  std::vector<LatLon> out;
  out.reserve(size());
  for (const auto& obs : observations_) out.push_back(obs.centroid);
  return out;
}

void Dataset::require_fittable() const {
  if (size() < 2) fail(ErrorCode::DegenerateData, "at least 2 observations are required for a fit");
  const bool any_positive = std::any_of(observations_.begin(), observations_.end(),
                                        [](const CountyObservation& o) { return o.count > 0; });
  if (!any_positive) fail(ErrorCode::DegenerateData, "all counts are zero; likelihood is degenerate");
}

bool same_contents(const Dataset& a, const Dataset& b) {
  return a.schema() == b.schema() && a.observations() == b.observations();
}

DesignMatrix build_design(const Dataset& dataset, std::span<const std::string> covariate_names,
                          bool add_intercept) {
  if (covariate_names.empty() && !add_intercept) {
    fail(ErrorCode::EmptySelection, "design has no columns");
  }
  std::vector<std::size_t> indices;
  indices.reserve(covariate_names.size());
  for (std::size_t a = 0; a < covariate_names.size(); ++a) {
    const auto& name = covariate_names[a];
    for (std::size_t b = 0; b < a; ++b) {
      if (covariate_names[b] == name) {
        fail(ErrorCode::DuplicateCovariate, "covariate '" + name + "' selected twice");
      }
    }
    auto j = dataset.column_index(name);
    if (!j) fail(ErrorCode::UnknownCovariate, "unknown covariate '" + name + "'");
    indices.push_back(*j);
  }

  const auto n = static_cast<Eigen::Index>(dataset.size());
  const Eigen::Index offset = add_intercept ? 1 : 0;
  DesignMatrix design;
  design.has_intercept = add_intercept;
  design.values.resize(n, offset + static_cast<Eigen::Index>(indices.size()));
  if (add_intercept) {
    design.values.col(0).setOnes();
    design.column_names.emplace_back(kInterceptName);
  }
  const auto& obs = dataset.observations();
  for (std::size_t c = 0; c < indices.size(); ++c) {
    const auto col = offset + static_cast<Eigen::Index>(c);
    for (Eigen::Index i = 0; i < n; ++i) {
      design.values(i, col) = obs[static_cast<std::size_t>(i)].covariates[indices[c]];
    }
    design.column_names.push_back(covariate_names[c]);
    if (n > 0 && design.values.col(col).maxCoeff() - design.values.col(col).minCoeff() <
                     kConstantColumnTolerance) {
      fail(ErrorCode::ConstantColumn, "covariate '" + covariate_names[c] + "' is constant");
    }
  }
  return design;
}

std::vector<int> binarize_counts(const Dataset& dataset) {
  std::vector<int> out;
  out.reserve(dataset.size());
  for (const auto& obs : dataset.observations()) out.push_back(obs.count > 0 ? 1 : 0);
  return out;
}

}  // namespace geocount
