#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace geocount {

struct LatLon {
  double lat = 0.0;  // degrees, [-90, 90]
  double lon = 0.0;  // degrees, [-180, 180]

  bool operator==(const LatLon&) const = default;
};

// One spatial unit (a county). `covariates` follows the owning Dataset's schema.
struct CountyObservation {
  std::string id;
  LatLon centroid;
  std::int64_t count = 0;
  std::vector<double> covariates;

  bool operator==(const CountyObservation&) const = default;
};

// (mean, stddev) applied to a covariate during ingestion.
struct Standardization {
  std::string name;
  double mean = 0.0;
  double stddev = 1.0;
};

// Validated, immutable collection of observations sharing one covariate schema.
class Dataset {
 public:
  Dataset() = default;
  // Throws Error on duplicate ids, schema/covariate length mismatch,
  // non-finite covariates, out-of-range coordinates or negative counts.
  Dataset(std::vector<std::string> schema, std::vector<CountyObservation> observations,
          std::vector<Standardization> scaling = {});

  const std::vector<std::string>& schema() const noexcept { return schema_; }
  const std::vector<CountyObservation>& observations() const noexcept { return observations_; }
  const std::vector<Standardization>& scaling() const noexcept { return scaling_; }
  std::size_t size() const noexcept { return observations_.size(); }

  std::optional<std::size_t> column_index(std::string_view name) const;
  // Values of a covariate, or of the outcome when name == "count".
  Eigen::VectorXd column(std::string_view name) const;
  Eigen::VectorXd counts() const;
  std::vector<LatLon> centroids() const;

  // Preconditions shared by every model fit: n >= 2 and some count > 0.
  void require_fittable() const;

 private:
  std::vector<std::string> schema_;
  std::vector<CountyObservation> observations_;
  std::vector<Standardization> scaling_;
};

bool same_contents(const Dataset& a, const Dataset& b);

struct DesignMatrix {
  Eigen::MatrixXd values;  // n x k
  std::vector<std::string> column_names;
  bool has_intercept = false;  // column 0 is all ones when set

  Eigen::Index rows() const noexcept { return values.rows(); }
  Eigen::Index cols() const noexcept { return values.cols(); }
};

inline constexpr double kConstantColumnTolerance = 1e-12;
inline constexpr const char* kInterceptName = "intercept";

// Columns are ordered (intercept?, covariate_names...). Rejects unknown or
// duplicated names, constant columns and an empty selection.
DesignMatrix build_design(const Dataset& dataset, std::span<const std::string> covariate_names,
                          bool add_intercept);

// 1 where the count is positive, 0 otherwise.
std::vector<int> binarize_counts(const Dataset& dataset);

}  // namespace geocount
