#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "geocount/data_model.hpp"

namespace geocount {

struct RateSpec {
  std::string raw_column;
  std::string derived_name;  // raw / population * 10000
};

struct RatioSpec {
  std::string numerator_column;
  std::string denominator_column;
  std::string derived_name;
};

struct IngestConfig {
  std::string id_column = "id";
  std::string lat_column = "lat";
  std::string lon_column = "lon";
  std::string count_column = "count";
  std::string population_column;  // required when rate_specs is non-empty
  std::vector<RateSpec> rate_specs;
  std::vector<RatioSpec> ratio_specs;
  bool standardize = false;
};

inline constexpr double kRateScale = 10000.0;

/// Parses an RFC-4180 CSV table into a Dataset.
///
/// Every column other than the id/lat/lon/count columns becomes a covariate,
/// in header order, followed by the derived rate and ratio covariates in the
/// order they are configured. With `standardize`, raw non-binary covariates
/// are centred and scaled by the sample (n-1) standard deviation; the applied
/// pairs are recorded in Dataset::scaling(). Constant columns are left as-is.
///
/// Row numbers in error messages are 1-based data rows (the header is row 0).
Dataset read_dataset(std::istream& in, const IngestConfig& config);
Dataset read_dataset(const std::filesystem::path& path, const IngestConfig& config);

// Writes `id,lat,lon,count,<schema...>`; floats use the shortest
// representation that round-trips (at most 17 significant digits).
void write_dataset(const Dataset& dataset, std::ostream& out);
void write_dataset(const Dataset& dataset, const std::filesystem::path& path);

// Shortest round-trip decimal form of a double.
std::string format_double(double value);

namespace csv {

std::vector<std::vector<std::string>> parse(std::istream& in);
std::string quote(const std::string& field);

}  // namespace csv

}  // namespace geocount
