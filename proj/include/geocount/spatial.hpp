#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "geocount/data_model.hpp"

namespace geocount {

inline constexpr double kEarthRadiusKm = 6371.0088;

// Great-circle distance (haversine).
double haversine_km(LatLon a, LatLon b) noexcept;

struct WeightsScheme {
  enum class Kind { DistanceBand, KNearest };

  Kind kind = Kind::DistanceBand;
  double band_km = 0.0;  // DistanceBand
  int k = 0;             // KNearest
  bool include_self = true;

  static WeightsScheme distance_band(double km, bool include_self = true);
  static WeightsScheme k_nearest(int k, bool include_self = true);
  // "band:KM" or "knn:K".
  static WeightsScheme parse(std::string_view text);
  std::string describe() const;
};

// Sparse binary weights stored row-wise, columns ascending.
class SpatialWeightsMatrix {
 public:
  using Entry = std::pair<std::size_t, double>;

  SpatialWeightsMatrix(WeightsScheme scheme, std::vector<std::vector<Entry>> rows);

  std::size_t n() const noexcept { return rows_.size(); }
  const WeightsScheme& scheme() const noexcept { return scheme_; }
  bool include_self() const noexcept { return scheme_.include_self; }
  std::span<const Entry> row(std::size_t i) const { return rows_.at(i); }
  double weight(std::size_t i, std::size_t j) const;

 private:
  WeightsScheme scheme_;
  std::vector<std::vector<Entry>> rows_;
};

/// Builds binary weights from centroids.
///
/// DistanceBand links i != j when their great-circle distance is at most
/// band_km. KNearest links each unit to its k nearest other units, breaking
/// distance ties toward the smaller index, so rows need not be symmetric.
/// With include_self the diagonal is 1, otherwise 0.
SpatialWeightsMatrix build_weights(std::span<const LatLon> centroids, const WeightsScheme& scheme);

enum class HotspotClass { Hot99, Hot95, NotSignificant, Cold95, Cold99 };

std::string_view hotspot_class_name(HotspotClass c) noexcept;
HotspotClass classify(double z) noexcept;

struct HotspotResult {
  std::vector<double> z;
  std::vector<HotspotClass> classes;
  double mean = 0.0;   // x-bar
  double scale = 0.0;  // S, population form
};

// Getis-Ord G_i* z-scores. Units whose variance term vanishes, or any input
// with S = 0, get z = 0.
HotspotResult getis_ord_gstar(std::span<const double> values, const SpatialWeightsMatrix& weights);

}  // namespace geocount
