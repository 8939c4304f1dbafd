#include "geocount/spatial.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <numbers>

#include "geocount/error.hpp"

namespace geocount {

double haversine_km(LatLon a, LatLon b) noexcept {
  constexpr double rad = std::numbers::pi / 180.0;
  const double dlat = (b.lat - a.lat) * rad;
  const double dlon = (b.lon - a.lon) * rad;
  const double s = std::sin(dlat / 2.0);
  const double t = std::sin(dlon / 2.0);
  const double h = s * s + std::cos(a.lat * rad) * std::cos(b.lat * rad) * t * t;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

WeightsScheme WeightsScheme::distance_band(double km, bool include_self) {
  if (!(km > 0.0) || !std::isfinite(km)) fail(ErrorCode::InvalidArgument, "distance band must be positive");
  return {Kind::DistanceBand, km, 0, include_self};
}

WeightsScheme WeightsScheme::k_nearest(int k, bool include_self) {
  if (k < 1) fail(ErrorCode::InvalidArgument, "k must be at least 1");
  return {Kind::KNearest, 0.0, k, include_self};
}

WeightsScheme WeightsScheme::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    fail(ErrorCode::InvalidArgument, "weights must be 'band:KM' or 'knn:K', got '" + std::string(text) + "'");
  }
  const auto kind = text.substr(0, colon);
  const auto arg = text.substr(colon + 1);
  if (kind == "band") {
    double km = 0.0;
    auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), km);
    if (ec != std::errc{} || ptr != arg.data() + arg.size()) {
      fail(ErrorCode::InvalidArgument, "bad band distance '" + std::string(arg) + "'");
    }
    return distance_band(km);
  }
  if (kind == "knn") {
    int k = 0;
    auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), k);
    if (ec != std::errc{} || ptr != arg.data() + arg.size()) {
      fail(ErrorCode::InvalidArgument, "bad neighbour count '" + std::string(arg) + "'");
    }
    return k_nearest(k);
  }
  fail(ErrorCode::InvalidArgument, "unknown weights scheme '" + std::string(kind) + "'");
}

std::string WeightsScheme::describe() const {
  if (kind == Kind::DistanceBand) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "band:%g", band_km);
    return buf;
  }
  return "knn:" + std::to_string(k);
}

SpatialWeightsMatrix::SpatialWeightsMatrix(WeightsScheme scheme, std::vector<std::vector<Entry>> rows)
    : scheme_(scheme), rows_(std::move(rows)) {
  for (const auto& row : rows_) {
    for (const auto& [j, w] : row) {
      if (j >= rows_.size() || !(w >= 0.0)) fail(ErrorCode::InvalidArgument, "invalid weight entry");
    }
  }
}

double SpatialWeightsMatrix::weight(std::size_t i, std::size_t j) const {
  const auto& r = rows_.at(i);
  auto it = std::lower_bound(r.begin(), r.end(), j, [](const Entry& e, std::size_t col) { return e.first < col; });
  return it != r.end() && it->first == j ? it->second : 0.0;
}

SpatialWeightsMatrix build_weights(std::span<const LatLon> centroids, const WeightsScheme& scheme) {
  const std::size_t n = centroids.size();
  if (n < 2) fail(ErrorCode::InvalidArgument, "spatial weights need at least 2 units");
  if (scheme.kind == WeightsScheme::Kind::KNearest && static_cast<std::size_t>(scheme.k) >= n) {
    fail(ErrorCode::KTooLarge, "k = " + std::to_string(scheme.k) + " must be smaller than n = " + std::to_string(n));
  }
  const bool coincident = std::all_of(centroids.begin(), centroids.end(), [&](const LatLon& c) {
    return c.lat == centroids[0].lat && c.lon == centroids[0].lon;
  });
  if (coincident) fail(ErrorCode::DegenerateGeometry, "all centroids coincide");

  std::vector<std::vector<SpatialWeightsMatrix::Entry>> rows(n);
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    dist.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) dist.emplace_back(haversine_km(centroids[i], centroids[j]), j);
    }
    auto& row = rows[i];
    if (scheme.kind == WeightsScheme::Kind::DistanceBand) {
      for (const auto& [d, j] : dist) {
        if (d <= scheme.band_km) row.emplace_back(j, 1.0);
      }
    } else {
      const auto k = static_cast<std::ptrdiff_t>(scheme.k);
      // pair ordering breaks distance ties toward the smaller index
      std::nth_element(dist.begin(), dist.begin() + (k - 1), dist.end());
      std::sort(dist.begin(), dist.begin() + k);
      for (std::ptrdiff_t m = 0; m < k; ++m) row.emplace_back(dist[static_cast<std::size_t>(m)].second, 1.0);
    }
    if (scheme.include_self) row.emplace_back(i, 1.0);
    std::sort(row.begin(), row.end());
  }
  return SpatialWeightsMatrix(scheme, std::move(rows));
}

std::string_view hotspot_class_name(HotspotClass c) noexcept {
  switch (c) {
    case HotspotClass::Hot99: return "Hot99";
    case HotspotClass::Hot95: return "Hot95";
    case HotspotClass::NotSignificant: return "NotSignificant";
    case HotspotClass::Cold95: return "Cold95";
    case HotspotClass::Cold99: return "Cold99";
  }
  return "NotSignificant";
}

HotspotClass classify(double z) noexcept {
  if (z >= 2.576) return HotspotClass::Hot99;
  if (z >= 1.96) return HotspotClass::Hot95;
  if (z <= -2.576) return HotspotClass::Cold99;
  if (z <= -1.96) return HotspotClass::Cold95;
  return HotspotClass::NotSignificant;
}

HotspotResult getis_ord_gstar(std::span<const double> values, const SpatialWeightsMatrix& weights) {
  const std::size_t n = values.size();
  if (n != weights.n()) {
    fail(ErrorCode::DimensionMismatch,
         "values have length " + std::to_string(n) + " but weights are " + std::to_string(weights.n()) + "x" +
             std::to_string(weights.n()));
  }
  HotspotResult result;
  result.z.assign(n, 0.0);
  result.classes.assign(n, HotspotClass::NotSignificant);
  if (n == 0) return result;

  const double nd = static_cast<double>(n);
  double sum = 0.0;
  for (double x : values) sum += x;
  result.mean = sum / nd;
  const bool constant = std::all_of(values.begin(), values.end(), [&](double x) { return x == values[0]; });
  double ss = 0.0;
  for (double x : values) ss += (x - result.mean) * (x - result.mean);
  result.scale = constant ? 0.0 : std::sqrt(ss / nd);
  if (result.scale == 0.0) return result;

  for (std::size_t i = 0; i < n; ++i) {
    double wx = 0.0, w_sum = 0.0, w_sq = 0.0;
    for (const auto& [j, w] : weights.row(i)) {
      wx += w * values[j];
      w_sum += w;
      w_sq += w * w;
    }
    const double var_term = (nd * w_sq - w_sum * w_sum) / (nd - 1.0);
    if (!(var_term > 0.0)) continue;
    result.z[i] = (wx - result.mean * w_sum) / (result.scale * std::sqrt(var_term));
    result.classes[i] = classify(result.z[i]);
  }
  return result;
}

}  // namespace geocount
