#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "geocount/data_model.hpp"
#include "geocount/glm.hpp"
#include "geocount/optimizer.hpp"

namespace geocount {

struct NormalDist {
  double mean = 0.0;
  double sd = 1.0;
};
struct BernoulliDist {
  double q = 0.5;
};
struct UniformDist {
  double a = 0.0;
  double b = 1.0;
};
using CovariateDistribution = std::variant<NormalDist, BernoulliDist, UniformDist>;

struct CovariateGenerator {
  std::string name;
  CovariateDistribution distribution;
};

struct UniformSquareLayout {
  double side_km = 1000.0;
  LatLon origin{39.8283, -98.5795};  // square centre
};
struct ClusteredLayout {
  std::vector<LatLon> centers;
  double spread_km = 50.0;
};
using SpatialLayout = std::variant<UniformSquareLayout, ClusteredLayout>;

// Data-generating process. beta and gamma are (intercept, covariates...) in
// covariate order; gamma is empty unless family is Zip, where the inflation
// index uses the same covariates as the count index.
struct DgpSpec {
  Family family = Family::Zip;
  std::size_t n = 0;
  std::vector<CovariateGenerator> covariates;
  Eigen::VectorXd beta;
  Eigen::VectorXd gamma;
  SpatialLayout layout = UniformSquareLayout{};
  std::uint64_t seed = 0;

  void validate() const;  // throws InvalidSpec
  std::vector<std::string> covariate_names() const;
};

DgpSpec dgp_from_json(const nlohmann::json& doc);
nlohmann::json dgp_to_json(const DgpSpec& spec);

/// Random source for one unit (or one independent stream).
///
/// Stream i of seed s is a std::mt19937_64 seeded with
/// splitmix64(s ^ splitmix64(i)), so unit i's draws do not depend on how
/// many units precede it and parallel generation equals serial generation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  static Rng stream(std::uint64_t seed, std::uint64_t index);

  double uniform();  // [0, 1), 53-bit resolution
  double normal();   // standard normal, Box-Muller
  bool bernoulli(double q);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Poisson draw: sequential inversion for lambda < 30, PTRS rejection above.
long long sample_poisson(double lambda, Rng& rng);
// Zero-inflated Poisson draw; a structural zero is drawn first with prob. p.
long long sample_zip(double p, double lambda, Rng& rng);

/// Draws a dataset from the spec. Per unit, in order: covariates, centroid,
/// structural-zero indicator (Zip), outcome. Ids are "u" followed by the
/// zero-padded 1-based unit index.
Dataset generate(const DgpSpec& spec);

// Expected zero share and expected count given positive, integrated over the
// covariate distribution by tensor-product Gauss quadrature (Hermite for
// normal, Legendre for uniform, exact two-point for Bernoulli covariates).
struct OutcomeProfile {
  double zero_share = 0.0;
  double positive_mean = 0.0;
};
OutcomeProfile expected_profile(const DgpSpec& spec);

// Re-solves beta[0] and gamma[0] (Zip spec) so the expected profile matches.
void solve_intercepts(DgpSpec& spec, double zero_share, double positive_mean);

inline constexpr std::size_t kPaperScaleUnits = 2947;
inline constexpr double kPaperScaleZeroShare = 0.505;
// Not an empirical value: a calibration choice for the positive counts.
inline constexpr double kPaperScalePositiveMean = 2.0;

// ZIP preset at county scale: n = 2947, zero share 0.505, positive mean 2.
DgpSpec paper_scale_preset(std::uint64_t seed = 2947);
std::optional<DgpSpec> named_preset(const std::string& name, std::uint64_t seed);

struct RecoveryRow {
  std::string name;
  std::optional<double> truth;  // absent when the fitted model has no matching DGP parameter
  double estimate = 0.0;
  double std_error = 0.0;
  double z_gap = 0.0;  // |estimate - truth| / std_error
  bool flagged = false;  // z_gap > 3
};

struct RecoveryReport {
  FitResult fit;
  std::vector<RecoveryRow> rows;
  bool any_flagged = false;
  double sample_mean = 0.0;
  double sample_variance = 0.0;    // n - 1 denominator
  double mean_fitted_mean = 0.0;   // average predicted mean
  bool overdispersed = false;      // sample_variance > mean_fitted_mean
};

inline constexpr double kRecoveryFlagThreshold = 3.0;

// Generates, fits and compares with the truth. Truth is matched by name
// when the model family equals the DGP family.
RecoveryReport recovery_trial(const DgpSpec& spec, const ModelSpec& model, const OptimOptions& options = {});

}  // namespace geocount
