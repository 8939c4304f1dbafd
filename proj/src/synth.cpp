#include "geocount/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>
#include <unordered_set>

#include "geocount/error.hpp"
#include "geocount/spatial.hpp"

namespace geocount {

namespace {

constexpr double kKmPerDegree = kEarthRadiusKm * std::numbers::pi / 180.0;
// Upper bound on the tensor-product quadrature grid behind expected_profile.
constexpr std::size_t kMaxQuadraturePoints = 2000000;
constexpr int kMaxNodesPerAxis = 24;

[[noreturn]] void invalid(const std::string& message) { fail(ErrorCode::InvalidSpec, message); }

double draw(const CovariateDistribution& dist, Rng& rng) {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, NormalDist>) {
          return d.mean + d.sd * rng.normal();
        } else if constexpr (std::is_same_v<T, BernoulliDist>) {
          return rng.bernoulli(d.q) ? 1.0 : 0.0;
        } else {
          return d.a + (d.b - d.a) * rng.uniform();
        }
      },
      dist);
}

void check_distribution(const CovariateGenerator& cov) {
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, NormalDist>) {
          if (!(d.sd > 0.0) || !std::isfinite(d.mean) || !std::isfinite(d.sd)) {
            invalid(cov.name + ": normal needs a finite mean and sd > 0");
          }
        } else if constexpr (std::is_same_v<T, BernoulliDist>) {
          if (!(d.q >= 0.0 && d.q <= 1.0)) invalid(cov.name + ": bernoulli needs q in [0, 1]");
        } else {
          if (!(d.a < d.b) || !std::isfinite(d.a) || !std::isfinite(d.b)) invalid(cov.name + ": uniform needs a < b");
        }
      },
      cov.distribution);
}

bool valid_point(LatLon p) { return std::abs(p.lat) <= 90.0 && std::abs(p.lon) <= 180.0; }

LatLon offset_km(LatLon origin, double east_km, double north_km) {
  LatLon p;
  p.lat = std::clamp(origin.lat + north_km / kKmPerDegree, -90.0, 90.0);
  const double coslat = std::max(std::cos(origin.lat * std::numbers::pi / 180.0), 1e-6);
  p.lon = std::remainder(origin.lon + east_km / (kKmPerDegree * coslat), 360.0);
  return p;
}

LatLon draw_location(const SpatialLayout& layout, Rng& rng) {
  if (const auto* square = std::get_if<UniformSquareLayout>(&layout)) {
    const double east = (rng.uniform() - 0.5) * square->side_km;
    const double north = (rng.uniform() - 0.5) * square->side_km;
    return offset_km(square->origin, east, north);
  }
  const auto& clustered = std::get<ClusteredLayout>(layout);
  const auto m = clustered.centers.size();
  const auto c = std::min(m - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(m)));
  const double east = rng.normal() * clustered.spread_km;
  const double north = rng.normal() * clustered.spread_km;
  return offset_km(clustered.centers[c], east, north);
}

double linear_index(const Eigen::VectorXd& coef, const std::vector<double>& x) {
  double eta = coef[0];
  for (std::size_t j = 0; j < x.size(); ++j) eta += coef[static_cast<Eigen::Index>(j) + 1] * x[j];
  return eta;
}

std::string unit_id(std::size_t index, std::size_t n) {
  const std::string digits = std::to_string(index + 1);
  const std::size_t width = std::to_string(n).size();
  return "u" + std::string(width - digits.size(), '0') + digits;
}

// Slope-only parts of the count and inflation indices at quadrature nodes of
// the covariate distribution, with their probability weights.
struct IndexSample {
  std::vector<double> count;
  std::vector<double> inflation;
  std::vector<double> weight;
};

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;  // sum to 1
};

// Golub-Welsch: nodes are the eigenvalues of the symmetric Jacobi matrix,
// weights the squared first eigenvector components times the total mass.
Rule golub_welsch(const Eigen::VectorXd& off_diagonal, int m, double mass) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i + 1 < m; ++i) J(i, i + 1) = J(i + 1, i) = off_diagonal[i];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
  Rule rule;
  for (int i = 0; i < m; ++i) {
    rule.nodes.push_back(eig.eigenvalues()[i]);
    const double v = eig.eigenvectors()(0, i);
    rule.weights.push_back(mass * v * v);
  }
  double total = 0.0;
  for (double w : rule.weights) total += w;
  for (double& w : rule.weights) w /= total;
  return rule;
}

Rule gauss_hermite_normal(int m, const NormalDist& d) {
  // Probabilists' Hermite recurrence: off-diagonal sqrt(k).
  Eigen::VectorXd off(std::max(m - 1, 0));
  for (int k = 1; k < m; ++k) off[k - 1] = std::sqrt(static_cast<double>(k));
  Rule rule = golub_welsch(off, m, 1.0);
  for (double& x : rule.nodes) x = d.mean + d.sd * x;
  return rule;
}

Rule gauss_legendre_uniform(int m, const UniformDist& d) {
  Eigen::VectorXd off(std::max(m - 1, 0));
  for (int k = 1; k < m; ++k) off[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  Rule rule = golub_welsch(off, m, 2.0);
  for (double& x : rule.nodes) x = d.a + (d.b - d.a) * 0.5 * (x + 1.0);
  return rule;
}

IndexSample quadrature_indices(const DgpSpec& spec) {
  std::size_t continuous = 0;
  for (const auto& cov : spec.covariates) continuous += !std::holds_alternative<BernoulliDist>(cov.distribution);
  const std::size_t binary = spec.covariates.size() - continuous;
  int m = kMaxNodesPerAxis;
  auto grid_size = [&](int nodes) {
    double size = std::pow(2.0, static_cast<double>(binary)) * std::pow(nodes, static_cast<double>(continuous));
    return size;
  };
  while (m > 3 && grid_size(m) > static_cast<double>(kMaxQuadraturePoints)) --m;
  if (grid_size(m) > static_cast<double>(kMaxQuadraturePoints)) invalid("too many covariates for intercept calibration");

  std::vector<Rule> rules;
  for (const auto& cov : spec.covariates) {
    rules.push_back(std::visit(
        [&](const auto& d) -> Rule {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, NormalDist>) {
            return gauss_hermite_normal(m, d);
          } else if constexpr (std::is_same_v<T, BernoulliDist>) {
            return Rule{{0.0, 1.0}, {1.0 - d.q, d.q}};
          } else {
            return gauss_legendre_uniform(m, d);
          }
        },
        cov.distribution));
  }

  // Accumulate slope contributions axis by axis over the tensor grid.
  IndexSample s{{0.0}, {0.0}, {1.0}};
  for (std::size_t j = 0; j < rules.size(); ++j) {
    const auto idx = static_cast<Eigen::Index>(j) + 1;
    const double b = spec.beta[idx];
    const double g = spec.gamma.size() ? spec.gamma[idx] : 0.0;
    IndexSample next;
    for (std::size_t r = 0; r < s.weight.size(); ++r) {
      for (std::size_t q = 0; q < rules[j].nodes.size(); ++q) {
        if (rules[j].weights[q] == 0.0) continue;
        next.count.push_back(s.count[r] + b * rules[j].nodes[q]);
        next.inflation.push_back(s.inflation[r] + g * rules[j].nodes[q]);
        next.weight.push_back(s.weight[r] * rules[j].weights[q]);
      }
    }
    s = std::move(next);
  }
  return s;
}

OutcomeProfile profile_at(Family family, const IndexSample& s, double beta0, double gamma0) {
  double zero = 0.0, mass = 0.0;
  for (std::size_t i = 0; i < s.count.size(); ++i) {
    const double eta = beta0 + s.count[i];
    const double w = s.weight[i];
    switch (family) {
      case Family::Logit: {
        const double pr = sigmoid(eta);
        zero += w * (1.0 - pr);
        mass += w * pr;
        break;
      }
      case Family::Poisson: {
        const double lambda = std::exp(eta);
        zero += w * std::exp(-lambda);
        mass += w * lambda;
        break;
      }
      case Family::Zip: {
        const double lambda = std::exp(eta);
        const double p = sigmoid(gamma0 + s.inflation[i]);
        zero += w * (p + (1.0 - p) * std::exp(-lambda));
        mass += w * (1.0 - p) * lambda;
        break;
      }
    }
  }
  OutcomeProfile out;
  out.zero_share = zero;
  out.positive_mean = out.zero_share < 1.0 ? mass / (1.0 - out.zero_share) : 0.0;
  return out;
}

double get_number(const nlohmann::json& obj, const char* key) {
  if (!obj.contains(key) || !obj.at(key).is_number()) invalid(std::string("missing numeric field '") + key + "'");
  return obj.at(key).get<double>();
}

LatLon get_point(const nlohmann::json& v) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    invalid("points must be [lat, lon] arrays");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

Eigen::VectorXd get_vector(const nlohmann::json& obj, const char* key) {
  if (!obj.contains(key)) return {};
  const auto& arr = obj.at(key);
  if (!arr.is_array()) invalid(std::string("'") + key + "' must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t j = 0; j < arr.size(); ++j) {
    if (!arr[j].is_number()) invalid(std::string("'") + key + "' must hold numbers");
    v[static_cast<Eigen::Index>(j)] = arr[j].get<double>();
  }
  return v;
}

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index j = 0; j < v.size(); ++j) arr.push_back(v[j]);
  return arr;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Rng Rng::stream(std::uint64_t seed, std::uint64_t index) { return Rng(splitmix64(seed ^ splitmix64(index))); }

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

bool Rng::bernoulli(double q) { return uniform() < q; }

long long sample_poisson(double lambda, Rng& rng) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail(ErrorCode::DomainError, "poisson rate must be finite and >= 0");
  if (lambda == 0.0) return 0;
  if (lambda < 30.0) {
    const double u = rng.uniform();
    double term = std::exp(-lambda);
    double cdf = term;
    long long k = 0;
    // cdf can stall just below 1 in floating point; the cap sits far in the tail
    while (u > cdf && k < 1000) {
      ++k;
      term *= lambda / static_cast<double>(k);
      cdf += term;
    }
    return k;
  }
  // PTRS: transformed rejection with squeeze (Hoermann 1993).
  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<long long>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -lambda + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<long long>(k);
    }
  }
}

long long sample_zip(double p, double lambda, Rng& rng) {
  if (rng.bernoulli(p)) return 0;
  return sample_poisson(lambda, rng);
}

std::vector<std::string> DgpSpec::covariate_names() const {
  std::vector<std::string> names;
  for (const auto& cov : covariates) names.push_back(cov.name);
  return names;
}

void DgpSpec::validate() const {
  if (n == 0) invalid("n must be positive");
  std::unordered_set<std::string> names;
  for (const auto& cov : covariates) {
    if (cov.name.empty() || cov.name == "count" || !names.insert(cov.name).second) {
      invalid("covariate names must be unique, non-empty and not 'count'");
    }
    check_distribution(cov);
  }
  const auto k = static_cast<Eigen::Index>(covariates.size()) + 1;
  if (beta.size() != k) invalid("beta needs " + std::to_string(k) + " entries (intercept first)");
  if (family == Family::Zip && gamma.size() != k) {
    invalid("gamma needs " + std::to_string(k) + " entries (intercept first)");
  }
  if (family != Family::Zip && gamma.size() != 0) invalid("gamma is only used by the zip family");
  if (!beta.allFinite() || !gamma.allFinite()) invalid("coefficients must be finite");
  if (const auto* square = std::get_if<UniformSquareLayout>(&layout)) {
    if (!(square->side_km > 0.0) || !valid_point(square->origin)) invalid("uniform_square needs side_km > 0");
  } else {
    const auto& clustered = std::get<ClusteredLayout>(layout);
    if (clustered.centers.empty() || !(clustered.spread_km >= 0.0)) {
      invalid("clustered layout needs centers and spread_km >= 0");
    }
    for (const auto& c : clustered.centers) {
      if (!valid_point(c)) invalid("cluster center out of range");
    }
  }
}

DgpSpec dgp_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) invalid("spec must be a JSON object");
  DgpSpec spec;
  if (doc.contains("family")) {
    const auto family = doc.at("family").is_string() ? parse_family(doc.at("family").get<std::string>()) : std::nullopt;
    if (!family) invalid("family must be logit, poisson or zip");
    spec.family = *family;
  }
  const double n = get_number(doc, "n");
  if (n < 0 || n != std::floor(n) || n > 1e9) invalid("n must be a nonnegative integer");
  spec.n = static_cast<std::size_t>(n);

  if (doc.contains("covariates")) {
    if (!doc.at("covariates").is_array()) invalid("'covariates' must be an array");
    for (const auto& item : doc.at("covariates")) {
      if (!item.is_object() || !item.contains("name") || !item.at("name").is_string() || !item.contains("distribution")) {
        invalid("each covariate needs a name and a distribution");
      }
      CovariateGenerator cov;
      cov.name = item.at("name").get<std::string>();
      const auto& dist = item.at("distribution");
      const std::string type = dist.is_object() && dist.contains("type") && dist.at("type").is_string()
                                   ? dist.at("type").get<std::string>()
                                   : "";
      if (type == "normal") {
        cov.distribution = NormalDist{get_number(dist, "mean"), get_number(dist, "sd")};
      } else if (type == "bernoulli") {
        cov.distribution = BernoulliDist{get_number(dist, "q")};
      } else if (type == "uniform") {
        cov.distribution = UniformDist{get_number(dist, "a"), get_number(dist, "b")};
      } else {
        invalid(cov.name + ": distribution type must be normal, bernoulli or uniform");
      }
      spec.covariates.push_back(std::move(cov));
    }
  }
  spec.beta = get_vector(doc, "beta");
  spec.gamma = get_vector(doc, "gamma");

  if (doc.contains("layout")) {
    const auto& layout = doc.at("layout");
    const std::string type = layout.is_object() && layout.contains("type") && layout.at("type").is_string()
                                 ? layout.at("type").get<std::string>()
                                 : "";
    if (type == "uniform_square") {
      UniformSquareLayout square;
      square.side_km = get_number(layout, "side_km");
      if (layout.contains("origin")) square.origin = get_point(layout.at("origin"));
      spec.layout = square;
    } else if (type == "clustered") {
      ClusteredLayout clustered;
      if (!layout.contains("centers") || !layout.at("centers").is_array()) invalid("clustered layout needs centers");
      for (const auto& c : layout.at("centers")) clustered.centers.push_back(get_point(c));
      clustered.spread_km = get_number(layout, "spread_km");
      spec.layout = clustered;
    } else {
      invalid("layout type must be uniform_square or clustered");
    }
  }
  if (doc.contains("seed")) {
    const auto& seed = doc.at("seed");
    if (!seed.is_number_integer() || (seed.is_number_integer() && !seed.is_number_unsigned() && seed.get<long long>() < 0)) {
      invalid("seed must be a nonnegative integer");
    }
    spec.seed = seed.get<std::uint64_t>();
  }
  spec.validate();
  return spec;
}

nlohmann::json dgp_to_json(const DgpSpec& spec) {
  nlohmann::json doc;
  doc["family"] = std::string(family_name(spec.family));
  doc["n"] = spec.n;
  auto covariates = nlohmann::json::array();
  for (const auto& cov : spec.covariates) {
    nlohmann::json dist = std::visit(
        [](const auto& d) -> nlohmann::json {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, NormalDist>) {
            return {{"type", "normal"}, {"mean", d.mean}, {"sd", d.sd}};
          } else if constexpr (std::is_same_v<T, BernoulliDist>) {
            return {{"type", "bernoulli"}, {"q", d.q}};
          } else {
            return {{"type", "uniform"}, {"a", d.a}, {"b", d.b}};
          }
        },
        cov.distribution);
    covariates.push_back({{"name", cov.name}, {"distribution", dist}});
  }
  doc["covariates"] = covariates;
  doc["beta"] = vector_json(spec.beta);
  doc["gamma"] = vector_json(spec.gamma);
  if (const auto* square = std::get_if<UniformSquareLayout>(&spec.layout)) {
    doc["layout"] = {{"type", "uniform_square"},
                     {"side_km", square->side_km},
                     {"origin", {square->origin.lat, square->origin.lon}}};
  } else {
    const auto& clustered = std::get<ClusteredLayout>(spec.layout);
    auto centers = nlohmann::json::array();
    for (const auto& c : clustered.centers) centers.push_back({c.lat, c.lon});
    doc["layout"] = {{"type", "clustered"}, {"centers", centers}, {"spread_km", clustered.spread_km}};
  }
  doc["seed"] = spec.seed;
  return doc;
}

Dataset generate(const DgpSpec& spec) {
  spec.validate();
  std::vector<CountyObservation> observations(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    Rng rng = Rng::stream(spec.seed, i);
    auto& obs = observations[i];
    obs.id = unit_id(i, spec.n);
    obs.covariates.resize(spec.covariates.size());
    for (std::size_t j = 0; j < spec.covariates.size(); ++j) {
      obs.covariates[j] = draw(spec.covariates[j].distribution, rng);
    }
    obs.centroid = draw_location(spec.layout, rng);
    const double eta = linear_index(spec.beta, obs.covariates);
    switch (spec.family) {
      case Family::Logit:
        obs.count = rng.bernoulli(sigmoid(eta)) ? 1 : 0;
        break;
      case Family::Poisson:
        obs.count = sample_poisson(std::exp(eta), rng);
        break;
      case Family::Zip: {
        const double p = sigmoid(linear_index(spec.gamma, obs.covariates));
        obs.count = sample_zip(p, std::exp(eta), rng);
        break;
      }
    }
  }
  return Dataset(spec.covariate_names(), std::move(observations));
}

OutcomeProfile expected_profile(const DgpSpec& spec) {
  spec.validate();
  const auto sample = quadrature_indices(spec);
  return profile_at(spec.family, sample, spec.beta[0], spec.gamma.size() ? spec.gamma[0] : 0.0);
}

void solve_intercepts(DgpSpec& spec, double zero_share, double positive_mean) {
  spec.validate();
  if (spec.family != Family::Zip) invalid("intercept calibration needs a zip spec");
  if (!(zero_share > 0.0 && zero_share < 1.0) || !(positive_mean > 1.0)) {
    invalid("targets need zero_share in (0, 1) and positive_mean > 1");
  }
  const auto sample = quadrature_indices(spec);
  auto residual = [&](const Eigen::Vector2d& x) {
    const auto prof = profile_at(Family::Zip, sample, x[0], x[1]);
    return Eigen::Vector2d(prof.zero_share - zero_share, std::log(prof.positive_mean / positive_mean));
  };

  // Intercept-only solution as the starting point: lambda / (1 - e^-lambda) = positive_mean.
  double lambda = positive_mean;
  for (int it = 0; it < 100; ++it) lambda = positive_mean * (1.0 - std::exp(-lambda));
  const double p0 = std::clamp((zero_share - std::exp(-lambda)) / (1.0 - std::exp(-lambda)), 1e-3, 1.0 - 1e-3);
  auto mean_of = [&](const std::vector<double>& v) {
    double total = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) total += sample.weight[i] * v[i];
    return total;
  };
  Eigen::Vector2d x(std::log(lambda) - mean_of(sample.count), std::log(p0 / (1.0 - p0)) - mean_of(sample.inflation));

  Eigen::Vector2d r = residual(x);
  for (int it = 0; it < 100 && r.cwiseAbs().maxCoeff() > 1e-12; ++it) {
    Eigen::Matrix2d J;
    for (int j = 0; j < 2; ++j) {
      Eigen::Vector2d h = Eigen::Vector2d::Zero();
      h[j] = 1e-6;
      J.col(j) = (residual(x + h) - residual(x - h)) / 2e-6;
    }
    const Eigen::Vector2d step = J.fullPivLu().solve(-r);
    double t = 1.0;
    for (int halving = 0; halving < 40; ++halving, t *= 0.5) {
      const Eigen::Vector2d trial = residual(x + t * step);
      if (trial.allFinite() && trial.norm() < r.norm()) break;
    }
    x += t * step;
    r = residual(x);
  }
  if (!(r.cwiseAbs().maxCoeff() <= 1e-9)) invalid("intercept calibration did not converge");
  spec.beta[0] = x[0];
  spec.gamma[0] = x[1];
}

DgpSpec paper_scale_preset(std::uint64_t seed) {
  DgpSpec spec;
  spec.family = Family::Zip;
  spec.n = kPaperScaleUnits;
  spec.covariates = {
      {"metro_county", BernoulliDist{0.35}},
      {"banks_per_10k", NormalDist{3.5, 1.2}},
      {"poverty_rate", NormalDist{15.0, 5.0}},
      {"labor_unions_per_10k", UniformDist{0.0, 1.5}},
  };
  spec.beta.resize(5);
  spec.beta << 0.0, 0.8, -0.15, 0.01, 0.35;
  spec.gamma.resize(5);
  spec.gamma << 0.0, -1.0, 0.2, 0.02, -0.5;
  spec.layout = UniformSquareLayout{4000.0, {39.8283, -98.5795}};
  spec.seed = seed;
  solve_intercepts(spec, kPaperScaleZeroShare, kPaperScalePositiveMean);
  return spec;
}

std::optional<DgpSpec> named_preset(const std::string& name, std::uint64_t seed) {
  if (name == "paper-scale") return paper_scale_preset(seed);
  return std::nullopt;
}

RecoveryReport recovery_trial(const DgpSpec& spec, const ModelSpec& model, const OptimOptions& options) {
  const Dataset data = generate(spec);
  RecoveryReport report;
  report.fit = fit(model, data, options);

  std::unordered_map<std::string, double> truth;
  if (model.family == spec.family) {
    truth[kInterceptName] = spec.beta[0];
    if (spec.gamma.size()) truth[std::string(kInflationPrefix) + kInterceptName] = spec.gamma[0];
    for (std::size_t j = 0; j < spec.covariates.size(); ++j) {
      const auto idx = static_cast<Eigen::Index>(j) + 1;
      truth[spec.covariates[j].name] = spec.beta[idx];
      if (spec.gamma.size()) truth[kInflationPrefix + spec.covariates[j].name] = spec.gamma[idx];
    }
  }
  for (const auto& row : report.fit.coefficients) {
    RecoveryRow out;
    out.name = row.name;
    out.estimate = row.estimate;
    out.std_error = row.std_error;
    if (auto it = truth.find(row.name); it != truth.end()) {
      out.truth = it->second;
      out.z_gap = std::abs(row.estimate - it->second) / row.std_error;
      out.flagged = out.z_gap > kRecoveryFlagThreshold;
      report.any_flagged = report.any_flagged || out.flagged;
    }
    report.rows.push_back(std::move(out));
  }

  const auto designs = build_model_designs(model, data);
  const auto& y = designs.y;
  report.sample_mean = y.mean();
  report.sample_variance = y.size() > 1 ? (y.array() - report.sample_mean).square().sum() / static_cast<double>(y.size() - 1) : 0.0;
  const Eigen::MatrixXd* Z = designs.inflation ? &designs.inflation->values : nullptr;
  report.mean_fitted_mean = predict(model.family, report.fit.params(), designs.count.values, Z).mean.mean();
  report.overdispersed = report.sample_variance > report.mean_fitted_mean;
  return report;
}

}  // namespace geocount
