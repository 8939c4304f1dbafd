#include "geocount/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "geocount/error.hpp"
#include "geocount/ingest.hpp"

namespace geocount {

const std::vector<CovariateBlock>& covariate_blocks() {
  static const std::vector<CovariateBlock> blocks{
      {"Market Concentration",
       {{"metro_county", "Metro County"},
        {"nonmetro_adjacent", "Non-Metro Adjacent"},
        {"population_density", "Population Density"},
        {"banks_per_10k", "Number of Banks per 10K Population"},
        {"savings_loans_per_10k", "Number of Savings and Loans per 10K Population"}}},
      {"Socio-Demographic",
       {{"pct_african_american", "Percent of Population African American"},
        {"pct_hispanic", "Percent of Population Hispanic"},
        {"pct_bachelors", "Percent of Population over Age 25 with a Bachelor's Degree"},
        {"pct_foreign_born", "Percent of the Population Foreign Born"},
        {"poverty_rate", "Poverty Rate"}}},
      {"Economic",
       {{"pct_change_households", "Percent Change in Number of Households"},
        {"pct_owner_occupied", "Percent of Houses Owner Occupied"},
        {"unemployment_rate", "Unemployment Rate"},
        {"pop_employment_ratio", "Population: Employment Ratio"},
        {"pop_proprietorship_ratio", "Population: Proprietorship Ratio"}}},
      {"Organizations of Common Bond",
       {{"nonag_coops_present", "Non-Agricultural Cooperatives Present"},
        {"civil_social_orgs_per_10k", "Number of Civil-Social Organizations per 10K Population"},
        {"business_assoc_per_10k", "Number of Business Associations per 10K Population"},
        {"professional_assoc_per_10k", "Number of Professional Associations per 10K Population"},
        {"labor_unions_per_10k", "Number of Labor Unions per 10K Population"}}},
  };
  return blocks;
}

std::string display_p_value(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", std::max(p, 0.0001));
  return buf;
}

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string lpad(const std::string& s, std::size_t width) {
  return s.size() < width ? std::string(width - s.size(), ' ') + s : s;
}

std::string family_title(Family family) {
  switch (family) {
    case Family::Logit: return "Logit (Yes=1, No=0)";
    case Family::Poisson: return "Poisson";
    case Family::Zip: return "Zero Inflated Poisson";
  }
  return "";
}

struct Line {
  std::string label;
  const CoefficientRow* row = nullptr;  // null for headings
};

// Orders one equation's rows: intercept, then block groups, then the rest.
std::vector<Line> arrange(const std::vector<const CoefficientRow*>& rows, std::string_view prefix) {
  std::map<std::string, const CoefficientRow*> by_name;
  for (const auto* row : rows) by_name[row->name.substr(prefix.size())] = row;

  std::vector<Line> lines;
  std::vector<bool> used(rows.size(), false);
  auto mark = [&](const CoefficientRow* r) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i] == r) used[i] = true;
    }
  };
  if (auto it = by_name.find(kInterceptName); it != by_name.end()) {
    lines.push_back({"Intercept", it->second});
    mark(it->second);
  }
  bool grouped = false;
  for (const auto& block : covariate_blocks()) {
    std::vector<Line> members;
    for (const auto& var : block.variables) {
      if (auto it = by_name.find(var.name); it != by_name.end()) {
        members.push_back({"  " + var.label, it->second});
        mark(it->second);
      }
    }
    if (members.empty()) continue;
    grouped = true;
    lines.push_back({block.heading, nullptr});
    lines.insert(lines.end(), members.begin(), members.end());
  }
  std::vector<Line> rest;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!used[i]) rest.push_back({(grouped ? "  " : "") + rows[i]->name.substr(prefix.size()), rows[i]});
  }
  if (!rest.empty() && grouped) lines.push_back({"Other", nullptr});
  lines.insert(lines.end(), rest.begin(), rest.end());
  return lines;
}

void render_lines(std::ostringstream& out, const std::vector<Line>& lines, std::size_t width) {
  for (const auto& line : lines) {
    if (!line.row) {
      out << line.label << '\n';
      continue;
    }
    out << pad(line.label, width) << "  " << lpad(fixed(line.row->estimate, 4), 10) << "  "
        << pad(line.row->stars, 5) << "  (" << display_p_value(line.row->p_value) << ")\n";
  }
}

}  // namespace

std::string render_fit_text(const FitResult& fit) {
  std::vector<const CoefficientRow*> count_rows, inflation_rows;
  for (std::size_t j = 0; j < fit.coefficients.size(); ++j) {
    (static_cast<Eigen::Index>(j) < fit.n_beta ? count_rows : inflation_rows).push_back(&fit.coefficients[j]);
  }
  const auto count_lines = arrange(count_rows, "");
  const auto inflation_lines = arrange(inflation_rows, kInflationPrefix);
  std::size_t width = 8;
  for (const auto* lines : {&count_lines, &inflation_lines}) {
    for (const auto& line : *lines) {
      if (line.row) width = std::max(width, line.label.size());
    }
  }

  std::ostringstream out;
  out << "Estimates: " << family_title(fit.family) << ", dependent variable: number of credit unions\n";
  out << "Observations: " << fit.n_observations << "  Log-likelihood: " << fixed(fit.log_likelihood, 4)
      << "  Iterations: " << fit.iterations << "  Converged: " << (fit.converged ? "yes" : "no") << "\n\n";
  out << pad("Variable", width) << "  " << lpad("Estimate", 10) << "  " << pad("Stars", 5) << "  (p-value)\n";
  render_lines(out, count_lines, width);
  if (!inflation_lines.empty()) {
    out << "\nInflation equation (logit of a structural zero)\n";
    render_lines(out, inflation_lines, width);
  }
  out << "\nNumber in parentheses is the marginal significance value.\n"
      << "***: Significant at or above the 99.9% level.\n"
      << "**: Significant at the 95.0% level.\n"
      << "*: Significant at the 90.0% level.\n";
  return out.str();
}

std::string render_fit_csv(const FitResult& fit) {
  std::ostringstream out;
  out << "name,estimate,std_error,z_stat,p_value,stars\n";
  for (const auto& row : fit.coefficients) {
    out << csv::quote(row.name) << ',' << format_double(row.estimate) << ',' << format_double(row.std_error) << ','
        << format_double(row.z_stat) << ',' << format_double(row.p_value) << ',' << row.stars << '\n';
  }
  return out.str();
}

nlohmann::json fit_to_json(const FitResult& fit) {
  nlohmann::json doc;
  doc["family"] = std::string(family_name(fit.family));
  doc["n_observations"] = fit.n_observations;
  doc["log_likelihood"] = fit.log_likelihood;
  doc["iterations"] = fit.iterations;
  doc["converged"] = fit.converged;
  doc["max_abs_gradient"] = fit.max_abs_gradient;
  doc["n_beta"] = fit.n_beta;
  auto rows = nlohmann::json::array();
  for (const auto& row : fit.coefficients) {
    rows.push_back({{"name", row.name},
                    {"estimate", row.estimate},
                    {"std_error", row.std_error},
                    {"z_stat", row.z_stat},
                    {"p_value", row.p_value},
                    {"stars", row.stars}});
  }
  doc["coefficients"] = rows;
  auto cov = nlohmann::json::array();
  for (Eigen::Index i = 0; i < fit.covariance.rows(); ++i) {
    auto r = nlohmann::json::array();
    for (Eigen::Index j = 0; j < fit.covariance.cols(); ++j) r.push_back(fit.covariance(i, j));
    cov.push_back(r);
  }
  doc["covariance"] = cov;
  return doc;
}

FitResult fit_from_json(const nlohmann::json& doc) {
  try {
    FitResult fit;
    const auto family = parse_family(doc.at("family").get<std::string>());
    if (!family) fail(ErrorCode::Parse, "unknown family in fit document");
    fit.family = *family;
    fit.n_observations = doc.at("n_observations").get<std::size_t>();
    fit.log_likelihood = doc.at("log_likelihood").get<double>();
    fit.iterations = doc.at("iterations").get<int>();
    fit.converged = doc.at("converged").get<bool>();
    fit.max_abs_gradient = doc.value("max_abs_gradient", 0.0);
    fit.n_beta = doc.at("n_beta").get<Eigen::Index>();
    for (const auto& r : doc.at("coefficients")) {
      fit.coefficients.push_back({r.at("name").get<std::string>(), r.at("estimate").get<double>(),
                                  r.at("std_error").get<double>(), r.at("z_stat").get<double>(),
                                  r.at("p_value").get<double>(), r.at("stars").get<std::string>()});
    }
    const auto k = static_cast<Eigen::Index>(fit.coefficients.size());
    if (fit.n_beta < 0 || fit.n_beta > k) fail(ErrorCode::Parse, "n_beta out of range");
    const auto& cov = doc.at("covariance");
    if (static_cast<Eigen::Index>(cov.size()) != k) fail(ErrorCode::Parse, "covariance has the wrong shape");
    fit.covariance.resize(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      const auto& row = cov.at(static_cast<std::size_t>(i));
      if (static_cast<Eigen::Index>(row.size()) != k) fail(ErrorCode::Parse, "covariance has the wrong shape");
      for (Eigen::Index j = 0; j < k; ++j) fit.covariance(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
    }
    return fit;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("malformed fit document: ") + e.what());
  }
}

std::string render_hotspot_csv(const Dataset& dataset, const HotspotResult& result) {
  if (result.z.size() != dataset.size()) fail(ErrorCode::DimensionMismatch, "hotspot result does not match dataset");
  std::ostringstream out;
  out << "id,z,class\n";
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    out << csv::quote(dataset.observations()[i].id) << ',' << format_double(result.z[i]) << ','
        << hotspot_class_name(result.classes[i]) << '\n';
  }
  return out.str();
}

std::string render_hotspot_geojson(const Dataset& dataset, const HotspotResult& result) {
  if (result.z.size() != dataset.size()) fail(ErrorCode::DimensionMismatch, "hotspot result does not match dataset");
  auto features = nlohmann::json::array();
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& obs = dataset.observations()[i];
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "Point"}, {"coordinates", {obs.centroid.lon, obs.centroid.lat}}}},
                        {"properties",
                         {{"id", obs.id}, {"z", result.z[i]}, {"class", std::string(hotspot_class_name(result.classes[i]))}}}});
  }
  nlohmann::json doc{{"type", "FeatureCollection"}, {"features", features}};
  return doc.dump() + "\n";
}

SimulationSummary summarize(const Dataset& dataset) {
  SimulationSummary s;
  s.n = dataset.size();
  if (s.n == 0) return s;
  std::size_t zeros = 0;
  double total = 0.0;
  for (const auto& obs : dataset.observations()) {
    zeros += obs.count == 0 ? 1 : 0;
    total += static_cast<double>(obs.count);
  }
  s.zero_share = static_cast<double>(zeros) / static_cast<double>(s.n);
  s.mean_count = total / static_cast<double>(s.n);
  return s;
}

std::string render_summary(const SimulationSummary& summary) {
  std::ostringstream out;
  out << "n=" << summary.n << "\nzero_share=" << fixed(summary.zero_share, 4)
      << "\nmean_count=" << fixed(summary.mean_count, 4) << '\n';
  return out.str();
}

}  // namespace geocount
