#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "geocount/data_model.hpp"
#include "geocount/optimizer.hpp"
#include "geocount/spatial.hpp"

namespace geocount {

struct BlockVariable {
  std::string name;   // canonical covariate name
  std::string label;  // display label
};

struct CovariateBlock {
  std::string heading;
  std::vector<BlockVariable> variables;
};

// Bundled grouping of the county location covariates into four blocks.
const std::vector<CovariateBlock>& covariate_blocks();

// Column layout: Variable, Estimate, Stars, (p-value). Rows are grouped under
// the block headings when at least one covariate name is in the block map;
// unmatched covariates are listed under "Other".
std::string render_fit_text(const FitResult& fit);
std::string render_fit_csv(const FitResult& fit);
nlohmann::json fit_to_json(const FitResult& fit);
FitResult fit_from_json(const nlohmann::json& doc);

// p-value as printed in tables: 4 decimals, floored at 0.0001.
std::string display_p_value(double p);

std::string render_hotspot_csv(const Dataset& dataset, const HotspotResult& result);
// RFC 7946 FeatureCollection of Point features, coordinates in (lon, lat) order.
std::string render_hotspot_geojson(const Dataset& dataset, const HotspotResult& result);

struct SimulationSummary {
  std::size_t n = 0;
  double zero_share = 0.0;
  double mean_count = 0.0;
};
SimulationSummary summarize(const Dataset& dataset);
std::string render_summary(const SimulationSummary& summary);

}  // namespace geocount
