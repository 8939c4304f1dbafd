#include "geocount/geocount.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "geocount/error.hpp"
#include "geocount/ingest.hpp"
#include "geocount/optimizer.hpp"
#include "geocount/report.hpp"
#include "geocount/spatial.hpp"
#include "geocount/synth.hpp"

struct gc_dataset {
  std::shared_ptr<const geocount::Dataset> data;
};

struct gc_fit {
  geocount::FitResult result;
};

struct gc_hotspot {
  std::shared_ptr<const geocount::Dataset> data;
  geocount::HotspotResult result;
};

static_assert(static_cast<int>(geocount::ErrorCode::Internal) == GC_INTERNAL);
static_assert(static_cast<int>(geocount::ErrorCode::InvalidSpec) == GC_INVALID_SPEC);
static_assert(static_cast<int>(geocount::ErrorCode::UnknownCovariate) == GC_UNKNOWN_COVARIATE);

namespace {

thread_local std::string last_error;

gc_status set_error(geocount::ErrorCode code, const std::string& message) {
  last_error = message;
  return static_cast<gc_status>(code);
}

template <typename F>
gc_status guarded(F&& body) {
  try {
    body();
    return GC_OK;
  } catch (const geocount::Error& e) {
    return set_error(e.code(), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(geocount::ErrorCode::Internal, "out of memory");
  } catch (const std::exception& e) {
    return set_error(geocount::ErrorCode::Internal, e.what());
  } catch (...) {
    return set_error(geocount::ErrorCode::Internal, "unknown failure");
  }
}

void require(bool ok, const char* what) {
  if (!ok) geocount::fail(geocount::ErrorCode::InvalidArgument, std::string("null argument: ") + what);
}

char* duplicate(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string text_or(const char* s, const char* fallback) { return s ? std::string(s) : std::string(fallback); }

std::vector<std::string> names(const char* const* items, size_t count) {
  std::vector<std::string> out;
  for (size_t i = 0; i < count; ++i) {
    require(items && items[i], "covariate name");
    out.emplace_back(items[i]);
  }
  return out;
}

geocount::Family to_family(gc_family family) {
  switch (family) {
    case GC_FAMILY_LOGIT: return geocount::Family::Logit;
    case GC_FAMILY_POISSON: return geocount::Family::Poisson;
    case GC_FAMILY_ZIP: return geocount::Family::Zip;
  }
  geocount::fail(geocount::ErrorCode::InvalidArgument, "unknown family");
}

}  // namespace

extern "C" {

const char* gc_status_name(gc_status status) {
  // string_view literals from error_code_name are null-terminated
  return geocount::error_code_name(static_cast<geocount::ErrorCode>(status)).data();
}

const char* gc_last_error(void) { return last_error.c_str(); }

void gc_string_free(char* s) { std::free(s); }

void gc_ingest_config_init(gc_ingest_config* config) {
  if (!config) return;
  *config = gc_ingest_config{"id", "lat", "lon", "count", nullptr, nullptr, 0, nullptr, 0, 0};
}

gc_status gc_dataset_read_csv(const char* path, const gc_ingest_config* config, gc_dataset** out) {
  return guarded([&] {
    require(path && out, "path/out");
    geocount::IngestConfig cfg;
    if (config) {
      cfg.id_column = text_or(config->id_column, "id");
      cfg.lat_column = text_or(config->lat_column, "lat");
      cfg.lon_column = text_or(config->lon_column, "lon");
      cfg.count_column = text_or(config->count_column, "count");
      cfg.population_column = text_or(config->population_column, "");
      for (size_t i = 0; i < config->n_rate_specs; ++i) {
        const auto& r = config->rate_specs[i];
        require(r.raw_column && r.derived_name, "rate spec");
        cfg.rate_specs.push_back({r.raw_column, r.derived_name});
      }
      for (size_t i = 0; i < config->n_ratio_specs; ++i) {
        const auto& r = config->ratio_specs[i];
        require(r.numerator_column && r.denominator_column && r.derived_name, "ratio spec");
        cfg.ratio_specs.push_back({r.numerator_column, r.denominator_column, r.derived_name});
      }
      cfg.standardize = config->standardize != 0;
    }
    auto data = std::make_shared<const geocount::Dataset>(geocount::read_dataset(std::filesystem::path(path), cfg));
    *out = new gc_dataset{std::move(data)};
  });
}

gc_status gc_dataset_write_csv(const gc_dataset* dataset, const char* path) {
  return guarded([&] {
    require(dataset && path, "dataset/path");
    geocount::write_dataset(*dataset->data, std::filesystem::path(path));
  });
}

size_t gc_dataset_size(const gc_dataset* dataset) { return dataset ? dataset->data->size() : 0; }

void gc_dataset_free(gc_dataset* dataset) { delete dataset; }

gc_status gc_dataset_summary(const gc_dataset* dataset, gc_summary* out) {
  return guarded([&] {
    require(dataset && out, "dataset/out");
    const auto s = geocount::summarize(*dataset->data);
    *out = gc_summary{s.n, s.zero_share, s.mean_count};
  });
}

gc_status gc_summary_render(const gc_summary* summary, char** out) {
  return guarded([&] {
    require(summary && out, "summary/out");
    *out = duplicate(geocount::render_summary({summary->n, summary->zero_share, summary->mean_count}));
  });
}

void gc_model_spec_init(gc_model_spec* spec) {
  if (!spec) return;
  *spec = gc_model_spec{GC_FAMILY_POISSON, nullptr, 0, nullptr, 0, 0, 1};
}

void gc_optim_options_init(gc_optim_options* options) {
  if (!options) return;
  const geocount::OptimOptions defaults;
  *options = gc_optim_options{defaults.max_iterations, defaults.gradient_tolerance, defaults.step_halving_max,
                              defaults.ridge_floor};
}

gc_status gc_fit_model(const gc_dataset* dataset, const gc_model_spec* spec, const gc_optim_options* options,
                       gc_fit** out) {
  return guarded([&] {
    require(dataset && spec && out, "dataset/spec/out");
    geocount::ModelSpec model;
    model.family = to_family(spec->family);
    model.count_covariates = names(spec->count_covariates, spec->n_count_covariates);
    if (spec->has_inflation_covariates) {
      model.inflation_covariates = names(spec->inflation_covariates, spec->n_inflation_covariates);
    }
    model.add_intercept = spec->add_intercept != 0;
    geocount::OptimOptions opts;
    if (options) {
      opts.max_iterations = options->max_iterations;
      opts.gradient_tolerance = options->gradient_tolerance;
      opts.step_halving_max = options->step_halving_max;
      opts.ridge_floor = options->ridge_floor;
    }
    auto result = geocount::fit(model, *dataset->data, opts);
    *out = new gc_fit{std::move(result)};
  });
}

gc_status gc_fit_from_json(const char* json, gc_fit** out) {
  return guarded([&] {
    require(json && out, "json/out");
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(json);
    } catch (const nlohmann::json::exception& e) {
      geocount::fail(geocount::ErrorCode::Parse, std::string("invalid JSON: ") + e.what());
    }
    *out = new gc_fit{geocount::fit_from_json(doc)};
  });
}

int gc_fit_converged(const gc_fit* fit) { return fit && fit->result.converged ? 1 : 0; }

int gc_fit_iterations(const gc_fit* fit) { return fit ? fit->result.iterations : 0; }

double gc_fit_log_likelihood(const gc_fit* fit) { return fit ? fit->result.log_likelihood : 0.0; }

size_t gc_fit_num_coefficients(const gc_fit* fit) { return fit ? fit->result.coefficients.size() : 0; }

gc_status gc_fit_coefficient(const gc_fit* fit, size_t index, gc_coefficient* out) {
  return guarded([&] {
    require(fit && out, "fit/out");
    if (index >= fit->result.coefficients.size()) {
      geocount::fail(geocount::ErrorCode::InvalidArgument, "coefficient index out of range");
    }
    const auto& row = fit->result.coefficients[index];
    *out = gc_coefficient{row.name.c_str(), row.estimate, row.std_error, row.z_stat, row.p_value, row.stars.c_str()};
  });
}

gc_status gc_fit_render(const gc_fit* fit, gc_format format, char** out) {
  return guarded([&] {
    require(fit && out, "fit/out");
    switch (format) {
      case GC_FORMAT_TEXT: *out = duplicate(geocount::render_fit_text(fit->result)); return;
      case GC_FORMAT_CSV: *out = duplicate(geocount::render_fit_csv(fit->result)); return;
      case GC_FORMAT_JSON: *out = duplicate(geocount::fit_to_json(fit->result).dump(2) + "\n"); return;
      case GC_FORMAT_GEOJSON: break;
    }
    geocount::fail(geocount::ErrorCode::InvalidArgument, "fit results render as text, csv or json");
  });
}

void gc_fit_free(gc_fit* fit) { delete fit; }

gc_status gc_weights_parse(const char* text, gc_weights_scheme* out) {
  return guarded([&] {
    require(text && out, "text/out");
    const auto scheme = geocount::WeightsScheme::parse(text);
    out->kind = scheme.kind == geocount::WeightsScheme::Kind::DistanceBand ? GC_WEIGHTS_DISTANCE_BAND
                                                                          : GC_WEIGHTS_K_NEAREST;
    out->band_km = scheme.band_km;
    out->k = scheme.k;
    out->include_self = scheme.include_self ? 1 : 0;
  });
}

gc_status gc_hotspot_compute(const gc_dataset* dataset, const char* value_column, const gc_weights_scheme* scheme,
                             gc_hotspot** out) {
  return guarded([&] {
    require(dataset && scheme && out, "dataset/scheme/out");
    const auto& data = *dataset->data;
    const bool self = scheme->include_self != 0;
    const auto ws = scheme->kind == GC_WEIGHTS_DISTANCE_BAND ? geocount::WeightsScheme::distance_band(scheme->band_km, self)
                                                             : geocount::WeightsScheme::k_nearest(scheme->k, self);
    const auto values = data.column(value_column ? value_column : "count");
    const auto centroids = data.centroids();
    const auto weights = geocount::build_weights(centroids, ws);
    auto result = geocount::getis_ord_gstar(std::span<const double>(values.data(), static_cast<size_t>(values.size())),
                                            weights);
    *out = new gc_hotspot{dataset->data, std::move(result)};
  });
}

size_t gc_hotspot_size(const gc_hotspot* hotspot) { return hotspot ? hotspot->result.z.size() : 0; }

double gc_hotspot_z(const gc_hotspot* hotspot, size_t index) {
  return hotspot && index < hotspot->result.z.size() ? hotspot->result.z[index] : 0.0;
}

const char* gc_hotspot_class(const gc_hotspot* hotspot, size_t index) {
  if (!hotspot || index >= hotspot->result.classes.size()) return nullptr;
  return geocount::hotspot_class_name(hotspot->result.classes[index]).data();
}

gc_status gc_hotspot_render(const gc_hotspot* hotspot, gc_format format, char** out) {
  return guarded([&] {
    require(hotspot && out, "hotspot/out");
    switch (format) {
      case GC_FORMAT_CSV: *out = duplicate(geocount::render_hotspot_csv(*hotspot->data, hotspot->result)); return;
      case GC_FORMAT_GEOJSON:
        *out = duplicate(geocount::render_hotspot_geojson(*hotspot->data, hotspot->result));
        return;
      case GC_FORMAT_TEXT:
      case GC_FORMAT_JSON: break;
    }
    geocount::fail(geocount::ErrorCode::InvalidArgument, "hot spots render as csv or geojson");
  });
}

void gc_hotspot_free(gc_hotspot* hotspot) { delete hotspot; }

gc_status gc_simulate(const char* spec_json, const uint64_t* seed_override, gc_dataset** out) {
  return guarded([&] {
    require(spec_json && out, "spec/out");
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(spec_json);
    } catch (const nlohmann::json::exception& e) {
      geocount::fail(geocount::ErrorCode::InvalidSpec, std::string("invalid JSON: ") + e.what());
    }
    auto spec = geocount::dgp_from_json(doc);
    if (seed_override) spec.seed = *seed_override;
    *out = new gc_dataset{std::make_shared<const geocount::Dataset>(geocount::generate(spec))};
  });
}

gc_status gc_preset_spec(const char* name, uint64_t seed, char** out_json) {
  return guarded([&] {
    require(name && out_json, "name/out");
    const auto spec = geocount::named_preset(name, seed);
    if (!spec) geocount::fail(geocount::ErrorCode::InvalidSpec, std::string("unknown preset '") + name + "'");
    *out_json = duplicate(geocount::dgp_to_json(*spec).dump(2) + "\n");
  });
}

}  // extern "C"
