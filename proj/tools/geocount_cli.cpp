// geocount command-line front end. Talks to the library exclusively through
// the C API in geocount/geocount.h.
//
// Exit codes: 0 success, 1 error (one "error: <Code>: <message>" line on
// stderr), 2 fit finished without converging (results are still written).

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "geocount/geocount.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNotConverged = 2;

struct CliError {
  std::string code;
  std::string message;
};

[[noreturn]] void raise(gc_status status) { throw CliError{gc_status_name(status), gc_last_error()}; }
[[noreturn]] void raise(std::string code, std::string message) { throw CliError{std::move(code), std::move(message)}; }

void check(gc_status status) {
  if (status != GC_OK) raise(status);
}

struct DatasetDeleter {
  void operator()(gc_dataset* p) const { gc_dataset_free(p); }
};
struct FitDeleter {
  void operator()(gc_fit* p) const { gc_fit_free(p); }
};
struct HotspotDeleter {
  void operator()(gc_hotspot* p) const { gc_hotspot_free(p); }
};
using DatasetPtr = std::unique_ptr<gc_dataset, DatasetDeleter>;
using FitPtr = std::unique_ptr<gc_fit, FitDeleter>;
using HotspotPtr = std::unique_ptr<gc_hotspot, HotspotDeleter>;

std::string take(char* s) {
  std::string out(s);
  gc_string_free(s);
  return out;
}

// Field names mirror the JSON config file.
struct RunConfig {
  std::string command;
  std::string input;
  std::string output;
  std::string spec;
  std::string preset;
  std::string fit;
  std::string family;
  std::vector<std::string> covariates;
  std::optional<std::vector<std::string>> inflation_covariates;
  bool no_intercept = false;
  std::string population_column;
  std::vector<std::string> rates;   // RAW:DERIVED
  std::vector<std::string> ratios;  // NUM/DEN:DERIVED
  std::string value_column = "count";
  std::string weights;
  bool exclude_self = false;
  bool standardize = false;
  std::optional<std::uint64_t> seed;
  std::string format;
  int max_iterations = 200;
  double gradient_tolerance = 1e-8;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::string> json_list(const nlohmann::json& v) {
  if (v.is_string()) return split_list(v.get<std::string>());
  return v.get<std::vector<std::string>>();
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) raise("Io", "cannot open config file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
    auto str = [&](const char* key, std::string& field) {
      if (doc.contains(key)) field = doc.at(key).get<std::string>();
    };
    str("command", cfg.command);
    str("input", cfg.input);
    str("output", cfg.output);
    str("spec", cfg.spec);
    str("preset", cfg.preset);
    str("fit", cfg.fit);
    str("family", cfg.family);
    str("population_column", cfg.population_column);
    str("value_column", cfg.value_column);
    str("weights", cfg.weights);
    str("format", cfg.format);
    if (doc.contains("covariates")) cfg.covariates = json_list(doc.at("covariates"));
    if (doc.contains("inflation_covariates")) cfg.inflation_covariates = json_list(doc.at("inflation_covariates"));
    if (doc.contains("rates")) cfg.rates = json_list(doc.at("rates"));
    if (doc.contains("ratios")) cfg.ratios = json_list(doc.at("ratios"));
    if (doc.contains("no_intercept")) cfg.no_intercept = doc.at("no_intercept").get<bool>();
    if (doc.contains("exclude_self")) cfg.exclude_self = doc.at("exclude_self").get<bool>();
    if (doc.contains("standardize")) cfg.standardize = doc.at("standardize").get<bool>();
    if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("max_iterations")) cfg.max_iterations = doc.at("max_iterations").get<int>();
    if (doc.contains("gradient_tolerance")) cfg.gradient_tolerance = doc.at("gradient_tolerance").get<double>();
  } catch (const nlohmann::json::exception& e) {
    raise("Parse", "config file '" + path + "': " + e.what());
  }
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise("Io", "cannot open '" + path + "' for writing");
  out << content;
  if (!out) raise("Io", "write to '" + path + "' failed");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise("Io", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void require_field(const std::string& value, const char* flag) {
  if (value.empty()) raise("InvalidArgument", std::string("missing required option ") + flag);
}

gc_format parse_format(const std::string& name, std::initializer_list<gc_format> allowed) {
  gc_format f;
  if (name == "text") f = GC_FORMAT_TEXT;
  else if (name == "csv") f = GC_FORMAT_CSV;
  else if (name == "json") f = GC_FORMAT_JSON;
  else if (name == "geojson") f = GC_FORMAT_GEOJSON;
  else raise("InvalidArgument", "unknown format '" + name + "'");
  for (auto a : allowed) {
    if (a == f) return f;
  }
  raise("InvalidArgument", "format '" + name + "' is not available for this command");
}

DatasetPtr load_dataset(const RunConfig& cfg) {
  require_field(cfg.input, "--input");
  // backing storage for the C structs below
  std::vector<std::string> parts;
  parts.reserve(3 * (cfg.rates.size() + cfg.ratios.size()));
  std::vector<gc_rate_spec> rates;
  for (const auto& r : cfg.rates) {
    const auto colon = r.find(':');
    if (colon == std::string::npos) raise("InvalidArgument", "rate must be RAW:DERIVED, got '" + r + "'");
    parts.push_back(r.substr(0, colon));
    parts.push_back(r.substr(colon + 1));
    rates.push_back({parts[parts.size() - 2].c_str(), parts.back().c_str()});
  }
  std::vector<gc_ratio_spec> ratios;
  for (const auto& r : cfg.ratios) {
    const auto slash = r.find('/');
    const auto colon = r.find(':');
    if (slash == std::string::npos || colon == std::string::npos || colon < slash) {
      raise("InvalidArgument", "ratio must be NUM/DEN:DERIVED, got '" + r + "'");
    }
    parts.push_back(r.substr(0, slash));
    parts.push_back(r.substr(slash + 1, colon - slash - 1));
    parts.push_back(r.substr(colon + 1));
    ratios.push_back({parts[parts.size() - 3].c_str(), parts[parts.size() - 2].c_str(), parts.back().c_str()});
  }
  gc_ingest_config ingest;
  gc_ingest_config_init(&ingest);
  ingest.population_column = cfg.population_column.empty() ? nullptr : cfg.population_column.c_str();
  ingest.rate_specs = rates.data();
  ingest.n_rate_specs = rates.size();
  ingest.ratio_specs = ratios.data();
  ingest.n_ratio_specs = ratios.size();
  ingest.standardize = cfg.standardize ? 1 : 0;

  gc_dataset* raw = nullptr;
  check(gc_dataset_read_csv(cfg.input.c_str(), &ingest, &raw));
  return DatasetPtr(raw);
}

int cmd_fit(const RunConfig& cfg) {
  require_field(cfg.family, "--family");
  gc_model_spec spec;
  gc_model_spec_init(&spec);
  if (cfg.family == "logit") spec.family = GC_FAMILY_LOGIT;
  else if (cfg.family == "poisson") spec.family = GC_FAMILY_POISSON;
  else if (cfg.family == "zip") spec.family = GC_FAMILY_ZIP;
  else raise("InvalidArgument", "family must be logit, poisson or zip");
  const gc_format format = parse_format(cfg.format.empty() ? "text" : cfg.format,
                                        {GC_FORMAT_TEXT, GC_FORMAT_CSV, GC_FORMAT_JSON});

  auto data = load_dataset(cfg);
  std::vector<const char*> count_names, inflation_names;
  for (const auto& c : cfg.covariates) count_names.push_back(c.c_str());
  spec.count_covariates = count_names.data();
  spec.n_count_covariates = count_names.size();
  if (cfg.inflation_covariates) {
    for (const auto& c : *cfg.inflation_covariates) inflation_names.push_back(c.c_str());
    spec.inflation_covariates = inflation_names.data();
    spec.n_inflation_covariates = inflation_names.size();
    spec.has_inflation_covariates = 1;
  }
  spec.add_intercept = cfg.no_intercept ? 0 : 1;

  gc_optim_options options;
  gc_optim_options_init(&options);
  options.max_iterations = cfg.max_iterations;
  options.gradient_tolerance = cfg.gradient_tolerance;

  gc_fit* raw = nullptr;
  check(gc_fit_model(data.get(), &spec, &options, &raw));
  FitPtr fit(raw);
  char* rendered = nullptr;
  check(gc_fit_render(fit.get(), format, &rendered));
  write_output(cfg.output, take(rendered));
  if (!gc_fit_converged(fit.get())) {
    std::cerr << "warning: fit did not converge after " << gc_fit_iterations(fit.get()) << " iterations\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

int cmd_hotspot(const RunConfig& cfg) {
  require_field(cfg.weights, "--weights");
  const gc_format format = parse_format(cfg.format.empty() ? "csv" : cfg.format, {GC_FORMAT_CSV, GC_FORMAT_GEOJSON});
  auto data = load_dataset(cfg);
  gc_weights_scheme scheme;
  check(gc_weights_parse(cfg.weights.c_str(), &scheme));
  scheme.include_self = cfg.exclude_self ? 0 : 1;
  gc_hotspot* raw = nullptr;
  check(gc_hotspot_compute(data.get(), cfg.value_column.c_str(), &scheme, &raw));
  HotspotPtr hotspot(raw);
  char* rendered = nullptr;
  check(gc_hotspot_render(hotspot.get(), format, &rendered));
  write_output(cfg.output, take(rendered));
  return kExitOk;
}

int cmd_simulate(const RunConfig& cfg) {
  require_field(cfg.output, "--out");
  std::string spec_json;
  if (!cfg.preset.empty()) {
    char* raw = nullptr;
    check(gc_preset_spec(cfg.preset.c_str(), cfg.seed.value_or(2947), &raw));
    spec_json = take(raw);
  } else {
    require_field(cfg.spec, "--spec or --preset");
    spec_json = read_file(cfg.spec);
  }
  gc_dataset* raw = nullptr;
  const std::uint64_t seed = cfg.seed.value_or(0);
  check(gc_simulate(spec_json.c_str(), cfg.seed ? &seed : nullptr, &raw));
  DatasetPtr data(raw);
  check(gc_dataset_write_csv(data.get(), cfg.output.c_str()));
  gc_summary summary;
  check(gc_dataset_summary(data.get(), &summary));
  char* text = nullptr;
  check(gc_summary_render(&summary, &text));
  std::cout << take(text);
  return kExitOk;
}

int cmd_report(const RunConfig& cfg) {
  require_field(cfg.fit, "--fit");
  const gc_format format = parse_format(cfg.format.empty() ? "text" : cfg.format,
                                        {GC_FORMAT_TEXT, GC_FORMAT_CSV, GC_FORMAT_JSON});
  const std::string json = read_file(cfg.fit);
  gc_fit* raw = nullptr;
  check(gc_fit_from_json(json.c_str(), &raw));
  FitPtr fit(raw);
  char* rendered = nullptr;
  check(gc_fit_render(fit.get(), format, &rendered));
  write_output(cfg.output, take(rendered));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Count-model fitting and Getis-Ord hot-spot analysis for county data", "geocount"};
  app.require_subcommand(0, 1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON run configuration; command-line flags take precedence");

  // Flag values land in `flags`; only options actually given override the config file.
  RunConfig flags;
  std::string covariates, inflation_covariates;
  std::string seed_text;

  auto add_ingest = [&](CLI::App* sub) {
    sub->add_option("--input", flags.input, "Input CSV");
    sub->add_option("--population-column", flags.population_column, "Population column for per-10k rates");
    sub->add_option("--rate", flags.rates, "Per-10k rate covariate RAW:DERIVED (repeatable)");
    sub->add_option("--ratio", flags.ratios, "Ratio covariate NUM/DEN:DERIVED (repeatable)");
    sub->add_flag("--standardize", flags.standardize, "Standardize non-binary raw covariates");
  };

  auto* fit = app.add_subcommand("fit", "Fit a logit, Poisson or zero-inflated Poisson model");
  add_ingest(fit);
  fit->add_option("--family", flags.family, "logit | poisson | zip");
  fit->add_option("--covariates", covariates, "Comma-separated count covariates (empty: intercept only)");
  fit->add_option("--inflation-covariates", inflation_covariates, "Comma-separated ZIP inflation covariates");
  fit->add_flag("--no-intercept", flags.no_intercept, "Omit the intercept column");
  fit->add_option("--max-iterations", flags.max_iterations, "Newton iteration budget");
  fit->add_option("--tolerance", flags.gradient_tolerance, "Max-abs gradient tolerance");
  fit->add_option("--out", flags.output, "Output file (default stdout)");
  fit->add_option("--format", flags.format, "text | csv | json");

  auto* hotspot = app.add_subcommand("hotspot", "Getis-Ord G_i* hot/cold spots");
  add_ingest(hotspot);
  hotspot->add_option("--value-column", flags.value_column, "Column analysed (default count)");
  hotspot->add_option("--weights", flags.weights, "band:KM or knn:K");
  hotspot->add_flag("--exclude-self", flags.exclude_self, "Zero diagonal weights");
  hotspot->add_option("--out", flags.output, "Output file (default stdout)");
  hotspot->add_option("--format", flags.format, "csv | geojson");

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset");
  simulate->add_option("--spec", flags.spec, "Data-generating process JSON");
  simulate->add_option("--preset", flags.preset, "Named preset (paper-scale)");
  simulate->add_option("--seed", seed_text, "Seed override");
  simulate->add_option("--out", flags.output, "Output CSV");

  auto* report = app.add_subcommand("report", "Render a saved JSON fit");
  report->add_option("--fit", flags.fit, "Fit JSON written by 'fit --format json'");
  report->add_option("--format", flags.format, "text | csv | json");
  report->add_option("--out", flags.output, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: InvalidArgument: " << e.what() << '\n';
    return kExitError;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) apply_config_file(cfg, config_path);

    CLI::App* chosen = nullptr;
    for (auto* sub : {fit, hotspot, simulate, report}) {
      if (sub->parsed()) chosen = sub;
    }
    if (chosen) cfg.command = chosen->get_name();
    if (cfg.command.empty()) raise("InvalidArgument", "no command given (fit, hotspot, simulate, report)");

    if (chosen) {
      auto given_flag = [&](const char* name) {
        const auto* opt = chosen->get_option_no_throw(name);
        return opt && opt->count() > 0;
      };
      auto override_str = [&](const char* name, std::string& dst, const std::string& src) {
        if (given_flag(name)) dst = src;
      };
      override_str("--input", cfg.input, flags.input);
      override_str("--out", cfg.output, flags.output);
      override_str("--spec", cfg.spec, flags.spec);
      override_str("--preset", cfg.preset, flags.preset);
      override_str("--fit", cfg.fit, flags.fit);
      override_str("--family", cfg.family, flags.family);
      override_str("--population-column", cfg.population_column, flags.population_column);
      override_str("--value-column", cfg.value_column, flags.value_column);
      override_str("--weights", cfg.weights, flags.weights);
      override_str("--format", cfg.format, flags.format);
      if (given_flag("--covariates")) cfg.covariates = split_list(covariates);
      if (given_flag("--inflation-covariates")) cfg.inflation_covariates = split_list(inflation_covariates);
      if (given_flag("--rate")) cfg.rates = flags.rates;
      if (given_flag("--ratio")) cfg.ratios = flags.ratios;
      if (given_flag("--standardize")) cfg.standardize = true;
      if (given_flag("--no-intercept")) cfg.no_intercept = true;
      if (given_flag("--exclude-self")) cfg.exclude_self = true;
      if (given_flag("--max-iterations")) cfg.max_iterations = flags.max_iterations;
      if (given_flag("--tolerance")) cfg.gradient_tolerance = flags.gradient_tolerance;
      if (given_flag("--seed")) {
        try {
          std::size_t used = 0;
          cfg.seed = std::stoull(seed_text, &used);
          if (used != seed_text.size() || seed_text.front() == '-') throw std::invalid_argument("seed");
        } catch (const std::exception&) {
          raise("InvalidArgument", "seed must be a nonnegative integer");
        }
      }
    }

    if (cfg.command == "fit") return cmd_fit(cfg);
    if (cfg.command == "hotspot") return cmd_hotspot(cfg);
    if (cfg.command == "simulate") return cmd_simulate(cfg);
    if (cfg.command == "report") return cmd_report(cfg);
    raise("InvalidArgument", "unknown command '" + cfg.command + "'");
  } catch (const CliError& e) {
    std::string message = e.message;
    for (auto& c : message) {
      if (c == '\n' || c == '\r') c = ' ';
    }
    std::cerr << "error: " << e.code << ": " << message << '\n';
    return kExitError;
  }
}
