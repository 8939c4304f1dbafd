#include "geocount/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <set>
#include <unordered_map>

#include "geocount/error.hpp"

namespace geocount {

namespace csv {

std::vector<std::vector<std::string>> parse(std::istream& in) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_started = false;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    // blank lines carry no record
    if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
    row.clear();
  };

  std::size_t i = 0;
  if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) i = 3;  // UTF-8 BOM
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started && !field.empty()) fail(ErrorCode::Parse, "stray quote inside unquoted field");
        quoted = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_row();
        break;
      case '\n':
        end_row();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (quoted) fail(ErrorCode::Parse, "unterminated quoted field");
  if (field_started || !row.empty()) end_row();
  return rows;
}

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace csv

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) fail(ErrorCode::Internal, "float formatting failed");
  return std::string(buf, ptr);
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::string cell_ref(std::size_t row, const std::string& column) {
  return "row " + std::to_string(row) + ", column '" + column + "'";
}

double parse_number(const std::string& raw, std::size_t row, const std::string& column) {
  const std::string s = trim(raw);
  double value = 0.0;
  const char* begin = s.data();
  if (!s.empty() && s[0] == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), value);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
    fail(ErrorCode::NonNumericCell, cell_ref(row, column) + ": '" + raw + "' is not a number");
  }
  return value;
}

bool is_binary(const std::vector<double>& values) {
  bool saw0 = false, saw1 = false;
  for (double v : values) {
    if (v == 0.0) saw0 = true;
    else if (v == 1.0) saw1 = true;
    else return false;
  }
  return saw0 && saw1;
}

}  // namespace

Dataset read_dataset(std::istream& in, const IngestConfig& config) {
  const auto rows = csv::parse(in);
  if (rows.empty()) fail(ErrorCode::MissingColumn, "input has no header row");
  const auto& header = rows.front();

  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (!position.emplace(trim(header[j]), j).second) {
      fail(ErrorCode::NameCollision, "duplicate header column '" + header[j] + "'");
    }
  }
  auto require = [&](const std::string& name) {
    auto it = position.find(name);
    if (name.empty() || it == position.end()) {
      fail(ErrorCode::MissingColumn, "missing column '" + name + "'");
    }
    return it->second;
  };

  const std::size_t id_col = require(config.id_column);
  const std::size_t lat_col = require(config.lat_column);
  const std::size_t lon_col = require(config.lon_column);
  const std::size_t count_col = require(config.count_column);
  const std::set<std::size_t> reserved{id_col, lat_col, lon_col, count_col};

  std::vector<std::size_t> raw_cols;
  std::vector<std::string> schema;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (reserved.count(j)) continue;
    raw_cols.push_back(j);
    schema.push_back(trim(header[j]));
  }
  const std::size_t n_raw = schema.size();

  std::optional<std::size_t> pop_col;
  if (!config.rate_specs.empty()) {
    if (config.population_column.empty()) {
      fail(ErrorCode::MissingColumn, "rate derivation requires a population column");
    }
    pop_col = require(config.population_column);
  }
  std::set<std::string> taken(header.begin(), header.end());
  auto claim = [&](const std::string& derived) {
    if (derived.empty() || !taken.insert(derived).second) {
      fail(ErrorCode::NameCollision, "derived name '" + derived + "' collides with an existing column");
    }
    schema.push_back(derived);
  };
  std::vector<std::size_t> rate_cols;
  for (const auto& spec : config.rate_specs) {
    rate_cols.push_back(require(spec.raw_column));
    claim(spec.derived_name);
  }
  std::vector<std::pair<std::size_t, std::size_t>> ratio_cols;
  for (const auto& spec : config.ratio_specs) {
    ratio_cols.emplace_back(require(spec.numerator_column), require(spec.denominator_column));
    claim(spec.derived_name);
  }

  std::vector<CountyObservation> observations;
  observations.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& cells = rows[r];
    if (cells.size() != header.size()) {
      fail(ErrorCode::Parse, "row " + std::to_string(r) + ": expected " + std::to_string(header.size()) +
                                 " fields, got " + std::to_string(cells.size()));
    }
    CountyObservation obs;
    obs.id = trim(cells[id_col]);
    if (obs.id.empty()) fail(ErrorCode::NonNumericCell, cell_ref(r, config.id_column) + ": empty id");
    obs.centroid.lat = parse_number(cells[lat_col], r, config.lat_column);
    obs.centroid.lon = parse_number(cells[lon_col], r, config.lon_column);
    if (std::abs(obs.centroid.lat) > 90.0 || std::abs(obs.centroid.lon) > 180.0) {
      fail(ErrorCode::InvalidCoordinate, "row " + std::to_string(r) + ": centroid out of range");
    }
    const double count = parse_number(cells[count_col], r, config.count_column);
    if (count < 0) fail(ErrorCode::NegativeCount, "row " + std::to_string(r) + ": negative count");
    if (count != std::floor(count) || count > 9.0e15) {
      fail(ErrorCode::NonNumericCell, cell_ref(r, config.count_column) + ": count must be an integer");
    }
    obs.count = static_cast<std::int64_t>(count);

    obs.covariates.reserve(schema.size());
    for (std::size_t c = 0; c < raw_cols.size(); ++c) {
      obs.covariates.push_back(parse_number(cells[raw_cols[c]], r, schema[c]));
    }
    if (pop_col) {
      const double population = parse_number(cells[*pop_col], r, config.population_column);
      for (std::size_t s = 0; s < rate_cols.size(); ++s) {
        if (population == 0.0) fail(ErrorCode::ZeroDenominator, cell_ref(r, config.population_column));
        const double raw = parse_number(cells[rate_cols[s]], r, config.rate_specs[s].raw_column);
        obs.covariates.push_back(raw / population * kRateScale);
      }
    }
    for (std::size_t s = 0; s < ratio_cols.size(); ++s) {
      const auto& spec = config.ratio_specs[s];
      const double num = parse_number(cells[ratio_cols[s].first], r, spec.numerator_column);
      const double den = parse_number(cells[ratio_cols[s].second], r, spec.denominator_column);
      if (den == 0.0) fail(ErrorCode::ZeroDenominator, cell_ref(r, spec.denominator_column));
      obs.covariates.push_back(num / den);
    }
    observations.push_back(std::move(obs));
  }

  std::vector<Standardization> scaling;
  if (config.standardize && observations.size() >= 2) {
    const double n = static_cast<double>(observations.size());
    for (std::size_t j = 0; j < n_raw; ++j) {
      std::vector<double> values;
      values.reserve(observations.size());
      for (const auto& obs : observations) values.push_back(obs.covariates[j]);
      if (is_binary(values)) continue;
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= n;
      double ss = 0.0;
      for (double v : values) ss += (v - mean) * (v - mean);
      const double sd = std::sqrt(ss / (n - 1.0));
      if (!(sd > 0.0)) continue;
      for (auto& obs : observations) obs.covariates[j] = (obs.covariates[j] - mean) / sd;
      scaling.push_back({schema[j], mean, sd});
    }
  }

  return Dataset(std::move(schema), std::move(observations), std::move(scaling));
}

Dataset read_dataset(const std::filesystem::path& path, const IngestConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path.string() + "' for reading");
  return read_dataset(in, config);
}

void write_dataset(const Dataset& dataset, std::ostream& out) {
  out << "id,lat,lon,count";
  for (const auto& name : dataset.schema()) out << ',' << csv::quote(name);
  out << '\n';
  for (const auto& obs : dataset.observations()) {
    out << csv::quote(obs.id) << ',' << format_double(obs.centroid.lat) << ','
        << format_double(obs.centroid.lon) << ',' << obs.count;
    for (double v : obs.covariates) out << ',' << format_double(v);
    out << '\n';
  }
  if (!out) fail(ErrorCode::Io, "write failed");
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  write_dataset(dataset, out);
}

}  // namespace geocount
