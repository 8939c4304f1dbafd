#include <doctest.h>

#include <cstring>
#include <random>

#include "geocount/data_model.hpp"
#include "geocount/error.hpp"
#include "test_support.hpp"

using namespace geocount;
using geocount::testing::rows_from;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Ok;
}

Dataset abc_dataset() {
  return Dataset({"a", "b"}, rows_from({0, 2, 1}, {{1.0, 5.0}, {2.0, 5.0}, {4.0, 5.0}}));
}

}  // namespace

TEST_CASE("build_design places the intercept first and copies rows in order") {
  const auto data = abc_dataset();
  const std::vector<std::string> sel{"a"};
  const auto design = build_design(data, sel, true);
  REQUIRE(design.rows() == 3);
  REQUIRE(design.cols() == 2);
  CHECK(design.has_intercept);
  CHECK(design.column_names == std::vector<std::string>{"intercept", "a"});
  CHECK(design.values.col(0) == Eigen::VectorXd::Ones(3));
  CHECK(design.values(0, 1) == 1.0);
  CHECK(design.values(1, 1) == 2.0);
  CHECK(design.values(2, 1) == 4.0);
}

TEST_CASE("build_design selection errors") {
  const auto data = abc_dataset();
  const std::vector<std::string> dup{"a", "a"};
  CHECK(code_of([&] { build_design(data, dup, true); }) == ErrorCode::DuplicateCovariate);

  const std::vector<std::string> constant{"b"};
  CHECK(code_of([&] { build_design(data, constant, true); }) == ErrorCode::ConstantColumn);

  const std::vector<std::string> unknown{"zzz"};
  CHECK(code_of([&] { build_design(data, unknown, true); }) == ErrorCode::UnknownCovariate);

  const std::vector<std::string> none;
  CHECK(code_of([&] { build_design(data, none, false); }) == ErrorCode::EmptySelection);
  CHECK(build_design(data, none, true).cols() == 1);
}

TEST_CASE("constant-column tolerance is 1e-12 on the range") {
  const Dataset nearly({"x"}, rows_from({1, 0}, {{1.0}, {1.0 + 1e-13}}));
  const std::vector<std::string> sel{"x"};
  CHECK(code_of([&] { build_design(nearly, sel, false); }) == ErrorCode::ConstantColumn);
  const Dataset varying({"x"}, rows_from({1, 0}, {{1.0}, {1.0 + 1e-9}}));
  CHECK_NOTHROW(build_design(varying, sel, false));
}

TEST_CASE("build_design is deterministic") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  std::vector<std::vector<double>> cov;
  std::vector<std::int64_t> counts;
  for (int i = 0; i < 50; ++i) {
    cov.push_back({normal(rng), normal(rng), normal(rng)});
    counts.push_back(i % 3);
  }
  const Dataset data({"x", "y", "z"}, rows_from(counts, cov));
  const std::vector<std::string> sel{"z", "x"};
  const auto a = build_design(data, sel, true);
  const auto b = build_design(data, sel, true);
  CHECK(std::memcmp(a.values.data(), b.values.data(), sizeof(double) * static_cast<std::size_t>(a.values.size())) == 0);
  CHECK(a.column_names == std::vector<std::string>{"intercept", "z", "x"});
}

TEST_CASE("binarize_counts") {
  CHECK(binarize_counts(Dataset({}, rows_from({0, 3, 1, 0}))) == std::vector<int>{0, 1, 1, 0});
  CHECK(binarize_counts(Dataset({}, rows_from({0, 0, 0}))) == std::vector<int>{0, 0, 0});
  CHECK(binarize_counts(Dataset({}, rows_from({7}))) == std::vector<int>{1});

  std::mt19937_64 rng(11);
  std::geometric_distribution<int> geo(0.4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::int64_t> counts(1 + rng() % 40);
    for (auto& c : counts) c = geo(rng);
    const auto bin = binarize_counts(Dataset({}, rows_from(counts)));
    int nonzero = 0, total = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      CHECK((bin[i] == 0) == (counts[i] == 0));
      nonzero += counts[i] != 0;
      total += bin[i];
    }
    CHECK(total == nonzero);
  }
}

TEST_CASE("Dataset construction enforces its invariants") {
  auto rows = rows_from({1, 2});
  rows[1].id = rows[0].id;
  CHECK(code_of([&] { Dataset({}, rows); }) == ErrorCode::DuplicateId);

  rows = rows_from({1, 2});
  rows[0].centroid.lat = 91.0;
  CHECK(code_of([&] { Dataset({}, rows); }) == ErrorCode::InvalidCoordinate);

  rows = rows_from({1, 2});
  rows[1].centroid.lon = -180.5;
  CHECK(code_of([&] { Dataset({}, rows); }) == ErrorCode::InvalidCoordinate);

  rows = rows_from({1, -1});
  CHECK(code_of([&] { Dataset({}, rows); }) == ErrorCode::NegativeCount);

  rows = rows_from({1, 2}, {{1.0}, {std::nan("")}});
  CHECK(code_of([&] { Dataset({"x"}, rows); }) == ErrorCode::NonNumericCell);

  rows = rows_from({1, 2}, {{1.0}, {1.0, 2.0}});
  CHECK(code_of([&] { Dataset({"x"}, rows); }) == ErrorCode::DimensionMismatch);

  CHECK(code_of([&] { Dataset({"x", "x"}, {}); }) == ErrorCode::NameCollision);
}

TEST_CASE("fit preconditions on a dataset") {
  CHECK(code_of([] { Dataset({}, rows_from({0, 0, 0})).require_fittable(); }) == ErrorCode::DegenerateData);
  CHECK(code_of([] { Dataset({}, rows_from({4})).require_fittable(); }) == ErrorCode::DegenerateData);
  CHECK_NOTHROW(Dataset({}, rows_from({0, 1})).require_fittable());
}

TEST_CASE("column access") {
  const auto data = abc_dataset();
  CHECK(data.column("a") == Eigen::Vector3d(1.0, 2.0, 4.0));
  CHECK(data.column("count") == Eigen::Vector3d(0.0, 2.0, 1.0));
  CHECK(code_of([&] { data.column("nope"); }) == ErrorCode::UnknownCovariate);
  CHECK(data.column_index("b") == 1u);
}
