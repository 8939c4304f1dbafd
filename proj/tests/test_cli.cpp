#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <string>

#include <sys/wait.h>

#include <json.hpp>

#include "test_support.hpp"

namespace fs = std::filesystem;
using geocount::testing::read_text;
using geocount::testing::write_text;

namespace {

struct Run {
  int exit_code = -1;
  std::string out;
  std::string err;
};

const fs::path& work_dir() {
  static const fs::path dir = geocount::testing::temp_dir("cli");
  return dir;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

Run run_cli(const std::vector<std::string>& args) {
  std::string cmd = shell_quote(GEOCOUNT_CLI);
  for (const auto& a : args) cmd += " " + shell_quote(a);
  const auto err_path = work_dir() / "stderr.txt";
  cmd += " 2>" + shell_quote(err_path.string());
  Run run;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) run.out.append(buf, got);
  const int status = ::pclose(pipe);
  run.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  run.err = read_text(err_path);
  return run;
}

std::string data(const std::string& name) { return std::string(GEOCOUNT_DATA_DIR) + "/" + name; }

// Grid of points with a high block; returns the CSV path and block membership by id.
std::string planted_grid(const std::string& name, int side, int lo, int hi, std::vector<bool>& in_block) {
  std::ostringstream csv;
  csv << "id,lat,lon,count\n";
  const double step = geocount::testing::equator_degrees(25.0);
  in_block.clear();
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      const bool block = r >= lo && r < hi && c >= lo && c < hi;
      in_block.push_back(block);
      csv << "g" << r * side + c << ',' << r * step << ',' << c * step << ',' << (block ? 10 : 0) << '\n';
    }
  }
  const auto path = (work_dir() / name).string();
  write_text(path, csv.str());
  return path;
}

}  // namespace

TEST_CASE("smoke logit fit matches the golden report") {
  const auto run = run_cli({"fit", "--input", data("smoke.csv"), "--family", "logit", "--covariates", ""});
  CHECK(run.exit_code == 0);
  CHECK(run.out == read_text(fs::path(GEOCOUNT_GOLDEN_DIR) / "smoke_logit.txt"));
  CHECK(run.err.empty());
}

TEST_CASE("errors produce one machine-parseable line and exit 1") {
  auto run = run_cli({"fit", "--input", data("smoke.csv"), "--family", "poisson", "--covariates", "nope"});
  CHECK(run.exit_code == 1);
  CHECK(run.err.rfind("error: UnknownCovariate: ", 0) == 0);
  CHECK(std::count(run.err.begin(), run.err.end(), '\n') == 1);
  CHECK(run.out.empty());

  const auto no_lat = (work_dir() / "no_lat.csv").string();
  write_text(no_lat, "id,lon,count\na,1,2\nb,2,3\n");
  run = run_cli({"hotspot", "--input", no_lat, "--weights", "knn:1"});
  CHECK(run.exit_code == 1);
  CHECK(run.err.rfind("error: MissingColumn: ", 0) == 0);

  run = run_cli({"fit", "--input", data("smoke.csv"), "--family", "negbin"});
  CHECK(run.exit_code == 1);
  CHECK(run.err.rfind("error: ", 0) == 0);
}

TEST_CASE("hotspot on all-equal values") {
  const auto path = (work_dir() / "flat.csv").string();
  write_text(path, "id,lat,lon,count\na,30,-90,4\nb,30.1,-90,4\nc,30.2,-90,4\nd,30.3,-90,4\n");
  const auto run = run_cli({"hotspot", "--input", path, "--weights", "band:50"});
  REQUIRE(run.exit_code == 0);
  CHECK(run.out == "id,z,class\na,0,NotSignificant\nb,0,NotSignificant\nc,0,NotSignificant\nd,0,NotSignificant\n");
}

TEST_CASE("hotspot finds a planted cluster") {
  std::vector<bool> in_block;
  const auto path = planted_grid("planted.csv", 12, 4, 8, in_block);
  const auto out = (work_dir() / "planted.geojson").string();
  const auto run = run_cli({"hotspot", "--input", path, "--weights", "band:30", "--format", "geojson", "--out", out});
  REQUIRE(run.exit_code == 0);
  const auto doc = nlohmann::json::parse(read_text(out));
  REQUIRE(doc["features"].size() == in_block.size());
  std::size_t background = 0, quiet = 0;
  for (std::size_t i = 0; i < in_block.size(); ++i) {
    const std::string cls = doc["features"][i]["properties"]["class"];
    if (in_block[i]) {
      const int r = static_cast<int>(i) / 12, c = static_cast<int>(i) % 12;
      if (r > 4 && r < 7 && c > 4 && c < 7) CHECK((cls == "Hot95" || cls == "Hot99"));
    } else {
      ++background;
      quiet += cls == "NotSignificant";
    }
  }
  CHECK(quiet >= background * 9 / 10);
}

TEST_CASE("simulate validates, summarizes and is deterministic") {
  const auto spec = (work_dir() / "empty.json").string();
  write_text(spec, R"({"family":"zip","n":0,"covariates":[],"beta":[0],"gamma":[0],"seed":1})");
  auto run = run_cli({"simulate", "--spec", spec, "--out", (work_dir() / "never.csv").string()});
  CHECK(run.exit_code == 1);
  CHECK(run.err.rfind("error: InvalidSpec: ", 0) == 0);

  const auto a = (work_dir() / "sim_a.csv").string(), b = (work_dir() / "sim_b.csv").string();
  run = run_cli({"simulate", "--preset", "paper-scale", "--seed", "5", "--out", a});
  REQUIRE(run.exit_code == 0);
  CHECK(run.out.rfind("n=2947\nzero_share=", 0) == 0);
  const double share = std::stod(run.out.substr(run.out.find("zero_share=") + 11));
  CHECK(share >= 0.485);
  CHECK(share <= 0.525);
  run = run_cli({"simulate", "--preset", "paper-scale", "--seed", "5", "--out", b});
  REQUIRE(run.exit_code == 0);
  CHECK(read_text(a) == read_text(b));
  run = run_cli({"simulate", "--preset", "paper-scale", "--seed", "6", "--out", b});
  CHECK(read_text(a) != read_text(b));
}

TEST_CASE("config file values yield to flags") {
  const auto cfg = (work_dir() / "run.json").string();
  write_text(cfg, R"({"command":"fit","input":")" + data("smoke.csv") +
                      R"(","family":"poisson","covariates":[],"format":"csv"})");
  auto run = run_cli({"--config", cfg, "fit"});
  REQUIRE(run.exit_code == 0);
  CHECK(run.out.rfind("name,estimate,", 0) == 0);

  run = run_cli({"--config", cfg, "fit", "--family", "logit", "--format", "text"});
  REQUIRE(run.exit_code == 0);
  CHECK(run.out == read_text(fs::path(GEOCOUNT_GOLDEN_DIR) / "smoke_logit.txt"));
}

TEST_CASE("report re-renders a saved fit") {
  const auto json = (work_dir() / "fit.json").string();
  auto run = run_cli({"fit", "--input", data("smoke.csv"), "--family", "logit", "--covariates", "", "--format", "json",
                      "--out", json});
  REQUIRE(run.exit_code == 0);
  run = run_cli({"report", "--fit", json, "--format", "text"});
  REQUIRE(run.exit_code == 0);
  CHECK(run.out == read_text(fs::path(GEOCOUNT_GOLDEN_DIR) / "smoke_logit.txt"));
  write_text(json, "{");
  run = run_cli({"report", "--fit", json});
  CHECK(run.exit_code == 1);
}

TEST_CASE("zip on pure poisson data") {
  const auto spec = (work_dir() / "pois.json").string();
  write_text(spec, R"({"family":"poisson","n":3000,"covariates":[{"name":"a","distribution":{"type":"normal","mean":0,"sd":1}}],)"
                   R"("beta":[0.7,0.3],"gamma":[],"layout":{"type":"uniform_square","side_km":500,"origin":[40,-95]},"seed":12})");
  const auto csv = (work_dir() / "pois.csv").string();
  REQUIRE(run_cli({"simulate", "--spec", spec, "--out", csv}).exit_code == 0);
  const auto run = run_cli({"fit", "--input", csv, "--family", "zip", "--covariates", "a", "--inflation-covariates", "",
                            "--format", "csv"});
  INFO(run.err);
  REQUIRE((run.exit_code == 0 || run.exit_code == 2));
  const auto pos = run.out.find("inflate:intercept,");
  REQUIRE(pos != std::string::npos);
  const double gamma0 = std::stod(run.out.substr(pos + 18));
  CHECK(gamma0 < -3.0);
}

TEST_CASE("non-convergence exits 2 and still writes the result") {
  const auto out = (work_dir() / "partial.json").string();
  const auto run = run_cli({"fit", "--input", data("smoke.csv"), "--family", "poisson", "--covariates", "banks_per_10k",
                            "--max-iterations", "1", "--format", "json", "--out", out});
  CHECK(run.exit_code == 2);
  const auto doc = nlohmann::json::parse(read_text(out));
  CHECK(doc["converged"] == false);
}
