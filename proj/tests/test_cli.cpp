#include "fixtures.hpp"
#include "siv/cli.hpp"
#include "siv/error.hpp"
#include "siv/io.hpp"
#include "siv/search.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace siv;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "siv");
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "siv_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path write_population(const Population& pop, const std::string& name) {
  const fs::path p = scratch(name);
  std::ofstream out(p);
  write_csv(pop.data, out);
  return p;
}

std::vector<std::string> estimate_args(const fs::path& input) {
  return {"estimate", "--input", input.string(), "--outcome", "y", "--endogenous", "x", "--controls", "w"};
}

}  // namespace

TEST_CASE("simulate writes a population that estimate can read") {
  const fs::path csv = scratch("sim.csv");
  const Run sim = run({"simulate", "--population-size", "2000", "--seed", "3", "--output", csv.string()});
  REQUIRE(sim.code == 0);
  const IngestResult data = ingest_csv(csv.string());
  CHECK(data.data.n_rows() == 2000);
  CHECK(data.data.names() == std::vector<std::string>{"y", "x", "w"});

  const Run a = run(estimate_args(csv));
  REQUIRE(a.code == 0);
  const auto j = nlohmann::ordered_json::parse(a.out);
  CHECK(j.at("schema_version") == 1);
  const auto& e = j.at("estimates")[0];
  CHECK(e.at("method") == "SIV");
  CHECK(e.at("beta_hat").get<double>() > 1.7);
  CHECK(e.at("beta_hat").get<double>() < 2.3);
  const Run b = run(estimate_args(csv));
  CHECK(a.out == b.out);
}

TEST_CASE("estimate with bootstrap is byte-identical across thread counts") {
  const fs::path csv = write_population(fixture::population(4, 600), "boot.csv");
  auto args = estimate_args(csv);
  args.insert(args.end(), {"--bootstrap", "10", "--seed", "8", "--threads", "1"});
  const Run one = run(args);
  args.back() = "3";
  const Run three = run(args);
  REQUIRE(one.code == 0);
  CHECK(one.out == three.out);
  const auto j = nlohmann::ordered_json::parse(one.out);
  CHECK(j.at("bootstrap").at("B") == 10);
  CHECK(j.at("estimates")[0].at("ci_kind") == "percentile");
}

TEST_CASE("missing endogeneity exits with its own code and a structured message") {
  std::optional<fs::path> csv;
  for (std::uint64_t seed = 50; seed < 60 && !csv; ++seed) {
    const Population pop = fixture::population(seed, 1000, EndogeneitySign::positive, true);
    if (determine_sign(build_context(pop.data, fixture::spec()), {}).verdict == SignVerdict::no_endogeneity) {
      csv = write_population(pop, "exo.csv");
    }
  }
  REQUIRE(csv.has_value());
  const Run r = run(estimate_args(*csv));
  CHECK(r.code == exit_code(ErrorKind::NoEndogeneityDetected));
  CHECK(r.code == 17);
  const auto j = nlohmann::ordered_json::parse(r.err);
  CHECK(j.at("error") == std::string(error_name(ErrorKind::NoEndogeneityDetected)));
  CHECK(j.at("exit_code") == 17);
  CHECK(j.at("advice") == "use OLS");
}

TEST_CASE("a missing input file maps to its exit code") {
  const Run r = run(estimate_args("/nonexistent/input.csv"));
  CHECK(r.code == exit_code(ErrorKind::FileNotFound));
}

TEST_CASE("usage errors exit with 1") {
  CHECK(run({"estimate", "--bogus"}).code == 1);
  CHECK(run({"estimate"}).code == 1);
}

TEST_CASE("an unknown method name is invalid input") {
  const Run r = run({"estimate", "--input", "a.csv", "--outcome", "y", "--endogenous", "x", "--method", "LASSO"});
  CHECK(r.code == exit_code(ErrorKind::InvalidInput));
}

TEST_CASE("locus writes both sign files and a summary") {
  const fs::path csv = write_population(fixture::population(5, 1000), "locus.csv");
  const std::string prefix = scratch("locus_out").string();
  const Run r = run({"locus", "--input", csv.string(), "--outcome", "y", "--endogenous", "x", "--controls", "w",
                     "--grid-points", "50", "--output-prefix", prefix});
  REQUIRE(r.code == 0);
  for (const char* suffix : {"_kplus.csv", "_kminus.csv"}) {
    std::istringstream in(slurp(prefix + suffix));
    std::string header;
    std::getline(in, header);
    CHECK(header == "delta,criterion,corr_s_x,first_stage_F,selected");
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == 50);
  }
  const auto summary = nlohmann::ordered_json::parse(slurp(prefix + "_summary.json"));
  CHECK(summary.is_object());
}

TEST_CASE("the seed can come from the environment") {
  const fs::path a = scratch("env_a.csv");
  const fs::path b = scratch("env_b.csv");
  REQUIRE(run({"simulate", "--population-size", "300", "--seed", "5", "--output", a.string()}).code == 0);
  ::setenv("SIV_SEED", "5", 1);
  const Run r = run({"simulate", "--population-size", "300", "--output", b.string()});
  ::unsetenv("SIV_SEED");
  REQUIRE(r.code == 0);
  CHECK(slurp(a) == slurp(b));
}

TEST_CASE("benchmark writes a summary table") {
  const Run r = run({"benchmark", "--population-size", "2000", "--sample-size", "300", "--generations", "2",
                     "--draws", "2", "--methods", "OLS,SIV", "--seed", "1"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string config, header, ols, siv;
  std::getline(in, config);
  std::getline(in, header);
  std::getline(in, ols);
  std::getline(in, siv);
  CHECK(config.rfind("# ", 0) == 0);
  CHECK(ols.rfind("OLS,", 0) == 0);
  CHECK(siv.rfind("SIV,", 0) == 0);
}
