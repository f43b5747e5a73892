#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "lnainfer/chain_io.hpp"
#include "lnainfer/commands.hpp"
#include "lnainfer/dataset_io.hpp"
#include "lnainfer/density.hpp"
#include "lnainfer/errors.hpp"

using namespace lnainfer;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("lnainfer-unit-" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string error_of(const std::string& csv) {
  std::istringstream in(csv);
  try {
    read_dataset_csv(in, TimeUnit::hours, "data.csv");
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

const char* kConfig = R"({
  "schema_version": 1,
  "experiment": "translation",
  "data": "observations.csv",
  "out": ".",
  "chain": {"iterations": 600, "burn_in": 200, "thin": 2, "seed": 5},
  "simulation": {"cells": 3, "observations": 20, "kappa": 1.0, "seed": 9,
                 "populations": {"tau2": {"mean": 3.675, "variance": 6.345},
                                 "delta2": {"mean": 0.576, "variance": 0.005},
                                 "sigma_u2": {"mean": 12, "variance": 3}},
                 "initial": {"phi2_0": 500}}
})";

}  // namespace

TEST_CASE("ingest a 40-cell file") {
  std::ostringstream csv;
  csv << "time";
  for (int c = 1; c <= 40; ++c) csv << ",cell_" << c;
  csv << '\n';
  for (int r = 0; r < 59; ++r) {
    csv << r / 12.0;
    for (int c = 1; c <= 40; ++c) {
      csv << ',';
      if (!(r == 10 && c == 7)) csv << 500.0 - r + c;
    }
    csv << '\n';
  }
  std::istringstream in(csv.str());
  const auto data = read_dataset_csv(in);
  REQUIRE(data.size() == 40);
  CHECK(data.cells[0].values.size() == 59);
  CHECK(data.cells[6].values.size() == 58);
  CHECK(data.cells[6].name == "cell_7");
  CHECK(std::find(data.cells[6].times.begin(), data.cells[6].times.end(), 10 / 12.0) == data.cells[6].times.end());
}

TEST_CASE("single-cell file and minute conversion") {
  std::istringstream in("time,a\n0,1\n5,2\n10,3\n");
  const auto data = read_dataset_csv(in, TimeUnit::minutes);
  REQUIRE(data.size() == 1);
  CHECK(data.cells[0].times[1] == doctest::Approx(5.0 / 60.0));
  CHECK(time_unit_from_string("minutes") == TimeUnit::minutes);
  CHECK_THROWS_AS(time_unit_from_string("days"), InputError);
}

TEST_CASE("ingestion errors name the row and column") {
  CHECK(error_of("time,a\n0,1\n1,x\n2,3\n").find("row 3, column 'a'") != std::string::npos);
  CHECK(error_of("time,a\n0,1\n2,2\n1,3\n").find("row 4, column 'time'") != std::string::npos);
  CHECK(error_of("time,a,b\n0,1,1\n1,2,\n2,3,3\n").find("'b'") != std::string::npos);
  CHECK(error_of("t,a\n0,1\n") != "");
  CHECK(error_of("time,a\n0,1,2\n") .find("row 2") != std::string::npos);
}

TEST_CASE("dataset round trip keeps full precision") {
  MultiCellDataset d;
  d.cells.push_back({"a", {0.0, 1.0 / 3.0, 0.7, 1.1}, {0.1, 1e-17, 123456.789012345678, std::nextafter(2.0, 3.0)}});
  d.cells.push_back({"b", {0.0, 0.7, 1.1}, {-4.0, 5.0 / 7.0, 6.0}});
  std::stringstream buf;
  write_dataset_csv(buf, d);
  const auto back = read_dataset_csv(buf);
  REQUIRE(back.size() == 2);
  for (std::size_t c = 0; c < 2; ++c) {
    CHECK(back.cells[c].name == d.cells[c].name);
    CHECK(back.cells[c].times == d.cells[c].times);
    CHECK(back.cells[c].values == d.cells[c].values);
  }
}

TEST_CASE("chain round trip") {
  PosteriorChain chain;
  chain.names = {"mu_x", "kappa"};
  chain.thin = 3;
  chain.burn_in = 10;
  chain.seed = 4;
  for (int r = 0; r < 120; ++r) {
    const std::vector<double> row{1.0 / (r + 1), std::sqrt(r + 2.0)};
    chain.append(row, -0.1 * r);
  }
  chain.acceptance = {{"x", 10, 4}};
  TempDir tmp;
  write_chain(tmp.path / "chain", chain);
  const auto back = read_chain(tmp.path / "chain.csv");
  CHECK(back.names == chain.names);
  CHECK(back.values == chain.values);
  CHECK(back.log_posterior == chain.log_posterior);
  CHECK(back.seed == 4);
  CHECK(back.thin == 3);
  const auto side = nlohmann::json::parse(slurp(tmp.path / "chain.json"));
  CHECK(side.at("schema_version") == kSchemaVersion);
  CHECK(side.at("acceptance")[0].at("rate").get<double>() == doctest::Approx(0.4));
  CHECK(side.contains("diagnostics"));
  std::istringstream csv(slurp(tmp.path / "chain.csv"));
  std::string header;
  std::getline(csv, header);
  CHECK(header == "iteration,log_posterior,mu_x,kappa");
  std::string first;
  std::getline(csv, first);
  CHECK(first.rfind("10,", 0) == 0);

  std::istringstream bad("iteration,log_posterior,a\n1,2,zz\n");
  CHECK_THROWS_AS(read_chain_csv(bad), InputError);
  std::istringstream empty("iteration,log_posterior,a\n");
  CHECK_THROWS_AS(read_chain_csv(empty), InputError);
}

TEST_CASE("summary table layout") {
  std::ostringstream out;
  write_summary_csv(out, {{"kappa", 1.0, 0.8, 1.2, 500.0, 0.3}});
  CHECK(out.str().rfind("parameter,median,lower_2.5,upper_97.5,ess,geweke_z\nkappa,1,", 0) == 0);
}

TEST_CASE("kernel density of a constant sample peaks at the constant") {
  const std::vector<double> x(300, 2.5);
  const auto curve = kernel_density(x);
  const auto peak = std::max_element(curve.density.begin(), curve.density.end()) - curve.density.begin();
  CHECK(std::abs(curve.grid[static_cast<std::size_t>(peak)] - 2.5) <= silverman_bandwidth(x));
}

TEST_CASE("kernel density integrates to one") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z;
  std::vector<double> x(2000);
  for (double& v : x) v = z(rng);
  const auto c = kernel_density(x, -8.0, 8.0, 512);
  double area = 0.0;
  for (std::size_t i = 1; i < c.grid.size(); ++i) area += 0.5 * (c.density[i] + c.density[i - 1]) * (c.grid[i] - c.grid[i - 1]);
  CHECK(area == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("gamma overlay peaks at the gamma mode") {
  const auto c = gamma_density_curve(0.57, 0.004, 0.3, 0.9, 60001);
  const auto peak = std::max_element(c.density.begin(), c.density.end()) - c.density.begin();
  CHECK(c.grid[static_cast<std::size_t>(peak)] == doctest::Approx(0.56298).epsilon(2e-5));
}

TEST_CASE("Spearman correlation") {
  const std::vector<double> x{1, 2, 3, 4, 5}, y{2, 4, 9, 16, 100}, z{5, 4, 3, 2, 1};
  CHECK(spearman_correlation(x, y) == doctest::Approx(1.0));
  CHECK(spearman_correlation(x, z) == doctest::Approx(-1.0));
  CHECK(average_ranks(std::vector<double>{3, 1, 3}) == std::vector<double>{2.5, 1.0, 2.5});
  CHECK(spearman_correlation(x, std::vector<double>(5, 1.0)) == 0.0);
}

TEST_CASE("config parsing") {
  const auto c = RunConfig::from_json(nlohmann::json::parse(kConfig), "/base");
  CHECK(c.experiment == Experiment::translation);
  CHECK(c.fit.iterations == 600);
  CHECK(c.fit.burn_in_sweeps() == 200);
  CHECK(c.data_path() == fs::path("/base/observations.csv"));
  REQUIRE(c.simulation);
  CHECK(c.simulation->cells == 3);
  CHECK(c.fit.priors.delta2_prior.has_value());
  auto j = nlohmann::json::parse(kConfig);
  j["chain"]["iteratons"] = 3;
  CHECK_THROWS_AS(RunConfig::from_json(j), InputError);
  j = nlohmann::json::parse(kConfig);
  j["experiment"] = "splicing";
  CHECK_THROWS_AS(RunConfig::from_json(j), InputError);
  j = nlohmann::json::parse(kConfig);
  j["priors"] = {{"delta2", nullptr}};
  CHECK_FALSE(RunConfig::from_json(j).fit.priors.delta2_prior.has_value());
  const auto again = RunConfig::from_json(c.to_json(), "/base");
  CHECK(again.to_json() == c.to_json());
}

TEST_CASE("simulate, fit and summarize through the command layer") {
  TempDir tmp;
  const fs::path cfg = tmp.path / "run.json";
  std::ofstream(cfg) << kConfig;
  std::ostringstream log, err;
  REQUIRE(run_command(Command::simulate, cfg, {}, log, err) == 0);
  CHECK(fs::exists(tmp.path / "observations.csv"));
  CHECK(fs::exists(tmp.path / "truth.json"));
  const auto first = slurp(tmp.path / "observations.csv");
  REQUIRE(run_command(Command::simulate, cfg, {}, log, err) == 0);
  CHECK(slurp(tmp.path / "observations.csv") == first);

  const auto data = ingest(tmp.path / "observations.csv");
  CHECK(data.size() == 3);
  CHECK(data.cells[0].values.size() == 20);

  // The truth file is itself a runnable config.
  const fs::path truth_cfg = tmp.path / "truth.json";
  REQUIRE(run_command(Command::fit, truth_cfg, {}, log, err) == 0);
  const auto summary = slurp(tmp.path / "summary.csv");
  CHECK(summary.find("mu_tau2_tilde,") != std::string::npos);
  CHECK(summary.find("cell_2.delta2,") != std::string::npos);
  REQUIRE(run_command(Command::fit, truth_cfg, {}, log, err) == 0);
  CHECK(slurp(tmp.path / "summary.csv") == summary);

  REQUIRE(run_command(Command::summarize, truth_cfg, {}, log, err) == 0);
  CHECK(fs::exists(tmp.path / "densities" / "kappa.csv"));
  CHECK(fs::exists(tmp.path / "densities" / "cell_tau2_tilde.csv"));
  CHECK(fs::exists(tmp.path / "densities" / "spearman.csv"));
  CHECK(slurp(tmp.path / "densities" / "cell_delta2.csv").find("population,") != std::string::npos);

  CommandOptions moved;
  moved.out = tmp.path / "elsewhere";
  moved.seed = 77;
  REQUIRE(run_command(Command::simulate, cfg, moved, log, err) == 0);
  CHECK(slurp(tmp.path / "elsewhere" / "observations.csv") != first);
}

TEST_CASE("command exit codes") {
  TempDir tmp;
  std::ostringstream log, err;
  CHECK(run_command(Command::fit, tmp.path / "missing.json", {}, log, err) == 2);
  const fs::path broken = tmp.path / "broken.json";
  std::ofstream(broken) << "{ not json";
  CHECK(run_command(Command::fit, broken, {}, log, err) == 2);
  const fs::path nodata = tmp.path / "nodata.json";
  std::ofstream(nodata) << R"({"experiment": "translation", "data": "absent.csv"})";
  CHECK(run_command(Command::fit, nodata, {}, log, err) == 2);
  CHECK(run_command(Command::simulate, nodata, {}, log, err) == 2);
  const fs::path badchain = tmp.path / "badchain.json";
  std::ofstream(badchain) << R"({"experiment": "translation", "chain_file": "chain.csv"})";
  std::ofstream(tmp.path / "chain.csv") << "garbage\n";
  CHECK(run_command(Command::summarize, badchain, {}, log, err) == 2);
  CHECK(err.str().find("error:") != std::string::npos);
}
