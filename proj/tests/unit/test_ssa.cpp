#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "lnainfer/errors.hpp"
#include "lnainfer/lna.hpp"
#include "lnainfer/ssa.hpp"

using namespace lnainfer;

namespace {

StudyConfig translation_study(std::size_t cells, std::size_t obs) {
  StudyConfig c;
  c.experiment = Experiment::translation;
  c.cells = cells;
  c.observations = obs;
  c.kappa = 1.0;
  c.populations = {{"tau2", {3.675, 6.345}}, {"delta2", {0.576, 0.005}}, {"sigma_u2", {12.0, 3.0}}};
  c.initial = {{"phi2_0", 500.0}};
  c.seed = 17;
  return c;
}

StudyConfig transcription_study(std::size_t cells, std::size_t obs) {
  StudyConfig c;
  c.experiment = Experiment::transcription;
  c.cells = cells;
  c.observations = obs;
  c.kappa = 0.25;
  c.populations = {{"tau1", {40.0, 2.0}},
                   {"delta1", {0.2, 0.005}},
                   {"alpha", {3.5, 2.0}},
                   {"delta2", {0.576, 0.005}},
                   {"sigma_u2", {10.0, 2.0}}};
  c.initial = {{"phi1_0", 500.0}, {"phi2_0", 2000.0}};
  c.seed = 23;
  return c;
}

}  // namespace

TEST_CASE("frozen process stays at zero") {
  const std::vector<std::int64_t> x0{0};
  const std::vector<double> times{0.0, 1.0, 2.0, 5.0};
  const auto traj = simulate_ssa(ReactionNetwork::reduced(), TranslationParams{0.0, 0.576, 1.0, 1.0}, x0, times, 1);
  REQUIRE(traj.size() == 4);
  for (std::size_t i = 0; i < traj.size(); ++i) CHECK(traj.count(i, 0) == 0);
}

TEST_CASE("immigration-death stationary law is Poisson") {
  const TranslationParams p{3.675, 0.576, 0.0, 1.0};
  const std::vector<std::int64_t> x0{0};
  const std::vector<double> times{30.0};
  const int runs = 10000;
  Rng rng = make_stream(99, 0);
  double sum = 0.0, sum2 = 0.0;
  for (int r = 0; r < runs; ++r) {
    const auto traj = simulate_ssa(ReactionNetwork::reduced(), p, x0, times, rng);
    const double x = static_cast<double>(traj.count(0, 0));
    sum += x;
    sum2 += x * x;
  }
  const double lambda = p.tau2 / p.delta2;
  const double mean = sum / runs;
  const double var = (sum2 - runs * mean * mean) / (runs - 1);
  CHECK(std::abs(mean - lambda) < 3.0 * std::sqrt(lambda / runs));
  // Var of the sample variance of a Poisson law: (mu4 - sigma^4 (n-3)/(n-1)) / n.
  const double var_se = std::sqrt((lambda + 3.0 * lambda * lambda - lambda * lambda * (runs - 3.0) / (runs - 1.0)) / runs);
  CHECK(std::abs(var - lambda) < 3.0 * var_se);
}

TEST_CASE("ensemble mean of the full model follows the macroscopic solution") {
  const TranscriptionParams p{40.0, 0.2, 3.5, 0.576, 500.0, 2000.0, 1.0};
  const std::vector<std::int64_t> x0{500, 2000};
  const std::vector<double> times{0.25, 0.5, 1.0};
  const int runs = 2000;
  Rng rng = make_stream(7, 0);
  std::vector<double> sum(times.size() * 2, 0.0);
  for (int r = 0; r < runs; ++r) {
    const auto traj = simulate_ssa(ReactionNetwork::full(), p, x0, times, rng);
    for (std::size_t i = 0; i < times.size(); ++i)
      for (std::size_t s = 0; s < 2; ++s) sum[2 * i + s] += static_cast<double>(traj.count(i, s));
  }
  const auto k = LinearKinetics::from(p);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto m = solve_macroscopic(k, times[i]);
    for (std::size_t s = 0; s < 2; ++s) CHECK(std::abs(sum[2 * i + s] / runs / m.phi[s] - 1.0) < 0.02);
  }
}

TEST_CASE("measurement equation") {
  Trajectory traj;
  traj.times = {0.0, 1.0};
  traj.species = 2;
  traj.counts = {10, 2000, 12, 1800};
  const auto y = apply_measurement(traj, 0.25, 0.0, 5);
  CHECK(y[0] == 500.0);
  CHECK(y[1] == 450.0);
  const auto exact = apply_measurement(traj, 1.0, 0.0, 5);
  CHECK(exact[0] == 2000.0);

  Trajectory flat;
  flat.species = 1;
  for (int i = 0; i < 10000; ++i) {
    flat.times.push_back(i);
    flat.counts.push_back(100);
  }
  const auto noisy = apply_measurement(flat, 1.0, 9.0, 11);
  double s = 0.0, s2 = 0.0;
  for (double v : noisy) {
    s += v - 100.0;
    s2 += (v - 100.0) * (v - 100.0);
  }
  const double var = (s2 - s * s / 10000.0) / 9999.0;
  CHECK(std::abs(var / 9.0 - 1.0) < 0.05);
}

TEST_CASE("study shapes") {
  const auto tl = generate_study(translation_study(40, 59));
  CHECK(tl.cells.size() == 40);
  for (const auto& c : tl.cells) {
    CHECK(c.observations.size() == 59);
    CHECK(c.trajectory.size() == 59);
  }
  CHECK(tl.cells[0].trajectory.times[1] == doctest::Approx(1.0 / 12.0));
  const auto tc = generate_study(transcription_study(25, 88));
  CHECK(tc.cells.size() == 25);
  CHECK(tc.observations().cells[3].values.size() == 88);
  const auto tiny = generate_study(translation_study(1, 2));
  CHECK(tiny.cells.size() == 1);
  CHECK(tiny.cells[0].observations.size() == 2);
}

TEST_CASE("identical seeds give identical studies") {
  const auto a = generate_study(transcription_study(3, 20));
  const auto b = generate_study(transcription_study(3, 20));
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(a.cells[c].trajectory.counts == b.cells[c].trajectory.counts);
    CHECK(a.cells[c].observations == b.cells[c].observations);
  }
}

TEST_CASE("cell streams do not depend on the cell count") {
  const auto a = generate_study(translation_study(2, 10));
  const auto b = generate_study(translation_study(5, 10));
  CHECK(a.cells[1].observations == b.cells[1].observations);
}

TEST_CASE("invalid study configuration") {
  auto c = translation_study(2, 10);
  c.populations["tau2"] = {0.0, 1.0};
  CHECK_THROWS_AS(generate_study(c), InputError);
  c = translation_study(2, 10);
  c.populations.erase("delta2");
  CHECK_THROWS_AS(generate_study(c), InputError);
  const std::vector<std::int64_t> x0{1};
  const std::vector<double> unsorted{1.0, 0.5};
  CHECK_THROWS_AS(simulate_ssa(ReactionNetwork::reduced(), TranslationParams{1, 1, 1, 1}, x0, unsorted, 1), InputError);
}
