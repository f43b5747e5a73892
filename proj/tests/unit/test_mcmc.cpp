#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "lnainfer/diagnostics.hpp"
#include "lnainfer/errors.hpp"
#include "lnainfer/mcmc.hpp"

using namespace lnainfer;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double std_normal(std::span<const double> x) { return -0.5 * x[0] * x[0]; }

double gamma_2_half(std::span<const double> x) {
  // mean 2, variance 0.5: shape 8, scale 0.25
  if (!(x[0] > 0.0)) return kNegInf;
  return 7.0 * std::log(x[0]) - x[0] / 0.25;
}

double bimodal(std::span<const double> x) {
  const double a = std::exp(-0.5 * (x[0] + 2.0) * (x[0] + 2.0));
  const double b = 0.7 * std::exp(-(x[0] - 2.0) * (x[0] - 2.0));
  return std::log(a + b);
}

BlockProposal scalar_block(double step, bool log_scale) {
  const std::vector<double> steps{step};
  return BlockProposal::diagonal({0}, {log_scale}, steps);
}

enum class Kernel { mh, mtm };

std::vector<double> run_chain(const LogDensity& target, double start, const BlockProposal& proposal, Kernel kernel,
                              std::size_t n, std::uint64_t seed, double* acceptance = nullptr) {
  Rng rng = make_stream(seed, 0);
  std::vector<double> state{start};
  double lp = target(state);
  std::vector<double> out;
  out.reserve(n);
  std::size_t accepted = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const StepResult r = kernel == Kernel::mh ? mh_step(state, lp, target, proposal, rng)
                                              : mtm_antithetic_step(state, lp, target, proposal, 4, -1.0 / 3.0, rng);
    lp = r.log_target;
    accepted += r.accepted;
    out.push_back(state[0]);
  }
  if (acceptance != nullptr) *acceptance = static_cast<double>(accepted) / static_cast<double>(n);
  return out;
}

std::size_t bin(double x) { return x < -1.0 ? 0 : (x < 1.0 ? 1 : 2); }

}  // namespace

TEST_CASE("vanishing proposal steps are always accepted") {
  Rng rng = make_stream(1, 0);
  std::vector<double> state{0.3};
  const auto proposal = scalar_block(1e-300, false);
  for (int i = 0; i < 200; ++i) CHECK(mh_step(state, std_normal(state), std_normal, proposal, rng).accepted);
}

TEST_CASE("random-walk acceptance on a standard normal") {
  double acc = 0.0;
  run_chain(std_normal, 0.0, scalar_block(2.38, false), Kernel::mh, 50000, 2, &acc);
  CHECK(acc > 0.35);
  CHECK(acc < 0.55);
}

TEST_CASE("log-scale random walk reproduces gamma moments") {
  const auto x = run_chain(gamma_2_half, 2.0, scalar_block(0.5, true), Kernel::mh, 50000, 3);
  CHECK(std::abs(sample_mean(x) - 2.0) < 3.0 * mc_standard_error(x));
  std::vector<double> sq(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) sq[i] = (x[i] - 2.0) * (x[i] - 2.0);
  CHECK(std::abs(sample_mean(sq) - 0.5) < 3.0 * mc_standard_error(sq));
}

TEST_CASE("multiple-try Metropolis on a standard normal") {
  const auto x = run_chain(std_normal, 0.0, scalar_block(2.38, false), Kernel::mtm, 50000, 4);
  CHECK(std::abs(sample_mean(x)) < 3.0 * mc_standard_error(x));
  std::vector<double> sq(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) sq[i] = x[i] * x[i];
  CHECK(std::abs(sample_mean(sq) - 1.0) < 3.0 * mc_standard_error(sq));
}

TEST_CASE("multiple-try Metropolis on a log-scale gamma target") {
  const auto x = run_chain(gamma_2_half, 1.0, scalar_block(0.5, true), Kernel::mtm, 50000, 5);
  CHECK(std::abs(sample_mean(x) - 2.0) < 3.0 * mc_standard_error(x));
}

TEST_CASE("multiple tries mix at least as well as one") {
  std::vector<double> mh, mtm;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    mh.push_back(effective_sample_size(run_chain(std_normal, 0.0, scalar_block(2.38, false), Kernel::mh, 5000, 100 + seed)).ess);
    mtm.push_back(effective_sample_size(run_chain(std_normal, 0.0, scalar_block(2.38, false), Kernel::mtm, 5000, 100 + seed)).ess);
  }
  std::nth_element(mh.begin(), mh.begin() + 5, mh.end());
  std::nth_element(mtm.begin(), mtm.begin() + 5, mtm.end());
  CHECK(mtm[5] >= mh[5]);
}

TEST_CASE("both kernels satisfy detailed balance between regions") {
  for (Kernel kernel : {Kernel::mh, Kernel::mtm}) {
    const auto x = run_chain(bimodal, 0.0, scalar_block(1.5, false), kernel, 1000000, 6);
    std::array<std::array<double, 3>, 3> n{};
    for (std::size_t i = 1; i < x.size(); ++i) n[bin(x[i - 1])][bin(x[i])] += 1.0;
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t b = a + 1; b < 3; ++b) {
        CHECK(n[a][b] > 100.0);
        CHECK(std::abs(n[a][b] - n[b][a]) <= 3.0 * std::sqrt(n[a][b] + n[b][a]));
      }
    }
  }
}

TEST_CASE("identical seeds give identical chains") {
  for (Kernel kernel : {Kernel::mh, Kernel::mtm}) {
    const auto a = run_chain(gamma_2_half, 1.0, scalar_block(0.4, true), kernel, 2000, 9);
    const auto b = run_chain(gamma_2_half, 1.0, scalar_block(0.4, true), kernel, 2000, 9);
    CHECK(a == b);
  }
}

TEST_CASE("kernel preconditions") {
  Rng rng = make_stream(1, 0);
  std::vector<double> state{-1.0};
  const auto proposal = scalar_block(0.1, true);
  CHECK_THROWS_AS(mh_step(state, kNegInf, gamma_2_half, proposal, rng), std::logic_error);
  state = {1.0};
  CHECK_THROWS_AS(mtm_antithetic_step(state, gamma_2_half(state), gamma_2_half, proposal, 1, 0.0, rng), InputError);
  CHECK(default_antithetic_rho(4) == doctest::Approx(-1.0 / 3.0));
  const std::vector<double> zero{0.0};
  CHECK_THROWS_AS(BlockProposal::diagonal({0}, {false}, zero), InputError);
}

TEST_CASE("tries outside the support are rejected") {
  const LogDensity wall = [](std::span<const double> x) { return x[0] <= 0.0 ? 0.0 : kNegInf; };
  Rng rng = make_stream(2, 0);
  std::vector<double> state{-10.0};
  const auto proposal = scalar_block(1e-3, false);
  for (int i = 0; i < 50; ++i) {
    state = {0.0};
    const auto r = mtm_antithetic_step(state, 0.0, wall, proposal, 4, -1.0 / 3.0, rng);
    if (!r.accepted) CHECK(state[0] == 0.0);
    CHECK(state[0] <= 0.0);
  }
}

TEST_CASE("step-size adaptation rule") {
  CHECK(adapt_step_size(0.7, 0.44, 0.44, 3) == 0.7);
  CHECK(adapt_step_size(0.7, 0.0, 0.44, 3) < 0.7);
  CHECK(adapt_step_size(0.7, 1.0, 0.25, 3) > 0.7);
}

TEST_CASE("adapted acceptance lands near its target and freezes") {
  AdaptationConfig cfg;
  cfg.freeze = 5000;
  BlockProposal proposal = scalar_block(20.0, false);
  StepSizeAdapter adapter(1);
  Rng rng = make_stream(12, 0);
  std::vector<double> state{0.0};
  double lp = std_normal(state);
  std::size_t accepted = 0;
  double frozen_scale = 0.0;
  for (std::size_t sweep = 0; sweep < 10000; ++sweep) {
    const auto r = mh_step(state, lp, std_normal, proposal, rng);
    lp = r.log_target;
    adapter.record(r.accepted);
    adapter.end_sweep(sweep, cfg, proposal.scale);
    if (sweep + 1 == cfg.freeze) {
      CHECK(adapter.frozen());
      frozen_scale = proposal.scale;
    }
    if (sweep >= cfg.freeze) {
      accepted += r.accepted;
      CHECK(proposal.scale == frozen_scale);
    }
  }
  const double rate = static_cast<double>(accepted) / 5000.0;
  CHECK(std::abs(rate - cfg.target_scalar) < 0.1);
}

TEST_CASE("effective sample size") {
  Rng rng = make_stream(13, 0);
  std::vector<double> iid(20000);
  for (double& v : iid) v = standard_normal(rng);
  CHECK(std::abs(effective_sample_size(iid).ess / 20000.0 - 1.0) < 0.2);

  const std::vector<double> constant(500, 3.0);
  const auto c = effective_sample_size(constant);
  CHECK(c.ess == 1.0);
  CHECK(c.degenerate);

  std::vector<double> ar(200000);
  double x = 0.0;
  for (double& v : ar) {
    x = 0.9 * x + standard_normal(rng);
    v = x;
  }
  const double ratio = effective_sample_size(ar).ess / static_cast<double>(ar.size());
  CHECK(std::abs(ratio / (0.1 / 1.9) - 1.0) < 0.3);
}

TEST_CASE("Geweke statistic") {
  Rng rng = make_stream(14, 0);
  std::vector<double> iid(5000), trend(5000);
  for (std::size_t i = 0; i < iid.size(); ++i) {
    iid[i] = standard_normal(rng);
    trend[i] = iid[i] + 3.0 * static_cast<double>(i) / 5000.0;
  }
  CHECK(std::abs(geweke_z(iid)) < 3.0);
  CHECK(std::abs(geweke_z(trend)) > 3.0);
  CHECK(geweke_z(std::vector<double>(1000, 1.0)) == 0.0);
}

TEST_CASE("quantiles and summaries") {
  CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 0.5) == 2.5);
  CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 0.0) == 1.0);
  CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 1.0) == 4.0);
  PosteriorChain chain;
  chain.names = {"a", "b"};
  for (int i = 0; i < 1001; ++i) {
    const std::vector<double> row{static_cast<double>(i), 7.0};
    chain.append(row, 0.0);
  }
  const auto rows = summarize_chain(chain);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].median == 500.0);
  CHECK(rows[0].lower == doctest::Approx(25.0));
  CHECK(rows[0].upper == doctest::Approx(975.0));
  CHECK(rows[1].median == 7.0);
  CHECK(rows[1].ess == 1.0);
  PosteriorChain short_chain;
  short_chain.names = {"a"};
  const std::vector<double> one{1.0};
  short_chain.append(one, 0.0);
  CHECK_THROWS_AS(diagnostics(short_chain), InputError);
}
