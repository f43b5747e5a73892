#pragma once

#include <span>
#include <string>
#include <vector>

#include "lnainfer/mcmc.hpp"

namespace lnainfer {

double sample_mean(std::span<const double> x);
double sample_variance(std::span<const double> x);  // n - 1 denominator

/// Linear-interpolation quantile (type 7), p in [0, 1].
double quantile(std::vector<double> x, double p);

struct EssResult {
  double ess = 1.0;
  bool degenerate = false;  // constant chain; ess pinned to 1
};

/// Effective sample size with Geyer's initial monotone sequence truncation
/// of the autocovariance sum.
EssResult effective_sample_size(std::span<const double> x);

/// Monte Carlo standard error of the chain mean, sqrt(var / ESS).
double mc_standard_error(std::span<const double> x);

/// Geweke z comparing the mean of the first 10% with the last 50%, each
/// with an ESS-based variance of its mean. Zero for degenerate segments.
double geweke_z(std::span<const double> x, double first = 0.1, double last = 0.5);

struct ChainDiagnostics {
  std::vector<std::string> names;
  std::vector<EssResult> ess;
  std::vector<double> geweke;
  std::vector<AcceptanceCounter> acceptance;
};

/// Requires at least 100 rows.
ChainDiagnostics diagnostics(const PosteriorChain& chain);

struct SummaryRow {
  std::string name;
  double median = 0.0;
  double lower = 0.0;  // 2.5%
  double upper = 0.0;  // 97.5%
  double ess = 0.0;
  double geweke_z = 0.0;
};

std::vector<SummaryRow> summarize_chain(const PosteriorChain& chain);

}  // namespace lnainfer
