#include "lnainfer/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include <complex>
#include <limits>

#include <unsupported/Eigen/FFT>

#include "lnainfer/errors.hpp"

namespace lnainfer {

namespace {

// Autocovariances c(0..n-1) with 1/n normalization, via zero-padded FFT.
std::vector<double> autocovariances(std::span<const double> x, double mean) {
  const std::size_t n = x.size();
  std::size_t len = 1;
  while (len < 2 * n) len <<= 1;
  std::vector<double> padded(len, 0.0);
  for (std::size_t i = 0; i < n; ++i) padded[i] = x[i] - mean;
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> freq;
  fft.fwd(freq, padded);
  for (auto& f : freq) f = std::norm(f);
  std::vector<double> back;
  fft.inv(back, freq);
  back.resize(n);
  for (double& v : back) v /= static_cast<double>(n);
  return back;
}

}  // namespace

double sample_mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = sample_mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

double quantile(std::vector<double> x, double p) {
  if (x.empty()) throw InputError("quantile of an empty sample");
  std::sort(x.begin(), x.end());
  const double h = (static_cast<double>(x.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

EssResult effective_sample_size(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 4) return {static_cast<double>(std::max<std::size_t>(n, 1)), n < 2};
  if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) return {1.0, true};
  const double m = sample_mean(x);
  const double nn = static_cast<double>(n);
  const auto acov = autocovariances(x, m);
  const auto autocov = [&](std::size_t lag) { return acov[lag]; };
  const double c0 = autocov(0);
  if (!(c0 > 0.0)) return {1.0, true};

  // Pair sums Gamma_k = c(2k) + c(2k+1) must be positive and are made monotone.
  double sum_pairs = 0.0;
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double gamma = autocov(2 * k) + autocov(2 * k + 1);
    if (gamma <= 0.0) break;
    gamma = std::min(gamma, previous);
    previous = gamma;
    sum_pairs += gamma;
  }
  const double tau = std::max(-1.0 + 2.0 * sum_pairs / c0, 1.0 / std::log10(nn + 10.0));
  return {std::min(nn * std::log10(nn), nn / tau), false};
}

double mc_standard_error(std::span<const double> x) {
  const auto ess = effective_sample_size(x);
  return std::sqrt(sample_variance(x) / ess.ess);
}

double geweke_z(std::span<const double> x, double first, double last) {
  const std::size_t n = x.size();
  const auto n_first = static_cast<std::size_t>(std::floor(first * static_cast<double>(n)));
  const auto n_last = static_cast<std::size_t>(std::floor(last * static_cast<double>(n)));
  if (n_first < 2 || n_last < 2) return 0.0;
  const auto a = x.subspan(0, n_first);
  const auto b = x.subspan(n - n_last, n_last);
  const double var_a = sample_variance(a) / effective_sample_size(a).ess;
  const double var_b = sample_variance(b) / effective_sample_size(b).ess;
  const double denom = std::sqrt(var_a + var_b);
  if (!(denom > 0.0)) return 0.0;
  return (sample_mean(a) - sample_mean(b)) / denom;
}

ChainDiagnostics diagnostics(const PosteriorChain& chain) {
  if (chain.rows() < 100) throw InputError("diagnostics need at least 100 stored iterations");
  ChainDiagnostics out;
  out.names = chain.names;
  out.acceptance = chain.acceptance;
  for (std::size_t j = 0; j < chain.names.size(); ++j) {
    const auto col = chain.column(j);
    out.ess.push_back(effective_sample_size(col));
    out.geweke.push_back(geweke_z(col));
  }
  return out;
}

std::vector<SummaryRow> summarize_chain(const PosteriorChain& chain) {
  std::vector<SummaryRow> rows;
  for (std::size_t j = 0; j < chain.names.size(); ++j) {
    const auto col = chain.column(j);
    if (col.empty()) continue;
    SummaryRow r;
    r.name = chain.names[j];
    r.median = quantile(col, 0.5);
    r.lower = quantile(col, 0.025);
    r.upper = quantile(col, 0.975);
    r.ess = effective_sample_size(col).ess;
    r.geweke_z = geweke_z(col);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace lnainfer
