#include "lnainfer/density.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/gamma.hpp>

#include "lnainfer/diagnostics.hpp"
#include "lnainfer/errors.hpp"

namespace lnainfer {

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return g;
}

}  // namespace

double silverman_bandwidth(std::span<const double> x) {
  if (x.empty()) throw InputError("bandwidth of an empty sample");
  const auto n = static_cast<double>(x.size());
  const double sd = x.size() > 1 ? std::sqrt(sample_variance(x)) : 0.0;
  std::vector<double> v(x.begin(), x.end());
  const double iqr = quantile(v, 0.75) - quantile(v, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd;
  if (!(spread > 0.0)) return 1e-3 * std::max(1.0, std::abs(x[0]));
  return 0.9 * spread * std::pow(n, -0.2);
}

DensityCurve kernel_density(std::span<const double> x, double lo, double hi, std::size_t points) {
  if (x.empty()) throw InputError("density of an empty sample");
  if (!(hi > lo) || points < 2) throw InputError("density grid needs hi > lo and at least 2 points");
  const double h = silverman_bandwidth(x);
  DensityCurve c{linspace(lo, hi, points), std::vector<double>(points, 0.0)};
  const double norm = 1.0 / (static_cast<double>(x.size()) * h * std::sqrt(2.0 * M_PI));
  for (std::size_t g = 0; g < points; ++g) {
    double s = 0.0;
    for (double xi : x) {
      const double z = (c.grid[g] - xi) / h;
      s += std::exp(-0.5 * z * z);
    }
    c.density[g] = s * norm;
  }
  return c;
}

DensityCurve kernel_density(std::span<const double> x, std::size_t points) {
  if (x.empty()) throw InputError("density of an empty sample");
  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  const double h = silverman_bandwidth(x);
  return kernel_density(x, *mn - 3.0 * h, *mx + 3.0 * h, points);
}

DensityCurve gamma_density_curve(double mean, double variance, double lo, double hi, std::size_t points) {
  if (!(mean > 0.0) || !(variance > 0.0)) throw InputError("gamma curve needs positive mean and variance");
  if (!(hi > lo) || points < 2) throw InputError("density grid needs hi > lo and at least 2 points");
  const boost::math::gamma_distribution<double> law(mean * mean / variance, variance / mean);
  DensityCurve c{linspace(lo, hi, points), std::vector<double>(points, 0.0)};
  for (std::size_t g = 0; g < points; ++g) {
    if (c.grid[g] > 0.0) c.density[g] = boost::math::pdf(law, c.grid[g]);
  }
  return c;
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InputError("Spearman correlation needs samples of equal length");
  if (x.size() < 2) return 0.0;
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double mx = sample_mean(rx);
  const double my = sample_mean(ry);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace lnainfer
