#pragma once

#include <span>
#include <vector>

namespace lnainfer {

struct DensityCurve {
  std::vector<double> grid;
  std::vector<double> density;
};

/// 0.9 * min(sd, IQR / 1.34) * n^(-1/5). Falls back to the standard
/// deviation when the IQR vanishes, and to 1e-3 * max(1, |x|) for a
/// constant sample.
double silverman_bandwidth(std::span<const double> x);

/// Gaussian-kernel density on `points` equally spaced values in [lo, hi].
DensityCurve kernel_density(std::span<const double> x, double lo, double hi, std::size_t points = 256);
/// Same, over the sample range widened by three bandwidths.
DensityCurve kernel_density(std::span<const double> x, std::size_t points = 256);

/// Gamma density with the given mean and variance on [lo, hi].
DensityCurve gamma_density_curve(double mean, double variance, double lo, double hi, std::size_t points = 256);

/// Average ranks (1-based), ties sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> x);
/// Pearson correlation of average ranks; 0 when either side is constant.
double spearman_correlation(std::span<const double> x, std::span<const double> y);

}  // namespace lnainfer
