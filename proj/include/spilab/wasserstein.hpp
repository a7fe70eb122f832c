// Exact 1-Wasserstein distance between discrete distributions on a common
// finite metric space, by the transportation simplex.

#pragma once

#include <span>
#include <vector>

namespace spilab {

/// Largest support size accepted by the transportation solver. Instances in
/// this lab are tiny; the cap keeps worst-case pivoting negligible.
inline constexpr int kMaxWassersteinSupport = 64;

/// W(mu, nu) under ground costs cost[i * n + j] (row-major n x n, nonnegative,
/// zero diagonal). mu and nu must be probability vectors of length n with
/// n <= kMaxWassersteinSupport. Exact up to linear-arithmetic rounding.
double wasserstein(std::span<const double> mu, std::span<const double> nu,
                   const std::vector<double>& cost, int n);

/// Total variation distance (1/2) * sum |mu - nu|; equals wasserstein under
/// the discrete metric.
double total_variation(std::span<const double> mu, std::span<const double> nu);

}  // namespace spilab
