#pragma once

// Exact joint Gaussian sampling of the stochastic convolution on a finite
// point set: dense Cholesky factor of the Gram matrix (with a small jitter
// ladder for rank-deficient inputs) applied to per-replicate normal streams.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fracfield/covariance.hpp"
#include "fracfield/parallel.hpp"
#include "fracfield/rng.hpp"

namespace fracfield {

struct PsdFactor {
  std::vector<SpaceTimePoint> points;
  std::vector<double> lower;  // row-major n x n, zero above the diagonal
  double jitter_used = 0.0;

  std::size_t size() const noexcept { return points.size(); }
  double operator()(std::size_t i, std::size_t j) const { return lower[i * points.size() + j]; }
};

namespace detail {

// In-place Cholesky of a + jitter*I. Returns false on a non-positive pivot.
inline bool try_cholesky(const std::vector<double>& a, std::size_t n, double jitter,
                         double pivot_floor, std::vector<double>& l) {
  l.assign(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double ajj = a[j * n + j];
    if (ajj == 0.0 && jitter == 0.0) {
      continue;  // degenerate variable; its row was checked to be zero
    }
    double pivot = ajj + jitter;
    const double* lj = &l[j * n];
    for (std::size_t k = 0; k < j; ++k) pivot -= lj[k] * lj[k];
    if (!(pivot > pivot_floor)) return false;
    const double ljj = std::sqrt(pivot);
    l[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      const double* li = &l[i * n];
      for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
      l[i * n + j] = s / ljj;
    }
  }
  return true;
}

}  // namespace detail

/// Lower-triangular factor of a covariance matrix. Plain Cholesky first; on
/// failure a diagonal jitter of 1e-12 * max_diag is added and escalated by 10x
/// per retry up to 1e-6 * max_diag. Throws NotPsd when the ladder runs out.
inline PsdFactor factor_psd(const CovarianceMatrix& cov) {
  const std::size_t n = cov.size();
  if (n == 0) throw ValidationError("factor_psd needs a nonempty matrix");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double a = cov(i, j), b = cov(j, i);
      if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a))) {
        throw ValidationError("factor_psd needs a symmetric matrix");
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (cov(i, i) < 0.0) throw NotPsd("negative variance on the diagonal");
    if (cov(i, i) == 0.0) {
      for (std::size_t j = 0; j < n; ++j) {
        if (cov(i, j) != 0.0) throw NotPsd("zero variance with nonzero covariance");
      }
    }
  }
  PsdFactor f;
  f.points = cov.points;
  const double max_diag = cov.max_diagonal();
  if (max_diag == 0.0) {
    f.lower.assign(n * n, 0.0);
    return f;
  }
  const double floor = 1e-14 * max_diag;
  if (detail::try_cholesky(cov.entries, n, 0.0, floor, f.lower)) return f;
  for (double scale = 1e-12; scale <= 1e-6 * (1.0 + 1e-9); scale *= 10.0) {
    if (detail::try_cholesky(cov.entries, n, scale * max_diag, 0.0, f.lower)) {
      f.jitter_used = scale * max_diag;
      return f;
    }
  }
  throw NotPsd("covariance matrix is not positive semidefinite even with jitter 1e-6 * max_diag");
}

/// One replicate L z with z drawn from the replicate's own stream.
inline std::vector<double> sample_replicate(const PsdFactor& factor, std::uint64_t master_seed,
                                            std::uint64_t index) {
  const std::size_t n = factor.size();
  NormalStream normal(replicate_stream(master_seed, index));
  std::vector<double> z(n);
  for (auto& v : z) v = normal();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* li = &factor.lower[i * n];
    double s = 0.0;
    for (std::size_t k = 0; k <= i; ++k) s += li[k] * z[k];
    out[i] = s;
  }
  return out;
}

struct FieldSample {
  std::vector<SpaceTimePoint> points;
  std::size_t n_replicates = 0;
  std::uint64_t master_seed = 0;
  std::vector<double> values;  // row-major n_replicates x n_points

  double operator()(std::size_t r, std::size_t i) const { return values[r * points.size() + i]; }
};

inline FieldSample sample_field(const PsdFactor& factor, std::uint64_t master_seed,
                                std::size_t n_replicates, unsigned threads = 1) {
  if (n_replicates < 1) throw ValidationError("sample_field needs at least one replicate");
  FieldSample s;
  s.points = factor.points;
  s.n_replicates = n_replicates;
  s.master_seed = master_seed;
  const std::size_t n = factor.size();
  s.values.assign(n_replicates * n, 0.0);
  parallel_for(n_replicates, threads, [&](std::size_t r) {
    const auto row = sample_replicate(factor, master_seed, r);
    std::copy(row.begin(), row.end(), s.values.begin() + static_cast<std::ptrdiff_t>(r * n));
  });
  return s;
}

}  // namespace fracfield
