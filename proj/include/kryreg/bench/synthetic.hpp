#pragma once

#include "kryreg/dataset.hpp"
#include "kryreg/error.hpp"
#include "kryreg/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace kryreg::bench {

/// Standard deviation of the additive target noise (variance 0.01).
inline constexpr double kTargetNoiseStd = 0.1;
inline constexpr int kTargetBumps = 3;
/// Grid fields: many narrow bumps so the field has structure at a few grid spacings.
inline constexpr int kFieldBumps = 40;
inline constexpr double kFieldNoiseStd = 0.05;

namespace detail {

struct Bump {
  Vector center;
  double width;
  double amplitude;
};

inline std::vector<Bump> seeded_bumps(int count, Index d, std::uint64_t seed, double min_width = 0.15,
                                      double width_span = 0.25) {
  std::mt19937_64 gen(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Bump> bumps;
  for (int b = 0; b < count; ++b) {
    Bump bump{Vector(d), 0.0, 0.0};
    for (Index k = 0; k < d; ++k) bump.center(k) = unit(gen);
    bump.width = min_width + width_span * unit(gen);
    bump.amplitude = (unit(gen) < 0.5 ? -1.0 : 1.0) * (0.5 + 1.5 * unit(gen));
    bumps.push_back(std::move(bump));
  }
  return bumps;
}

inline double eval_bumps(const std::vector<Bump>& bumps, const Eigen::Ref<const Vector>& x) {
  double f = 0.0;
  for (const Bump& b : bumps)
    f += b.amplitude * std::exp(-(x - b.center).squaredNorm() / (2.0 * b.width * b.width));
  return f;
}

}  // namespace detail

/// n points i.i.d. uniform on [0,1]^d. With targets, y is a sum of three
/// seeded Gaussian bumps plus N(0, 0.01) noise. Same seed, same bytes.
inline Dataset generate_synthetic(Index n, Index d, std::uint64_t seed, bool with_targets = false) {
  if (n < 1 || d < 1) throw InvalidInput("generate_synthetic: n and d must be >= 1");
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix pts(d, n);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < d; ++k) pts(k, i) = unit(gen);
  if (!with_targets) return Dataset(std::move(pts));

  const auto bumps = detail::seeded_bumps(kTargetBumps, d, seed);
  std::mt19937_64 noise_gen(seed + 0x51ed2701ULL);
  std::normal_distribution<double> noise(0.0, kTargetNoiseStd);
  Vector y(n);
  for (Index i = 0; i < n; ++i) y(i) = detail::eval_bumps(bumps, pts.col(i)) + noise(noise_gen);
  return Dataset(std::move(pts), std::move(y));
}

/// A field of many narrow bumps plus noise, sampled on a regular nx x ny
/// grid over [0,1]^2, with a seeded fraction of cells marked missing.
struct GridField {
  Index nx = 0;
  Index ny = 0;
  /// Every cell, with the true field value as target.
  Dataset all;
  /// missing[i] is true for cells that are not observed.
  std::vector<bool> missing;

  Dataset observed() const { return select(false); }
  /// Missing cells with their true values, for scoring interpolation.
  Dataset held_out() const { return select(true); }

 private:
  Dataset select(bool want_missing) const {
    std::vector<Index> idx;
    for (Index i = 0; i < all.n(); ++i)
      if (missing[static_cast<std::size_t>(i)] == want_missing) idx.push_back(i);
    return all.subset(idx);
  }
};

inline GridField generate_grid_field(Index nx, Index ny, double missing_fraction, std::uint64_t seed) {
  if (nx < 2 || ny < 2) throw InvalidInput("generate_grid_field: grid must be at least 2 x 2");
  if (!(missing_fraction >= 0.0 && missing_fraction < 1.0))
    throw InvalidInput("generate_grid_field: missing fraction must be in [0, 1)");
  const auto bumps = detail::seeded_bumps(kFieldBumps, 2, seed, 0.04, 0.08);
  std::mt19937_64 gen(seed + 0x6d15517ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, kFieldNoiseStd);

  GridField g;
  g.nx = nx;
  g.ny = ny;
  Matrix pts(2, nx * ny);
  Vector y(nx * ny);
  g.missing.resize(static_cast<std::size_t>(nx * ny));
  for (Index iy = 0; iy < ny; ++iy) {
    for (Index ix = 0; ix < nx; ++ix) {
      const Index i = iy * nx + ix;
      pts(0, i) = static_cast<double>(ix) / static_cast<double>(nx - 1);
      pts(1, i) = static_cast<double>(iy) / static_cast<double>(ny - 1);
      y(i) = detail::eval_bumps(bumps, pts.col(i)) + noise(gen);
      g.missing[static_cast<std::size_t>(i)] = unit(gen) < missing_fraction;
    }
  }
  g.all = Dataset(std::move(pts), std::move(y));
  return g;
}

/// Seeded split into (train, test) with round(fraction * n) training points.
inline std::pair<Dataset, Dataset> train_test_split(const Dataset& data, double train_fraction,
                                                    std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0))
    throw InvalidInput("train_test_split: fraction must be in (0, 1]");
  std::vector<Index> idx(static_cast<std::size_t>(data.n()));
  for (Index i = 0; i < data.n(); ++i) idx[static_cast<std::size_t>(i)] = i;
  std::mt19937_64 gen(seed);
  std::shuffle(idx.begin(), idx.end(), gen);
  const auto ntrain = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(data.n())));
  std::vector<Index> tr(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(ntrain));
  std::vector<Index> te(idx.begin() + static_cast<std::ptrdiff_t>(ntrain), idx.end());
  std::sort(tr.begin(), tr.end());
  std::sort(te.begin(), te.end());
  return {data.subset(tr), data.subset(te)};
}

}  // namespace kryreg::bench
