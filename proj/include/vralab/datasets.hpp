#pragma once

// Synthetic desk-scale datasets and batching. Every generator standardizes
// features (zero mean, unit variance per column) and is fully determined by
// its seed.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "vralab/rng.hpp"
#include "vralab/types.hpp"

namespace vralab::models {

struct Dataset {
  Matrix<double> inputs;        // one row per sample
  Eigen::VectorXi labels;       // integer class per sample
  Index size() const { return inputs.rows(); }
  int num_classes() const { return labels.size() == 0 ? 0 : labels.maxCoeff() + 1; }
};

inline void standardize(Dataset& ds) {
  for (Index c = 0; c < ds.inputs.cols(); ++c) {
    const double mean = ds.inputs.col(c).mean();
    const double var =
        (ds.inputs.col(c).array() - mean).square().sum() / static_cast<double>(ds.inputs.rows());
    const double sd = std::sqrt(var);
    ds.inputs.col(c) = (ds.inputs.col(c).array() - mean) / (sd > 1e-12 ? sd : 1.0);
  }
}

namespace detail {
inline Dataset shuffle_rows(Dataset ds, Rng& rng) {
  const auto perm = random_permutation(rng, ds.size());
  Dataset out;
  out.inputs.resize(ds.inputs.rows(), ds.inputs.cols());
  out.labels.resize(ds.labels.size());
  for (Index i = 0; i < ds.size(); ++i) {
    out.inputs.row(i) = ds.inputs.row(perm[static_cast<std::size_t>(i)]);
    out.labels[i] = ds.labels[perm[static_cast<std::size_t>(i)]];
  }
  return out;
}
}  // namespace detail

// Isotropic Gaussian blobs (sigma 1) with class centers spread on a circle of
// radius 10 in the first two coordinates, so classes stay well separated.
// Class counts are balanced to within one sample.
inline Dataset make_blobs(Index n, int classes, Index dim, std::uint64_t seed) {
  if (n <= 0 || classes < 2 || dim < 1) throw std::invalid_argument("make_blobs: bad shape");
  Rng rng(seed);
  Matrix<double> centers = Matrix<double>::Zero(classes, dim);
  for (int c = 0; c < classes; ++c) {
    const double angle = 2.0 * std::numbers::pi * c / classes;
    centers(c, 0) = 10.0 * std::cos(angle);
    if (dim > 1) centers(c, 1) = 10.0 * std::sin(angle);
  }
  Dataset ds;
  ds.inputs.resize(n, dim);
  ds.labels.resize(n);
  for (Index i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % classes);
    ds.labels[i] = c;
    for (Index j = 0; j < dim; ++j) ds.inputs(i, j) = centers(c, j) + standard_normal(rng);
  }
  ds = detail::shuffle_rows(std::move(ds), rng);
  standardize(ds);
  return ds;
}

// Two interleaving half circles with Gaussian jitter.
inline Dataset make_two_moons(Index n, double noise, std::uint64_t seed) {
  if (n <= 0) throw std::invalid_argument("make_two_moons: n must be positive");
  if (noise < 0.0) throw std::invalid_argument("make_two_moons: noise must be nonnegative");
  Rng rng(seed);
  Dataset ds;
  ds.inputs.resize(n, 2);
  ds.labels.resize(n);
  const Index n_outer = n - n / 2;
  for (Index i = 0; i < n; ++i) {
    const bool outer = i < n_outer;
    const Index k = outer ? i : i - n_outer;
    const Index m = outer ? n_outer : n / 2;
    const double t = std::numbers::pi * static_cast<double>(k) / static_cast<double>(std::max<Index>(m - 1, 1));
    double x = outer ? std::cos(t) : 1.0 - std::cos(t);
    double y = outer ? std::sin(t) : 0.5 - std::sin(t);
    ds.inputs(i, 0) = x + noise * standard_normal(rng);
    ds.inputs(i, 1) = y + noise * standard_normal(rng);
    ds.labels[i] = outer ? 0 : 1;
  }
  ds = detail::shuffle_rows(std::move(ds), rng);
  standardize(ds);
  return ds;
}

// Deterministic split into (kept, held_out) with `held_out_fraction` of rows.
inline std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, double held_out_fraction,
                                                 std::uint64_t seed) {
  if (!(held_out_fraction >= 0.0 && held_out_fraction < 1.0))
    throw std::invalid_argument("split_dataset: fraction must lie in [0,1)");
  Rng rng(seed);
  const auto perm = random_permutation(rng, ds.size());
  const Index n_held = static_cast<Index>(std::llround(held_out_fraction * static_cast<double>(ds.size())));
  const Index n_kept = ds.size() - n_held;
  Dataset kept, held;
  kept.inputs.resize(n_kept, ds.inputs.cols());
  kept.labels.resize(n_kept);
  held.inputs.resize(n_held, ds.inputs.cols());
  held.labels.resize(n_held);
  for (Index i = 0; i < n_kept; ++i) {
    kept.inputs.row(i) = ds.inputs.row(perm[static_cast<std::size_t>(i)]);
    kept.labels[i] = ds.labels[perm[static_cast<std::size_t>(i)]];
  }
  for (Index i = 0; i < n_held; ++i) {
    held.inputs.row(i) = ds.inputs.row(perm[static_cast<std::size_t>(n_kept + i)]);
    held.labels[i] = ds.labels[perm[static_cast<std::size_t>(n_kept + i)]];
  }
  return {std::move(kept), std::move(held)};
}

// Shuffled minibatch index lists for one epoch. The shuffle is keyed by
// (seed, epoch); the final partial batch is kept.
inline std::vector<std::vector<Index>> minibatches(Index n, Index batch_size, std::uint64_t seed,
                                                   long epoch) {
  if (n <= 0) throw std::invalid_argument("minibatches: empty dataset");
  if (batch_size <= 0) throw std::invalid_argument("minibatches: batch_size must be positive");
  Rng rng(mix_seed(seed, static_cast<std::uint64_t>(epoch)));
  const auto perm = random_permutation(rng, n);
  std::vector<std::vector<Index>> batches;
  for (Index start = 0; start < n; start += batch_size) {
    const Index stop = std::min(n, start + batch_size);
    batches.emplace_back(perm.begin() + start, perm.begin() + stop);
  }
  return batches;
}

inline std::vector<std::vector<Index>> minibatches(const Dataset& ds, Index batch_size,
                                                   std::uint64_t seed, long epoch) {
  return minibatches(ds.size(), batch_size, seed, epoch);
}

}  // namespace vralab::models
