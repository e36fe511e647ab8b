#pragma once

// Reader for the big-endian IDX image/label container. Image files carry
// magic 0x00000803 (3-D uint8 tensor), label files 0x00000801. Pixels are
// scaled to [0,1]; labels stay integral. Malformed inputs raise a distinct
// error per failure mode.

#include <cstdint>
#include <string>

#include "vralab/datasets.hpp"
#include "vralab/errors.hpp"
#include "vralab/types.hpp"

namespace vralab::models {

struct IdxError : IoError {
  using IoError::IoError;
};
// Magic number did not match the expected container type.
struct IdxBadMagicError : IdxError {
  using IdxError::IdxError;
};
// File ended before the header or payload was complete.
struct IdxTruncatedError : IdxError {
  using IdxError::IdxError;
};
// Declared dimensions are absurd (overflow or past sane bounds).
struct IdxDimensionError : IdxError {
  using IdxError::IdxError;
};
// Paired files disagree (e.g. image and label counts differ).
struct DataMismatchError : IdxError {
  using IdxError::IdxError;
};

// n x (rows*cols) matrix of pixels in [0,1].
Matrix<double> read_idx_images(const std::string& path);

Eigen::VectorXi read_idx_labels(const std::string& path);

// Loads a paired image/label set into a Dataset.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

// Deterministic train/validation split of an IDX pair.
std::pair<Dataset, Dataset> load_idx_split(const std::string& images_path,
                                           const std::string& labels_path, double val_fraction,
                                           std::uint64_t seed);

}  // namespace vralab::models
