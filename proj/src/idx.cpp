#include "vralab/idx.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <vector>

namespace vralab::models {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;
constexpr std::uint64_t kMaxElements = 1ULL << 31;  // sanity bound on any payload

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for '" + path + "'");
  return bytes;
}

std::uint32_t read_u32_be(const std::vector<unsigned char>& b, std::size_t off,
                          const std::string& path) {
  if (off + 4 > b.size())
    throw IdxTruncatedError("'" + path + "': truncated at byte " + std::to_string(off));
  return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16) |
         (std::uint32_t(b[off + 2]) << 8) | std::uint32_t(b[off + 3]);
}

void check_magic(const std::vector<unsigned char>& b, std::uint32_t expected,
                 const std::string& path) {
  const std::uint32_t magic = read_u32_be(b, 0, path);
  if (magic != expected) {
    char found[16];
    std::snprintf(found, sizeof(found), "0x%08x", magic);
    throw IdxBadMagicError("'" + path + "': bad magic " + found + " at offset 0");
  }
}

}  // namespace

Matrix<double> read_idx_images(const std::string& path) {
  const auto bytes = read_file(path);
  check_magic(bytes, kImagesMagic, path);
  const std::uint64_t count = read_u32_be(bytes, 4, path);
  const std::uint64_t rows = read_u32_be(bytes, 8, path);
  const std::uint64_t cols = read_u32_be(bytes, 12, path);
  if (rows == 0 || cols == 0 || rows > kMaxElements || cols > kMaxElements ||
      count > kMaxElements || rows * cols > kMaxElements ||
      count * (rows * cols) > kMaxElements)
    throw IdxDimensionError("'" + path + "': image dimensions " + std::to_string(count) + "x" +
                            std::to_string(rows) + "x" + std::to_string(cols) + " out of range");
  const std::uint64_t payload = count * (rows * cols);
  if (bytes.size() < 16 + payload)
    throw IdxTruncatedError("'" + path + "': payload needs " + std::to_string(16 + payload) +
                            " bytes, file has " + std::to_string(bytes.size()));

  Matrix<double> images(static_cast<Index>(count), static_cast<Index>(rows * cols));
  std::size_t off = 16;
  for (Index i = 0; i < images.rows(); ++i)
    for (Index j = 0; j < images.cols(); ++j) images(i, j) = bytes[off++] / 255.0;
  return images;
}

Eigen::VectorXi read_idx_labels(const std::string& path) {
  const auto bytes = read_file(path);
  check_magic(bytes, kLabelsMagic, path);
  const std::uint64_t count = read_u32_be(bytes, 4, path);
  if (count > kMaxElements)
    throw IdxDimensionError("'" + path + "': label count " + std::to_string(count) + " out of range");
  if (bytes.size() < 8 + count)
    throw IdxTruncatedError("'" + path + "': payload needs " + std::to_string(8 + count) +
                            " bytes, file has " + std::to_string(bytes.size()));
  Eigen::VectorXi labels(static_cast<Index>(count));
  for (Index i = 0; i < labels.size(); ++i) labels[i] = bytes[8 + static_cast<std::size_t>(i)];
  return labels;
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  Dataset ds;
  ds.inputs = read_idx_images(images_path);
  ds.labels = read_idx_labels(labels_path);
  if (ds.inputs.rows() != ds.labels.size())
    throw DataMismatchError("'" + images_path + "' has " + std::to_string(ds.inputs.rows()) +
                            " images but '" + labels_path + "' has " +
                            std::to_string(ds.labels.size()) + " labels");
  return ds;
}

std::pair<Dataset, Dataset> load_idx_split(const std::string& images_path,
                                           const std::string& labels_path, double val_fraction,
                                           std::uint64_t seed) {
  return split_dataset(load_idx(images_path, labels_path), val_fraction, seed);
}

}  // namespace vralab::models
