#pragma once

// Small fully connected network over flat parameters, with explicit
// backpropagation. Layer i maps l[i] -> l[i+1] features; hidden layers are
// activated, the output layer is linear. Parameters pack as
// [W1 | b1 | W2 | b2 | ...] with each W stored column-major as an
// (out x in) matrix. Weights start Glorot-uniform, biases at zero.

#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "vralab/datasets.hpp"
#include "vralab/objectives.hpp"
#include "vralab/rng.hpp"
#include "vralab/types.hpp"

namespace vralab::models {

enum class Activation { ReLU, Tanh };
enum class Loss { CrossEntropy, MSE };

struct MlpSpec {
  std::vector<int> layer_sizes;  // [inputs, hidden..., outputs]
  Activation activation = Activation::ReLU;
  Loss loss = Loss::CrossEntropy;
  std::uint64_t init_seed = 0;
};

inline void validate(const MlpSpec& spec) {
  if (spec.layer_sizes.size() < 2)
    throw std::invalid_argument("mlp: need at least input and output layers");
  for (int w : spec.layer_sizes)
    if (w < 1) throw std::invalid_argument("mlp: layer sizes must be positive");
}

inline Index param_count(const MlpSpec& spec) {
  validate(spec);
  Index count = 0;
  for (std::size_t i = 0; i + 1 < spec.layer_sizes.size(); ++i)
    count += Index(spec.layer_sizes[i]) * spec.layer_sizes[i + 1] + spec.layer_sizes[i + 1];
  return count;
}

inline Vector<double> mlp_init(const MlpSpec& spec) {
  validate(spec);
  Vector<double> theta = Vector<double>::Zero(param_count(spec));
  Rng rng(spec.init_seed);
  Index off = 0;
  for (std::size_t i = 0; i + 1 < spec.layer_sizes.size(); ++i) {
    const Index fan_in = spec.layer_sizes[i], fan_out = spec.layer_sizes[i + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (Index k = 0; k < fan_in * fan_out; ++k) theta[off + k] = uniform(rng, -bound, bound);
    off += fan_in * fan_out + fan_out;  // biases stay zero
  }
  return theta;
}

struct MlpCache {
  MlpSpec spec;
  Vector<double> theta;
  Matrix<double> targets_onehot;        // MSE path
  Eigen::VectorXi labels;               // cross-entropy path
  std::vector<Matrix<double>> acts;     // acts[0] is the input batch
  std::vector<Matrix<double>> preacts;  // preacts[i] is layer i+1 before activation
  double loss = 0.0;
};

namespace detail {

struct LayerView {
  Eigen::Map<const Matrix<double>> w;
  Eigen::Map<const Vector<double>> b;
};

inline LayerView layer_view(const MlpSpec& spec, const Vector<double>& theta, std::size_t layer) {
  Index off = 0;
  for (std::size_t i = 0; i < layer; ++i)
    off += Index(spec.layer_sizes[i]) * spec.layer_sizes[i + 1] + spec.layer_sizes[i + 1];
  const Index in = spec.layer_sizes[layer], out = spec.layer_sizes[layer + 1];
  return {Eigen::Map<const Matrix<double>>(theta.data() + off, out, in),
          Eigen::Map<const Vector<double>>(theta.data() + off + in * out, out)};
}

inline Matrix<double> activate(const Matrix<double>& z, Activation act) {
  if (act == Activation::ReLU) return z.cwiseMax(0.0);
  return z.array().tanh().matrix();
}

inline Matrix<double> activate_grad(const Matrix<double>& z, Activation act) {
  if (act == Activation::ReLU)
    return (z.array() > 0.0).cast<double>().matrix();
  return (1.0 - z.array().tanh().square()).matrix();
}

inline Matrix<double> gather_rows(const Matrix<double>& x, BatchIndices batch) {
  if (batch.empty()) return x;
  Matrix<double> out(static_cast<Index>(batch.size()), x.cols());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch[i] < 0 || batch[i] >= x.rows()) throw std::out_of_range("mlp: batch index out of range");
    out.row(static_cast<Index>(i)) = x.row(batch[i]);
  }
  return out;
}

inline Eigen::VectorXi gather_labels(const Eigen::VectorXi& y, BatchIndices batch) {
  if (batch.empty()) return y;
  Eigen::VectorXi out(static_cast<Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) out[static_cast<Index>(i)] = y[batch[i]];
  return out;
}

}  // namespace detail

// Raw network outputs (logits / regression values), one row per sample.
inline Matrix<double> mlp_outputs(const MlpSpec& spec, const Vector<double>& theta,
                                  const Matrix<double>& x) {
  validate(spec);
  if (theta.size() != param_count(spec)) throw std::invalid_argument("mlp: wrong parameter count");
  if (x.cols() != spec.layer_sizes.front()) throw std::invalid_argument("mlp: input width mismatch");
  Matrix<double> a = x;
  const std::size_t layers = spec.layer_sizes.size() - 1;
  for (std::size_t i = 0; i < layers; ++i) {
    const auto lv = detail::layer_view(spec, theta, i);
    Matrix<double> z = (a * lv.w.transpose()).rowwise() + lv.b.transpose();
    a = (i + 1 < layers) ? detail::activate(z, spec.activation) : std::move(z);
  }
  return a;
}

// Forward pass over a batch; the cache carries everything backward needs.
inline MlpCache mlp_forward(const MlpSpec& spec, const Vector<double>& theta,
                            const Matrix<double>& x, const Eigen::VectorXi& y, BatchIndices batch) {
  validate(spec);
  if (theta.size() != param_count(spec)) throw std::invalid_argument("mlp: wrong parameter count");
  if (x.rows() != y.size()) throw std::invalid_argument("mlp: inputs and labels disagree");
  if (x.rows() == 0) throw std::invalid_argument("mlp: empty batch");

  MlpCache cache;
  cache.spec = spec;
  cache.theta = theta;
  cache.labels = detail::gather_labels(y, batch);
  cache.acts.push_back(detail::gather_rows(x, batch));
  if (cache.acts[0].cols() != spec.layer_sizes.front())
    throw std::invalid_argument("mlp: input width mismatch");

  const std::size_t layers = spec.layer_sizes.size() - 1;
  for (std::size_t i = 0; i < layers; ++i) {
    const auto lv = detail::layer_view(spec, theta, i);
    Matrix<double> z = (cache.acts.back() * lv.w.transpose()).rowwise() + lv.b.transpose();
    cache.preacts.push_back(z);
    cache.acts.push_back(i + 1 < layers ? detail::activate(z, spec.activation) : z);
  }

  const Matrix<double>& out = cache.acts.back();
  const Index nb = out.rows(), k = out.cols();
  const int label_max = cache.labels.size() ? cache.labels.maxCoeff() : 0;
  const int label_min = cache.labels.size() ? cache.labels.minCoeff() : 0;
  if (label_min < 0 || label_max >= k) throw std::invalid_argument("mlp: label outside output range");

  if (spec.loss == Loss::CrossEntropy) {
    double total = 0.0;
    for (Index i = 0; i < nb; ++i) {
      const double zmax = out.row(i).maxCoeff();  // guard against overflow in exp
      const double lse = std::log((out.row(i).array() - zmax).exp().sum()) + zmax;
      total += lse - out(i, cache.labels[i]);
    }
    cache.loss = total / static_cast<double>(nb);
  } else {
    cache.targets_onehot = Matrix<double>::Zero(nb, k);
    for (Index i = 0; i < nb; ++i) cache.targets_onehot(i, cache.labels[i]) = 1.0;
    // Per-sample sum of squared errors, averaged over the batch.
    cache.loss = (out - cache.targets_onehot).squaredNorm() / static_cast<double>(nb);
  }
  return cache;
}

// Backpropagation through the cached forward pass.
inline Vector<double> mlp_backward(const MlpCache& cache) {
  const MlpSpec& spec = cache.spec;
  const std::size_t layers = spec.layer_sizes.size() - 1;
  const Matrix<double>& out = cache.acts.back();
  const Index nb = out.rows();

  Matrix<double> dz;
  if (spec.loss == Loss::CrossEntropy) {
    dz.resize(out.rows(), out.cols());
    for (Index i = 0; i < nb; ++i) {
      const double zmax = out.row(i).maxCoeff();
      Eigen::RowVectorXd p = (out.row(i).array() - zmax).exp();
      p /= p.sum();
      dz.row(i) = p;
      dz(i, cache.labels[i]) -= 1.0;
    }
    dz /= static_cast<double>(nb);
  } else {
    dz = 2.0 * (out - cache.targets_onehot) / static_cast<double>(nb);
  }

  Vector<double> grad = Vector<double>::Zero(cache.theta.size());
  Index tail = cache.theta.size();
  for (std::size_t i = layers; i-- > 0;) {
    const Index in = spec.layer_sizes[i], outw = spec.layer_sizes[i + 1];
    const auto lv = detail::layer_view(spec, cache.theta, i);
    tail -= in * outw + outw;
    Eigen::Map<Matrix<double>> gw(grad.data() + tail, outw, in);
    Eigen::Map<Vector<double>> gb(grad.data() + tail + in * outw, outw);
    gw = dz.transpose() * cache.acts[i];
    gb = dz.colwise().sum().transpose();
    if (i > 0) {
      Matrix<double> da = dz * lv.w;
      dz = da.cwiseProduct(detail::activate_grad(cache.preacts[i - 1], spec.activation));
    }
  }
  return grad;
}

inline double mlp_accuracy(const MlpSpec& spec, const Vector<double>& theta,
                           const Matrix<double>& x, const Eigen::VectorXi& y, BatchIndices batch) {
  const Matrix<double> xb = detail::gather_rows(x, batch);
  const Eigen::VectorXi yb = detail::gather_labels(y, batch);
  if (xb.rows() == 0) throw std::invalid_argument("mlp_accuracy: empty batch");
  const Matrix<double> out = mlp_outputs(spec, theta, xb);
  Index hits = 0;
  for (Index i = 0; i < out.rows(); ++i) {
    Index pred;
    out.row(i).maxCoeff(&pred);
    if (pred == yb[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(out.rows());
}

// Objective view over a dataset; the dataset is shared with the caller.
inline Objective mlp_objective(const MlpSpec& spec, std::shared_ptr<const Dataset> data) {
  validate(spec);
  if (!data || data->size() == 0) throw std::invalid_argument("mlp_objective: empty dataset");
  if (data->inputs.cols() != spec.layer_sizes.front())
    throw std::invalid_argument("mlp_objective: dataset width does not match input layer");
  if (data->labels.maxCoeff() >= spec.layer_sizes.back())
    throw std::invalid_argument("mlp_objective: labels exceed output layer width");
  Objective obj;
  obj.dim = param_count(spec);
  obj.value = [spec, data](const Eigen::Ref<const Vector<double>>& theta, BatchIndices batch) {
    return mlp_forward(spec, theta, data->inputs, data->labels, batch).loss;
  };
  obj.grad = [spec, data](const Eigen::Ref<const Vector<double>>& theta,
                          BatchIndices batch) -> Vector<double> {
    return mlp_backward(mlp_forward(spec, theta, data->inputs, data->labels, batch));
  };
  return obj;
}

}  // namespace vralab::models
