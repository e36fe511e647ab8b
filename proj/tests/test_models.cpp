#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "vralab/datasets.hpp"
#include "vralab/idx.hpp"
#include "vralab/mlp.hpp"
#include "vralab/objectives.hpp"
#include "vralab/optimizers.hpp"

using namespace vralab;
using models::Activation;
using models::BatchIndices;
using models::Dataset;
using models::Loss;
using models::MlpSpec;

namespace {

// Central difference of an objective along coordinate i.
double fd_grad(const models::Objective& obj, const Vector<double>& theta, Index i) {
  const double h = 1e-6 * (1.0 + std::abs(theta[i]));
  Vector<double> tp = theta, tm = theta;
  tp[i] += h;
  tm[i] -= h;
  return (obj.value(tp, {}) - obj.value(tm, {})) / (2.0 * h);
}

void check_grad(const models::Objective& obj, const Vector<double>& theta, double tol = 1e-5) {
  const Vector<double> g = obj.grad(theta, {});
  REQUIRE(g.size() == theta.size());
  for (Index i = 0; i < theta.size(); ++i) {
    const double fd = fd_grad(obj, theta, i);
    CHECK(std::abs(g[i] - fd) <= tol * (1.0 + std::abs(fd)));
  }
}

std::string data_path(const char* name) { return std::string(VRALAB_TEST_DATA_DIR "/") + name; }

void write_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void push_be32(std::vector<unsigned char>& v, std::uint32_t x) {
  v.push_back(static_cast<unsigned char>(x >> 24));
  v.push_back(static_cast<unsigned char>(x >> 16));
  v.push_back(static_cast<unsigned char>(x >> 8));
  v.push_back(static_cast<unsigned char>(x));
}

}  // namespace

TEST_CASE("analytic gradients agree with finite differences") {
  Matrix<double> a(3, 3);
  a << 4.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 2.0;
  const auto quad = models::quadratic_objective(a);
  Vector<double> theta(3);
  theta << 1.0, -2.0, 0.5;
  check_grad(quad, theta);

  const auto rb = models::rosenbrock();
  Vector<double> t2(2);
  t2 << -1.2, 1.0;
  check_grad(rb, t2);
  t2 << 1.0, 1.0;
  CHECK(rb.value(t2, {}) == 0.0);
  CHECK(rb.grad(t2, {}).norm() == 0.0);
}

TEST_CASE("parameter packing counts weights and biases") {
  MlpSpec spec;
  spec.layer_sizes = {2, 16, 16, 2};
  CHECK(models::param_count(spec) == 2 * 16 + 16 + 16 * 16 + 16 + 16 * 2 + 2);
  spec.layer_sizes = {784, 10};
  CHECK(models::param_count(spec) == 7850);
}

TEST_CASE("initialization keeps weights in the glorot band and biases at zero") {
  MlpSpec spec;
  spec.layer_sizes = {4, 8, 3};
  spec.init_seed = 11;
  const Vector<double> theta = models::mlp_init(spec);
  REQUIRE(theta.size() == models::param_count(spec));
  const double b1 = std::sqrt(6.0 / 12.0), b2 = std::sqrt(6.0 / 11.0);
  for (Index k = 0; k < 32; ++k) CHECK(std::abs(theta[k]) <= b1);
  for (Index k = 32; k < 40; ++k) CHECK(theta[k] == 0.0);
  for (Index k = 40; k < 64; ++k) CHECK(std::abs(theta[k]) <= b2);
  for (Index k = 64; k < 67; ++k) CHECK(theta[k] == 0.0);
  // deterministic in the seed
  CHECK((models::mlp_init(spec).array() == theta.array()).all());
  spec.init_seed = 12;
  CHECK_FALSE((models::mlp_init(spec).array() == theta.array()).all());
}

TEST_CASE("an untrained classifier scores log k cross-entropy") {
  MlpSpec spec;
  spec.layer_sizes = {3, 5, 4};
  const Vector<double> theta = Vector<double>::Zero(models::param_count(spec));
  Matrix<double> x(6, 3);
  x.setRandom();
  Eigen::VectorXi y(6);
  y << 0, 1, 2, 3, 0, 1;
  const auto cache = models::mlp_forward(spec, theta, x, y, {});
  CHECK(cache.loss == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("squared-error gradient of a linear net matches the closed form") {
  MlpSpec spec;
  spec.layer_sizes = {2, 2};
  spec.loss = Loss::MSE;
  Vector<double> theta(6);
  theta << 0.5, -0.25, 1.0, 0.75, 0.1, -0.2;  // W (2x2 col-major), b
  Matrix<double> x(1, 2);
  x << 2.0, -1.0;
  Eigen::VectorXi y(1);
  y << 1;

  const auto cache = models::mlp_forward(spec, theta, x, y, {});
  const Vector<double> g = models::mlp_backward(cache);

  Eigen::Map<const Matrix<double>> w(theta.data(), 2, 2);
  Vector<double> pred = w * x.row(0).transpose() + theta.segment(4, 2);
  Vector<double> target(2);
  target << 0.0, 1.0;
  const Vector<double> r = pred - target;
  CHECK(cache.loss == doctest::Approx(r.squaredNorm()).epsilon(1e-14));
  // dL/dW = 2 r x^T, dL/db = 2 r
  Matrix<double> gw_expect = 2.0 * r * x.row(0);
  Eigen::Map<const Matrix<double>> gw(g.data(), 2, 2);
  CHECK(gw.isApprox(gw_expect, 1e-12));
  CHECK(g.segment(4, 2).isApprox(Vector<double>(2.0 * r), 1e-12));
}

TEST_CASE("backprop matches finite differences across architectures and losses") {
  struct Case {
    std::vector<int> layers;
    Activation act;
    Loss loss;
  };
  const Case cases[] = {
      {{2, 4, 2}, Activation::Tanh, Loss::CrossEntropy},
      {{2, 4, 2}, Activation::ReLU, Loss::CrossEntropy},
      {{3, 8, 8, 3}, Activation::Tanh, Loss::MSE},
      {{5, 6, 2}, Activation::ReLU, Loss::MSE},
  };
  Rng rng(31);
  int cs = 0;
  for (const auto& c : cases) {
    MlpSpec spec;
    spec.layer_sizes = c.layers;
    spec.activation = c.act;
    spec.loss = c.loss;
    spec.init_seed = 100 + static_cast<std::uint64_t>(cs++);
    const Index n = 7, d = c.layers.front();
    auto data = std::make_shared<Dataset>();
    data->inputs.resize(n, d);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < d; ++j) data->inputs(i, j) = standard_normal(rng);
    data->labels.resize(n);
    for (Index i = 0; i < n; ++i)
      data->labels[i] = static_cast<int>(rng() % static_cast<std::uint64_t>(c.layers.back()));
    const auto obj = models::mlp_objective(spec, data);
    Vector<double> theta = models::mlp_init(spec);
    // nudge off the ReLU kinks so finite differences stay two-sided
    theta.array() += 0.01;
    check_grad(obj, theta, 1e-5);
  }
}

TEST_CASE("accuracy counts argmax hits") {
  MlpSpec spec;
  spec.layer_sizes = {2, 2};
  Vector<double> theta(6);
  theta << 1.0, 0.0, 0.0, 1.0, 0.0, 0.0;  // identity readout
  Matrix<double> x(4, 2);
  x << 3.0, 1.0, 1.0, 3.0, 0.0, 2.0, 2.0, 0.0;
  Eigen::VectorXi y(4);
  y << 0, 1, 0, 0;  // sample 2 predicts class 1, label says 0
  CHECK(models::mlp_accuracy(spec, theta, x, y, {}) == doctest::Approx(0.75));
  const std::vector<Index> batch{0, 1};
  CHECK(models::mlp_accuracy(spec, theta, x, y, BatchIndices(batch)) == 1.0);
}

TEST_CASE("blobs are balanced, standardized, and easy to separate") {
  const Dataset ds = models::make_blobs(200, 4, 2, 5);
  REQUIRE(ds.size() == 200);
  CHECK(ds.num_classes() == 4);
  int counts[4] = {0, 0, 0, 0};
  for (Index i = 0; i < ds.size(); ++i) counts[ds.labels[i]]++;
  for (int c : counts) CHECK(c == 50);
  for (Index col = 0; col < 2; ++col) {
    CHECK(std::abs(ds.inputs.col(col).mean()) < 1e-12);
    const double var = ds.inputs.col(col).squaredNorm() / 200.0;
    CHECK(var == doctest::Approx(1.0).epsilon(1e-10));
  }
  CHECK((models::make_blobs(200, 4, 2, 5).inputs.array() == ds.inputs.array()).all());

  // a linear softmax classifier separates the clusters almost perfectly
  MlpSpec spec;
  spec.layer_sizes = {2, 4};
  spec.init_seed = 1;
  auto shared = std::make_shared<Dataset>(ds);
  const auto obj = models::mlp_objective(spec, shared);
  Vector<double> theta = models::mlp_init(spec);
  optim::OptimizerConfig<double> cfg;
  cfg.variant = optim::Variant::AdamW;
  cfg.alpha0 = 0.1;
  auto state = optim::make_state<double>(theta.size());
  for (int step = 0; step < 200; ++step)
    theta = optim::adamw_step<double>(theta, obj.grad(theta, {}), state, cfg).new_params;
  CHECK(models::mlp_accuracy(spec, theta, ds.inputs, ds.labels, {}) > 0.99);
}

TEST_CASE("two moons interleave with balanced labels") {
  const Dataset ds = models::make_two_moons(100, 0.05, 3);
  REQUIRE(ds.size() == 100);
  CHECK(ds.num_classes() == 2);
  int ones = 0;
  for (Index i = 0; i < 100; ++i) ones += ds.labels[i];
  CHECK(ones == 50);
  for (Index col = 0; col < 2; ++col) CHECK(std::abs(ds.inputs.col(col).mean()) < 1e-12);
  // noiseless moons are not linearly separable: both classes appear on each
  // side of any vertical cut through the overlap region
  const Dataset clean = models::make_two_moons(400, 0.0, 3);
  int above0 = 0, above1 = 0;
  for (Index i = 0; i < clean.size(); ++i) {
    if (clean.inputs(i, 0) > 0.0) (clean.labels[i] == 0 ? above0 : above1)++;
  }
  CHECK(above0 > 0);
  CHECK(above1 > 0);
}

TEST_CASE("splits partition the rows") {
  const Dataset ds = models::make_blobs(101, 2, 3, 9);
  const auto [kept, held] = models::split_dataset(ds, 0.2, 77);
  CHECK(held.size() == 20);
  CHECK(kept.size() == 81);
  // every original row appears exactly once across the two parts
  std::multiset<double> before, after;
  for (Index i = 0; i < ds.size(); ++i) before.insert(ds.inputs(i, 0));
  for (Index i = 0; i < kept.size(); ++i) after.insert(kept.inputs(i, 0));
  for (Index i = 0; i < held.size(); ++i) after.insert(held.inputs(i, 0));
  CHECK(before == after);
  // deterministic in the seed
  const auto [kept2, held2] = models::split_dataset(ds, 0.2, 77);
  CHECK((kept2.inputs.array() == kept.inputs.array()).all());
  const auto [kept3, held3] = models::split_dataset(ds, 0.2, 78);
  CHECK_FALSE((kept3.inputs.array() == kept.inputs.array()).all());
  const auto [all, none] = models::split_dataset(ds, 0.0, 1);
  CHECK(all.size() == 101);
  CHECK(none.size() == 0);
}

TEST_CASE("minibatches cover every index once per epoch") {
  const auto batches = models::minibatches(10, 4, 42, 0);
  REQUIRE(batches.size() == 3);
  CHECK(batches[0].size() == 4);
  CHECK(batches[1].size() == 4);
  CHECK(batches[2].size() == 2);  // partial batch kept
  std::set<Index> seen;
  for (const auto& b : batches) seen.insert(b.begin(), b.end());
  CHECK(seen.size() == 10);
  CHECK(*seen.begin() == 0);
  CHECK(*seen.rbegin() == 9);
  // keyed by (seed, epoch)
  CHECK(models::minibatches(10, 4, 42, 0) == batches);
  CHECK(models::minibatches(10, 4, 42, 1) != batches);
  CHECK(models::minibatches(10, 4, 43, 0) != batches);
}

TEST_CASE("the idx fixture loads with scaled pixels") {
  const auto ds = models::load_idx(data_path("fixture-images-idx3-ubyte"),
                                   data_path("fixture-labels-idx1-ubyte"));
  REQUIRE(ds.size() == 2);
  CHECK(ds.inputs.cols() == 28 * 28);
  CHECK(ds.labels[0] == 3);
  CHECK(ds.labels[1] == 7);
  CHECK(ds.inputs.minCoeff() >= 0.0);
  CHECK(ds.inputs.maxCoeff() <= 1.0);
  // pixel (n, i) was written as (n*131 + i*7 + 3) % 256 over 255
  CHECK(ds.inputs(0, 0) == doctest::Approx(3.0 / 255.0).epsilon(1e-12));
  CHECK(ds.inputs(1, 1) == doctest::Approx(((131 + 7 + 3) % 256) / 255.0).epsilon(1e-12));
}

TEST_CASE("idx failure modes raise their own error types") {
  const std::string dir = data_path("");

  std::vector<unsigned char> bad_magic;
  push_be32(bad_magic, 0x00000999);
  push_be32(bad_magic, 1);
  write_bytes(dir + "tmp-bad-magic", bad_magic);
  CHECK_THROWS_AS(models::read_idx_labels(dir + "tmp-bad-magic"), models::IdxBadMagicError);

  std::vector<unsigned char> truncated;
  push_be32(truncated, 0x00000803);
  push_be32(truncated, 5);
  push_be32(truncated, 28);
  push_be32(truncated, 28);
  truncated.push_back(0);  // promises 5*784 bytes, delivers one
  write_bytes(dir + "tmp-truncated", truncated);
  CHECK_THROWS_AS(models::read_idx_images(dir + "tmp-truncated"), models::IdxTruncatedError);

  std::vector<unsigned char> huge;
  push_be32(huge, 0x00000803);
  push_be32(huge, 0xF0000000u);
  push_be32(huge, 0xF0000000u);
  push_be32(huge, 0xF0000000u);
  write_bytes(dir + "tmp-huge", huge);
  CHECK_THROWS_AS(models::read_idx_images(dir + "tmp-huge"), models::IdxDimensionError);

  std::vector<unsigned char> labels3;
  push_be32(labels3, 0x00000801);
  push_be32(labels3, 3);
  labels3.push_back(0);
  labels3.push_back(1);
  labels3.push_back(2);
  write_bytes(dir + "tmp-three-labels", labels3);
  CHECK_THROWS_AS(
      models::load_idx(data_path("fixture-images-idx3-ubyte"), dir + "tmp-three-labels"),
      models::DataMismatchError);

  CHECK_THROWS_AS(models::read_idx_labels(dir + "tmp-missing-file"), IoError);

  for (const char* f : {"tmp-bad-magic", "tmp-truncated", "tmp-huge", "tmp-three-labels"})
    std::remove((dir + f).c_str());
}
