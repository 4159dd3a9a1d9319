// Copyright 2026 The disent Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DISENT_MLP_HPP
#define DISENT_MLP_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "disent/rng.hpp"

namespace disent {

struct MlpGradients {
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::VectorXd> b;
};

/// Fully connected network with ReLU hidden layers and a linear output.
/// Batches are row-major: one sample per row. All arithmetic is double so
/// gradients can be checked against finite differences tightly.
class Mlp {
 public:
  Mlp() = default;

  /// Seeded He-style initialization: uniform on [-sqrt(6/fan_in),
  /// +sqrt(6/fan_in)], biases zero.
  static Mlp make(const std::vector<int>& dims, std::uint64_t seed) {
    if (dims.size() < 2) throw std::invalid_argument("Mlp::make: need at least input and output dims");
    for (int d : dims) {
      if (d < 1) throw std::invalid_argument("Mlp::make: layer dimensions must be positive");
    }
    Mlp net;
    net.dims_ = dims;
    Rng rng = Rng::stream(seed, "mlp-init");
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      int fan_in = dims[l], fan_out = dims[l + 1];
      double limit = std::sqrt(6.0 / fan_in);
      Eigen::MatrixXd w(fan_out, fan_in);
      for (int i = 0; i < fan_out; ++i) {
        for (int j = 0; j < fan_in; ++j) w(i, j) = rng.uniform(-limit, limit);
      }
      net.weights_.push_back(std::move(w));
      net.biases_.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return net;
  }

  const std::vector<int>& dims() const { return dims_; }
  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }
  std::size_t layer_count() const { return weights_.size(); }

  std::vector<Eigen::MatrixXd>& weights() { return weights_; }
  const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
  std::vector<Eigen::VectorXd>& biases() { return biases_; }
  const std::vector<Eigen::VectorXd>& biases() const { return biases_; }

  /// Post-activation values per layer; activations[0] is the input batch and
  /// activations[L] the network output.
  struct Cache {
    std::vector<Eigen::MatrixXd> activations;
  };

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Cache* cache = nullptr) const {
    if (x.cols() != input_dim()) throw std::invalid_argument("Mlp::forward: input width mismatch");
    if (cache) {
      cache->activations.clear();
      cache->activations.push_back(x);
    }
    Eigen::MatrixXd a = x;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      Eigen::MatrixXd z = a * weights_[l].transpose();
      z.rowwise() += biases_[l].transpose();
      if (l + 1 < weights_.size()) z = z.cwiseMax(0.0);
      a = std::move(z);
      if (cache) cache->activations.push_back(a);
    }
    return a;
  }

  Eigen::VectorXd forward_one(const Eigen::VectorXd& x) const {
    return forward(x.transpose()).row(0).transpose();
  }

  /// Backpropagates d(loss)/d(output) through the cached forward pass.
  MlpGradients backward(const Cache& cache, const Eigen::MatrixXd& dout) const {
    if (cache.activations.size() != weights_.size() + 1)
      throw std::invalid_argument("Mlp::backward: cache does not match network depth");
    MlpGradients grads;
    grads.w.resize(weights_.size());
    grads.b.resize(weights_.size());
    Eigen::MatrixXd delta = dout;
    for (int l = static_cast<int>(weights_.size()) - 1; l >= 0; --l) {
      if (l + 1 < static_cast<int>(weights_.size())) {
        delta = delta.cwiseProduct((cache.activations[l + 1].array() > 0.0).cast<double>().matrix());
      }
      grads.w[l] = delta.transpose() * cache.activations[l];
      grads.b[l] = delta.colwise().sum().transpose();
      if (l > 0) delta = delta * weights_[l];
    }
    return grads;
  }

 private:
  std::vector<int> dims_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

/// Adam with bias correction.
class Adam {
 public:
  explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8)
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
    if (lr_ <= 0.0) throw std::invalid_argument("Adam: learning rate must be positive");
  }

  int steps() const { return t_; }

  void step(Mlp& net, const MlpGradients& grads) {
    if (grads.w.size() != net.layer_count() || grads.b.size() != net.layer_count())
      throw std::invalid_argument("Adam::step: gradient shape mismatch");
    if (mw_.empty()) {
      for (std::size_t l = 0; l < net.layer_count(); ++l) {
        mw_.push_back(Eigen::MatrixXd::Zero(net.weights()[l].rows(), net.weights()[l].cols()));
        vw_.push_back(Eigen::MatrixXd::Zero(net.weights()[l].rows(), net.weights()[l].cols()));
        mb_.push_back(Eigen::VectorXd::Zero(net.biases()[l].size()));
        vb_.push_back(Eigen::VectorXd::Zero(net.biases()[l].size()));
      }
    }
    ++t_;
    double c1 = 1.0 - std::pow(beta1_, t_);
    double c2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
      mw_[l] = beta1_ * mw_[l] + (1.0 - beta1_) * grads.w[l];
      vw_[l] = beta2_ * vw_[l] + (1.0 - beta2_) * grads.w[l].cwiseProduct(grads.w[l]);
      net.weights()[l].array() -=
          lr_ * (mw_[l].array() / c1) / ((vw_[l].array() / c2).sqrt() + eps_);
      mb_[l] = beta1_ * mb_[l] + (1.0 - beta1_) * grads.b[l];
      vb_[l] = beta2_ * vb_[l] + (1.0 - beta2_) * grads.b[l].cwiseProduct(grads.b[l]);
      net.biases()[l].array() -=
          lr_ * (mb_[l].array() / c1) / ((vb_[l].array() / c2).sqrt() + eps_);
    }
  }

 private:
  double lr_, beta1_, beta2_, eps_;
  int t_ = 0;
  std::vector<Eigen::MatrixXd> mw_, vw_;
  std::vector<Eigen::VectorXd> mb_, vb_;
};

}  // namespace disent

#endif
