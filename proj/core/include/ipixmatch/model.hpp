#pragma once

#include <cstdint>
#include <vector>

#include "ipixmatch/tensor.hpp"

namespace ipix::model {

// One 3x3 conv layer, stride 1, zero padding 1 (spatial size preserved).
struct ConvLayer {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::vector<double> weights;  // out * in * 3 * 3, row-major
  std::vector<double> bias;     // out
};

// Three-layer conv net: 3 -> hidden -> hidden -> C, ReLU between convs.
struct ModelParams {
  std::vector<ConvLayer> layers;

  std::size_t hidden_channels() const { return layers[0].out_channels; }
  std::size_t num_classes() const { return layers.back().out_channels; }
  bool congruent_with(const ModelParams& other) const;
};

// Same structure as ModelParams, holding dL/d(parameter).
struct GradientBundle {
  std::vector<ConvLayer> layers;

  static GradientBundle zeros_like(const ModelParams& params);
  void accumulate(const GradientBundle& other);  // fixed elementwise order
  void scale(double s);
};

// He-initialized weights (stddev sqrt(2/fan_in)), zero biases, deterministic
// in the seed.
ModelParams init_params(std::uint64_t seed, std::size_t hidden_channels,
                        std::size_t num_classes);

// Activations retained for the backward pass.
struct ForwardCache {
  Tensor input;
  std::vector<Tensor> pre_activations;  // per layer, before ReLU/logits
  std::vector<std::size_t> layer_out_channels;
};

// conv -> ReLU -> conv -> ReLU -> conv. Output is C x H x W logits.
Tensor forward(const ModelParams& params, const Tensor& image,
               ForwardCache* cache = nullptr);

// Exact gradients of the scalar whose logit cotangent is grad_logits.
// Pass grad_input to also get the gradient with respect to the image.
GradientBundle backward(const ModelParams& params, const ForwardCache& cache,
                        const Tensor& grad_logits, Tensor* grad_input = nullptr);

// v <- momentum * v + g;  theta <- theta - lr * v
void sgd_step(ModelParams& params, const GradientBundle& grads, double lr,
              double momentum, GradientBundle& velocity);

// theta_t <- m * theta_t + (1 - m) * theta_s
void ema_update(ModelParams& teacher, const ModelParams& student, double m);

}  // namespace ipix::model
