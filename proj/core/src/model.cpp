#include "ipixmatch/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ipixmatch/errors.hpp"
#include "ipixmatch/rng.hpp"

namespace ipix::model {

namespace {

constexpr std::size_t kKernel = 3;
constexpr std::size_t kInputChannels = 3;

// out[y][x] += sum over taps of w * in[y+ky-1][x+kx-1], zero-padded.
// Tap-major loops keep the innermost loop contiguous in x.
void conv3x3_accumulate(const double* in, std::size_t h, std::size_t w,
                        const double* kernel, double* out) {
  for (std::size_t ky = 0; ky < kKernel; ++ky) {
    for (std::size_t kx = 0; kx < kKernel; ++kx) {
      const double wv = kernel[ky * kKernel + kx];
      if (wv == 0.0) continue;
      const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - 1;
      const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - 1;
      const std::size_t y0 = dy < 0 ? 1 : 0;
      const std::size_t y1 = dy > 0 ? h - 1 : h;
      const std::size_t x0 = dx < 0 ? 1 : 0;
      const std::size_t x1 = dx > 0 ? w - 1 : w;
      for (std::size_t y = y0; y < y1; ++y) {
        const double* src = in + (y + dy) * w + (x0 + dx);
        double* dst = out + y * w + x0;
        for (std::size_t x = x0; x < x1; ++x) *dst++ += wv * *src++;
      }
    }
  }
}

Tensor conv_forward(const ConvLayer& layer, const Tensor& input) {
  const std::size_t h = input.shape[1];
  const std::size_t w = input.shape[2];
  Tensor out = Tensor::zeros({layer.out_channels, h, w});
  const std::size_t hw = h * w;
  for (std::size_t o = 0; o < layer.out_channels; ++o) {
    double* out_ch = out.data.data() + o * hw;
    const double b = layer.bias[o];
    for (std::size_t i = 0; i < hw; ++i) out_ch[i] = b;
    for (std::size_t ic = 0; ic < layer.in_channels; ++ic) {
      conv3x3_accumulate(input.data.data() + ic * hw, h, w,
                         layer.weights.data() + (o * layer.in_channels + ic) * 9,
                         out_ch);
    }
  }
  return out;
}

// Gradients of one conv layer given the output cotangent.
void conv_backward(const ConvLayer& layer, const Tensor& input,
                   const Tensor& grad_out, ConvLayer& grad_layer,
                   Tensor* grad_in) {
  const std::size_t h = input.shape[1];
  const std::size_t w = input.shape[2];
  const std::size_t hw = h * w;
  for (std::size_t o = 0; o < layer.out_channels; ++o) {
    const double* g_ch = grad_out.data.data() + o * hw;
    double bsum = 0.0;
    for (std::size_t i = 0; i < hw; ++i) bsum += g_ch[i];
    grad_layer.bias[o] += bsum;
    for (std::size_t ic = 0; ic < layer.in_channels; ++ic) {
      const double* in_ch = input.data.data() + ic * hw;
      double* gw = grad_layer.weights.data() + (o * layer.in_channels + ic) * 9;
      const double* kw = layer.weights.data() + (o * layer.in_channels + ic) * 9;
      for (std::size_t ky = 0; ky < kKernel; ++ky) {
        for (std::size_t kx = 0; kx < kKernel; ++kx) {
          const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - 1;
          const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - 1;
          const std::size_t y0 = dy < 0 ? 1 : 0;
          const std::size_t y1 = dy > 0 ? h - 1 : h;
          const std::size_t x0 = dx < 0 ? 1 : 0;
          const std::size_t x1 = dx > 0 ? w - 1 : w;
          double acc = 0.0;
          for (std::size_t y = y0; y < y1; ++y) {
            const double* src = in_ch + (y + dy) * w + (x0 + dx);
            const double* g = g_ch + y * w + x0;
            for (std::size_t x = x0; x < x1; ++x) acc += *g++ * *src++;
          }
          gw[ky * kKernel + kx] += acc;
          if (grad_in != nullptr) {
            // transposed conv: scatter g through the flipped kernel
            const double wv = kw[ky * kKernel + kx];
            if (wv != 0.0) {
              double* gi = grad_in->data.data() + ic * hw;
              for (std::size_t y = y0; y < y1; ++y) {
                double* dst = gi + (y + dy) * w + (x0 + dx);
                const double* g = g_ch + y * w + x0;
                for (std::size_t x = x0; x < x1; ++x) *dst++ += wv * *g++;
              }
            }
          }
        }
      }
    }
  }
}

void check_congruent(const std::vector<ConvLayer>& a, const std::vector<ConvLayer>& b,
                     const char* what) {
  bool ok = a.size() == b.size();
  if (ok) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      ok = ok && a[i].in_channels == b[i].in_channels &&
           a[i].out_channels == b[i].out_channels &&
           a[i].weights.size() == b[i].weights.size() &&
           a[i].bias.size() == b[i].bias.size();
    }
  }
  if (!ok) throw ShapeError(std::string(what) + ": layer shapes not congruent");
}

}  // namespace

bool ModelParams::congruent_with(const ModelParams& other) const {
  if (layers.size() != other.layers.size()) return false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].in_channels != other.layers[i].in_channels ||
        layers[i].out_channels != other.layers[i].out_channels) {
      return false;
    }
  }
  return true;
}

GradientBundle GradientBundle::zeros_like(const ModelParams& params) {
  GradientBundle g;
  g.layers.reserve(params.layers.size());
  for (const ConvLayer& l : params.layers) {
    ConvLayer z;
    z.in_channels = l.in_channels;
    z.out_channels = l.out_channels;
    z.weights.assign(l.weights.size(), 0.0);
    z.bias.assign(l.bias.size(), 0.0);
    g.layers.push_back(std::move(z));
  }
  return g;
}

void GradientBundle::accumulate(const GradientBundle& other) {
  check_congruent(layers, other.layers, "GradientBundle::accumulate");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    for (std::size_t j = 0; j < layers[i].weights.size(); ++j) {
      layers[i].weights[j] += other.layers[i].weights[j];
    }
    for (std::size_t j = 0; j < layers[i].bias.size(); ++j) {
      layers[i].bias[j] += other.layers[i].bias[j];
    }
  }
}

void GradientBundle::scale(double s) {
  for (ConvLayer& l : layers) {
    for (double& v : l.weights) v *= s;
    for (double& v : l.bias) v *= s;
  }
}

ModelParams init_params(std::uint64_t seed, std::size_t hidden_channels,
                        std::size_t num_classes) {
  if (hidden_channels < 1) {
    throw InvalidParameterError("init_params: hidden_channels must be >= 1");
  }
  if (num_classes < 2) {
    throw InvalidParameterError("init_params: num_classes must be >= 2");
  }
  Rng rng(hash_seed(seed, 0x6d6f64656cULL));  // independent stream per purpose
  ModelParams params;
  const std::size_t chain[4] = {kInputChannels, hidden_channels, hidden_channels,
                                num_classes};
  for (std::size_t li = 0; li < 3; ++li) {
    ConvLayer layer;
    layer.in_channels = chain[li];
    layer.out_channels = chain[li + 1];
    const double stddev =
        std::sqrt(2.0 / static_cast<double>(layer.in_channels * kKernel * kKernel));
    layer.weights.resize(layer.out_channels * layer.in_channels * 9);
    for (double& w : layer.weights) w = rng.normal(0.0, stddev);
    layer.bias.assign(layer.out_channels, 0.0);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

Tensor forward(const ModelParams& params, const Tensor& image, ForwardCache* cache) {
  if (image.shape.size() != 3 || image.shape[0] != kInputChannels) {
    throw ShapeError("forward: expected 3 x H x W image");
  }
  if (params.layers.size() != 3 || params.layers[0].in_channels != kInputChannels) {
    throw ShapeError("forward: parameter chain mismatch");
  }
  require_finite(image, "forward");
  if (cache != nullptr) {
    cache->input = image;
    cache->pre_activations.clear();
    cache->layer_out_channels.clear();
  }
  Tensor x = image;
  for (std::size_t li = 0; li < params.layers.size(); ++li) {
    if (params.layers[li].in_channels != x.shape[0]) {
      throw ShapeError("forward: channel mismatch at layer " + std::to_string(li));
    }
    Tensor z = conv_forward(params.layers[li], x);
    if (cache != nullptr) {
      cache->pre_activations.push_back(z);
      cache->layer_out_channels.push_back(params.layers[li].out_channels);
    }
    if (li + 1 < params.layers.size()) {
      for (double& v : z.data) v = std::max(v, 0.0);
    }
    x = std::move(z);
  }
  return x;
}

GradientBundle backward(const ModelParams& params, const ForwardCache& cache,
                        const Tensor& grad_logits, Tensor* grad_input) {
  if (cache.pre_activations.size() != params.layers.size() ||
      cache.layer_out_channels.size() != params.layers.size()) {
    throw InvalidStateError("backward: cache does not match this model");
  }
  for (std::size_t li = 0; li < params.layers.size(); ++li) {
    if (cache.layer_out_channels[li] != params.layers[li].out_channels ||
        cache.pre_activations[li].shape[0] != params.layers[li].out_channels) {
      throw InvalidStateError("backward: stale cache at layer " + std::to_string(li));
    }
  }
  if (!grad_logits.same_shape(cache.pre_activations.back())) {
    throw ShapeError("backward: grad_logits shape mismatch");
  }

  GradientBundle grads = GradientBundle::zeros_like(params);
  Tensor g = grad_logits;
  for (std::size_t li = params.layers.size(); li-- > 0;) {
    // ReLU mask applies to every layer output except the logits.
    if (li + 1 < params.layers.size()) {
      const Tensor& pre = cache.pre_activations[li];
      for (std::size_t i = 0; i < g.data.size(); ++i) {
        if (pre.data[i] <= 0.0) g.data[i] = 0.0;
      }
    }
    // input to layer li is ReLU(pre[li-1]) or the image
    Tensor layer_input;
    if (li == 0) {
      layer_input = cache.input;
    } else {
      layer_input = cache.pre_activations[li - 1];
      for (double& v : layer_input.data) v = std::max(v, 0.0);
    }
    const bool need_grad_in = li > 0 || grad_input != nullptr;
    Tensor grad_in;
    if (need_grad_in) grad_in = Tensor::zeros(layer_input.shape);
    conv_backward(params.layers[li], layer_input, g, grads.layers[li],
                  need_grad_in ? &grad_in : nullptr);
    if (li == 0) {
      if (grad_input != nullptr) *grad_input = std::move(grad_in);
      break;
    }
    g = std::move(grad_in);
  }
  return grads;
}

void sgd_step(ModelParams& params, const GradientBundle& grads, double lr,
              double momentum, GradientBundle& velocity) {
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw InvalidParameterError("sgd_step: momentum must be in [0,1)");
  }
  check_congruent(params.layers, grads.layers, "sgd_step");
  check_congruent(params.layers, velocity.layers, "sgd_step");
  for (std::size_t li = 0; li < params.layers.size(); ++li) {
    ConvLayer& p = params.layers[li];
    const ConvLayer& g = grads.layers[li];
    ConvLayer& v = velocity.layers[li];
    for (std::size_t j = 0; j < p.weights.size(); ++j) {
      v.weights[j] = momentum * v.weights[j] + g.weights[j];
      p.weights[j] -= lr * v.weights[j];
    }
    for (std::size_t j = 0; j < p.bias.size(); ++j) {
      v.bias[j] = momentum * v.bias[j] + g.bias[j];
      p.bias[j] -= lr * v.bias[j];
    }
  }
}

void ema_update(ModelParams& teacher, const ModelParams& student, double m) {
  if (!(m >= 0.0 && m <= 1.0)) {
    throw InvalidParameterError("ema_update: m must be in [0,1]");
  }
  check_congruent(teacher.layers, student.layers, "ema_update");
  for (std::size_t li = 0; li < teacher.layers.size(); ++li) {
    ConvLayer& t = teacher.layers[li];
    const ConvLayer& s = student.layers[li];
    for (std::size_t j = 0; j < t.weights.size(); ++j) {
      t.weights[j] = m * t.weights[j] + (1.0 - m) * s.weights[j];
    }
    for (std::size_t j = 0; j < t.bias.size(); ++j) {
      t.bias[j] = m * t.bias[j] + (1.0 - m) * s.bias[j];
    }
  }
}

}  // namespace ipix::model
