#include "fequiv/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fequiv/errors.hpp"

namespace fequiv {

Architecture::Architecture(std::size_t input_dim, std::vector<std::size_t> hidden_widths,
                           std::vector<Activation> activations, std::size_t output_dim)
    : input_dim_(input_dim),
      hidden_(std::move(hidden_widths)),
      activations_(std::move(activations)),
      output_dim_(output_dim) {
  if (hidden_.empty()) throw StructuralError("architecture needs at least one hidden layer");
  if (input_dim_ == 0 || output_dim_ == 0) throw StructuralError("layer widths must be >= 1");
  for (std::size_t w : hidden_) {
    if (w == 0) throw StructuralError("layer widths must be >= 1");
  }
  if (activations_.size() != hidden_.size()) {
    throw StructuralError("need exactly one activation per hidden layer");
  }
}

Architecture::Architecture(std::size_t input_dim, std::vector<std::size_t> hidden_widths,
                           Activation activation, std::size_t output_dim)
    : Architecture(input_dim, hidden_widths,
                   std::vector<Activation>(hidden_widths.size(), activation), output_dim) {}

std::size_t Architecture::width(std::size_t l) const {
  if (l == 0) return input_dim_;
  if (l <= hidden_.size()) return hidden_[l - 1];
  if (l == hidden_.size() + 1) return output_dim_;
  throw DomainError("layer index out of range");
}

const Activation& Architecture::activation(std::size_t l) const {
  if (l == 0 || l > hidden_.size()) throw DomainError("hidden layer index out of range");
  return activations_[l - 1];
}

std::size_t Architecture::param_count() const noexcept {
  std::size_t s = 0;
  for (std::size_t l = 1; l <= depth() + 1; ++l) s += layer_param_count(l);
  return s;
}

std::size_t Architecture::layer_param_count(std::size_t l) const {
  if (l == 0 || l > depth() + 1) throw DomainError("layer index out of range");
  return width(l - 1) * width(l) + width(l);
}

std::size_t Architecture::hidden_neuron_count() const noexcept {
  std::size_t u = 0;
  for (std::size_t w : hidden_) u += w;
  return u;
}

std::size_t Architecture::max_hidden_width() const noexcept {
  return *std::max_element(hidden_.begin(), hidden_.end());
}

NetworkParams NetworkParams::zeros(const Architecture& arch) {
  NetworkParams p;
  p.layers.reserve(arch.depth() + 1);
  for (std::size_t l = 1; l <= arch.depth() + 1; ++l) {
    p.layers.push_back(Layer{Matrix(arch.width(l), arch.width(l - 1)),
                             std::vector<double>(arch.width(l), 0.0)});
  }
  return p;
}

std::vector<double> NetworkParams::flatten() const {
  std::vector<double> out;
  for (const auto& layer : layers) {
    out.insert(out.end(), layer.weights.data.begin(), layer.weights.data.end());
    out.insert(out.end(), layer.bias.begin(), layer.bias.end());
  }
  return out;
}

NetworkParams NetworkParams::unflatten(const Architecture& arch, std::span<const double> values) {
  if (values.size() != arch.param_count()) {
    throw StructuralError("flat parameter vector has wrong length");
  }
  NetworkParams p = zeros(arch);
  std::size_t pos = 0;
  for (auto& layer : p.layers) {
    std::copy_n(values.begin() + pos, layer.weights.data.size(), layer.weights.data.begin());
    pos += layer.weights.data.size();
    std::copy_n(values.begin() + pos, layer.bias.size(), layer.bias.begin());
    pos += layer.bias.size();
  }
  return p;
}

void check_shapes(const Architecture& arch, const NetworkParams& params) {
  if (params.layers.size() != arch.depth() + 1) {
    throw StructuralError("expected " + std::to_string(arch.depth() + 1) + " layers, got " +
                          std::to_string(params.layers.size()));
  }
  for (std::size_t l = 1; l <= arch.depth() + 1; ++l) {
    const auto& layer = params.layers[l - 1];
    if (layer.weights.rows != arch.width(l) || layer.weights.cols != arch.width(l - 1) ||
        layer.weights.data.size() != layer.weights.rows * layer.weights.cols ||
        layer.bias.size() != arch.width(l)) {
      throw StructuralError("layer " + std::to_string(l) + " shape mismatch");
    }
  }
}

bool bit_equal(const NetworkParams& a, const NetworkParams& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    const auto& la = a.layers[i];
    const auto& lb = b.layers[i];
    if (la.weights.rows != lb.weights.rows || la.weights.cols != lb.weights.cols) return false;
    if (!bit_equal(la.weights.data, lb.weights.data) || !bit_equal(la.bias, lb.bias)) {
      return false;
    }
  }
  return true;
}

double linf_distance(const NetworkParams& a, const NetworkParams& b) {
  if (a.layers.size() != b.layers.size()) throw StructuralError("layer count mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    if (a.layers[i].weights.rows != b.layers[i].weights.rows ||
        a.layers[i].weights.cols != b.layers[i].weights.cols) {
      throw StructuralError("layer shape mismatch");
    }
    m = std::max(m, linf_distance(a.layers[i].weights.data, b.layers[i].weights.data));
    m = std::max(m, linf_distance(a.layers[i].bias, b.layers[i].bias));
  }
  return m;
}

double linf_norm(const NetworkParams& params) {
  double m = 0.0;
  for (const auto& layer : params.layers) {
    for (double v : layer.weights.data) m = std::max(m, std::abs(v));
    for (double v : layer.bias) m = std::max(m, std::abs(v));
  }
  return m;
}

namespace {

void affine(const Layer& layer, std::span<const double> in, std::vector<double>& out) {
  out.assign(layer.bias.begin(), layer.bias.end());
  for (std::size_t r = 0; r < layer.weights.rows; ++r) {
    const auto row = layer.weights.row(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * in[c];
    out[r] += acc;
  }
}

void require_finite(std::span<const double> v, std::size_t layer) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw NumericError(layer, "non-finite value in layer " + std::to_string(layer));
    }
  }
}

void check_input(const Architecture& arch, std::span<const double> x) {
  if (x.size() != arch.input_dim()) throw StructuralError("input has wrong dimension");
}

}  // namespace

std::vector<double> forward(const Architecture& arch, const NetworkParams& params,
                            std::span<const double> x) {
  check_shapes(arch, params);
  check_input(arch, x);
  require_finite(x, 0);
  std::vector<double> h(x.begin(), x.end());
  std::vector<double> z;
  for (std::size_t l = 1; l <= arch.depth(); ++l) {
    affine(params.layers[l - 1], h, z);
    const Activation& act = arch.activation(l);
    for (double& v : z) v = act.apply(v);
    require_finite(z, l);
    h.swap(z);
  }
  affine(params.layers.back(), h, z);
  require_finite(z, arch.depth() + 1);
  return z;
}

std::vector<std::vector<double>> hidden_preactivations(const Architecture& arch,
                                                       const NetworkParams& params,
                                                       std::span<const double> x) {
  check_shapes(arch, params);
  check_input(arch, x);
  std::vector<std::vector<double>> pre;
  std::vector<double> h(x.begin(), x.end());
  std::vector<double> z;
  for (std::size_t l = 1; l <= arch.depth(); ++l) {
    affine(params.layers[l - 1], h, z);
    pre.push_back(z);
    const Activation& act = arch.activation(l);
    for (double& v : z) v = act.apply(v);
    h.swap(z);
  }
  return pre;
}

Loss Loss::squared_error() {
  Loss loss;
  loss.value = [](std::span<const double> o, std::span<const double> t) {
    double s = 0.0;
    for (std::size_t k = 0; k < o.size(); ++k) s += (o[k] - t[k]) * (o[k] - t[k]);
    return s;
  };
  loss.output_gradient = [](std::span<const double> o, std::span<const double> t) {
    std::vector<double> g(o.size());
    for (std::size_t k = 0; k < o.size(); ++k) g[k] = 2.0 * (o[k] - t[k]);
    return g;
  };
  return loss;
}

Loss Loss::constant(double c) {
  Loss loss;
  loss.value = [c](std::span<const double>, std::span<const double>) { return c; };
  loss.output_gradient = [](std::span<const double> o, std::span<const double>) {
    return std::vector<double>(o.size(), 0.0);
  };
  return loss;
}

double accumulate_gradient(const Architecture& arch, const NetworkParams& params,
                           const Loss& loss, std::span<const double> x,
                           std::span<const double> target, double scale, NetworkParams& out) {
  check_shapes(arch, params);
  check_shapes(arch, out);
  check_input(arch, x);
  if (target.size() != arch.output_dim()) throw StructuralError("target has wrong dimension");

  const std::size_t L = arch.depth();
  // activations_in[l] is the input to layer l+1 (activations_in[0] = x).
  std::vector<std::vector<double>> activations_in(L + 1);
  std::vector<std::vector<double>> pre(L);
  activations_in[0].assign(x.begin(), x.end());
  for (std::size_t l = 1; l <= L; ++l) {
    affine(params.layers[l - 1], activations_in[l - 1], pre[l - 1]);
    const Activation& act = arch.activation(l);
    activations_in[l].resize(pre[l - 1].size());
    for (std::size_t i = 0; i < pre[l - 1].size(); ++i) {
      activations_in[l][i] = act.apply(pre[l - 1][i]);
    }
  }
  std::vector<double> output;
  affine(params.layers[L], activations_in[L], output);
  const double value = loss.value(output, target);

  std::vector<double> delta = loss.output_gradient(output, target);
  for (std::size_t l = L + 1; l >= 1; --l) {
    const Layer& layer = params.layers[l - 1];
    Layer& g = out.layers[l - 1];
    const auto& in = activations_in[l - 1];
    for (std::size_t r = 0; r < layer.weights.rows; ++r) {
      const double d = scale * delta[r];
      g.bias[r] += d;
      auto grow = g.weights.row(r);
      for (std::size_t c = 0; c < in.size(); ++c) grow[c] += d * in[c];
    }
    if (l == 1) break;
    std::vector<double> back(layer.weights.cols, 0.0);
    for (std::size_t r = 0; r < layer.weights.rows; ++r) {
      const auto row = layer.weights.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) back[c] += row[c] * delta[r];
    }
    const Activation& act = arch.activation(l - 1);
    for (std::size_t c = 0; c < back.size(); ++c) back[c] *= act.derivative(pre[l - 2][c]);
    delta.swap(back);
  }
  return value;
}

NetworkParams gradient(const Architecture& arch, const NetworkParams& params, const Loss& loss,
                       std::span<const double> x, std::span<const double> target) {
  NetworkParams g = NetworkParams::zeros(arch);
  accumulate_gradient(arch, params, loss, x, target, 1.0, g);
  return g;
}

double hidden_range_bound(const Architecture& arch, double weight_bound, double /*input_radius*/,
                          std::size_t i, std::span<const double> rho) {
  if (i == 0 || i > arch.depth()) throw DomainError("hidden layer index out of range");
  if (rho.size() + 1 < i) throw DomainError("need rho_j for every j < i");
  double bound = std::pow(2.0 * weight_bound, static_cast<double>(i));
  for (std::size_t j = 1; j < i; ++j) bound *= rho[j - 1] * static_cast<double>(arch.width(j));
  return bound;
}

std::vector<double> default_lipschitz_constants(const Architecture& arch, double weight_bound,
                                                double input_radius) {
  std::vector<double> rho;
  for (std::size_t i = 1; i <= arch.depth(); ++i) {
    const double range = hidden_range_bound(arch, weight_bound, input_radius, i, rho);
    rho.push_back(arch.activation(i).lipschitz_on(range));
  }
  return rho;
}

double hidden_range_bound(const Architecture& arch, double weight_bound, double input_radius,
                          std::size_t i) {
  if (i == 0 || i > arch.depth()) throw DomainError("hidden layer index out of range");
  const auto rho = default_lipschitz_constants(arch, weight_bound, input_radius);
  return hidden_range_bound(arch, weight_bound, input_radius, i, rho);
}

}  // namespace fequiv
