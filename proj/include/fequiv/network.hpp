#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "fequiv/activation.hpp"
#include "fequiv/matrix.hpp"

namespace fequiv {

// Layer widths (d_0, d_1, ..., d_L, d_{L+1}) and one activation per hidden
// layer. Hidden layers are numbered 1..L throughout the library; layer L+1 is
// the affine output map.
class Architecture {
 public:
  Architecture(std::size_t input_dim, std::vector<std::size_t> hidden_widths,
               std::vector<Activation> activations, std::size_t output_dim = 1);

  // Same activation on every hidden layer.
  Architecture(std::size_t input_dim, std::vector<std::size_t> hidden_widths,
               Activation activation, std::size_t output_dim = 1);

  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t output_dim() const noexcept { return output_dim_; }
  const std::vector<std::size_t>& hidden_widths() const noexcept { return hidden_; }
  const std::vector<Activation>& activations() const noexcept { return activations_; }

  // L, the number of hidden layers.
  std::size_t depth() const noexcept { return hidden_.size(); }

  // d_l for l in 0..L+1.
  std::size_t width(std::size_t l) const;

  // Activation of hidden layer l (1-based).
  const Activation& activation(std::size_t l) const;

  // S: total number of weights and biases.
  std::size_t param_count() const noexcept;

  // S_l = d_{l-1} d_l + d_l for l in 1..L+1.
  std::size_t layer_param_count(std::size_t l) const;

  // U: number of hidden neurons.
  std::size_t hidden_neuron_count() const noexcept;

  // Largest hidden width.
  std::size_t max_hidden_width() const noexcept;

  friend bool operator==(const Architecture&, const Architecture&) = default;

 private:
  std::size_t input_dim_;
  std::vector<std::size_t> hidden_;
  std::vector<Activation> activations_;
  std::size_t output_dim_;
};

struct Layer {
  Matrix weights;             // d_l x d_{l-1}
  std::vector<double> bias;   // d_l

  friend bool operator==(const Layer&, const Layer&) = default;
};

// theta = (W^(1), b^(1), ..., W^(L+1), b^(L+1)).
struct NetworkParams {
  std::vector<Layer> layers;

  static NetworkParams zeros(const Architecture& arch);

  // Flattened in layer order, each layer as W row-major followed by b.
  std::vector<double> flatten() const;
  static NetworkParams unflatten(const Architecture& arch, std::span<const double> values);

  friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

// Throws StructuralError when the parameter shapes do not match the
// architecture.
void check_shapes(const Architecture& arch, const NetworkParams& params);

bool bit_equal(const NetworkParams& a, const NetworkParams& b);
double linf_distance(const NetworkParams& a, const NetworkParams& b);
double linf_norm(const NetworkParams& params);

// Evaluates f(x; theta). Throws StructuralError on shape mismatch and
// NumericError (carrying the 1-based layer) when a value turns non-finite.
std::vector<double> forward(const Architecture& arch, const NetworkParams& params,
                            std::span<const double> x);

// Pre-activations W^(l) h + b^(l) of every hidden layer, l = 1..L.
std::vector<std::vector<double>> hidden_preactivations(const Architecture& arch,
                                                       const NetworkParams& params,
                                                       std::span<const double> x);

// Scalar loss of the network output against a target, with its gradient in
// the output.
struct Loss {
  std::function<double(std::span<const double> output, std::span<const double> target)> value;
  std::function<std::vector<double>(std::span<const double> output,
                                    std::span<const double> target)>
      output_gradient;

  // sum_k (o_k - t_k)^2
  static Loss squared_error();
  static Loss constant(double c);
};

// Reverse-mode gradient of loss(f(x; theta), target) with respect to theta.
NetworkParams gradient(const Architecture& arch, const NetworkParams& params, const Loss& loss,
                       std::span<const double> x, std::span<const double> target);

// Accumulates scale * gradient into `out` and returns the loss value; the
// allocation-light path used by training loops.
double accumulate_gradient(const Architecture& arch, const NetworkParams& params,
                           const Loss& loss, std::span<const double> x,
                           std::span<const double> target, double scale, NetworkParams& out);

// B^(i) = (2B)^i * prod_{j<i} rho_j d_j for hidden layer i in 1..L. The input
// radius is accepted for interface symmetry with the covering bounds; the
// bound does not depend on it. `rho` must hold at least i-1 constants.
double hidden_range_bound(const Architecture& arch, double weight_bound, double input_radius,
                          std::size_t i, std::span<const double> rho);

// Same, with rho_j taken from each activation's Lipschitz constant on
// [-B^(j), B^(j)].
double hidden_range_bound(const Architecture& arch, double weight_bound, double input_radius,
                          std::size_t i);

// rho_1..rho_L derived from the activations on their hidden-range intervals.
std::vector<double> default_lipschitz_constants(const Architecture& arch, double weight_bound,
                                                double input_radius);

}  // namespace fequiv
