#pragma once

#include <string>
#include <string_view>

namespace fequiv {

enum class ActivationKind { kReLU, kLeakyReLU, kTanh, kSigmoid, kIdentity };

// Pointwise activation with the symmetry flags used to gate transforms.
//
// LeakyReLU is max{a*x, x} for a > 0, which is positive homogeneous for every
// a. The ReLU derivative at 0 is fixed to 0.
class Activation {
 public:
  static Activation relu() { return Activation(ActivationKind::kReLU, 0.0); }
  static Activation leaky_relu(double slope);
  static Activation tanh() { return Activation(ActivationKind::kTanh, 0.0); }
  static Activation sigmoid() { return Activation(ActivationKind::kSigmoid, 0.0); }
  static Activation identity() { return Activation(ActivationKind::kIdentity, 0.0); }

  // Accepts "relu", "tanh", "sigmoid", "identity", "leaky_relu" (slope 0.01)
  // and "leaky_relu:<slope>".
  static Activation parse(std::string_view name);

  ActivationKind kind() const noexcept { return kind_; }
  double slope() const noexcept { return slope_; }

  double apply(double x) const noexcept;
  double derivative(double x) const noexcept;

  // Upper bound on |s(x) - s(y)| / |x - y| over x != y in [-radius, radius].
  double lipschitz_on(double radius) const noexcept;

  bool is_positive_homogeneous() const noexcept;
  bool is_odd() const noexcept;

  std::string name() const;

  friend bool operator==(const Activation&, const Activation&) = default;

 private:
  Activation(ActivationKind kind, double slope) : kind_(kind), slope_(slope) {}

  ActivationKind kind_;
  double slope_;
};

}  // namespace fequiv
