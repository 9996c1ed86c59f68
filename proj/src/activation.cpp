#include "fequiv/activation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "fequiv/errors.hpp"

namespace fequiv {

Activation Activation::leaky_relu(double slope) {
  if (!(slope > 0.0) || !std::isfinite(slope)) {
    throw DomainError("leaky_relu slope must be positive and finite");
  }
  return Activation(ActivationKind::kLeakyReLU, slope);
}

Activation Activation::parse(std::string_view name) {
  if (name == "relu") return relu();
  if (name == "tanh") return tanh();
  if (name == "sigmoid") return sigmoid();
  if (name == "identity") return identity();
  if (name == "leaky_relu") return leaky_relu(0.01);
  constexpr std::string_view prefix = "leaky_relu:";
  if (name.starts_with(prefix)) {
    const std::string tail(name.substr(prefix.size()));
    std::size_t used = 0;
    double slope = 0.0;
    try {
      slope = std::stod(tail, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tail.size()) {
      throw DomainError("bad leaky_relu slope: " + tail);
    }
    return leaky_relu(slope);
  }
  throw DomainError("unknown activation: " + std::string(name));
}

double Activation::apply(double x) const noexcept {
  switch (kind_) {
    case ActivationKind::kReLU:
      return x > 0.0 ? x : 0.0;
    case ActivationKind::kLeakyReLU:
      return std::max(slope_ * x, x);
    case ActivationKind::kTanh:
      return std::tanh(x);
    case ActivationKind::kSigmoid:
      return 1.0 / (1.0 + std::exp(-x));
    case ActivationKind::kIdentity:
      return x;
  }
  return x;
}

double Activation::derivative(double x) const noexcept {
  switch (kind_) {
    case ActivationKind::kReLU:
      return x > 0.0 ? 1.0 : 0.0;
    case ActivationKind::kLeakyReLU:
      // max{a x, x}: slope a wins where a x > x.
      if (x > 0.0) return slope_ > 1.0 ? slope_ : 1.0;
      if (x < 0.0) return slope_ < 1.0 ? slope_ : 1.0;
      return std::min(slope_, 1.0);
    case ActivationKind::kTanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case ActivationKind::kSigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-x));
      return s * (1.0 - s);
    }
    case ActivationKind::kIdentity:
      return 1.0;
  }
  return 1.0;
}

double Activation::lipschitz_on(double /*radius*/) const noexcept {
  // Every supported activation attains its largest slope on any symmetric
  // interval around 0, so the constant does not shrink with the radius.
  switch (kind_) {
    case ActivationKind::kReLU:
    case ActivationKind::kTanh:
    case ActivationKind::kIdentity:
      return 1.0;
    case ActivationKind::kLeakyReLU:
      return std::max(slope_, 1.0);
    case ActivationKind::kSigmoid:
      return 0.25;
  }
  return 1.0;
}

bool Activation::is_positive_homogeneous() const noexcept {
  return kind_ == ActivationKind::kReLU || kind_ == ActivationKind::kLeakyReLU ||
         kind_ == ActivationKind::kIdentity;
}

bool Activation::is_odd() const noexcept {
  return kind_ == ActivationKind::kTanh || kind_ == ActivationKind::kIdentity;
}

std::string Activation::name() const {
  switch (kind_) {
    case ActivationKind::kReLU:
      return "relu";
    case ActivationKind::kLeakyReLU: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "leaky_relu:%.17g", slope_);
      return buf;
    }
    case ActivationKind::kTanh:
      return "tanh";
    case ActivationKind::kSigmoid:
      return "sigmoid";
    case ActivationKind::kIdentity:
      return "identity";
  }
  return "identity";
}

}  // namespace fequiv
