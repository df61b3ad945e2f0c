#pragma once

#include <string_view>

namespace modeseek {

enum class KernelType { Gaussian, Epanechnikov };

/// Radial kernel profile K(t), t = ||(x - x_n) / sigma||^2.
///
/// Gaussian:      K(t) = exp(-t/2), K'(t) = -K(t)/2.
/// Epanechnikov:  K(t) = 1 - t on [0,1), 0 beyond; K'(t) = -1 on [0,1], 0 beyond.
/// The Epanechnikov derivative at t = 1 takes the inside value.
class Kernel {
 public:
  constexpr Kernel() = default;
  constexpr explicit Kernel(KernelType type) : type_(type) {}

  static constexpr Kernel gaussian() { return Kernel(KernelType::Gaussian); }
  static constexpr Kernel epanechnikov() { return Kernel(KernelType::Epanechnikov); }

  constexpr KernelType type() const { return type_; }
  constexpr bool is_gaussian() const { return type_ == KernelType::Gaussian; }

  double profile(double t) const;
  double derivative(double t) const;

  std::string_view name() const;

 private:
  KernelType type_ = KernelType::Gaussian;
};

/// Parses "gaussian" / "epanechnikov". Throws InputError otherwise.
Kernel parse_kernel(std::string_view name);

}  // namespace modeseek
