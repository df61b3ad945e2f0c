#include "modeseek/kernel.hpp"

#include <cmath>
#include <string>

#include "modeseek/error.hpp"

namespace modeseek {

double Kernel::profile(double t) const {
  switch (type_) {
    case KernelType::Gaussian:
      return std::exp(-0.5 * t);
    case KernelType::Epanechnikov:
      return t < 1.0 ? 1.0 - t : 0.0;
  }
  return 0.0;
}

double Kernel::derivative(double t) const {
  switch (type_) {
    case KernelType::Gaussian:
      return -0.5 * std::exp(-0.5 * t);
    case KernelType::Epanechnikov:
      return t <= 1.0 ? -1.0 : 0.0;
  }
  return 0.0;
}

std::string_view Kernel::name() const {
  return type_ == KernelType::Gaussian ? "gaussian" : "epanechnikov";
}

Kernel parse_kernel(std::string_view name) {
  if (name == "gaussian") return Kernel::gaussian();
  if (name == "epanechnikov") return Kernel::epanechnikov();
  throw InputError("unknown kernel '" + std::string(name) + "'");
}

}  // namespace modeseek
