#pragma once

#include "frd/assembly.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace frd {

/// Reaction term f together with f' and the primitive F (F(0) = 0), plus
/// the growth data the well-posedness hypotheses are stated in:
///   liminf f(s)/s as |s| -> inf,  C|s|^p - c <= f(s)s,  f'(s) >= -C_f.
struct Nonlinearity {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  std::function<double(double)> primitive;
  std::optional<double> growth_exponent;  // p
  double liminf_ratio = 0;                // may be +inf
  double derivative_lower_bound = 0;      // C_f

  Vector apply(const Vector& u) const;
  Vector apply_derivative(const Vector& u) const;
};

/// Registry: "zero", "chaffee_infante" (s^3 - s), "cubic_plus" (s^3) and
/// "linear" (kappa s).
Nonlinearity make_nonlinearity(std::string_view name, double kappa = 1.0);

std::vector<std::string> nonlinearity_names();

}  // namespace frd
