#include "frd/nonlinearity.hpp"

#include "frd/error.hpp"

#include <algorithm>
#include <limits>

namespace frd {

Vector Nonlinearity::apply(const Vector& u) const { return u.unaryExpr(value); }

Vector Nonlinearity::apply_derivative(const Vector& u) const { return u.unaryExpr(derivative); }

Nonlinearity make_nonlinearity(std::string_view name, double kappa) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  Nonlinearity f;
  f.name = std::string(name);
  if (name == "zero") {
    f.value = [](double) { return 0.0; };
    f.derivative = [](double) { return 0.0; };
    f.primitive = [](double) { return 0.0; };
    f.liminf_ratio = 0.0;
    f.derivative_lower_bound = 0.0;
  } else if (name == "chaffee_infante") {
    f.value = [](double s) { return s * s * s - s; };
    f.derivative = [](double s) { return 3.0 * s * s - 1.0; };
    f.primitive = [](double s) { return 0.25 * s * s * s * s - 0.5 * s * s; };
    // f(s)s = s^4 - s^2 >= s^4/2 - 1/2
    f.growth_exponent = 4.0;
    f.liminf_ratio = inf;
    f.derivative_lower_bound = 1.0;
  } else if (name == "cubic_plus") {
    f.value = [](double s) { return s * s * s; };
    f.derivative = [](double s) { return 3.0 * s * s; };
    f.primitive = [](double s) { return 0.25 * s * s * s * s; };
    f.growth_exponent = 4.0;
    f.liminf_ratio = inf;
    f.derivative_lower_bound = 0.0;
  } else if (name == "linear") {
    f.value = [kappa](double s) { return kappa * s; };
    f.derivative = [kappa](double) { return kappa; };
    f.primitive = [kappa](double s) { return 0.5 * kappa * s * s; };
    if (kappa > 0) f.growth_exponent = 2.0;
    f.liminf_ratio = kappa;
    f.derivative_lower_bound = std::max(0.0, -kappa);
  } else {
    throw Error(ErrorKind::Config, "unknown nonlinearity '" + std::string(name) + "'");
  }
  return f;
}

std::vector<std::string> nonlinearity_names() { return {"zero", "chaffee_infante", "cubic_plus", "linear"}; }

}  // namespace frd
