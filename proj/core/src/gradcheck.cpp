#include "predcode/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace predcode {

Vector fd_gradient(const ScalarField& f, const Vector& x, double h) {
  if (!(h > 0.0)) throw NumericalError("fd_gradient: step must be positive");
  Vector g(x.size());
  Vector probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    probe[i] = xi + h;
    const double fp = f(probe);
    probe[i] = xi - h;
    const double fm = f(probe);
    probe[i] = xi;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NumericalError("fd_gradient: non-finite function value at coordinate " +
                           std::to_string(i));
    }
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

double max_relative_error(const Vector& a, const Vector& b, double floor) {
  if (a.size() != b.size()) throw DimensionError("max_relative_error", a.shape(), b.shape());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

}  // namespace predcode
