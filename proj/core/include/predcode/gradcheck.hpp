#pragma once

#include <functional>

#include "predcode/core.hpp"

namespace predcode {

using ScalarField = std::function<double(const Vector&)>;

/// Central-difference gradient: (f(x + h e_i) - f(x - h e_i)) / 2h per
/// coordinate. Throws NumericalError if any evaluation is non-finite or h <= 0.
Vector fd_gradient(const ScalarField& f, const Vector& x, double h = 1e-5);

/// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor). The floor keeps coordinates
/// whose true gradient is ~0 from dominating the comparison.
double max_relative_error(const Vector& a, const Vector& b, double floor = 1e-6);

}  // namespace predcode
