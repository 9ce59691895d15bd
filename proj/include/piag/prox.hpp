#pragma once

#include "piag/problems.hpp"

namespace piag {

/// Output of prox_r^eta(y) = argmin_x { 1/2 |x - y|^2 + eta * r(x) }.
/// `subgradient` is the h in d r(point) with point + eta * h = y.
struct ProxResult {
  Vector point;
  Vector subgradient;
};

/// Closed-form proximal map for every supported regularizer.
/// Throws InputError if eta <= 0 or y has non-finite entries.
ProxResult prox(const Regularizer& reg, double eta, const Vector& y);

/// r(x), +inf outside the box of a box indicator.
double eval_reg(const Regularizer& reg, const Vector& x);

/// Scalar soft threshold sign(v) * max(|v| - t, 0).
double soft_threshold(double v, double t);

}  // namespace piag
