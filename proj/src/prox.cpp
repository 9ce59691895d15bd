#include "piag/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "piag/errors.hpp"

namespace piag {

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

ProxResult prox(const Regularizer& reg, double eta, const Vector& y) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw InputError("prox step eta must be positive and finite");
  if (!y.allFinite()) throw InputError("prox input must be finite");

  Vector point(y.size());
  switch (reg.kind) {
    case RegularizerKind::zero:
      point = y;
      break;
    case RegularizerKind::l1:
      for (Eigen::Index j = 0; j < y.size(); ++j) point[j] = soft_threshold(y[j], eta * reg.lambda);
      break;
    case RegularizerKind::squared_l2:
      point = y / (1.0 + eta * reg.lambda);
      break;
    case RegularizerKind::elastic_net: {
      const double shrink = 1.0 + eta * reg.lambda2;
      for (Eigen::Index j = 0; j < y.size(); ++j) {
        point[j] = soft_threshold(y[j], eta * reg.lambda) / shrink;
      }
      break;
    }
    case RegularizerKind::box_indicator:
      if (reg.lower > reg.upper) throw InputError("empty box");
      point = y.cwiseMax(reg.lower).cwiseMin(reg.upper);
      break;
  }
  Vector subgradient = (y - point) / eta;
  return {std::move(point), std::move(subgradient)};
}

double eval_reg(const Regularizer& reg, const Vector& x) {
  switch (reg.kind) {
    case RegularizerKind::zero:
      return 0.0;
    case RegularizerKind::l1:
      return reg.lambda * x.lpNorm<1>();
    case RegularizerKind::squared_l2:
      return 0.5 * reg.lambda * x.squaredNorm();
    case RegularizerKind::elastic_net:
      return reg.lambda * x.lpNorm<1>() + 0.5 * reg.lambda2 * x.squaredNorm();
    case RegularizerKind::box_indicator:
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        if (x[j] < reg.lower || x[j] > reg.upper) return std::numeric_limits<double>::infinity();
      }
      return 0.0;
  }
  return 0.0;
}

}  // namespace piag
