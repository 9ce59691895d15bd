#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace piag {

using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Component functions
// ---------------------------------------------------------------------------

enum class ComponentKind { quadratic, regularized_logistic };

/// f(x) = 1/2 * sum_j curvature_j * (x_j - center_j)^2
struct QuadraticComponent {
  Vector curvature;
  Vector center;
};

/// f(x) = log(1 + exp(-label * <row, x>)) + ridge/2 * |x|^2
struct LogisticComponent {
  Vector row;
  double label = 1.0;
  double ridge = 0.0;
};

/// One smooth convex summand f_i together with its gradient Lipschitz
/// constant L_i. The constant is computed from the parameters, never guessed.
class ComponentFunction {
 public:
  static ComponentFunction quadratic(Vector curvature, Vector center);
  static ComponentFunction logistic(Vector row, double label, double ridge);

  ComponentKind kind() const;
  Eigen::Index dimension() const { return dimension_; }
  double lipschitz() const { return lipschitz_; }

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;

  const QuadraticComponent* as_quadratic() const { return std::get_if<QuadraticComponent>(&data_); }
  const LogisticComponent* as_logistic() const { return std::get_if<LogisticComponent>(&data_); }

 private:
  ComponentFunction(std::variant<QuadraticComponent, LogisticComponent> data, Eigen::Index n,
                    double lipschitz)
      : data_(std::move(data)), dimension_(n), lipschitz_(lipschitz) {}

  std::variant<QuadraticComponent, LogisticComponent> data_;
  Eigen::Index dimension_;
  double lipschitz_;
};

// ---------------------------------------------------------------------------
// Regularizer r
// ---------------------------------------------------------------------------

enum class RegularizerKind { zero, l1, squared_l2, box_indicator, elastic_net };

/// Closed proper convex r. Conventions:
///   l1           r(x) = lambda * |x|_1
///   squared_l2   r(x) = lambda/2 * |x|^2
///   box          r(x) = 0 on [lower, upper]^n, +inf outside
///   elastic_net  r(x) = lambda * |x|_1 + lambda2/2 * |x|^2
struct Regularizer {
  RegularizerKind kind = RegularizerKind::zero;
  double lambda = 0.0;
  double lambda2 = 0.0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  static Regularizer zero() { return {}; }
  static Regularizer l1(double lambda);
  static Regularizer squared_l2(double lambda);
  static Regularizer box(double lower, double upper);
  static Regularizer elastic_net(double lambda, double lambda2);
};

std::string_view to_string(RegularizerKind kind);
RegularizerKind regularizer_kind_from_string(std::string_view name);

// ---------------------------------------------------------------------------
// Composite problem F = f + r
// ---------------------------------------------------------------------------

enum class InstanceKind { quadratic, logistic, custom };

std::string_view to_string(InstanceKind kind);
InstanceKind instance_kind_from_string(std::string_view name);

/// F(x) = (1/m) sum_i f_i(x) + r(x), with L the mean of the L_i, mu the
/// strong-convexity modulus of the smooth part and Q = L / mu.
/// Immutable once built.
class CompositeProblem {
 public:
  CompositeProblem(std::vector<ComponentFunction> components, Regularizer regularizer, double mu,
                   InstanceKind kind = InstanceKind::custom, std::uint64_t seed = 0);

  std::size_t m() const { return components_.size(); }
  Eigen::Index n() const { return n_; }
  double mu() const { return mu_; }
  double L() const { return L_; }
  double Q() const { return L_ / mu_; }

  const std::vector<ComponentFunction>& components() const { return components_; }
  const ComponentFunction& component(std::size_t i) const;
  const Regularizer& regularizer() const { return regularizer_; }
  InstanceKind kind() const { return kind_; }
  std::uint64_t seed() const { return seed_; }

  CompositeProblem with_regularizer(Regularizer regularizer) const;

 private:
  std::vector<ComponentFunction> components_;
  Regularizer regularizer_;
  Eigen::Index n_ = 0;
  double mu_ = 0.0;
  double L_ = 0.0;
  InstanceKind kind_;
  std::uint64_t seed_;
};

/// f(x) = (1/m) sum_i f_i(x)
double eval_f(const CompositeProblem& problem, const Vector& x);

/// Gradient of component i (0-based).
Vector eval_grad_component(const CompositeProblem& problem, std::size_t i, const Vector& x);

Vector eval_grad_f(const CompositeProblem& problem, const Vector& x);

/// F(x) = f(x) + r(x); +inf outside dom r.
double eval_objective(const CompositeProblem& problem, const Vector& x);

// ---------------------------------------------------------------------------
// Instance generators
// ---------------------------------------------------------------------------

/// Diagonal quadratics with mean L_i equal to `L_target` and smallest mean
/// curvature equal to `mu`. Coordinate 0 carries curvature L_target in every
/// component, the last coordinate has mean curvature exactly mu, and any
/// coordinates in between are drawn from [mu, L_target]. With n == 1 the only
/// consistent instance has mu == L_target.
CompositeProblem make_quadratic_instance(std::size_t m, Eigen::Index n, double mu, double L_target,
                                         std::uint64_t seed,
                                         Regularizer regularizer = Regularizer::zero());

/// Ridge-regularised logistic losses, one data row per component. Rows are
/// drawn from [-1, 1]^n / sqrt(n); when `L_target` is given they are rescaled
/// so that the mean of L_i = mu + |a_i|^2 / 4 equals it.
CompositeProblem make_logistic_instance(std::size_t m, Eigen::Index n, double mu, std::uint64_t seed,
                                        std::optional<double> L_target = std::nullopt,
                                        Regularizer regularizer = Regularizer::zero());

// ---------------------------------------------------------------------------
// Instance descriptions
// ---------------------------------------------------------------------------

/// Byte-stable `key = value` description (kind, m, n, mu, L, seed,
/// regularizer, then per-component parameters).
std::string serialize_instance(const CompositeProblem& problem);
CompositeProblem deserialize_instance(std::string_view text);
std::uint64_t instance_hash(const CompositeProblem& problem);

}  // namespace piag
