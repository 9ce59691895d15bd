#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "piag/problems.hpp"

namespace piag {

enum class ReferenceMethod { closed_form, prox_gradient };

std::string_view to_string(ReferenceMethod method);

/// High-accuracy optimum. `accuracy_bound` bounds F(x_star) - inf F.
struct ReferenceSolution {
  Vector x_star;
  double F_star = 0.0;
  double accuracy_bound = 0.0;
  ReferenceMethod method = ReferenceMethod::closed_form;
  long long iterations = 0;

  /// F_star minus its error bound; never above the true optimal value.
  double deflated_F_star() const { return F_star - accuracy_bound; }
};

/// Coordinate-wise exact minimiser for diagonal-quadratic instances with any
/// supported regularizer. Returns nullopt when the problem has no closed form.
std::optional<ReferenceSolution> solve_closed_form(const CompositeProblem& problem);

inline constexpr long long kReferenceIterationCap = 10'000'000;

/// Proximal gradient with step 1/L, stopped once the strong-convexity
/// certificate (L^2 / (2 mu)) |x+ - x|^2 falls to `tol` and the fixed-point
/// residual |x+ - x| to 1e-11 max(1, |x|). Throws OracleError
/// past `max_iters`.
ReferenceSolution solve_prox_gradient(const CompositeProblem& problem, double tol,
                                      std::optional<Vector> start = std::nullopt,
                                      long long max_iters = kReferenceIterationCap);

/// Closed form when available, else proximal gradient to 1e-13.
ReferenceSolution solve_reference(const CompositeProblem& problem);

/// |x - prox_r^{1/L}(x - grad f(x) / L)|, zero exactly at the optimum.
double optimality_residual(const CompositeProblem& problem, const Vector& x);

/// On-disk memo of reference solutions keyed by the instance description hash.
class ReferenceCache {
 public:
  explicit ReferenceCache(std::string directory);

  std::string path_for(const CompositeProblem& problem) const;
  std::optional<ReferenceSolution> load(const CompositeProblem& problem) const;
  void store(const CompositeProblem& problem, const ReferenceSolution& solution) const;
  /// load() or solve_reference() followed by store().
  ReferenceSolution solve(const CompositeProblem& problem) const;

 private:
  std::string directory_;
};

}  // namespace piag
