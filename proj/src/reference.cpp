#include "piag/reference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

#include "piag/errors.hpp"
#include "piag/prox.hpp"
#include "piag/text_format.hpp"

namespace piag {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
// The optimum is also pinned in x: the fixed-point residual must be this small.
constexpr double kFixedPointTol = 1e-11;

// Rough magnitude of the terms summed when evaluating F(x), for a rounding
// allowance on F_star.
double objective_scale(const CompositeProblem& problem, const Vector& x) {
  double s = 0.0;
  for (const auto& c : problem.components()) s += std::abs(c.value(x));
  return s / static_cast<double>(problem.m()) + std::abs(eval_reg(problem.regularizer(), x));
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string_view to_string(ReferenceMethod method) {
  return method == ReferenceMethod::closed_form ? "closed-form" : "prox-gradient";
}

std::optional<ReferenceSolution> solve_closed_form(const CompositeProblem& problem) {
  const auto n = problem.n();
  Vector A = Vector::Zero(n);   // mean curvature
  Vector Ab = Vector::Zero(n);  // mean curvature * center
  for (const auto& c : problem.components()) {
    const auto* q = c.as_quadratic();
    if (!q) return std::nullopt;
    A += q->curvature;
    Ab += q->curvature.cwiseProduct(q->center);
  }
  A /= static_cast<double>(problem.m());
  Ab /= static_cast<double>(problem.m());
  if ((A.array() <= 0.0).any()) return std::nullopt;

  // Per coordinate: minimise 1/2 A (x - b)^2 + r_j(x) with b = Ab / A.
  const auto& r = problem.regularizer();
  Vector x(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    switch (r.kind) {
      case RegularizerKind::zero:
        x[j] = Ab[j] / A[j];
        break;
      case RegularizerKind::l1:
        x[j] = soft_threshold(Ab[j], r.lambda) / A[j];
        break;
      case RegularizerKind::squared_l2:
        x[j] = Ab[j] / (A[j] + r.lambda);
        break;
      case RegularizerKind::elastic_net:
        x[j] = soft_threshold(Ab[j], r.lambda) / (A[j] + r.lambda2);
        break;
      case RegularizerKind::box_indicator:
        x[j] = std::clamp(Ab[j] / A[j], r.lower, r.upper);
        break;
    }
  }
  ReferenceSolution sol;
  sol.F_star = eval_objective(problem, x);
  sol.accuracy_bound = 64.0 * kEps * std::max(1.0, objective_scale(problem, x));
  sol.x_star = std::move(x);
  sol.method = ReferenceMethod::closed_form;
  return sol;
}

ReferenceSolution solve_prox_gradient(const CompositeProblem& problem, double tol,
                                      std::optional<Vector> start, long long max_iters) {
  if (!(tol > 0.0)) throw InputError("reference tolerance must be positive");
  const double L = problem.L();
  const double mu = problem.mu();
  if (!(L > 0.0)) throw InputError("reference solver needs L > 0");
  const double step = 1.0 / L;
  const double certificate_scale = L * L / (2.0 * mu);

  Vector x = start ? *start : Vector::Zero(problem.n());
  if (x.size() != problem.n()) throw InputError("reference start has the wrong dimension");
  for (long long it = 1; it <= max_iters; ++it) {
    Vector next = prox(problem.regularizer(), step, x - step * eval_grad_f(problem, x)).point;
    const double move = (next - x).norm();
    const double certificate = certificate_scale * move * move;
    x = std::move(next);
    if (certificate <= tol && move <= kFixedPointTol * std::max(1.0, x.norm())) {
      ReferenceSolution sol;
      sol.F_star = eval_objective(problem, x);
      sol.accuracy_bound = certificate + 64.0 * kEps * std::max(1.0, objective_scale(problem, x));
      sol.x_star = std::move(x);
      sol.method = ReferenceMethod::prox_gradient;
      sol.iterations = it;
      return sol;
    }
  }
  throw OracleError("proximal gradient reference did not certify within " + std::to_string(max_iters) +
                    " iterations");
}

ReferenceSolution solve_reference(const CompositeProblem& problem) {
  if (auto sol = solve_closed_form(problem)) return *sol;
  return solve_prox_gradient(problem, 1e-13);
}

double optimality_residual(const CompositeProblem& problem, const Vector& x) {
  const double step = 1.0 / problem.L();
  return (x - prox(problem.regularizer(), step, x - step * eval_grad_f(problem, x)).point).norm();
}

// ---------------------------------------------------------------------------

ReferenceCache::ReferenceCache(std::string directory) : directory_(std::move(directory)) {
  std::filesystem::create_directories(directory_);
}

std::string ReferenceCache::path_for(const CompositeProblem& problem) const {
  return (std::filesystem::path(directory_) / ("ref_" + hex64(instance_hash(problem)) + ".txt")).string();
}

std::optional<ReferenceSolution> ReferenceCache::load(const CompositeProblem& problem) const {
  const auto path = path_for(problem);
  if (!std::filesystem::exists(path)) return std::nullopt;
  const auto doc = KeyValueDoc::read_file(path);
  if (doc.get("instance_hash") != hex64(instance_hash(problem))) return std::nullopt;
  ReferenceSolution sol;
  sol.method = doc.get("method") == "closed-form" ? ReferenceMethod::closed_form : ReferenceMethod::prox_gradient;
  sol.F_star = doc.get_double("F_star");
  sol.accuracy_bound = doc.get_double("accuracy_bound");
  sol.iterations = doc.get_integer("iterations");
  sol.x_star = doc.get_vector("x_star");
  if (sol.x_star.size() != problem.n()) return std::nullopt;
  return sol;
}

void ReferenceCache::store(const CompositeProblem& problem, const ReferenceSolution& solution) const {
  KeyValueDoc doc;
  doc.set("instance_hash", hex64(instance_hash(problem)));
  doc.set("method", std::string(to_string(solution.method)));
  doc.set("F_star", solution.F_star);
  doc.set("accuracy_bound", solution.accuracy_bound);
  doc.set("iterations", solution.iterations);
  doc.set("x_star", solution.x_star);
  write_file_atomically(path_for(problem), doc.to_string());
}

ReferenceSolution ReferenceCache::solve(const CompositeProblem& problem) const {
  if (auto cached = load(problem)) return *cached;
  auto sol = solve_reference(problem);
  store(problem, sol);
  return sol;
}

}  // namespace piag
