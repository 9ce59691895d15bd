#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "piag/engine.hpp"

namespace piag {

// ---------------------------------------------------------------------------
// Step sizes and rate bounds
// ---------------------------------------------------------------------------

/// (16 / mu) * [(1 + 1/(48 Q))^(1/(K+1)) - 1] with Q = L / mu. Never exceeds
/// 1 / (3 L (K+1)).
double theorem1_step_size(double mu, double L, int K);

/// 1 / (L (K+1)), the largest step for which the descent and direction
/// inequalities along PIAG trajectories are claimed.
double classical_step_size(double L, int K);

enum class StepPolicyKind { theorem1_exact, theorem1_fraction, classical_smoothness };

std::string_view to_string(StepPolicyKind kind);
StepPolicyKind step_policy_from_string(std::string_view name);

struct StepSizePolicy {
  StepPolicyKind kind = StepPolicyKind::theorem1_exact;
  double fraction = 1.0;  // used by theorem1_fraction, in (0, 1]

  double step_size(double mu, double L, int K) const;
};

/// (1 + eta mu / 16)^(-k)
double rate_eq7(double eta, double mu, long long k);

/// (1 - 1 / (49 Q (K+1)))^k
double rate_eq8(double Q, int K, long long k);

/// ceil(49 Q (K+1) ln(F0 / epsilon)); 0 when F0 <= epsilon.
long long corollary1_budget(double Q, int K, double F0, double epsilon);

// ---------------------------------------------------------------------------
// Check reports
// ---------------------------------------------------------------------------

enum class Verdict { pass, fail, not_applicable, condition_not_met, precondition_violated, inconclusive };

std::string_view to_string(Verdict verdict);

/// Residuals are signed violations: positive means the inequality is broken
/// by that much, and the check holds iff worst_residual <= tolerance.
struct CheckEntry {
  std::string name;
  Verdict verdict = Verdict::not_applicable;
  double worst_residual = 0.0;
  long long worst_iteration = -1;
  double tolerance = 0.0;

  bool holds() const { return verdict == Verdict::pass; }
};

struct CheckReport {
  std::vector<CheckEntry> entries;

  void add(CheckEntry entry) { entries.push_back(std::move(entry)); }
  bool any_fail() const;
  const CheckEntry* find(std::string_view name) const;
  /// One line per check:
  /// `check=<name> verdict=<v> worst_residual=<r> worst_iteration=<k> tolerance=<t>`
  std::string to_text() const;
};

// ---------------------------------------------------------------------------
// Trajectory checks
// ---------------------------------------------------------------------------

/// F_{k+1} <= F_k - eta/2 |d_k|^2 + eta^2 L/2 sum_{j=(k-K)_+}^{k-1} |d_j|^2.
/// Not applicable unless eta <= 1/(L(K+1)) and the trace respects K.
CheckEntry check_lemma1(const RunTrace& trace, double L, int K, double tol);

/// -|d_k|^2 <= -(mu/4) F_{k+1} + eta L sum_{j=(k-K)_+}^{k-1} |d_j|^2.
CheckEntry check_lemma2(const RunTrace& trace, double mu, double L, int K, double tol);

/// Perturbed contraction: alpha Z_{k+1} <= Z_k - beta Y_k + gamma sum_{j=k-A}^{k} Y_j.
struct ContractionSequenceSpec {
  double alpha = 2.0;
  double beta = 0.0;
  double gamma = 0.0;
  int A = 0;
  std::vector<double> Z;
  std::vector<double> Y;  // Y_j = 0 for j < 0
};

/// gamma (alpha^(A+1) - 1) <= beta (alpha - 1), up to a 1e-12 relative slack.
bool contraction_condition_holds(double alpha, double beta, double gamma, int A);

/// Verifies the recursion first (precondition_violated otherwise), then the
/// decay condition (condition_not_met otherwise), then Z_k <= alpha^-k Z_0.
CheckEntry check_lemma3_sequence(const ContractionSequenceSpec& spec, double tol);

/// Maps a trajectory onto the contraction form with Z_k = F_k,
/// Y_k = |d_k|^2, alpha = 1 + eta mu/16, beta = eta/4, gamma = 3 eta^2 L/4, A = K.
ContractionSequenceSpec contraction_spec_from_trace(const RunTrace& trace, double mu, double L, int K);

/// (1 + eta mu/16) F_{k+1} <= F_k - eta/4 |d_k|^2 + 3 eta^2 L/4 sum_{j=(k-K)_+}^{k-1} |d_j|^2,
/// the combined inequality obtained from the two trajectory lemmas.
CheckEntry check_combined_recursion(const RunTrace& trace, double mu, double L, int K, double tol);

/// Entries "theorem1_eq7" and "theorem1_eq8". The second is only asserted when eta
/// equals the exact theorem-1 step size.
std::vector<CheckEntry> check_theorem1(const RunTrace& trace, double mu, double Q, int K, double eta,
                                       double tol);

/// The first k with F_k <= epsilon must not exceed corollary1_budget.
CheckEntry check_corollary1(const RunTrace& trace, double mu, double Q, int K, double epsilon);

}  // namespace piag
