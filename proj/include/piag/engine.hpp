#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "piag/problems.hpp"
#include "piag/random.hpp"

namespace piag {

// ---------------------------------------------------------------------------
// Delay schedules
// ---------------------------------------------------------------------------

enum class ScheduleKind { cyclic, random_bounded, adversarial_deadline, full_refresh };

std::string_view to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(std::string_view name);

/// Decides which component gradients are recomputed at each iteration.
/// Every emitted set is nonempty and keeps every component's age k - tau
/// within K.
///
/// `staleness[i]` passed to refresh_set is the age component i had at the end
/// of the previous iteration, max(0, (k - 1) - tau_i). A component whose
/// staleness equals K must be refreshed at k.
///
///   cyclic               {k mod m}, plus any component at its deadline
///   random-bounded       one uniformly drawn index, plus any component at its deadline
///   adversarial-deadline exactly the components at their deadline; if none,
///                        the single stalest one (lowest index on ties)
///   full-refresh         every component
class DelaySchedule {
 public:
  DelaySchedule(ScheduleKind kind, int K, std::uint64_t seed = 0);

  ScheduleKind kind() const { return kind_; }
  int K() const { return K_; }
  std::uint64_t seed() const { return seed_; }

  std::vector<std::size_t> refresh_set(long long k, std::span<const long long> staleness);

 private:
  ScheduleKind kind_;
  int K_;
  std::uint64_t seed_;
  Rng rng_;
};

inline std::vector<std::size_t> schedule_refresh_set(DelaySchedule& schedule, long long k,
                                                     std::span<const long long> staleness) {
  return schedule.refresh_set(k, staleness);
}

// ---------------------------------------------------------------------------
// Gradient table
// ---------------------------------------------------------------------------

/// Stored component gradients grad f_i(x_{tau_i}), their sample iterations
/// tau_i, and the running sum of all stored gradients.
class GradientTable {
 public:
  /// All gradients evaluated at x0 with tau_i = 0.
  GradientTable(const CompositeProblem& problem, const Vector& x0);

  std::size_t size() const { return stored_.size(); }
  const Vector& stored(std::size_t i) const { return stored_.at(i); }
  long long sample_iteration(std::size_t i) const { return tau_.at(i); }
  const std::vector<long long>& sample_iterations() const { return tau_; }
  const Vector& running_sum() const { return sum_; }

  /// Recomputes the listed gradients at x and stamps them with iteration k.
  void refresh(const CompositeProblem& problem, std::span<const std::size_t> indices, const Vector& x,
               long long k);

  /// Per-component staleness as seen by a schedule entering iteration k.
  std::vector<long long> staleness_entering(long long k) const;

  /// max_i (k - tau_i).
  long long max_age(long long k) const;

  /// Replaces the running sum by a fresh summation and returns the drift
  /// |fresh - running| that had accumulated.
  double resync();

 private:
  std::vector<Vector> stored_;
  std::vector<long long> tau_;
  Vector sum_;
};

GradientTable init_table(const CompositeProblem& problem, const Vector& x0);

/// g = running_sum / m.
Vector aggregated_gradient(const GradientTable& table, std::size_t m);

// ---------------------------------------------------------------------------
// Iteration
// ---------------------------------------------------------------------------

struct StepResult {
  Vector x_next;
  Vector direction;  // d_k = (x_{k+1} - x_k) / eta = -g_k - h_{k+1}
  std::vector<std::size_t> refreshed;
};

/// Steps between full recomputations of the running gradient sum.
inline constexpr long long kResyncPeriod = 1000;

/// One PIAG iteration: refresh the scheduled gradients at x_k, aggregate,
/// then x_{k+1} = prox_r^eta(x_k - eta * g_k).
StepResult piag_step(const CompositeProblem& problem, GradientTable& table, DelaySchedule& schedule,
                     const Vector& x_k, double eta, long long k);

struct TraceRecord {
  long long k = 0;
  double F = 0.0;          // F(x_k) - F_star_ref
  double d_norm_sq = 0.0;  // |d_k|^2
  double eta = 0.0;
  long long max_staleness = 0;
};

/// Records k = 0..iterations. The last record's direction is the one the
/// method would take from x_final; x_final itself is x_{iterations}.
struct RunTrace {
  std::vector<TraceRecord> records;
  Vector x_final;
  long long iterations = 0;
  double F_star_ref = 0.0;
  int staleness_bound = 0;
  bool reached_epsilon = false;

  double F0() const { return records.front().F; }
  /// First k with F_k <= epsilon, or -1.
  long long hitting_iteration(double epsilon) const;
};

struct StopRule {
  long long max_iters = 200000;
  double epsilon = 0.0;
};

/// Iterates until F_k <= epsilon or k == max_iters. Throws DivergenceError if
/// F_k exceeds 1e6 * F_0 (or turns non-finite).
RunTrace run_piag(const CompositeProblem& problem, DelaySchedule schedule, const Vector& x0, double eta,
                  const StopRule& stop, double F_star_ref);

/// CSV with header `k,F_k,d_norm_sq,eta,max_staleness`.
std::string trace_csv(const RunTrace& trace);

}  // namespace piag
