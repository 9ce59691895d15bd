#include "piag/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "piag/errors.hpp"
#include "piag/prox.hpp"
#include "piag/text_format.hpp"

namespace piag {

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::cyclic: return "cyclic";
    case ScheduleKind::random_bounded: return "random-bounded";
    case ScheduleKind::adversarial_deadline: return "adversarial-deadline";
    case ScheduleKind::full_refresh: return "full-refresh";
  }
  return "?";
}

ScheduleKind schedule_kind_from_string(std::string_view name) {
  for (auto k : {ScheduleKind::cyclic, ScheduleKind::random_bounded, ScheduleKind::adversarial_deadline,
                 ScheduleKind::full_refresh}) {
    if (to_string(k) == name) return k;
  }
  throw InputError("unknown schedule kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

DelaySchedule::DelaySchedule(ScheduleKind kind, int K, std::uint64_t seed)
    : kind_(kind), K_(K), seed_(seed), rng_(seed) {
  if (K < 0) throw InputError("staleness bound K must be >= 0");
}

std::vector<std::size_t> DelaySchedule::refresh_set(long long k, std::span<const long long> staleness) {
  const std::size_t m = staleness.size();
  if (m == 0) throw InputError("schedule needs at least one component");

  std::vector<bool> chosen(m, false);
  bool any = false;
  auto pick = [&](std::size_t i) {
    chosen[i] = true;
    any = true;
  };

  if (kind_ == ScheduleKind::full_refresh) {
    for (std::size_t i = 0; i < m; ++i) pick(i);
  } else {
    for (std::size_t i = 0; i < m; ++i) {
      if (staleness[i] >= K_) pick(i);
    }
    switch (kind_) {
      case ScheduleKind::cyclic:
        pick(static_cast<std::size_t>(k % static_cast<long long>(m)));
        break;
      case ScheduleKind::random_bounded:
        pick(rng_.index(m));
        break;
      case ScheduleKind::adversarial_deadline:
        if (!any) {
          const auto stalest = std::max_element(staleness.begin(), staleness.end());
          pick(static_cast<std::size_t>(stalest - staleness.begin()));
        }
        break;
      case ScheduleKind::full_refresh:
        break;
    }
  }

  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < m; ++i) {
    if (chosen[i]) out.push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------------------

GradientTable::GradientTable(const CompositeProblem& problem, const Vector& x0)
    : tau_(problem.m(), 0), sum_(Vector::Zero(problem.n())) {
  if (x0.size() != problem.n()) throw InputError("initial point has the wrong dimension");
  stored_.reserve(problem.m());
  for (std::size_t i = 0; i < problem.m(); ++i) {
    stored_.push_back(problem.components()[i].gradient(x0));
    sum_ += stored_.back();
  }
}

void GradientTable::refresh(const CompositeProblem& problem, std::span<const std::size_t> indices,
                            const Vector& x, long long k) {
  if (indices.size() == stored_.size()) {
    sum_.setZero();
    for (std::size_t i = 0; i < stored_.size(); ++i) {
      stored_[i] = problem.components()[i].gradient(x);
      tau_[i] = k;
      sum_ += stored_[i];
    }
    return;
  }
  for (std::size_t i : indices) {
    Vector fresh = problem.component(i).gradient(x);
    sum_ += fresh - stored_[i];
    stored_[i] = std::move(fresh);
    tau_[i] = k;
  }
}

std::vector<long long> GradientTable::staleness_entering(long long k) const {
  std::vector<long long> out(tau_.size());
  for (std::size_t i = 0; i < tau_.size(); ++i) out[i] = std::max(0LL, k - 1 - tau_[i]);
  return out;
}

long long GradientTable::max_age(long long k) const {
  long long worst = 0;
  for (long long t : tau_) worst = std::max(worst, k - t);
  return worst;
}

double GradientTable::resync() {
  Vector fresh = Vector::Zero(sum_.size());
  for (const auto& g : stored_) fresh += g;
  const double drift = (fresh - sum_).norm();
  sum_ = std::move(fresh);
  return drift;
}

GradientTable init_table(const CompositeProblem& problem, const Vector& x0) {
  return GradientTable(problem, x0);
}

Vector aggregated_gradient(const GradientTable& table, std::size_t m) {
  return table.running_sum() / static_cast<double>(m);
}

// ---------------------------------------------------------------------------

StepResult piag_step(const CompositeProblem& problem, GradientTable& table, DelaySchedule& schedule,
                     const Vector& x_k, double eta, long long k) {
  if (!(eta > 0.0)) throw InputError("step size must be positive");
  if (x_k.size() != problem.n()) throw InputError("iterate has the wrong dimension");

  const auto staleness = table.staleness_entering(k);
  auto refreshed = schedule.refresh_set(k, staleness);
  table.refresh(problem, refreshed, x_k, k);

  if ((k + 1) % kResyncPeriod == 0) {
    const double scale = std::max(1.0, table.running_sum().norm());
    const double drift = table.resync();
    if (drift > 1e-10 * scale) {
      throw std::logic_error("gradient table running sum drifted by " + format_double(drift));
    }
  }
  if (table.max_age(k) > schedule.K()) {
    throw std::logic_error("staleness bound violated at iteration " + std::to_string(k));
  }

  const Vector g = aggregated_gradient(table, problem.m());
  auto result = prox(problem.regularizer(), eta, x_k - eta * g);
  Vector direction = (result.point - x_k) / eta;
  return {std::move(result.point), std::move(direction), std::move(refreshed)};
}

long long RunTrace::hitting_iteration(double epsilon) const {
  for (const auto& r : records) {
    if (r.F <= epsilon) return r.k;
  }
  return -1;
}

RunTrace run_piag(const CompositeProblem& problem, DelaySchedule schedule, const Vector& x0, double eta,
                  const StopRule& stop, double F_star_ref) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw InputError("step size must be positive");
  if (stop.max_iters < 0) throw InputError("max_iters must be >= 0");
  if (x0.size() != problem.n()) throw InputError("initial point has the wrong dimension");

  RunTrace trace;
  trace.F_star_ref = F_star_ref;
  trace.staleness_bound = schedule.K();

  GradientTable table(problem, x0);
  Vector x = x0;
  double F0 = 0.0;
  for (long long k = 0;; ++k) {
    const double F = eval_objective(problem, x) - F_star_ref;
    if (k == 0) {
      if (!std::isfinite(F)) throw InputError("initial point lies outside the domain of r");
      F0 = F;
    } else if (!std::isfinite(F) || F > 1e6 * std::max(F0, 1e-12)) {
      throw DivergenceError("F_k = " + format_double(F) + " at k = " + std::to_string(k) +
                            " exceeds 1e6 * F_0; step size " + format_double(eta) + " is unstable");
    }
    auto step = piag_step(problem, table, schedule, x, eta, k);
    trace.records.push_back({k, F, step.direction.squaredNorm(), eta, table.max_age(k)});
    const bool hit = F <= stop.epsilon;
    if (hit || k >= stop.max_iters) {
      trace.x_final = x;
      trace.iterations = k;
      trace.reached_epsilon = hit;
      break;
    }
    x = std::move(step.x_next);
  }
  return trace;
}

std::string trace_csv(const RunTrace& trace) {
  std::string out = "k,F_k,d_norm_sq,eta,max_staleness\n";
  for (const auto& r : trace.records) {
    out += std::to_string(r.k);
    out += ',';
    out += format_double(r.F);
    out += ',';
    out += format_double(r.d_norm_sq);
    out += ',';
    out += format_double(r.eta);
    out += ',';
    out += std::to_string(r.max_staleness);
    out += '\n';
  }
  return out;
}

}  // namespace piag
