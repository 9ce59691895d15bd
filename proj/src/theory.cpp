#include "piag/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "piag/errors.hpp"
#include "piag/text_format.hpp"

namespace piag {

namespace {

constexpr double kRelSlack = 1e-12;

void require_constants(double mu, double L, int K) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw InputError("mu must be positive and finite");
  if (!std::isfinite(L) || L < mu * (1.0 - kRelSlack)) throw InputError("L must satisfy L >= mu");
  if (K < 0) throw InputError("K must be >= 0");
}

// Every record must carry a direction and share one step size.
double constant_step(const RunTrace& trace) {
  if (trace.records.empty()) throw InputError("empty trace");
  const double eta = trace.records.front().eta;
  for (const auto& r : trace.records) {
    if (std::isnan(r.d_norm_sq) || r.d_norm_sq < 0.0) throw InputError("trace is missing d_norm_sq");
    if (r.eta != eta) throw InputError("trace does not use a constant step size");
  }
  return eta;
}

bool respects_staleness(const RunTrace& trace, int K) {
  return std::all_of(trace.records.begin(), trace.records.end(),
                     [K](const TraceRecord& r) { return r.max_staleness <= K; });
}

// sum_{j=max(k-K,0)}^{k-1} |d_j|^2
double history_sum(const RunTrace& trace, long long k, int K) {
  double s = 0.0;
  for (long long j = std::max(k - K, 0LL); j < k; ++j) s += trace.records[j].d_norm_sq;
  return s;
}

CheckEntry not_applicable(std::string name, double tol) {
  CheckEntry e;
  e.name = std::move(name);
  e.verdict = Verdict::not_applicable;
  e.worst_residual = std::numeric_limits<double>::quiet_NaN();
  e.tolerance = tol;
  return e;
}

// Scans residual(k) over k = 0..count-1 and fills in the verdict.
template <typename Residual>
CheckEntry scan(std::string name, long long count, double tol, Residual&& residual) {
  CheckEntry e;
  e.name = std::move(name);
  e.tolerance = tol;
  e.worst_residual = -std::numeric_limits<double>::infinity();
  for (long long k = 0; k < count; ++k) {
    const double r = residual(k);
    if (std::isnan(r) || r > e.worst_residual) {
      e.worst_residual = r;
      e.worst_iteration = k;
      if (std::isnan(r)) break;
    }
  }
  if (count == 0) e.worst_residual = 0.0;
  e.verdict = e.worst_residual <= tol ? Verdict::pass : Verdict::fail;
  return e;
}

}  // namespace

// ---------------------------------------------------------------------------

double theorem1_step_size(double mu, double L, int K) {
  require_constants(mu, L, K);
  const double x = mu / (48.0 * L);  // 1 / (48 Q)
  const double value = (16.0 / mu) * std::expm1(std::log1p(x) / (K + 1.0));
  const double bernoulli = 1.0 / (3.0 * L * (K + 1.0));
  if (value > bernoulli * (1.0 + 1e-12)) {
    throw std::logic_error("theorem-1 step size exceeds 1/(3L(K+1))");
  }
  // The exact value is below the Bernoulli bound; only rounding can put it above.
  return std::min(value, bernoulli);
}

double classical_step_size(double L, int K) {
  if (!(L > 0.0) || !std::isfinite(L)) throw InputError("L must be positive");
  if (K < 0) throw InputError("K must be >= 0");
  return 1.0 / (L * (K + 1.0));
}

std::string_view to_string(StepPolicyKind kind) {
  switch (kind) {
    case StepPolicyKind::theorem1_exact: return "theorem1-exact";
    case StepPolicyKind::theorem1_fraction: return "theorem1-fraction";
    case StepPolicyKind::classical_smoothness: return "classical-smoothness";
  }
  return "?";
}

StepPolicyKind step_policy_from_string(std::string_view name) {
  for (auto k : {StepPolicyKind::theorem1_exact, StepPolicyKind::theorem1_fraction,
                 StepPolicyKind::classical_smoothness}) {
    if (to_string(k) == name) return k;
  }
  throw InputError("unknown step-size policy '" + std::string(name) + "'");
}

double StepSizePolicy::step_size(double mu, double L, int K) const {
  switch (kind) {
    case StepPolicyKind::theorem1_exact:
      return theorem1_step_size(mu, L, K);
    case StepPolicyKind::theorem1_fraction:
      if (!(fraction > 0.0 && fraction <= 1.0)) throw InputError("step fraction must lie in (0, 1]");
      return fraction * theorem1_step_size(mu, L, K);
    case StepPolicyKind::classical_smoothness:
      return classical_step_size(L, K);
  }
  throw InputError("bad step policy");
}

double rate_eq7(double eta, double mu, long long k) {
  if (!(eta > 0.0) || !(mu > 0.0) || k < 0) throw InputError("rate_eq7 needs eta > 0, mu > 0, k >= 0");
  return std::exp(-static_cast<double>(k) * std::log1p(eta * mu / 16.0));
}

double rate_eq8(double Q, int K, long long k) {
  if (!(Q >= 1.0 - kRelSlack) || K < 0 || k < 0) throw InputError("rate_eq8 needs Q >= 1, K >= 0, k >= 0");
  return std::exp(static_cast<double>(k) * std::log1p(-1.0 / (49.0 * Q * (K + 1.0))));
}

long long corollary1_budget(double Q, int K, double F0, double epsilon) {
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
  if (F0 <= epsilon) return 0;
  const double v = 49.0 * Q * (K + 1.0) * std::log(F0 / epsilon);
  // Shave a few ulps so that an exact integer product is not pushed up by rounding.
  return static_cast<long long>(std::ceil(v * (1.0 - 1e-14)));
}

// ---------------------------------------------------------------------------

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::not_applicable: return "not-applicable";
    case Verdict::condition_not_met: return "condition-not-met";
    case Verdict::precondition_violated: return "precondition-violated";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

bool CheckReport::any_fail() const {
  return std::any_of(entries.begin(), entries.end(),
                     [](const CheckEntry& e) { return e.verdict == Verdict::fail; });
}

const CheckEntry* CheckReport::find(std::string_view name) const {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

std::string CheckReport::to_text() const {
  std::string out;
  for (const auto& e : entries) {
    out += "check=" + e.name;
    out += " verdict=" + std::string(to_string(e.verdict));
    out += " worst_residual=" + format_double(e.worst_residual);
    out += " worst_iteration=" + std::to_string(e.worst_iteration);
    out += " tolerance=" + format_double(e.tolerance);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------

CheckEntry check_lemma1(const RunTrace& trace, double L, int K, double tol) {
  const double eta = constant_step(trace);
  if (eta > classical_step_size(L, K) * (1.0 + kRelSlack) || !respects_staleness(trace, K)) {
    return not_applicable("lemma1", tol);
  }
  const auto& rec = trace.records;
  return scan("lemma1", static_cast<long long>(rec.size()) - 1, tol, [&](long long k) {
    const double rhs = rec[k].F - 0.5 * eta * rec[k].d_norm_sq + eta * eta * (L / 2.0) * history_sum(trace, k, K);
    return rec[k + 1].F - rhs;
  });
}

CheckEntry check_lemma2(const RunTrace& trace, double mu, double L, int K, double tol) {
  const double eta = constant_step(trace);
  if (eta > classical_step_size(L, K) * (1.0 + kRelSlack) || !respects_staleness(trace, K)) {
    return not_applicable("lemma2", tol);
  }
  const auto& rec = trace.records;
  return scan("lemma2", static_cast<long long>(rec.size()) - 1, tol, [&](long long k) {
    const double rhs = -(mu / 4.0) * rec[k + 1].F + eta * L * history_sum(trace, k, K);
    return -rec[k].d_norm_sq - rhs;
  });
}

bool contraction_condition_holds(double alpha, double beta, double gamma, int A) {
  const double lhs = gamma * std::expm1((A + 1.0) * std::log(alpha));
  const double rhs = beta * (alpha - 1.0);
  return lhs <= rhs + kRelSlack * std::max(std::abs(lhs), std::abs(rhs));
}

CheckEntry check_lemma3_sequence(const ContractionSequenceSpec& spec, double tol) {
  if (!(spec.alpha > 1.0) || !std::isfinite(spec.alpha)) throw InputError("contraction check needs alpha > 1");
  if (!(spec.beta >= 0.0) || !(spec.gamma >= 0.0)) throw InputError("contraction check needs beta, gamma >= 0");
  if (spec.A < 0) throw InputError("contraction check needs A >= 0");
  if (spec.Z.empty()) throw InputError("contraction check needs a nonempty Z sequence");
  if (spec.Y.size() + 1 < spec.Z.size()) throw InputError("contraction check needs Y_k for every transition");

  const auto& Z = spec.Z;
  const auto& Y = spec.Y;
  const long long transitions = static_cast<long long>(Z.size()) - 1;

  const bool nonnegative = std::all_of(Z.begin(), Z.end(), [](double v) { return v >= 0.0; }) &&
                           std::all_of(Y.begin(), Y.end(), [](double v) { return v >= 0.0; });
  auto recursion = scan("lemma3", transitions, tol, [&](long long k) {
    double window = 0.0;
    for (long long j = std::max(k - spec.A, 0LL); j <= k; ++j) window += Y[j];
    return spec.alpha * Z[k + 1] - (Z[k] - spec.beta * Y[k] + spec.gamma * window);
  });
  if (!nonnegative || recursion.verdict != Verdict::pass) {
    recursion.verdict = Verdict::precondition_violated;
    return recursion;
  }

  if (!contraction_condition_holds(spec.alpha, spec.beta, spec.gamma, spec.A)) {
    CheckEntry e = not_applicable("lemma3", tol);
    e.verdict = Verdict::condition_not_met;
    return e;
  }

  const double log_alpha = std::log(spec.alpha);
  return scan("lemma3", static_cast<long long>(Z.size()), tol, [&](long long k) {
    return Z[k] - std::exp(-static_cast<double>(k) * log_alpha) * Z[0];
  });
}

ContractionSequenceSpec contraction_spec_from_trace(const RunTrace& trace, double mu, double L, int K) {
  const double eta = constant_step(trace);
  ContractionSequenceSpec spec;
  spec.alpha = 1.0 + eta * mu / 16.0;
  spec.beta = eta / 4.0;
  spec.gamma = 3.0 * eta * eta * L / 4.0;
  spec.A = K;
  spec.Z.reserve(trace.records.size());
  spec.Y.reserve(trace.records.size());
  for (const auto& r : trace.records) {
    spec.Z.push_back(std::max(r.F, 0.0));
    spec.Y.push_back(r.d_norm_sq);
  }
  return spec;
}

CheckEntry check_combined_recursion(const RunTrace& trace, double mu, double L, int K, double tol) {
  const double eta = constant_step(trace);
  if (eta > classical_step_size(L, K) * (1.0 + kRelSlack) || !respects_staleness(trace, K)) {
    return not_applicable("combined_recursion", tol);
  }
  const auto& rec = trace.records;
  const double alpha = 1.0 + eta * mu / 16.0;
  return scan("combined_recursion", static_cast<long long>(rec.size()) - 1, tol, [&](long long k) {
    const double rhs =
        rec[k].F - 0.25 * eta * rec[k].d_norm_sq + eta * eta * (3.0 * L / 4.0) * history_sum(trace, k, K);
    return alpha * rec[k + 1].F - rhs;
  });
}

std::vector<CheckEntry> check_theorem1(const RunTrace& trace, double mu, double Q, int K, double eta,
                                       double tol) {
  const double L = Q * mu;
  const double bound = theorem1_step_size(mu, L, K);
  constant_step(trace);
  if (!(eta > 0.0) || eta > bound * (1.0 + kRelSlack) || !respects_staleness(trace, K)) {
    return {not_applicable("theorem1_eq7", tol), not_applicable("theorem1_eq8", tol)};
  }
  const auto& rec = trace.records;
  const double F0 = trace.F0();
  std::vector<CheckEntry> out;
  out.push_back(scan("theorem1_eq7", static_cast<long long>(rec.size()), tol,
                     [&](long long k) { return rec[k].F - rate_eq7(eta, mu, k) * F0; }));
  if (std::abs(eta - bound) <= kRelSlack * bound) {
    out.push_back(scan("theorem1_eq8", static_cast<long long>(rec.size()), tol,
                       [&](long long k) { return rec[k].F - rate_eq8(Q, K, k) * F0; }));
  } else {
    out.push_back(not_applicable("theorem1_eq8", tol));
  }
  return out;
}

CheckEntry check_corollary1(const RunTrace& trace, double mu, double Q, int K, double epsilon) {
  const double eta = constant_step(trace);
  const double exact = theorem1_step_size(mu, Q * mu, K);
  if (std::abs(eta - exact) > kRelSlack * exact || !respects_staleness(trace, K)) {
    return not_applicable("corollary1", 0.0);
  }
  CheckEntry e;
  e.name = "corollary1";
  e.tolerance = 0.0;
  const long long budget = corollary1_budget(Q, K, trace.F0(), epsilon);
  const long long hit = trace.hitting_iteration(epsilon);
  if (hit >= 0) {
    e.worst_iteration = hit;
    e.worst_residual = static_cast<double>(hit - budget);
    e.verdict = hit <= budget ? Verdict::pass : Verdict::fail;
    return e;
  }
  e.worst_iteration = trace.iterations;
  e.worst_residual = std::numeric_limits<double>::quiet_NaN();
  e.verdict = trace.iterations < budget ? Verdict::inconclusive : Verdict::fail;
  return e;
}

}  // namespace piag
