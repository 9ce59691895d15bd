// Acceptance suite: every exit criterion for the PIAG library, each printed as
// one PASS/FAIL line. Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "piag/engine.hpp"
#include "piag/prox.hpp"
#include "piag/random.hpp"
#include "piag/reference.hpp"
#include "piag/theory.hpp"

using namespace piag;

namespace {

constexpr double kRelTol = 1e-9;  // absolute tolerance = kRelTol * max(1, F_0)
constexpr long long kMaxIters = 200000;

const std::vector<double> kQs = {1.0, 10.0, 100.0};
const std::vector<int> kKs = {0, 1, 2, 4, 8, 16};
const std::vector<ScheduleKind> kSchedules = {ScheduleKind::cyclic, ScheduleKind::random_bounded,
                                              ScheduleKind::adversarial_deadline, ScheduleKind::full_refresh};
const std::vector<RegularizerKind> kRegularizers = {RegularizerKind::zero, RegularizerKind::l1,
                                                    RegularizerKind::squared_l2, RegularizerKind::box_indicator,
                                                    RegularizerKind::elastic_net};

struct SuiteConfig {
  bool logistic = false;
  double Q = 1.0;
  int K = 0;
  ScheduleKind schedule = ScheduleKind::cyclic;
  RegularizerKind reg = RegularizerKind::zero;
  std::size_t m = 1;
  Eigen::Index n = 2;
  std::uint64_t seed = 0;

  std::string label() const {
    return std::string(logistic ? "logistic" : "quadratic") + " Q=" + std::to_string(static_cast<int>(Q)) +
           " K=" + std::to_string(K) + " " + std::string(to_string(schedule)) + " " + std::string(to_string(reg)) +
           " m=" + std::to_string(m) + " n=" + std::to_string(n);
  }
};

struct Instance {
  CompositeProblem problem;
  Vector x0;
  ReferenceSolution reference;
};

Regularizer make_regularizer(RegularizerKind kind, double mu) {
  switch (kind) {
    case RegularizerKind::zero: return Regularizer::zero();
    case RegularizerKind::l1: return Regularizer::l1(0.1 * mu);
    case RegularizerKind::squared_l2: return Regularizer::squared_l2(0.5 * mu);
    case RegularizerKind::box_indicator: return Regularizer::box(-0.4, 0.6);
    case RegularizerKind::elastic_net: return Regularizer::elastic_net(0.05 * mu, 0.2 * mu);
  }
  return Regularizer::zero();
}

Instance build(const SuiteConfig& c) {
  const double mu = 1.0;
  const auto reg = make_regularizer(c.reg, mu);
  auto problem = c.logistic ? make_logistic_instance(c.m, c.n, mu, c.seed, c.Q * mu, reg)
                            : make_quadratic_instance(c.m, c.n, mu, c.Q * mu, c.seed, reg);
  Rng rng(c.seed ^ 0x9e3779b97f4a7c15ULL);
  Vector x0 = rng.uniform_vector(c.n, -2.0, 2.0);
  if (c.reg == RegularizerKind::box_indicator) x0 = x0.cwiseMax(-0.4).cwiseMin(0.6);
  auto reference = solve_reference(problem);
  return {std::move(problem), std::move(x0), std::move(reference)};
}

// >= 50 randomised configurations; every value of every axis appears.
std::vector<SuiteConfig> randomized_suite() {
  Rng rng(20240917);
  std::vector<SuiteConfig> out;
  for (int i = 0; i < 60; ++i) {
    SuiteConfig c;
    c.logistic = i % 2 == 1;
    c.Q = kQs[(i / 2) % kQs.size()];
    c.K = kKs[rng.index(kKs.size())];
    c.schedule = kSchedules[rng.index(kSchedules.size())];
    c.reg = kRegularizers[i % kRegularizers.size()];
    c.m = 1 + rng.index(32);
    c.n = 2 + static_cast<Eigen::Index>(rng.index(49));
    c.seed = 1000 + static_cast<std::uint64_t>(i);
    out.push_back(c);
  }
  // Pin coverage of the K and schedule axes regardless of the draw.
  for (std::size_t j = 0; j < kKs.size(); ++j) out[j].K = kKs[j];
  for (std::size_t j = 0; j < kSchedules.size(); ++j) out[10 + j].schedule = kSchedules[j];
  return out;
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

int g_failures = 0;

void report(int id, const std::string& title, const Outcome& o, double seconds) {
  std::printf("[%s] criterion %d: %s -- %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, title.c_str(),
              o.detail.c_str(), seconds);
  std::fflush(stdout);
  if (!o.pass) ++g_failures;
}

void run_criterion(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report(id, title, o, secs);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// ---------------------------------------------------------------------------

struct SuiteRun {
  SuiteConfig config;
  Instance instance;
  RunTrace trace;
  double eta = 0.0;
  double epsilon = 0.0;
  double tol = 0.0;
};

std::vector<SuiteRun> run_suite(const std::vector<SuiteConfig>& configs) {
  std::vector<SuiteRun> runs;
  for (const auto& c : configs) {
    auto inst = build(c);
    const double F_star = inst.reference.deflated_F_star();
    const double F0 = eval_objective(inst.problem, inst.x0) - F_star;
    const double eta = theorem1_step_size(inst.problem.mu(), inst.problem.L(), c.K);
    const double eps = 1e-8 * F0;
    auto trace = run_piag(inst.problem, DelaySchedule(c.schedule, c.K, c.seed), inst.x0, eta, {kMaxIters, eps}, F_star);
    runs.push_back({c, std::move(inst), std::move(trace), eta, eps, kRelTol * std::max(1.0, F0)});
  }
  return runs;
}

}  // namespace

int main() {
  const auto suite_start = std::chrono::steady_clock::now();
  const auto configs = randomized_suite();
  std::vector<SuiteRun> runs;
  run_criterion(0, "randomised suite runs to completion", [&] {
    runs = run_suite(configs);
    std::size_t reached = 0;
    for (const auto& r : runs) reached += r.trace.reached_epsilon;
    return Outcome{runs.size() >= 50, std::to_string(runs.size()) + " configurations, " + std::to_string(reached) +
                                          " reached eps = 1e-8 F_0"};
  });
  const double suite_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - suite_start).count();

  run_criterion(1, "step-size-dependent rate bound along every suite run", [&] {
    Outcome o{runs.size() >= 50, ""};
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& r : runs) {
      const auto e = check_theorem1(r.trace, r.instance.problem.mu(), r.instance.problem.Q(), r.config.K, r.eta, r.tol);
      worst = std::max(worst, e[0].worst_residual / r.tol);
      if (e[0].verdict != Verdict::pass) {
        o.pass = false;
        o.detail += "[" + r.config.label() + " residual " + fmt(e[0].worst_residual) + "] ";
      }
    }
    o.detail += "worst residual/tol " + fmt(worst) + "; suite wall time " + fmt(suite_seconds) + "s (budget 300s)";
    if (suite_seconds >= 300.0) o.pass = false;
    return o;
  });

  run_criterion(2, "condition-number rate bound at the exact step", [&] {
    Outcome o{true, ""};
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& r : runs) {
      const auto e = check_theorem1(r.trace, r.instance.problem.mu(), r.instance.problem.Q(), r.config.K, r.eta, r.tol);
      worst = std::max(worst, e[1].worst_residual / r.tol);
      if (e[1].verdict != Verdict::pass) {
        o.pass = false;
        o.detail += "[" + r.config.label() + " " + std::string(to_string(e[1].verdict)) + "] ";
      }
    }
    o.detail += "worst residual/tol " + fmt(worst);
    return o;
  });

  run_criterion(3, "first hit of eps = 1e-8 F_0 within the iteration budget", [&] {
    Outcome o{true, ""};
    double worst_ratio = 0.0;
    for (const auto& r : runs) {
      const auto e = check_corollary1(r.trace, r.instance.problem.mu(), r.instance.problem.Q(), r.config.K, r.epsilon);
      if (e.verdict != Verdict::pass) {
        o.pass = false;
        o.detail += "[" + r.config.label() + " " + std::string(to_string(e.verdict)) + "] ";
        continue;
      }
      const auto budget = corollary1_budget(r.instance.problem.Q(), r.config.K, r.trace.F0(), r.epsilon);
      if (budget > 0) worst_ratio = std::max(worst_ratio, static_cast<double>(e.worst_iteration) / budget);
    }
    o.detail += "largest hit/budget " + fmt(worst_ratio);
    return o;
  });

  run_criterion(4, "descent and direction inequalities for every step <= 1/(L(K+1))", [&] {
    Outcome o{true, ""};
    std::size_t checked = 0;
    double worst = -std::numeric_limits<double>::infinity();
    auto examine = [&](const SuiteRun& r, const RunTrace& trace, double mu, double L, const std::string& what) {
      const auto l1 = check_lemma1(trace, L, r.config.K, r.tol);
      const auto l2 = check_lemma2(trace, mu, L, r.config.K, r.tol);
      ++checked;
      worst = std::max({worst, l1.worst_residual / r.tol, l2.worst_residual / r.tol});
      if (l1.verdict != Verdict::pass || l2.verdict != Verdict::pass) {
        o.pass = false;
        o.detail += "[" + r.config.label() + " " + what + " lemma1=" + std::string(to_string(l1.verdict)) +
                    " lemma2=" + std::string(to_string(l2.verdict)) + "] ";
      }
    };
    for (const auto& r : runs) {
      const auto& p = r.instance.problem;
      examine(r, r.trace, p.mu(), p.L(), "theorem-1 step");
      const double F_star = r.instance.reference.deflated_F_star();
      for (double fraction : {0.5, 1.0}) {
        const double eta = fraction * classical_step_size(p.L(), r.config.K);
        const auto trace = run_piag(p, DelaySchedule(r.config.schedule, r.config.K, r.config.seed), r.instance.x0, eta,
                                    {20000, r.epsilon}, F_star);
        examine(r, trace, p.mu(), p.L(), "eta=" + fmt(fraction) + "/(L(K+1))");
      }
    }
    o.detail += std::to_string(checked) + " trajectories, worst residual/tol " + fmt(worst);
    return o;
  });

  run_criterion(5, "perturbed contraction lemma on synthetic sequences", [&] {
    Rng rng(555);
    int violations = 0, tuples = 0, flagged = 0, violating = 0;
    auto tight = [&](double alpha, double beta, double gamma, int A) {
      ContractionSequenceSpec s{alpha, beta, gamma, A, {}, {}};
      s.Z.push_back(rng.uniform(0.1, 100.0));
      for (int k = 0; k < 80; ++k) {
        double history = 0.0;
        for (int j = std::max(k - A, 0); j < k; ++j) history += s.Y[j];
        const double cap = beta > gamma ? (s.Z[k] + gamma * history) / (beta - gamma) : 10.0;
        const double y_max = std::min(cap, 10.0);
        const double y = rng.uniform() < 0.1 ? y_max : rng.uniform(0.0, y_max);
        s.Y.push_back(y);
        s.Z.push_back(std::max((s.Z[k] - beta * y + gamma * (history + y)) / alpha, 0.0));
      }
      return s;
    };
    while (tuples < 1000) {
      const double alpha = 1.0 + std::exp(rng.uniform(-8.0, 1.0));
      const int A = static_cast<int>(rng.index(17));
      const double beta = std::exp(rng.uniform(-4.0, 2.0));
      const double gamma_max = beta * (alpha - 1.0) / std::expm1((A + 1.0) * std::log(alpha));
      const double gamma = rng.uniform() < 0.25 ? gamma_max : rng.uniform(0.0, gamma_max);
      const auto s = tight(alpha, beta, gamma, A);
      const auto e = check_lemma3_sequence(s, 1e-9 * std::max(1.0, s.Z[0]));
      ++tuples;
      if (e.verdict != Verdict::pass) ++violations;
    }
    while (violating < 150) {
      const double alpha = 1.0 + std::exp(rng.uniform(-6.0, 1.0));
      const int A = static_cast<int>(rng.index(17));
      const double beta = std::exp(rng.uniform(-4.0, 2.0));
      const double gamma_max = beta * (alpha - 1.0) / std::expm1((A + 1.0) * std::log(alpha));
      const double gamma = gamma_max * rng.uniform(1.01, 20.0);
      const auto s = tight(alpha, beta, gamma, A);
      ++violating;
      if (check_lemma3_sequence(s, 1e-9 * std::max(1.0, s.Z[0])).verdict == Verdict::condition_not_met) ++flagged;
    }
    return Outcome{violations == 0 && flagged == violating,
                   std::to_string(tuples) + " admissible tuples, " + std::to_string(violations) + " violations; " +
                       std::to_string(flagged) + "/" + std::to_string(violating) + " violating tuples flagged"};
  });

  run_criterion(6, "theorem-1 step size within the Bernoulli bound", [&] {
    Rng rng(66);
    int over = 0;
    for (int t = 0; t < 10000; ++t) {
      const double mu = std::exp(rng.uniform(-8.0, 4.0));
      const double L = mu * std::exp(rng.uniform(0.0, 10.0));
      const int K = static_cast<int>(rng.index(1000));
      if (!(theorem1_step_size(mu, L, K) <= 1.0 / (3.0 * L * (K + 1.0)))) ++over;
    }
    const double unit = std::abs(theorem1_step_size(1.0, 1.0, 0) - 1.0 / 3.0);
    double worst_rel = 0.0;
    for (int t = 0; t < 100; ++t) {
      const double L = std::exp(rng.uniform(-5.0, 5.0));
      worst_rel = std::max(worst_rel, std::abs(theorem1_step_size(L, L, 0) * 3.0 * L - 1.0));
    }
    return Outcome{over == 0 && unit <= 1e-15 && worst_rel <= 1e-15,
                   std::to_string(over) + "/10000 above 1/(3L(K+1)); |eta - 1/3| at Q=1,K=0 is " + fmt(unit) +
                       ", worst relative gap over random L " + fmt(worst_rel)};
  });

  run_criterion(7, "hitting time grows at most linearly in K+1 (Q=10, adversarial)", [&] {
    const std::vector<int> Ks = {1, 2, 4, 8, 16, 32};
    std::vector<double> x, y;
    std::string hits;
    bool ok = true;
    for (int K : Ks) {
      const std::size_t m = 34;
      auto p = make_quadratic_instance(m, 10, 1.0, 10.0, 77);
      const auto ref = solve_reference(p);
      Rng rng(78);
      const Vector x0 = rng.uniform_vector(10, -2.0, 2.0);
      const double F_star = ref.deflated_F_star();
      const double F0 = eval_objective(p, x0) - F_star;
      const double eps = 1e-8 * F0;
      const double eta = theorem1_step_size(1.0, p.L(), K);
      const auto budget = corollary1_budget(p.Q(), K, F0, eps);
      const auto trace =
          run_piag(p, DelaySchedule(ScheduleKind::adversarial_deadline, K), x0, eta, {budget, eps}, F_star);
      long long reached = 0;
      for (const auto& r : trace.records) reached = std::max(reached, r.max_staleness);
      if (!trace.reached_epsilon || reached != K) ok = false;
      x.push_back(std::log(K + 1.0));
      y.push_back(std::log(static_cast<double>(trace.iterations)));
      hits += std::to_string(trace.iterations) + " ";
    }
    const double mx = (x[0] + x[1] + x[2] + x[3] + x[4] + x[5]) / 6.0;
    const double my = (y[0] + y[1] + y[2] + y[3] + y[4] + y[5]) / 6.0;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sxy += (x[i] - mx) * (y[i] - my);
      sxx += (x[i] - mx) * (x[i] - mx);
    }
    const double slope = sxy / sxx;
    return Outcome{ok && slope <= 1.15, "hits " + hits + "-> log-log slope " + fmt(slope) + " (limit 1.15)"};
  });

  run_criterion(8, "reference oracles agree and PIAG converges to x*", [&] {
    Outcome o{true, ""};
    std::size_t closed = 0, converged = 0;
    double worst_F = 0.0, worst_x = 0.0, worst_bound = 0.0;
    for (const auto& r : runs) {
      const auto& p = r.instance.problem;
      const auto& ref = r.instance.reference;
      worst_bound = std::max(worst_bound, ref.accuracy_bound / std::max(1.0, std::abs(ref.F_star)));
      if (auto cf = solve_closed_form(p)) {
        ++closed;
        const auto pg = solve_prox_gradient(p, 1e-13);
        worst_F = std::max(worst_F, std::abs(cf->F_star - pg.F_star));
      }
      // Keep iterating well past the first hit so the iterates settle on their limit.
      const auto limit = run_piag(p, DelaySchedule(r.config.schedule, r.config.K, r.config.seed), r.instance.x0, r.eta,
                                  {4 * r.trace.iterations + 100, 0.0}, r.instance.reference.deflated_F_star());
      const double last_step = r.eta * std::sqrt(limit.records.back().d_norm_sq);
      if (last_step <= 1e-10 * std::max(1.0, limit.x_final.norm())) {
        ++converged;
        worst_x = std::max(worst_x, (limit.x_final - r.instance.reference.x_star).norm());
      }
    }
    o.pass = worst_F <= 1e-11 && worst_x <= 1e-6 && worst_bound <= 1e-12 && closed > 0 &&
             converged >= runs.size() / 2;
    o.detail = "worst relative accuracy bound " + fmt(worst_bound) + "; " + std::to_string(closed) + " closed-form instances, worst |dF*| " + fmt(worst_F) + "; " +
               std::to_string(converged) + " converged runs, worst |x - x*| " + fmt(worst_x);
    return o;
  });

  run_criterion(9, "degenerate equivalences", [&] {
    double worst_gd = 0.0, worst_fixed = 0.0;
    std::size_t i = 0;
    for (const auto& c : configs) {
      if (i++ % 3 != 0) continue;
      SuiteConfig plain = c;
      plain.reg = RegularizerKind::zero;
      const auto inst = build(plain);
      const auto& p = inst.problem;
      const double eta = theorem1_step_size(p.mu(), p.L(), 0);
      // K = 0 with r = 0: stepwise plain gradient descent on f.
      Vector x = inst.x0, gd = inst.x0;
      auto table = init_table(p, x);
      DelaySchedule sched(ScheduleKind::full_refresh, 0);
      for (long long k = 0; k < 500; ++k) {
        x = piag_step(p, table, sched, x, eta, k).x_next;
        gd = gd - eta * eval_grad_f(p, gd);
        worst_gd = std::max(worst_gd, (x - gd).norm());
      }
      // Starting at x*: suboptimality stays at rounding level for every schedule.
      const auto full = build(c);
      const auto trace = run_piag(full.problem, DelaySchedule(c.schedule, c.K, c.seed), full.reference.x_star,
                                  theorem1_step_size(1.0, full.problem.L(), c.K), {500, 0.0},
                                  full.reference.deflated_F_star());
      for (const auto& rec : trace.records) worst_fixed = std::max(worst_fixed, std::abs(rec.F));
    }
    return Outcome{worst_gd <= 1e-12 && worst_fixed <= 1e-12,
                   "worst |x_piag - x_gd| " + fmt(worst_gd) + ", worst |F_k| from x* " + fmt(worst_fixed)};
  });

  std::printf("%s: %d criterion failure(s)\n", g_failures ? "ACCEPTANCE FAILED" : "ACCEPTANCE PASSED", g_failures);
  return g_failures ? 1 : 0;
}
