#include "piag/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <mutex>
#include <set>
#include <thread>

#include "piag/errors.hpp"
#include "piag/random.hpp"

namespace piag {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "instance.kind",      "instance.m",       "instance.n",           "instance.mu",
      "instance.L",         "instance.seed",    "regularizer.kind",     "regularizer.lambda",
      "regularizer.lambda2", "regularizer.lower", "regularizer.upper",   "schedule.kind",
      "schedule.K",         "schedule.seed",    "step.policy",          "step.fraction",
      "stop.max_iters",     "stop.epsilon",     "stop.epsilon_relative", "sweep.K",
      "sweep.Q",            "output.dir",       "reference.cache",      "tol",
      "x0.seed",            "x0.scale",         "threads"};
  return keys;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw InputError("not a boolean: '" + s + "'");
}

std::uint64_t parse_seed(const std::string& s) {
  const auto v = parse_integer(s);
  if (v < 0) throw InputError("seeds must be nonnegative");
  return static_cast<std::uint64_t>(v);
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& text, Parse parse) {
  std::vector<T> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto start = text.find_first_not_of(" \t,", pos);
    if (start == std::string::npos) break;
    auto stop = text.find_first_of(" \t,", start);
    if (stop == std::string::npos) stop = text.size();
    out.push_back(parse(text.substr(start, stop - start)));
    pos = stop;
  }
  return out;
}

std::string point_name(double Q, int K) { return "Q" + format_double(Q) + "_K" + std::to_string(K); }

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

// ---------------------------------------------------------------------------

ExperimentConfig parse_config(const KeyValueDoc& doc) {
  for (const auto& [key, value] : doc.entries()) {
    if (!known_keys().count(key)) throw InputError("unknown config key '" + key + "'");
  }
  ExperimentConfig c;
  auto& in = c.instance;
  if (auto v = doc.find("instance.kind")) in.kind = instance_kind_from_string(*v);
  if (in.kind == InstanceKind::custom) throw InputError("instance.kind must be quadratic or logistic");
  if (doc.contains("instance.m")) {
    const auto m = doc.get_integer("instance.m");
    if (m <= 0) throw InputError("instance.m must be positive");
    in.m = static_cast<std::size_t>(m);
  }
  if (doc.contains("instance.n")) {
    in.n = static_cast<Eigen::Index>(doc.get_integer("instance.n"));
    if (in.n <= 0) throw InputError("instance.n must be positive");
  }
  in.mu = doc.get_double("instance.mu", in.mu);
  in.L = doc.get_double("instance.L", in.L);
  if (auto v = doc.find("instance.seed")) in.seed = parse_seed(*v);

  switch (regularizer_kind_from_string(doc.find("regularizer.kind").value_or("zero"))) {
    case RegularizerKind::zero: in.regularizer = Regularizer::zero(); break;
    case RegularizerKind::l1: in.regularizer = Regularizer::l1(doc.get_double("regularizer.lambda")); break;
    case RegularizerKind::squared_l2:
      in.regularizer = Regularizer::squared_l2(doc.get_double("regularizer.lambda"));
      break;
    case RegularizerKind::elastic_net:
      in.regularizer =
          Regularizer::elastic_net(doc.get_double("regularizer.lambda"), doc.get_double("regularizer.lambda2"));
      break;
    case RegularizerKind::box_indicator:
      in.regularizer = Regularizer::box(doc.get_double("regularizer.lower"), doc.get_double("regularizer.upper"));
      break;
  }

  if (auto v = doc.find("schedule.kind")) c.schedule.kind = schedule_kind_from_string(*v);
  if (doc.contains("schedule.K")) c.schedule.K = static_cast<int>(doc.get_integer("schedule.K"));
  if (auto v = doc.find("schedule.seed")) c.schedule.seed = parse_seed(*v);

  if (auto v = doc.find("step.policy")) c.step.kind = step_policy_from_string(*v);
  c.step.fraction = doc.get_double("step.fraction", c.step.fraction);

  c.stop.max_iters = doc.get_integer("stop.max_iters", c.stop.max_iters);
  c.stop.epsilon = doc.get_double("stop.epsilon", c.stop.epsilon);
  if (auto v = doc.find("stop.epsilon_relative")) c.epsilon_relative = parse_bool(*v);

  if (auto v = doc.find("sweep.K")) {
    c.sweep_K = parse_list<int>(*v, [](const std::string& s) { return static_cast<int>(parse_integer(s)); });
  }
  if (auto v = doc.find("sweep.Q")) {
    c.sweep_Q = parse_list<double>(*v, [](const std::string& s) { return parse_double(s); });
  }
  if (auto v = doc.find("output.dir")) c.output_dir = *v;
  if (auto v = doc.find("reference.cache")) c.reference_cache = *v;
  c.tol = doc.get_double("tol", c.tol);
  if (auto v = doc.find("x0.seed")) c.x0_seed = parse_seed(*v);
  c.x0_scale = doc.get_double("x0.scale", c.x0_scale);
  c.threads = static_cast<int>(doc.get_integer("threads", c.threads));
  return c;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(KeyValueDoc::read_file(path)); }

void validate_config(const ExperimentConfig& c) {
  const auto& in = c.instance;
  if (in.m == 0 || in.n <= 0) throw InputError("instance.m and instance.n must be positive");
  if (!(in.mu > 0.0) || !std::isfinite(in.mu)) throw InputError("instance.mu must be positive");
  if (!std::isfinite(in.L) || in.mu > in.L) throw InputError("instance.mu must not exceed instance.L");
  if (c.schedule.K < 0) throw InputError("schedule.K must be >= 0");
  for (int K : c.sweep_K) {
    if (K < 0) throw InputError("sweep.K entries must be >= 0");
  }
  for (double Q : c.sweep_Q) {
    if (!(Q >= 1.0) || !std::isfinite(Q)) throw InputError("sweep.Q entries must be >= 1");
  }
  if (c.step.kind == StepPolicyKind::theorem1_fraction && !(c.step.fraction > 0.0 && c.step.fraction <= 1.0)) {
    throw InputError("step.fraction must lie in (0, 1]");
  }
  if (c.stop.max_iters < 0) throw InputError("stop.max_iters must be >= 0");
  if (!(c.stop.epsilon > 0.0)) throw InputError("stop.epsilon must be positive");
  if (!(c.tol > 0.0)) throw InputError("tol must be positive");
  if (!(c.x0_scale >= 0.0) || !std::isfinite(c.x0_scale)) throw InputError("x0.scale must be >= 0");
  if (c.threads < 1) throw InputError("threads must be >= 1");
  if (c.output_dir.empty()) throw InputError("output.dir must not be empty");
  // Instances are cheap to build; building them surfaces generator
  // preconditions before anything is written.
  for (const auto& p : sweep_points(c)) build_instance(c, p);
}

std::vector<SweepPoint> sweep_points(const ExperimentConfig& c) {
  const std::vector<double> Qs = c.sweep_Q.empty() ? std::vector<double>{c.instance.L / c.instance.mu} : c.sweep_Q;
  const std::vector<int> Ks = c.sweep_K.empty() ? std::vector<int>{c.schedule.K} : c.sweep_K;
  std::vector<SweepPoint> out;
  for (double Q : Qs) {
    for (int K : Ks) out.push_back({Q, K, point_name(Q, K)});
  }
  return out;
}

CompositeProblem build_instance(const ExperimentConfig& c, const SweepPoint& point) {
  const auto& in = c.instance;
  const double L = point.Q * in.mu;
  if (in.kind == InstanceKind::logistic) {
    return make_logistic_instance(in.m, in.n, in.mu, in.seed, L, in.regularizer);
  }
  return make_quadratic_instance(in.m, in.n, in.mu, L, in.seed, in.regularizer);
}

Vector initial_point(const ExperimentConfig& c, const CompositeProblem& problem) {
  Rng rng(c.x0_seed);
  Vector x0 = rng.uniform_vector(problem.n(), -c.x0_scale, c.x0_scale);
  const auto& r = problem.regularizer();
  if (r.kind == RegularizerKind::box_indicator) x0 = x0.cwiseMax(r.lower).cwiseMin(r.upper);
  return x0;
}

double measured_tail_rate(const RunTrace& trace) {
  const auto n = static_cast<long long>(trace.records.size()) - 1;
  if (n < 1) return std::numeric_limits<double>::quiet_NaN();
  const long long start = n / 2;
  const double a = trace.records[start].F;
  const double b = trace.records[n].F;
  if (!(a > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  if (!(b > 0.0)) return 0.0;
  return std::exp((std::log(b) - std::log(a)) / static_cast<double>(n - start));
}

PointResult run_point(const ExperimentConfig& c, const SweepPoint& point) {
  PointResult res;
  res.point = point;
  const auto problem = build_instance(c, point);
  const Vector x0 = initial_point(c, problem);
  const int K = point.K;
  const double mu = problem.mu();
  const double Q = problem.Q();

  try {
    res.reference = c.reference_cache.empty() ? solve_reference(problem) : ReferenceCache(c.reference_cache).solve(problem);
  } catch (const OracleError& e) {
    res.oracle_failed = true;
    res.error = e.what();
    CheckEntry oracle;
    oracle.name = "reference_oracle";
    oracle.verdict = Verdict::fail;
    res.report.add(oracle);
    return res;
  }
  const double F_star = res.reference.deflated_F_star();

  res.eta = c.step.step_size(mu, problem.L(), K);
  res.F0 = eval_objective(problem, x0) - F_star;
  StopRule stop = c.stop;
  if (c.epsilon_relative) stop.epsilon = c.stop.epsilon * std::max(res.F0, 0.0);
  const double tol = c.tol * std::max(1.0, res.F0);

  try {
    res.trace = run_piag(problem, DelaySchedule(c.schedule.kind, K, c.schedule.seed), x0, res.eta, stop, F_star);
  } catch (const DivergenceError& e) {
    res.error = e.what();
    CheckEntry div;
    div.name = "divergence_guard";
    div.verdict = Verdict::fail;
    div.worst_residual = std::numeric_limits<double>::infinity();
    div.tolerance = tol;
    res.report.add(div);
    return res;
  }

  const auto& trace = res.trace;
  res.report.add(check_lemma1(trace, problem.L(), K, tol));
  res.report.add(check_lemma2(trace, mu, problem.L(), K, tol));
  res.report.add(check_combined_recursion(trace, mu, problem.L(), K, tol));
  auto lemma3 = check_lemma3_sequence(contraction_spec_from_trace(trace, mu, problem.L(), K), tol);
  lemma3.name = "lemma3_trajectory";
  // On a trajectory an unmet precondition means the step is outside the
  // regime the lemmas cover; only the conclusion itself can fail here.
  res.report.add(lemma3);
  for (auto& e : check_theorem1(trace, mu, Q, K, res.eta, tol)) res.report.add(std::move(e));
  if (stop.epsilon > 0.0) res.report.add(check_corollary1(trace, mu, Q, K, stop.epsilon));

  res.measured_rate = measured_tail_rate(trace);
  res.eq7_rate = rate_eq7(res.eta, mu, 1);
  res.eq8_rate = rate_eq8(Q, K, 1);
  res.hit_iter = trace.reached_epsilon ? trace.iterations : -1;
  res.budget = stop.epsilon > 0.0 ? corollary1_budget(Q, K, res.F0, stop.epsilon) : 0;
  return res;
}

std::string emit_rate_table(const std::vector<PointResult>& results) {
  std::string out = "Q,K,eta,measured_rate,eq7_rate,eq8_rate,hit_iter,budget\n";
  for (const auto& r : results) {
    out += format_double(r.point.Q) + ',' + std::to_string(r.point.K) + ',' + format_double(r.eta) + ',' +
           format_double(r.measured_rate) + ',' + format_double(r.eq7_rate) + ',' + format_double(r.eq8_rate) +
           ',' + std::to_string(r.hit_iter) + ',' + std::to_string(r.budget) + '\n';
  }
  return out;
}

std::vector<RateSlope> rate_slopes(const std::vector<PointResult>& results) {
  std::vector<double> qs;
  for (const auto& r : results) {
    if (std::find(qs.begin(), qs.end(), r.point.Q) == qs.end()) qs.push_back(r.point.Q);
  }
  std::vector<RateSlope> out;
  for (double Q : qs) {
    std::vector<double> k1, hit, log_k1, log_hit;
    for (const auto& r : results) {
      if (r.point.Q != Q || r.hit_iter <= 0) continue;
      k1.push_back(r.point.K + 1.0);
      hit.push_back(static_cast<double>(r.hit_iter));
      log_k1.push_back(std::log(r.point.K + 1.0));
      log_hit.push_back(std::log(static_cast<double>(r.hit_iter)));
    }
    if (k1.size() < 2) continue;
    out.push_back({Q, k1.size(), least_squares_slope(k1, hit), least_squares_slope(log_k1, log_hit)});
  }
  return out;
}

std::string rate_slopes_csv(const std::vector<RateSlope>& slopes) {
  std::string out = "Q,points,slope_hit_vs_K_plus_1,loglog_slope\n";
  for (const auto& s : slopes) {
    out += format_double(s.Q) + ',' + std::to_string(s.points) + ',' + format_double(s.slope_hit_vs_k1) + ',' +
           format_double(s.loglog_slope) + '\n';
  }
  return out;
}

int run_experiment(const ExperimentConfig& config) {
  try {
    validate_config(config);
  } catch (const InputError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kExitInvalidInput;
  }

  namespace fs = std::filesystem;
  const fs::path out_dir(config.output_dir);
  fs::create_directories(out_dir);

  const auto points = sweep_points(config);
  std::vector<PointResult> results(points.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      PointResult res;
      try {
        res = run_point(config, points[i]);
      } catch (const std::exception& e) {
        res.point = points[i];
        res.error = e.what();
        CheckEntry internal;
        internal.name = "internal_error";
        internal.verdict = Verdict::fail;
        res.report.add(internal);
      }
      const auto& name = points[i].name;
      write_file_atomically((out_dir / ("instance_" + name + ".txt")).string(),
                            serialize_instance(build_instance(config, points[i])));
      if (!res.trace.records.empty()) {
        write_file_atomically((out_dir / ("trace_" + name + ".csv")).string(), trace_csv(res.trace));
      }
      write_file_atomically((out_dir / ("report_" + name + ".txt")).string(), res.report.to_text());
      {
        std::lock_guard lock(log_mutex);
        std::cout << name << ": eta=" << format_double(res.eta) << " hit_iter=" << res.hit_iter
                  << " budget=" << res.budget << (res.report.any_fail() ? " FAIL" : " ok");
        if (!res.error.empty()) std::cout << " (" << res.error << ")";
        std::cout << '\n';
      }
      res.trace = RunTrace{};  // drop the bulky part once written
      results[i] = std::move(res);
    }
  };
  {
    const auto n_threads = static_cast<std::size_t>(std::max(1, config.threads));
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < std::min(n_threads, points.size()); ++t) pool.emplace_back(worker);
    worker();
  }

  write_file_atomically((out_dir / "rates.csv").string(), emit_rate_table(results));
  if (results.size() >= 2) {
    write_file_atomically((out_dir / "rate_slopes.csv").string(), rate_slopes_csv(rate_slopes(results)));
  }

  const bool oracle_failed =
      std::any_of(results.begin(), results.end(), [](const PointResult& r) { return r.oracle_failed; });
  const bool check_failed =
      std::any_of(results.begin(), results.end(), [](const PointResult& r) { return r.report.any_fail(); });
  if (oracle_failed) return kExitOracleFailure;
  if (check_failed) return kExitCheckFailure;
  return kExitPass;
}

}  // namespace piag
