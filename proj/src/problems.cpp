#include "piag/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "piag/errors.hpp"
#include "piag/prox.hpp"
#include "piag/random.hpp"
#include "piag/text_format.hpp"

namespace piag {

namespace {

// log(1 + exp(t)) without overflow.
double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

// 1 / (1 + exp(-t)) without overflow.
double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw InputError(std::string(what) + " must be finite");
}

void check_dimension(const CompositeProblem& problem, const Vector& x) {
  if (x.size() != problem.n()) {
    throw InputError("dimension mismatch: expected " + std::to_string(problem.n()) + ", got " +
                     std::to_string(x.size()));
  }
}

}  // namespace

// ---------------------------------------------------------------------------

ComponentFunction ComponentFunction::quadratic(Vector curvature, Vector center) {
  if (curvature.size() != center.size() || curvature.size() == 0) {
    throw InputError("quadratic component: curvature and center must share a positive dimension");
  }
  if (!curvature.allFinite() || !center.allFinite()) {
    throw InputError("quadratic component: parameters must be finite");
  }
  if ((curvature.array() < 0.0).any()) {
    throw InputError("quadratic component: curvature must be nonnegative");
  }
  const double lipschitz = curvature.maxCoeff();
  const auto n = curvature.size();
  return ComponentFunction(QuadraticComponent{std::move(curvature), std::move(center)}, n, lipschitz);
}

ComponentFunction ComponentFunction::logistic(Vector row, double label, double ridge) {
  if (row.size() == 0 || !row.allFinite()) throw InputError("logistic component: bad data row");
  if (label != 1.0 && label != -1.0) throw InputError("logistic component: label must be +1 or -1");
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) {
    throw InputError("logistic component: ridge must be finite and nonnegative");
  }
  // Hessian is sigma(1 - sigma) a a^T + ridge I, and sigma(1 - sigma) <= 1/4.
  const double lipschitz = ridge + row.squaredNorm() / 4.0;
  const auto n = row.size();
  return ComponentFunction(LogisticComponent{std::move(row), label, ridge}, n, lipschitz);
}

ComponentKind ComponentFunction::kind() const {
  return std::holds_alternative<QuadraticComponent>(data_) ? ComponentKind::quadratic
                                                           : ComponentKind::regularized_logistic;
}

double ComponentFunction::value(const Vector& x) const {
  if (const auto* q = as_quadratic()) {
    return 0.5 * (q->curvature.array() * (x - q->center).array().square()).sum();
  }
  const auto& g = std::get<LogisticComponent>(data_);
  const double margin = g.label * g.row.dot(x);
  return softplus(-margin) + 0.5 * g.ridge * x.squaredNorm();
}

Vector ComponentFunction::gradient(const Vector& x) const {
  if (const auto* q = as_quadratic()) {
    return (q->curvature.array() * (x - q->center).array()).matrix();
  }
  const auto& g = std::get<LogisticComponent>(data_);
  const double margin = g.label * g.row.dot(x);
  return (-g.label * sigmoid(-margin)) * g.row + g.ridge * x;
}

// ---------------------------------------------------------------------------

Regularizer Regularizer::l1(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InputError("l1 weight must be >= 0");
  Regularizer r;
  r.kind = RegularizerKind::l1;
  r.lambda = lambda;
  return r;
}

Regularizer Regularizer::squared_l2(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InputError("squared-l2 weight must be >= 0");
  Regularizer r;
  r.kind = RegularizerKind::squared_l2;
  r.lambda = lambda;
  return r;
}

Regularizer Regularizer::box(double lower, double upper) {
  if (std::isnan(lower) || std::isnan(upper) || lower > upper) {
    throw InputError("box indicator needs lower <= upper");
  }
  Regularizer r;
  r.kind = RegularizerKind::box_indicator;
  r.lower = lower;
  r.upper = upper;
  return r;
}

Regularizer Regularizer::elastic_net(double lambda, double lambda2) {
  if (!(lambda >= 0.0) || !(lambda2 >= 0.0) || !std::isfinite(lambda) || !std::isfinite(lambda2)) {
    throw InputError("elastic-net weights must be >= 0");
  }
  Regularizer r;
  r.kind = RegularizerKind::elastic_net;
  r.lambda = lambda;
  r.lambda2 = lambda2;
  return r;
}

std::string_view to_string(RegularizerKind kind) {
  switch (kind) {
    case RegularizerKind::zero: return "zero";
    case RegularizerKind::l1: return "l1";
    case RegularizerKind::squared_l2: return "squared-l2";
    case RegularizerKind::box_indicator: return "box-indicator";
    case RegularizerKind::elastic_net: return "elastic-net";
  }
  return "?";
}

RegularizerKind regularizer_kind_from_string(std::string_view name) {
  for (auto k : {RegularizerKind::zero, RegularizerKind::l1, RegularizerKind::squared_l2,
                 RegularizerKind::box_indicator, RegularizerKind::elastic_net}) {
    if (to_string(k) == name) return k;
  }
  throw InputError("unknown regularizer kind '" + std::string(name) + "'");
}

std::string_view to_string(InstanceKind kind) {
  switch (kind) {
    case InstanceKind::quadratic: return "quadratic";
    case InstanceKind::logistic: return "logistic";
    case InstanceKind::custom: return "custom";
  }
  return "?";
}

InstanceKind instance_kind_from_string(std::string_view name) {
  for (auto k : {InstanceKind::quadratic, InstanceKind::logistic, InstanceKind::custom}) {
    if (to_string(k) == name) return k;
  }
  throw InputError("unknown instance kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

CompositeProblem::CompositeProblem(std::vector<ComponentFunction> components, Regularizer regularizer,
                                   double mu, InstanceKind kind, std::uint64_t seed)
    : components_(std::move(components)), regularizer_(regularizer), mu_(mu), kind_(kind), seed_(seed) {
  if (components_.empty()) throw InputError("a problem needs at least one component");
  n_ = components_.front().dimension();
  for (const auto& c : components_) {
    if (c.dimension() != n_) throw InputError("components disagree on the dimension");
  }
  if (!(mu_ > 0.0) || !std::isfinite(mu_)) throw InputError("mu must be positive");
  double sum = 0.0;
  for (const auto& c : components_) sum += c.lipschitz();
  L_ = sum / static_cast<double>(components_.size());
  // Q = L / mu >= 1; allow for rounding in generated constants.
  if (L_ < mu_ * (1.0 - 1e-12)) {
    throw InputError("mu exceeds the mean Lipschitz constant L (Q < 1)");
  }
}

const ComponentFunction& CompositeProblem::component(std::size_t i) const {
  if (i >= components_.size()) {
    throw InputError("component index " + std::to_string(i) + " out of range [0, " +
                     std::to_string(components_.size()) + ")");
  }
  return components_[i];
}

CompositeProblem CompositeProblem::with_regularizer(Regularizer regularizer) const {
  CompositeProblem copy = *this;
  copy.regularizer_ = regularizer;
  return copy;
}

double eval_f(const CompositeProblem& problem, const Vector& x) {
  check_dimension(problem, x);
  double sum = 0.0;
  for (const auto& c : problem.components()) sum += c.value(x);
  return sum / static_cast<double>(problem.m());
}

Vector eval_grad_component(const CompositeProblem& problem, std::size_t i, const Vector& x) {
  const auto& c = problem.component(i);
  check_dimension(problem, x);
  return c.gradient(x);
}

Vector eval_grad_f(const CompositeProblem& problem, const Vector& x) {
  check_dimension(problem, x);
  Vector sum = Vector::Zero(problem.n());
  for (const auto& c : problem.components()) sum += c.gradient(x);
  return sum / static_cast<double>(problem.m());
}

double eval_objective(const CompositeProblem& problem, const Vector& x) {
  return eval_f(problem, x) + eval_reg(problem.regularizer(), x);
}

// ---------------------------------------------------------------------------

CompositeProblem make_quadratic_instance(std::size_t m, Eigen::Index n, double mu, double L_target,
                                         std::uint64_t seed, Regularizer regularizer) {
  if (m == 0 || n <= 0) throw InputError("quadratic instance needs m >= 1 and n >= 1");
  require_finite(mu, "mu");
  require_finite(L_target, "L_target");
  if (!(mu > 0.0)) throw InputError("mu must be positive");
  if (mu > L_target) throw InputError("mu must not exceed L_target");
  if (n == 1 && mu != L_target) {
    throw InputError("a one-dimensional diagonal quadratic instance forces mu == L_target");
  }

  Rng rng(seed);
  std::vector<Vector> curvature(m, Vector(n));
  std::vector<Vector> center(m);
  for (std::size_t i = 0; i < m; ++i) {
    curvature[i][0] = L_target;
    for (Eigen::Index j = 1; j + 1 < n; ++j) curvature[i][j] = rng.uniform(mu, L_target);
    center[i] = rng.uniform_vector(n, -1.0, 1.0);
  }
  if (n >= 2) {
    // Soft coordinate: heterogeneous per component, mean exactly mu, and
    // every entry stays inside [0, L_target] so L_i is untouched.
    const double spread = std::min(mu, L_target - mu);
    std::vector<double> w(m);
    for (auto& wi : w) wi = rng.uniform(-1.0, 1.0);
    const double mean_w = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(m);
    double max_dev = 0.0;
    for (double wi : w) max_dev = std::max(max_dev, std::abs(wi - mean_w));
    const double scale = max_dev > 0.0 ? spread / max_dev : 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      curvature[i][n - 1] = std::clamp(mu + scale * (w[i] - mean_w), 0.0, L_target);
    }
  }

  std::vector<ComponentFunction> components;
  components.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    components.push_back(ComponentFunction::quadratic(std::move(curvature[i]), std::move(center[i])));
  }
  return CompositeProblem(std::move(components), regularizer, mu, InstanceKind::quadratic, seed);
}

CompositeProblem make_logistic_instance(std::size_t m, Eigen::Index n, double mu, std::uint64_t seed,
                                        std::optional<double> L_target, Regularizer regularizer) {
  if (m == 0 || n <= 0) throw InputError("logistic instance needs m >= 1 and n >= 1");
  require_finite(mu, "mu");
  if (!(mu > 0.0)) throw InputError("mu must be positive");
  if (L_target) {
    require_finite(*L_target, "L_target");
    if (mu > *L_target) throw InputError("mu must not exceed L_target");
  }

  Rng rng(seed);
  std::vector<Vector> rows(m);
  std::vector<double> labels(m);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < m; ++i) {
    rows[i] = rng.uniform_vector(n, -1.0, 1.0) * inv_sqrt_n;
    labels[i] = rng.coin() ? 1.0 : -1.0;
  }
  if (L_target) {
    double mean_sq = 0.0;
    for (const auto& a : rows) mean_sq += a.squaredNorm();
    mean_sq /= static_cast<double>(m);
    const double wanted = 4.0 * (*L_target - mu);
    const double s = (wanted > 0.0 && mean_sq > 0.0) ? std::sqrt(wanted / mean_sq) : 0.0;
    for (auto& a : rows) a *= s;
  }

  std::vector<ComponentFunction> components;
  components.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    components.push_back(ComponentFunction::logistic(std::move(rows[i]), labels[i], mu));
  }
  return CompositeProblem(std::move(components), regularizer, mu, InstanceKind::logistic, seed);
}

// ---------------------------------------------------------------------------

std::string serialize_instance(const CompositeProblem& problem) {
  KeyValueDoc doc;
  doc.set("kind", std::string(to_string(problem.kind())));
  doc.set("m", static_cast<long long>(problem.m()));
  doc.set("n", static_cast<long long>(problem.n()));
  doc.set("mu", problem.mu());
  doc.set("L", problem.L());
  doc.set("seed", std::to_string(problem.seed()));
  const auto& r = problem.regularizer();
  doc.set("regularizer", std::string(to_string(r.kind)));
  switch (r.kind) {
    case RegularizerKind::zero:
      break;
    case RegularizerKind::l1:
    case RegularizerKind::squared_l2:
      doc.set("regularizer.lambda", r.lambda);
      break;
    case RegularizerKind::elastic_net:
      doc.set("regularizer.lambda", r.lambda);
      doc.set("regularizer.lambda2", r.lambda2);
      break;
    case RegularizerKind::box_indicator:
      doc.set("regularizer.lower", r.lower);
      doc.set("regularizer.upper", r.upper);
      break;
  }
  for (std::size_t i = 0; i < problem.m(); ++i) {
    const auto& c = problem.components()[i];
    const std::string prefix = "component." + std::to_string(i) + ".";
    doc.set(prefix + "L", c.lipschitz());
    if (const auto* q = c.as_quadratic()) {
      doc.set(prefix + "type", std::string("quadratic"));
      doc.set(prefix + "curvature", q->curvature);
      doc.set(prefix + "center", q->center);
    } else {
      const auto* g = c.as_logistic();
      doc.set(prefix + "type", std::string("logistic"));
      doc.set(prefix + "row", g->row);
      doc.set(prefix + "label", g->label);
      doc.set(prefix + "ridge", g->ridge);
    }
  }
  return doc.to_string();
}

CompositeProblem deserialize_instance(std::string_view text) {
  const auto doc = KeyValueDoc::parse(text);
  const auto kind = instance_kind_from_string(doc.get("kind"));
  const auto m = doc.get_integer("m");
  if (m <= 0) throw InputError("m must be positive");

  Regularizer reg;
  switch (regularizer_kind_from_string(doc.get("regularizer"))) {
    case RegularizerKind::zero: break;
    case RegularizerKind::l1: reg = Regularizer::l1(doc.get_double("regularizer.lambda")); break;
    case RegularizerKind::squared_l2:
      reg = Regularizer::squared_l2(doc.get_double("regularizer.lambda"));
      break;
    case RegularizerKind::elastic_net:
      reg = Regularizer::elastic_net(doc.get_double("regularizer.lambda"),
                                     doc.get_double("regularizer.lambda2"));
      break;
    case RegularizerKind::box_indicator:
      reg = Regularizer::box(doc.get_double("regularizer.lower"), doc.get_double("regularizer.upper"));
      break;
  }

  std::vector<ComponentFunction> components;
  for (long long i = 0; i < m; ++i) {
    const std::string prefix = "component." + std::to_string(i) + ".";
    const auto& type = doc.get(prefix + "type");
    if (type == "quadratic") {
      components.push_back(ComponentFunction::quadratic(doc.get_vector(prefix + "curvature"),
                                                        doc.get_vector(prefix + "center")));
    } else if (type == "logistic") {
      components.push_back(ComponentFunction::logistic(
          doc.get_vector(prefix + "row"), doc.get_double(prefix + "label"), doc.get_double(prefix + "ridge")));
    } else {
      throw InputError("unknown component type '" + type + "'");
    }
  }
  const auto seed = std::stoull(doc.get("seed"));
  CompositeProblem problem(std::move(components), reg, doc.get_double("mu"), kind, seed);
  if (problem.n() != doc.get_integer("n")) throw InputError("declared n disagrees with components");
  return problem;
}

std::uint64_t instance_hash(const CompositeProblem& problem) { return fnv1a(serialize_instance(problem)); }

}  // namespace piag
