#include "conecap/learning.hpp"

#include <charconv>
#include <cmath>

#include "conecap/parallel.hpp"
#include "json.hpp"

namespace conecap {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Attempt indices for a trial live in a block of this width, so retries
// never collide with other trials' substreams.
constexpr std::uint64_t kAttemptStride = 128;
constexpr int kMaxTrialAttempts = 100;

void append_double(std::string& out, double x) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  out.append(buf, res.ptr);
}

nlohmann::ordered_json rule_config_json(const LearningRule& rule) {
  nlohmann::ordered_json j;
  j["name"] = rule_name(rule.kind);
  switch (rule.kind) {
    case RuleKind::Optimal:
    case RuleKind::SphericalCentroid:
      j["cloud_size"] = rule.cloud_size;
      j["n_starts"] = rule.n_starts;
      break;
    case RuleKind::EuclideanCentroid:
      j["cloud_size"] = rule.cloud_size;
      break;
    case RuleKind::Perceptron:
      j["epoch_cap"] = rule.epoch_cap;
      break;
  }
  return j;
}

}  // namespace

std::vector<int> label_points(const UnitVector& u,
                              const std::vector<UnitVector>& points) {
  std::vector<int> labels;
  labels.reserve(points.size());
  for (const UnitVector& x : points) {
    if (x.dim() != u.dim())
      throw InvalidInputError("label_points: dimension mismatch");
    labels.push_back(u.dot(x) >= 0.0 ? 1 : -1);
  }
  return labels;
}

double misclass_prob(const UnitVector& v, const UnitVector& u) {
  return geodesic_distance(v, u) / kPi;
}

const char* rule_name(RuleKind kind) {
  switch (kind) {
    case RuleKind::Optimal:
      return "optimal";
    case RuleKind::SphericalCentroid:
      return "spherical_centroid";
    case RuleKind::EuclideanCentroid:
      return "euclidean_centroid";
    case RuleKind::Perceptron:
      return "perceptron";
  }
  return "unknown";
}

std::optional<RuleKind> rule_kind_from_name(const std::string& name) {
  if (name == "optimal") return RuleKind::Optimal;
  if (name == "spherical_centroid") return RuleKind::SphericalCentroid;
  if (name == "euclidean_centroid") return RuleKind::EuclideanCentroid;
  if (name == "perceptron") return RuleKind::Perceptron;
  return std::nullopt;
}

UnitVector apply_rule(const LearningRule& rule, const LabeledSample& sample,
                      std::uint64_t seed) {
  if (sample.points.empty())
    throw InvalidInputError("apply_rule: sample is empty");
  if (sample.points.size() != sample.labels.size())
    throw InvalidInputError("apply_rule: points and labels differ in length");
  const int n = sample.points.front().dim();

  if (rule.kind == RuleKind::Perceptron) {
    if (rule.epoch_cap < 1)
      throw InvalidInputError("apply_rule: epoch cap must be positive");
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    for (int epoch = 0; epoch < rule.epoch_cap; ++epoch) {
      int mistakes = 0;
      for (std::size_t i = 0; i < sample.points.size(); ++i) {
        const double y = static_cast<double>(sample.labels[i]);
        if (y * w.dot(sample.points[i].coords()) <= 0.0) {
          w += y * sample.points[i].coords();
          ++mistakes;
        }
      }
      if (mistakes == 0) return UnitVector::normalized(std::move(w));
    }
    throw NonConvergenceError("perceptron: epoch cap reached; sample may be inconsistent");
  }

  if (rule.cloud_size < 1)
    throw InvalidInputError("apply_rule: cloud size must be positive");
  const PolyhedralCone cone =
      PolyhedralCone::from_labeled_sample(sample.points, sample.labels);
  // All cloud-based rules derive the cloud from the seed the same way, so
  // rules trained under one seed share the identical cloud.
  const ConeCloud cloud = sample_cone_cap(cone, rule.cloud_size, seed);

  if (rule.kind == RuleKind::EuclideanCentroid)
    return UnitVector::normalized(cloud.points.rowwise().mean());

  OptOptions opts;
  opts.grad_tol = rule.grad_tol;
  opts.max_iters = rule.max_iters;
  const GKind g =
      rule.kind == RuleKind::Optimal ? GKind::Identity : GKind::Square;
  const MinimaReport report =
      multistart_minimize(cloud, g, rule.n_starts, seed, 1e-3, opts);
  if (report.clusters.empty())
    throw NonConvergenceError("apply_rule: no optimizer start converged");
  return report.clusters.front().representative;
}

Instance random_instance(int n, int m, RngStream& rng) {
  if (n < 2) throw InvalidInputError("random_instance: dimension must be at least 2");
  if (m < 1) throw InvalidInputError("random_instance: need at least one point");
  Instance inst{random_unit(n, rng), {}};
  inst.sample.dim = n;
  inst.sample.points.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) inst.sample.points.push_back(random_unit(n, rng));
  inst.sample.labels = label_points(inst.target, inst.sample.points);
  return inst;
}

RuleFn rule_fn(const LearningRule& rule) {
  return [rule](const LabeledSample& sample, const UnitVector&,
                std::uint64_t seed) { return apply_rule(rule, sample, seed); };
}

std::vector<OmegaEstimate> omega_estimates(const std::vector<RuleFn>& trainers,
                                           int n, int m, int trials,
                                           std::uint64_t seed, int threads) {
  if (trainers.empty())
    throw InvalidInputError("omega_estimates: no trainers given");
  if (trials < 1)
    throw InvalidInputError("omega_estimates: trials must be positive");
  if (n < 2) throw InvalidInputError("omega_estimates: dimension must be at least 2");
  if (m < 1) throw InvalidInputError("omega_estimates: need at least one point");

  const auto n_rules = trainers.size();
  Eigen::MatrixXd values(static_cast<int>(n_rules), trials);
  std::vector<int> retries(static_cast<std::size_t>(trials), 0);

  parallel_for(trials, threads, [&](std::int64_t t) {
    for (int attempt = 0;; ++attempt) {
      if (attempt >= kMaxTrialAttempts)
        throw NonConvergenceError("omega_estimates: trial kept failing after retries");
      const std::uint64_t idx =
          static_cast<std::uint64_t>(t) * kAttemptStride +
          static_cast<std::uint64_t>(attempt);
      RngStream inst_rng(seed, stream_tag::kInstance, idx);
      const Instance inst = random_instance(n, m, inst_rng);
      const std::uint64_t rule_seed = stream_key(seed, stream_tag::kRuleSeed, idx);

      // One failing trainer voids the attempt for every trainer, keeping
      // the common-random-numbers pairing intact across rules.
      bool ok = true;
      Eigen::VectorXd row(static_cast<int>(n_rules));
      try {
        for (std::size_t f = 0; f < n_rules; ++f) {
          const UnitVector h = trainers[f](inst.sample, inst.target, rule_seed);
          row[static_cast<int>(f)] = misclass_prob(h, inst.target);
        }
      } catch (const LowAcceptanceError&) {
        ok = false;
      } catch (const NonConvergenceError&) {
        ok = false;
      }
      if (ok) {
        values.col(static_cast<int>(t)) = row;
        retries[static_cast<std::size_t>(t)] = attempt;
        break;
      }
    }
  });

  int failures = 0;
  for (int r : retries) failures += r;

  std::vector<OmegaEstimate> out(n_rules);
  for (std::size_t f = 0; f < n_rules; ++f) {
    const Eigen::ArrayXd row = values.row(static_cast<int>(f)).array();
    OmegaEstimate& est = out[f];
    est.omega = row.mean();
    est.trials = trials;
    est.failures = failures;
    if (trials > 1) {
      const double var =
          (row - est.omega).square().sum() / static_cast<double>(trials - 1);
      est.std_error = std::sqrt(var / static_cast<double>(trials));
    }
  }
  return out;
}

OmegaEstimate omega_estimate(const LearningRule& rule, int n, int m, int trials,
                             std::uint64_t seed, int threads) {
  return omega_estimates({rule_fn(rule)}, n, m, trials, seed, threads).front();
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  if (config.rules.empty())
    throw InvalidInputError("run_experiment: no rules configured");
  std::vector<RuleFn> fns;
  fns.reserve(config.rules.size());
  for (const LearningRule& rule : config.rules) fns.push_back(rule_fn(rule));

  const std::vector<OmegaEstimate> ests = omega_estimates(
      fns, config.n, config.m, config.trials, config.seed, config.threads);

  ExperimentReport report;
  report.config = config;
  for (std::size_t i = 0; i < config.rules.size(); ++i)
    report.rules.push_back(
        {rule_name(config.rules[i].kind), config.rules[i], ests[i]});
  return report;
}

std::string experiment_report_json(const ExperimentReport& report) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json cfg;
  cfg["n"] = report.config.n;
  cfg["m"] = report.config.m;
  cfg["trials"] = report.config.trials;
  cfg["rules"] = nlohmann::ordered_json::array();
  for (const RuleReport& r : report.rules)
    cfg["rules"].push_back(rule_config_json(r.rule));
  j["config"] = std::move(cfg);
  j["rules"] = nlohmann::ordered_json::array();
  for (const RuleReport& r : report.rules) {
    nlohmann::ordered_json e;
    e["name"] = r.name;
    e["omega"] = r.estimate.omega;
    e["std_error"] = r.estimate.std_error;
    e["trials"] = r.estimate.trials;
    e["failures"] = r.estimate.failures;
    j["rules"].push_back(std::move(e));
  }
  j["seed"] = report.config.seed;
  return j.dump(2) + "\n";
}

std::string experiment_report_csv(const ExperimentReport& report) {
  std::string out = "rule,omega,std_error,trials,failures\n";
  for (const RuleReport& r : report.rules) {
    out += r.name;
    out += ',';
    append_double(out, r.estimate.omega);
    out += ',';
    append_double(out, r.estimate.std_error);
    out += ',';
    out += std::to_string(r.estimate.trials);
    out += ',';
    out += std::to_string(r.estimate.failures);
    out += '\n';
  }
  return out;
}

}  // namespace conecap
