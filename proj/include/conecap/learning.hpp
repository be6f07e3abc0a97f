#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "conecap/optimizer.hpp"

namespace conecap {

/// Unit feature points with +1/-1 labels.
struct LabeledSample {
  std::vector<UnitVector> points;
  std::vector<int> labels;
  int dim = 0;
};

/// Labels every point by the sign of its inner product with u, with
/// sign(0) counted as +1.
std::vector<int> label_points(const UnitVector& u,
                              const std::vector<UnitVector>& points);

/// Probability that a uniform random point is classified differently by
/// the halfspaces of v and u: their angular distance over pi.
double misclass_prob(const UnitVector& v, const UnitVector& u);

enum class RuleKind {
  Optimal,            // minimize mean angular distance over the version cone
  SphericalCentroid,  // minimize mean squared angular distance
  EuclideanCentroid,  // normalized Euclidean mean of the version-cone cloud
  Perceptron,         // classic mistake-driven updates from zero
};

const char* rule_name(RuleKind kind);
std::optional<RuleKind> rule_kind_from_name(const std::string& name);

/// A learning rule plus the knobs its estimator needs. Cloud-based rules
/// derive their sampling streams from the seed passed to apply_rule, so
/// rules sharing a seed see the identical cloud.
struct LearningRule {
  RuleKind kind = RuleKind::Optimal;
  int cloud_size = 20000;   // version-cone cloud for the cloud-based rules
  int n_starts = 6;         // multistart width for the two minimizing rules
  int epoch_cap = 100000;   // perceptron epochs before giving up
  double grad_tol = 1e-6;   // optimizer tolerance for the minimizing rules
  int max_iters = 300;      // optimizer cap per start
};

/// Trains the rule on the sample. Sampling failures surface as
/// LowAcceptanceError, perceptron or optimizer failures as
/// NonConvergenceError; the experiment harness retries those.
UnitVector apply_rule(const LearningRule& rule, const LabeledSample& sample,
                      std::uint64_t seed);

/// A random learning instance: hidden target direction and the labeled
/// sample it induces on m uniform points.
struct Instance {
  UnitVector target;
  LabeledSample sample;
};

Instance random_instance(int n, int m, RngStream& rng);

struct OmegaEstimate {
  double omega = 0.0;      // mean misclassification probability over trials
  double std_error = 0.0;  // sample standard deviation / sqrt(trials)
  int trials = 0;
  int failures = 0;        // trial attempts that were retried
};

/// Generic trainer signature for the estimation harness. The hidden target
/// is passed alongside the sample so reference rules used in testing can
/// consult it; real rules ignore it.
using RuleFn = std::function<UnitVector(
    const LabeledSample& sample, const UnitVector& target, std::uint64_t seed)>;

/// Wraps a learning rule as a RuleFn (the target argument is ignored).
RuleFn rule_fn(const LearningRule& rule);

/// Estimates the expected misclassification probability of each trainer
/// over random instances with n-dimensional features and m points per
/// sample. All trainers see the same instances and per-trial seeds, so the
/// estimates share common random numbers and are directly comparable. A
/// trial in which any trainer fails (sampling shortfall or non-convergence)
/// is retried for all of them on a fresh substream and counted in failures.
std::vector<OmegaEstimate> omega_estimates(const std::vector<RuleFn>& trainers,
                                           int n, int m, int trials,
                                           std::uint64_t seed, int threads = 1);

OmegaEstimate omega_estimate(const LearningRule& rule, int n, int m, int trials,
                             std::uint64_t seed, int threads = 1);

struct ExperimentConfig {
  int n = 3;
  int m = 5;
  int trials = 500;
  std::uint64_t seed = 0;
  std::vector<LearningRule> rules;
  int threads = 1;  // execution knob only; never echoed into reports
};

struct RuleReport {
  std::string name;
  LearningRule rule;
  OmegaEstimate estimate;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<RuleReport> rules;
};

/// Runs every configured rule over a shared set of random instances.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// JSON serialization with a fixed field order, identical across runs and
/// thread counts for a given config and seed.
std::string experiment_report_json(const ExperimentReport& report);

/// One CSV row per rule: rule,omega,std_error,trials,failures.
std::string experiment_report_csv(const ExperimentReport& report);

}  // namespace conecap
