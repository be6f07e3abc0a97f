// Acceptance harness: each invocation runs one named criterion and prints
// a single [PASS]/[FAIL] line with the measured numbers.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "conecap/learning.hpp"

using namespace conecap;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.5g", x);
  return buf;
}

PolyhedralCone version_cone(const Instance& inst) {
  return PolyhedralCone::from_labeled_sample(inst.sample.points,
                                             inst.sample.labels);
}

// Instance whose version cone keeps an interior direction with margin at
// least `floor`; keeps rejection sampling of the cap tractable.
Instance thick_instance(int n, int m, RngStream& rng, double floor) {
  for (int tries = 0; tries < 500; ++tries) {
    Instance inst = random_instance(n, m, rng);
    if (version_cone(inst).interior_margin(300, 16, rng.next_u64()).margin >=
        floor)
      return inst;
  }
  throw NonConvergenceError("no instance met the margin floor");
}

UnitVector dual_cap_point(const PolyhedralCone& cone, RngStream& rng) {
  while (true) {
    Eigen::VectorXd alpha(cone.num_normals());
    for (int i = 0; i < cone.num_normals(); ++i)
      alpha[i] = std::abs(rng.normal()) + 1e-3;
    const Eigen::VectorXd p = cone.normals() * alpha;
    if (p.norm() > 1e-9) return UnitVector::normalized(p);
  }
}

std::pair<double, double> midpoint_defect(const UnitVector& w1,
                                          const UnitVector& w2,
                                          const UnitVector& mid,
                                          const ConeCloud& cloud, GKind g) {
  const int n = cloud.size();
  double sum = 0.0, sumsq = 0.0;
  for (int j = 0; j < n; ++j) {
    const UnitVector y = UnitVector::normalized(cloud.points.col(j));
    const double dj = g_eval(g, geodesic_distance(mid, y)).value -
                      0.5 * g_eval(g, geodesic_distance(w1, y)).value -
                      0.5 * g_eval(g, geodesic_distance(w2, y)).value;
    sum += dj;
    sumsq += dj * dj;
  }
  const double mean = sum / n;
  const double var = n > 1 ? (sumsq - n * mean * mean) / (n - 1) : 0.0;
  return {mean, std::sqrt(std::max(0.0, var) / n)};
}

double combined_se(const PsiEstimate& est, const ConeCloud& cloud) {
  const double sigma = cloud.measure_estimate;
  const double se_sigma =
      cloud.attempts == 0
          ? 0.0
          : std::sqrt(sigma * (1.0 - sigma) /
                      static_cast<double>(cloud.attempts));
  return std::sqrt(est.std_error * sigma * est.std_error * sigma +
                   est.value * se_sigma * est.value * se_sigma);
}

// A single positive example must force the learned direction onto it.
std::pair<bool, std::string> run_a1() {
  LabeledSample sample;
  sample.dim = 3;
  sample.points = {UnitVector::axis(3, 0)};
  sample.labels = {1};
  LearningRule rule;
  rule.kind = RuleKind::Optimal;
  rule.cloud_size = 50000;
  rule.n_starts = 6;
  const UnitVector h = apply_rule(rule, sample, 101);
  const double err = geodesic_distance(h, sample.points[0]);
  return {err <= 0.05,
          "single-example pull: distance " + num(err) + " (tolerance 0.05)"};
}

// The planar quadrant minimizer sits on the bisector at the known value.
std::pair<bool, std::string> run_a2() {
  const PolyhedralCone quadrant = PolyhedralCone::from_normals(
      {UnitVector::axis(2, 0), UnitVector::axis(2, 1)});
  const ConeCloud cloud = sample_cone_cap(quadrant, 100000, 102);
  const MinimaReport rep = multistart_minimize(cloud, GKind::Identity, 4, 102);
  if (rep.clusters.empty()) return {false, "no converged start"};
  const UnitVector best = rep.clusters.front().representative;
  const double angle = std::atan2(best.coords()[1], best.coords()[0]);
  const double angle_err = std::abs(angle - kPi / 4.0);

  const PsiEstimate est = psi_saa(best, cloud, GKind::Identity);
  const double target = kPi / 32.0;
  const double se = combined_se(est, cloud);
  const double dev = std::abs(est.scaled_value - target) / se;
  const bool ok = angle_err <= 0.01 && dev <= 3.0;
  return {ok, "angle " + num(angle) + " (target " + num(kPi / 4.0) +
                  " +/- 0.01), scaled value " + num(est.scaled_value) +
                  " vs " + num(target) + " (" + num(dev) + " SE)"};
}

// The cosine-shaped objective admits a closed-form minimizer: the
// normalized cloud mean. Every random instance must reproduce it.
std::pair<bool, std::string> run_a3() {
  RngStream rng(103, stream_tag::kCheck, 1);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int n = 2 + i % 4;
    const int m = 1 + i % 6;
    const Instance inst = thick_instance(n, m, rng, 0.2);
    const ConeCloud cloud =
        sample_cone_cap(version_cone(inst), 1000, rng.next_u64(), 1000000);
    const OptResult res =
        minimize_from(random_unit(n, rng), cloud, GKind::TwoOneMinusCos, {});
    if (!res.converged) return {false, "instance " + num(i) + " did not converge"};
    const UnitVector oracle =
        UnitVector::normalized(cloud.points.rowwise().mean());
    worst = std::max(worst, geodesic_distance(res.minimizer, oracle));
  }
  return {worst <= 1e-6, "100 instances, max distance to closed form " +
                             num(worst) + " (tolerance 1e-6)"};
}

// The best minimizer must land inside both the version cone and its dual.
std::pair<bool, std::string> run_a4() {
  RngStream rng(104, stream_tag::kCheck, 1);
  double worst_margin = 0.0, worst_resid = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int n = 2 + i % 4;
    const int m = n + i % (7 - n);
    const Instance inst = thick_instance(n, m, rng, 0.2);
    const PolyhedralCone cone = version_cone(inst);
    const ConeCloud cloud = sample_cone_cap(cone, 30000, rng.next_u64(), 1000000);
    const MinimaReport rep =
        multistart_minimize(cloud, GKind::Identity, 4, rng.next_u64());
    if (rep.clusters.empty()) return {false, "instance " + num(i) + " found no minimum"};
    const UnitVector w = rep.clusters.front().representative;
    worst_margin = std::max(worst_margin, -cone.min_margin(w.coords()));
    worst_resid =
        std::max(worst_resid, cone.project_dual(w.coords()).coeffs.residual);
  }
  const bool ok = worst_margin <= 1e-6 && worst_resid < 1e-4;
  return {ok, "100 instances, worst membership defect " + num(worst_margin) +
                  " (tolerance 1e-6), worst dual residual " + num(worst_resid) +
                  " (tolerance 1e-4)"};
}

// Twenty independent starts should agree on a single basin almost always.
std::pair<bool, std::string> run_a5() {
  RngStream rng(105, stream_tag::kCheck, 1);
  int unimodal = 0;
  for (int i = 0; i < 100; ++i) {
    const int n = 2 + i % 4;
    const int m = n + i % (7 - n);
    const Instance inst = thick_instance(n, m, rng, 0.2);
    const ConeCloud cloud =
        sample_cone_cap(version_cone(inst), 10000, rng.next_u64(), 1000000);
    const MinimaReport rep =
        multistart_minimize(cloud, GKind::Identity, 20, rng.next_u64());
    if (rep.clusters.size() == 1 && rep.clusters.front().multiplicity == 20)
      ++unimodal;
  }
  return {unimodal >= 98, num(unimodal) + "/100 instances had all 20 starts in "
                                          "one cluster (need >= 98)"};
}

// Midpoint inequalities: strictly convex over the dual cap, strictly
// concave over its reflection. Planar triples use exact quadrature, the
// rest use the shared-cloud sample estimate with a 2 SE margin.
std::pair<bool, std::string> run_a6() {
  RngStream rng(106, stream_tag::kCheck, 1);
  int exact_triples = 0, saa_triples = 0;
  for (int i = 0; i < 200; ++i) {
    const int n = 2 + i % 3;
    if (n == 2) {
      const double phi0 = -1.0 + 2.0 * rng.uniform01();
      const double width = 0.4 + (kPi - 0.9) * rng.uniform01();
      const double phi1 = phi0 + width;
      const double dual_lo = phi1 - kPi / 2.0;
      const double dual_hi = phi0 + kPi / 2.0;
      // The planar identity objective is affine outside the support arc,
      // so strictness needs the test segment to cross the arc.
      double b1 = 0.0, b2 = 0.0;
      bool usable = false;
      for (int tries = 0; tries < 300 && !usable; ++tries) {
        b1 = dual_lo + (dual_hi - dual_lo) * rng.uniform01();
        b2 = dual_lo + (dual_hi - dual_lo) * rng.uniform01();
        const double overlap = std::min(std::max(b1, b2), phi1) -
                               std::max(std::min(b1, b2), phi0);
        usable = std::abs(b1 - b2) >= 0.2 && overlap >= 0.1;
      }
      if (!usable) continue;
      const double mid = 0.5 * (b1 + b2);
      for (const GKind g : {GKind::Identity, GKind::Square}) {
        const double defect = psi_exact_2d(mid, phi0, phi1, g) -
                              0.5 * psi_exact_2d(b1, phi0, phi1, g) -
                              0.5 * psi_exact_2d(b2, phi0, phi1, g);
        if (!(defect < -1e-12))
          return {false, "planar convexity failed: defect " + num(defect)};
      }
      const double rdefect =
          psi_exact_2d(mid + kPi, phi0, phi1, GKind::Identity) -
          0.5 * psi_exact_2d(b1 + kPi, phi0, phi1, GKind::Identity) -
          0.5 * psi_exact_2d(b2 + kPi, phi0, phi1, GKind::Identity);
      if (!(rdefect > 1e-12))
        return {false, "planar concavity failed: defect " + num(rdefect)};
      ++exact_triples;
    } else {
      const Instance inst = thick_instance(n, n + 1, rng, 0.25);
      const PolyhedralCone cone = version_cone(inst);
      UnitVector w1 = dual_cap_point(cone, rng);
      UnitVector w2 = dual_cap_point(cone, rng);
      int tries = 0;
      while (tries++ < 300) {
        const double rho = geodesic_distance(w1, w2);
        if (rho >= 0.5 && rho <= kPi / 2.0) break;
        w2 = dual_cap_point(cone, rng);
      }
      if (tries >= 300) continue;
      const UnitVector mid = geodesic_midpoint(w1, w2);
      const ConeCloud cloud =
          sample_cone_cap(cone, 10000, rng.next_u64(), 1000000);
      for (const GKind g : {GKind::Identity, GKind::Square}) {
        const auto [mean, se] = midpoint_defect(w1, w2, mid, cloud, g);
        if (!(mean + 2.0 * se < 0.0))
          return {false, "sampled convexity failed: defect " + num(mean) +
                             " se " + num(se)};
      }
      const auto [rmean, rse] = midpoint_defect(
          UnitVector::normalized(-w1.coords()),
          UnitVector::normalized(-w2.coords()),
          UnitVector::normalized(-mid.coords()), cloud, GKind::Identity);
      if (!(rmean - 2.0 * rse > 0.0))
        return {false, "sampled concavity failed: defect " + num(rmean) +
                           " se " + num(rse)};
      ++saa_triples;
    }
  }
  const bool ok = exact_triples + saa_triples >= 190;
  return {ok, num(exact_triples) + " exact + " + num(saa_triples) +
                  " sampled triples, all strict"};
}

// Disagreement between two halfspace classifiers occurs with probability
// angle / pi; Monte Carlo rates must match within 3 binomial SE.
std::pair<bool, std::string> run_a7() {
  RngStream rng(107, stream_tag::kCheck, 1);
  const int count = 100000;
  double worst_dev = 0.0;
  for (int i = 0; i < 50; ++i) {
    const int n = 2 + i % 4;
    const UnitVector u = random_unit(n, rng);
    const UnitVector v = random_unit(n, rng);
    const double p = misclass_prob(v, u);
    const Eigen::MatrixXd pts = sample_sphere(n, count, rng.next_u64());
    int disagree = 0;
    for (int j = 0; j < count; ++j) {
      const bool su = u.coords().dot(pts.col(j)) >= 0.0;
      const bool sv = v.coords().dot(pts.col(j)) >= 0.0;
      disagree += su != sv;
    }
    const double rate = static_cast<double>(disagree) / count;
    const double se = std::sqrt(std::max(p * (1.0 - p), 1e-12) /
                                static_cast<double>(count));
    worst_dev = std::max(worst_dev, std::abs(rate - p) / se);
  }
  return {worst_dev <= 3.0, "50 pairs, worst deviation " + num(worst_dev) +
                                " SE (tolerance 3)"};
}

// Rotating the data rotates the minimizer: transport the cloud and the
// start, and the two solutions must agree after transport.
std::pair<bool, std::string> run_a8() {
  RngStream rng(108, stream_tag::kCheck, 1);
  OptOptions opts;
  opts.max_iters = 3000;
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const int n = 3 + i % 2;
    const Instance inst = thick_instance(n, n + 1, rng, 0.2);
    const ConeCloud cloud =
        sample_cone_cap(version_cone(inst), 2000, rng.next_u64(), 1000000);
    const Eigen::MatrixXd rot = random_rotation(n, rng);
    const UnitVector start = random_unit(n, rng);
    const OptResult base = minimize_from(start, cloud, GKind::Identity, opts);
    const OptResult moved =
        minimize_from(UnitVector::normalized(rot * start.coords()),
                      rotate_cloud(cloud, rot), GKind::Identity, opts);
    if (!base.converged || !moved.converged)
      return {false, "rotation case " + num(i) + " did not converge"};
    worst = std::max(
        worst,
        geodesic_distance(UnitVector::normalized(rot * base.minimizer.coords()),
                          moved.minimizer));
  }
  return {worst <= 1e-6, "50 rotations, max transported-minimizer gap " +
                             num(worst) + " (tolerance 1e-6)"};
}

// The distance-minimizing rule must dominate every baseline under
// common random instances, up to two standard errors of the difference.
std::pair<bool, std::string> run_a9() {
  std::vector<LearningRule> rules(4);
  rules[0].kind = RuleKind::Optimal;
  rules[1].kind = RuleKind::EuclideanCentroid;
  rules[2].kind = RuleKind::SphericalCentroid;
  rules[3].kind = RuleKind::Perceptron;

  std::vector<RuleFn> trainers;
  for (const LearningRule& r : rules) trainers.push_back(rule_fn(r));
  const auto ests = omega_estimates(trainers, 3, 5, 500, 109);

  std::string detail = "optimal " + num(ests[0].omega);
  bool ok = true;
  const char* names[] = {"optimal", "euclidean_centroid", "spherical_centroid",
                         "perceptron"};
  for (int r = 1; r < 4; ++r) {
    const double se = std::sqrt(ests[0].std_error * ests[0].std_error +
                                ests[r].std_error * ests[r].std_error);
    const bool dom = ests[0].omega <= ests[r].omega + 2.0 * se;
    ok = ok && dom;
    detail += std::string(", ") + names[r] + " " + num(ests[r].omega) +
              (dom ? " (dominated)" : " (NOT dominated)");
  }
  detail += ", failures " + num(ests[0].failures);
  return {ok, detail};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + CONECAP_CLI_PATH + "\" " + args;
  return std::system(cmd.c_str());
}

// The CLI's reports must be byte-identical no matter how many workers run.
std::pair<bool, std::string> run_a10() {
  struct Job {
    const char* label;
    std::string args;
    std::vector<std::string> outputs;
  };
  std::vector<Job> jobs = {
      {"verify", "verify --seed 7 --out a10_verify_t%T.json",
       {"a10_verify_t%T.json"}},
      {"optimize",
       "optimize --cone quadrant --count 20000 --starts 8 --g identity "
       "--seed 7 --out a10_opt_t%T.json --trace a10_trace_t%T.csv",
       {"a10_opt_t%T.json", "a10_trace_t%T.csv"}},
      {"experiment",
       "experiment --n 3 --m 4 --trials 10 --cloud-size 2000 --rule-starts 3 "
       "--seed 7 --out a10_exp_t%T.json --csv a10_exp_t%T.csv",
       {"a10_exp_t%T.json", "a10_exp_t%T.csv"}},
  };
  const int threads[] = {1, 2, 8};

  const auto fill = [](std::string text, int t) {
    const std::string tag = std::to_string(t);
    for (std::string::size_type pos = 0;
         (pos = text.find("%T", pos)) != std::string::npos;)
      text.replace(pos, 2, tag);
    return text;
  };

  for (const Job& job : jobs) {
    for (const int t : threads) {
      const int code =
          run_cli(fill(job.args, t) + " --threads " + std::to_string(t));
      if (code != 0)
        return {false, std::string(job.label) + " exited with code " +
                           num(code) + " at " + num(t) + " threads"};
    }
    for (const std::string& out : job.outputs) {
      const std::string base = read_file(fill(out, 1));
      if (base.empty())
        return {false, std::string(job.label) + " wrote no output"};
      for (const int t : {2, 8}) {
        if (read_file(fill(out, t)) != base)
          return {false, std::string(job.label) + " output " + fill(out, t) +
                             " differs from the single-worker run"};
      }
    }
  }
  return {true, "verify, optimize, and experiment outputs byte-identical "
                "across 1, 2, and 8 workers"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<std::string, std::function<std::pair<bool, std::string>()>>
      criteria = {{"A1", run_a1}, {"A2", run_a2}, {"A3", run_a3},
                  {"A4", run_a4}, {"A5", run_a5}, {"A6", run_a6},
                  {"A7", run_a7}, {"A8", run_a8}, {"A9", run_a9},
                  {"A10", run_a10}};
  if (argc != 2 || criteria.find(argv[1]) == criteria.end()) {
    std::fprintf(stderr, "usage: acceptance <A1..A10>\n");
    return 2;
  }
  bool pass = false;
  std::string detail;
  try {
    const auto [p, d] = criteria.at(argv[1])();
    pass = p;
    detail = d;
  } catch (const std::exception& e) {
    pass = false;
    detail = std::string("unexpected error: ") + e.what();
  }
  std::printf("[%s] %s %s\n", pass ? "PASS" : "FAIL", argv[1], detail.c_str());
  return pass ? 0 : 1;
}
