#include "conecap/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "conecap/parallel.hpp"

namespace conecap {

OptResult minimize_from(const UnitVector& start, const ConeCloud& cloud,
                        GKind g, const OptOptions& opts) {
  if (opts.max_iters < 1)
    throw InvalidInputError("minimize_from: max_iters must be positive");
  if (!(opts.grad_tol > 0.0) || !(opts.initial_step > 0.0) ||
      !(opts.backtrack > 0.0) || opts.backtrack >= 1.0 ||
      !(opts.armijo_c1 > 0.0) || opts.armijo_c1 >= 1.0)
    throw InvalidInputError("minimize_from: malformed options");

  UnitVector w = start;
  double psi = psi_saa(w, cloud, g).value;
  PsiGradient grad = psi_grad_saa(w, cloud, g, opts.clamp);
  double gnorm = grad.grad.norm();

  OptResult res{w, psi, 0, gnorm, false, {}};
  if (opts.record_trace) res.trace.push_back({0, psi, gnorm});

  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    if (gnorm < opts.grad_tol) {
      res.converged = true;
      break;
    }

    // Backtracking line search along the retracted ray
    // normalize(w - eta * grad), with the usual sufficient decrease test
    // against the tangent-space model -eta * ||grad||^2. The explicit
    // cand_psi < psi guard keeps accepted steps strictly decreasing even
    // when the decrease threshold underflows below one ulp of psi, which
    // happens on flat stretches of the piecewise-linear sample objective.
    double eta = opts.initial_step;
    std::optional<UnitVector> next;
    double next_psi = 0.0;
    while (eta >= opts.step_stall) {
      UnitVector cand = UnitVector::normalized(w.coords() - eta * grad.grad);
      const double cand_psi = psi_saa(cand, cloud, g).value;
      if (cand_psi < psi &&
          cand_psi <= psi - opts.armijo_c1 * eta * gnorm * gnorm) {
        next = std::move(cand);
        next_psi = cand_psi;
        break;
      }
      eta *= opts.backtrack;
    }
    if (!next) {
      // No acceptable step above the stall threshold: the iterate cannot
      // improve at this precision, which we treat as converged.
      res.converged = true;
      break;
    }

    w = std::move(*next);
    psi = next_psi;
    grad = psi_grad_saa(w, cloud, g, opts.clamp);
    gnorm = grad.grad.norm();
    res.iterations = iter;
    if (opts.record_trace) res.trace.push_back({iter, psi, gnorm});
  }

  res.minimizer = w;
  res.psi_value = psi;
  res.grad_norm = gnorm;
  return res;
}

MinimaReport multistart_minimize(const ConeCloud& cloud, GKind g, int n_starts,
                                 std::uint64_t seed, double cluster_radius,
                                 const OptOptions& opts, int threads) {
  if (n_starts < 2)
    throw InvalidInputError("multistart_minimize: need at least two starts");
  if (!(cluster_radius > 0.0))
    throw InvalidInputError("multistart_minimize: cluster radius must be positive");

  const int n = cloud.dim();
  std::vector<OptResult> runs;
  runs.reserve(static_cast<std::size_t>(n_starts));
  for (int k = 0; k < n_starts; ++k) {
    RngStream rng(seed, stream_tag::kStart, static_cast<std::uint64_t>(k));
    runs.push_back(OptResult{random_unit(n, rng), 0.0, 0, 0.0, false, {}});
  }
  parallel_for(n_starts, threads, [&](std::int64_t k) {
    const UnitVector start = runs[static_cast<std::size_t>(k)].minimizer;
    runs[static_cast<std::size_t>(k)] = minimize_from(start, cloud, g, opts);
  });

  // Greedy clustering in ascending value order: each converged endpoint
  // joins the first cluster within the radius, else founds a new one, so
  // representatives are the best member and end up pairwise separated.
  std::vector<int> order(static_cast<std::size_t>(n_starts));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return runs[static_cast<std::size_t>(a)].psi_value <
           runs[static_cast<std::size_t>(b)].psi_value;
  });

  MinimaReport report;
  report.starts = n_starts;
  for (int idx : order) {
    const OptResult& run = runs[static_cast<std::size_t>(idx)];
    if (!run.converged) continue;
    bool merged = false;
    for (MinimaCluster& c : report.clusters) {
      if (geodesic_distance(c.representative, run.minimizer) <= cluster_radius) {
        c.multiplicity += 1;
        merged = true;
        break;
      }
    }
    if (!merged)
      report.clusters.push_back({run.minimizer, run.psi_value, 1});
  }
  return report;
}

}  // namespace conecap
