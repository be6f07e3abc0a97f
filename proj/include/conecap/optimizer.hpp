#pragma once

#include <cstdint>
#include <vector>

#include "conecap/objective.hpp"

namespace conecap {

struct OptOptions {
  int max_iters = 1000;
  double grad_tol = 1e-8;       // terminate when the gradient norm drops below
  double initial_step = 1.0;    // first step tried by each line search
  double armijo_c1 = 1e-4;      // sufficient-decrease coefficient
  double backtrack = 0.5;       // step shrink factor
  double step_stall = 1e-14;    // below this step the iterate cannot move
  double clamp = 1e-9;          // kink clamp forwarded to the gradient
  bool record_trace = false;
};

struct TracePoint {
  int iter = 0;
  double psi = 0.0;
  double grad_norm = 0.0;
};

/// Outcome of a single descent run. converged is set when the gradient
/// tolerance was met or the line search stalled below step_stall (the
/// iterate cannot move at double precision); it is false only when the
/// iteration cap cut the run short. psi_value is the cloud mean at the
/// final iterate, and grad_norm the gradient norm there.
struct OptResult {
  UnitVector minimizer;
  double psi_value = 0.0;
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
  std::vector<TracePoint> trace;
};

/// Projected gradient descent on the sphere: step along the negative
/// tangent gradient, renormalize, accept by Armijo backtracking. Accepted
/// iterates strictly decrease the objective.
OptResult minimize_from(const UnitVector& start, const ConeCloud& cloud,
                        GKind g, const OptOptions& opts = {});

struct MinimaCluster {
  UnitVector representative;  // lowest-value member of the cluster
  double psi_value = 0.0;
  int multiplicity = 0;  // how many converged runs landed here
};

/// Distinct local minima found by multistart, sorted by value. Cluster
/// representatives are pairwise farther apart than cluster_radius.
struct MinimaReport {
  std::vector<MinimaCluster> clusters;
  int starts = 0;
};

/// Runs minimize_from from n_starts uniform random starts (one substream
/// per start; thread count never changes the result) and clusters the
/// converged endpoints by geodesic distance. Requires n_starts >= 2.
MinimaReport multistart_minimize(const ConeCloud& cloud, GKind g, int n_starts,
                                 std::uint64_t seed,
                                 double cluster_radius = 1e-3,
                                 const OptOptions& opts = {}, int threads = 1);

}  // namespace conecap
