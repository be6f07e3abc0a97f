// Command-line front end: sample cone caps, evaluate and minimize the
// cap objective, run the learning-rule experiment, and self-verify.
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "conecap/learning.hpp"
#include "conecap/verify.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string fmt(double x) {
  char buf[32];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

std::optional<conecap::GKind> g_from_name(const std::string& name) {
  if (name == "identity") return conecap::GKind::Identity;
  if (name == "square") return conecap::GKind::Square;
  if (name == "two_one_minus_cos" || name == "cos")
    return conecap::GKind::TwoOneMinusCos;
  return std::nullopt;
}

const char* g_name(conecap::GKind g) {
  switch (g) {
    case conecap::GKind::Identity: return "identity";
    case conecap::GKind::Square: return "square";
    case conecap::GKind::TwoOneMinusCos: return "two_one_minus_cos";
  }
  return "identity";
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// All keys a config file may carry; anything else is rejected.
const std::vector<std::string> kConfigKeys = {
    "seed",       "threads",       "out",        "cone",      "dim",
    "count",      "g",             "max_attempts", "normals", "at",
    "grid",       "starts",        "cluster_radius", "grad_tol", "max_iters",
    "trace",      "n",             "m",          "trials",    "rules",
    "cloud_size", "rule_starts",   "epoch_cap",  "csv"};

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw UsageError("config root must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) ==
        kConfigKeys.end())
      throw UsageError("unknown config key: " + key);
  }
  return j;
}

// Config fills in values the command line left at their defaults; an
// explicit flag always wins over the file.
template <typename T>
void config_fill(const CLI::Option* opt, const json& cfg, const char* key,
                 T& target) {
  if (opt != nullptr && opt->count() > 0) return;
  if (!cfg.contains(key)) return;
  try {
    target = cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError(std::string("config key has the wrong type: ") + key);
  }
}

struct ConeSpec {
  std::string preset = "quadrant";
  int dim = 0;  // 0 means the preset default
  json normals;
};

conecap::PolyhedralCone build_cone(const ConeSpec& spec) {
  using conecap::UnitVector;
  if (spec.preset == "quadrant") {
    if (spec.dim != 0 && spec.dim != 2)
      throw UsageError("the quadrant preset is two-dimensional");
    return conecap::PolyhedralCone::from_normals(
        {UnitVector::axis(2, 0), UnitVector::axis(2, 1)});
  }
  if (spec.preset == "halfspace") {
    const int n = spec.dim == 0 ? 3 : spec.dim;
    if (n < 2) throw UsageError("--dim must be at least 2");
    return conecap::PolyhedralCone::from_normals({UnitVector::axis(n, 0)});
  }
  if (spec.preset == "orthant") {
    const int n = spec.dim == 0 ? 3 : spec.dim;
    if (n < 2) throw UsageError("--dim must be at least 2");
    std::vector<UnitVector> axes;
    for (int i = 0; i < n; ++i) axes.push_back(UnitVector::axis(n, i));
    return conecap::PolyhedralCone::from_normals(axes);
  }
  if (spec.preset == "normals") {
    if (!spec.normals.is_array() || spec.normals.empty())
      throw UsageError("the normals preset needs a JSON array of vectors");
    std::vector<UnitVector> normals;
    for (const json& row : spec.normals) {
      if (!row.is_array() || row.size() < 2)
        throw UsageError("each normal must be an array of at least 2 numbers");
      Eigen::VectorXd v(row.size());
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (!row[i].is_number())
          throw UsageError("normals must contain numbers only");
        v[static_cast<Eigen::Index>(i)] = row[i].get<double>();
      }
      normals.push_back(UnitVector::normalized(v));
    }
    return conecap::PolyhedralCone::from_normals(normals);
  }
  throw UsageError("unknown cone preset: " + spec.preset +
                   " (expected quadrant, halfspace, orthant, or normals)");
}

void write_output(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream os(out_path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open output file: " + out_path);
  os << content;
}

json cone_echo(const ConeSpec& spec, const conecap::PolyhedralCone& cone) {
  ordered_json j;
  j["preset"] = spec.preset;
  j["dim"] = cone.dim();
  j["num_normals"] = cone.num_normals();
  return j;
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

const char* error_kind(const conecap::Error& e) {
  if (dynamic_cast<const conecap::LowAcceptanceError*>(&e)) return "low_acceptance";
  if (dynamic_cast<const conecap::NonConvergenceError*>(&e)) return "non_convergence";
  if (dynamic_cast<const conecap::NumericalError*>(&e)) return "numerical";
  if (dynamic_cast<const conecap::DegenerateGeodesicError*>(&e))
    return "degenerate_geodesic";
  return "error";
}

struct Options {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out;
  std::string config_path;

  ConeSpec cone;
  std::string normals_text;

  int count = 20000;
  std::uint64_t max_attempts = 0;

  std::string g = "identity";
  std::string at_text;
  int grid = 0;

  int starts = 20;
  double cluster_radius = 1e-3;
  double grad_tol = 1e-8;
  int max_iters = 1000;
  std::string trace_path;

  int n = 3;
  int m = 5;
  int trials = 500;
  std::string rules_text = "optimal,spherical_centroid,euclidean_centroid,perceptron";
  int cloud_size = 20000;
  int rule_starts = 6;
  int epoch_cap = 100000;
  std::string csv_path;
};

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ','))
    if (!item.empty()) parts.push_back(item);
  return parts;
}

conecap::GKind parse_g(const std::string& name) {
  const auto g = g_from_name(name);
  if (!g) throw UsageError("unknown objective shape: " + name +
                           " (expected identity, square, or two_one_minus_cos)");
  return *g;
}

int run_sample(const Options& o) {
  const conecap::PolyhedralCone cone = build_cone(o.cone);
  const conecap::ConeCloud cloud =
      conecap::sample_cone_cap(cone, o.count, o.seed, o.max_attempts, o.threads);
  std::ostringstream os;
  conecap::write_cloud_csv(os, cloud);
  write_output(o.out, os.str());
  return 0;
}

int run_psi(const Options& o) {
  const conecap::PolyhedralCone cone = build_cone(o.cone);
  const conecap::GKind g = parse_g(o.g);
  if (o.at_text.empty() && o.grid == 0)
    throw UsageError("psi needs either --at or --grid");
  if (!o.at_text.empty() && o.grid != 0)
    throw UsageError("--at and --grid are mutually exclusive");

  const conecap::ConeCloud cloud =
      conecap::sample_cone_cap(cone, o.count, o.seed, o.max_attempts, o.threads);
  std::ostringstream os;
  if (!o.at_text.empty()) {
    const std::vector<std::string> parts = split_commas(o.at_text);
    if (static_cast<int>(parts.size()) != cone.dim())
      throw UsageError("--at needs exactly " + std::to_string(cone.dim()) +
                       " comma-separated coordinates");
    Eigen::VectorXd v(cone.dim());
    for (std::size_t i = 0; i < parts.size(); ++i) {
      try {
        v[static_cast<Eigen::Index>(i)] = std::stod(parts[i]);
      } catch (const std::exception&) {
        throw UsageError("--at coordinate is not a number: " + parts[i]);
      }
    }
    const conecap::UnitVector w = conecap::UnitVector::normalized(v);
    const conecap::PsiEstimate est = conecap::psi_saa(w, cloud, g);
    const conecap::PsiGradient grad = conecap::psi_grad_saa(w, cloud, g);
    os << "psi,scaled_psi,std_error,grad_norm\n"
       << fmt(est.value) << ',' << fmt(est.scaled_value) << ','
       << fmt(est.std_error) << ',' << fmt(grad.grad.norm()) << '\n';
  } else {
    if (cone.dim() != 2)
      throw UsageError("--grid evaluates along the cap arc and needs a "
                       "two-dimensional cone");
    if (o.grid < 2) throw UsageError("--grid needs at least 2 points");
    const auto arc = conecap::cone_arc_2d(cone);
    if (!arc) throw conecap::InvalidInputError("the cone cap is empty");
    os << "theta,psi,std_error,exact\n";
    for (int k = 0; k < o.grid; ++k) {
      const double theta =
          arc->first + (arc->second - arc->first) * k / (o.grid - 1);
      const conecap::UnitVector w(
          Eigen::Vector2d(std::cos(theta), std::sin(theta)));
      const conecap::PsiEstimate est = conecap::psi_saa(w, cloud, g);
      const double exact =
          conecap::psi_exact_2d(theta, arc->first, arc->second, g);
      os << fmt(theta) << ',' << fmt(est.scaled_value) << ','
         << fmt(est.std_error) << ',' << fmt(exact) << '\n';
    }
  }
  write_output(o.out, os.str());
  return 0;
}

int run_optimize(const Options& o) {
  const conecap::PolyhedralCone cone = build_cone(o.cone);
  const conecap::GKind g = parse_g(o.g);
  const conecap::ConeCloud cloud =
      conecap::sample_cone_cap(cone, o.count, o.seed, o.max_attempts, o.threads);

  conecap::OptOptions opts;
  opts.grad_tol = o.grad_tol;
  opts.max_iters = o.max_iters;
  const conecap::MinimaReport report = conecap::multistart_minimize(
      cloud, g, o.starts, o.seed, o.cluster_radius, opts, o.threads);
  if (report.clusters.empty())
    throw conecap::NonConvergenceError("no start converged");

  if (!o.trace_path.empty()) {
    // Deterministic companion trace: the descent from the first start.
    conecap::OptOptions topts = opts;
    topts.record_trace = true;
    conecap::RngStream start_rng(o.seed, conecap::stream_tag::kStart, 0);
    const conecap::OptResult traced = conecap::minimize_from(
        conecap::random_unit(cloud.dim(), start_rng), cloud, g, topts);
    std::ostringstream ts;
    ts << "iter,psi,grad_norm\n";
    for (const conecap::TracePoint& p : traced.trace)
      ts << p.iter << ',' << fmt(p.psi) << ',' << fmt(p.grad_norm) << '\n';
    write_output(o.trace_path, ts.str());
  }

  const conecap::MinimaCluster& best = report.clusters.front();
  const conecap::PsiEstimate best_est = conecap::psi_saa(best.representative, cloud, g);
  const conecap::PsiGradient best_grad =
      conecap::psi_grad_saa(best.representative, cloud, g);

  ordered_json j;
  j["seed"] = o.seed;
  j["g"] = g_name(g);
  j["cone"] = cone_echo(o.cone, cone);
  j["cloud"] = {{"count", cloud.size()},
                {"measure_estimate", cloud.measure_estimate}};
  j["best"] = {{"minimizer", to_std(best.representative.coords())},
               {"psi", best.psi_value},
               {"scaled_psi", best_est.scaled_value},
               {"std_error", best_est.std_error},
               {"grad_norm", best_grad.grad.norm()},
               {"multiplicity", best.multiplicity}};
  j["clusters"] = ordered_json::array();
  for (const conecap::MinimaCluster& c : report.clusters)
    j["clusters"].push_back({{"minimizer", to_std(c.representative.coords())},
                             {"psi", c.psi_value},
                             {"multiplicity", c.multiplicity}});
  j["starts"] = report.starts;
  write_output(o.out, j.dump(2) + "\n");
  return 0;
}

int run_experiment(const Options& o) {
  conecap::ExperimentConfig config;
  config.n = o.n;
  config.m = o.m;
  config.trials = o.trials;
  config.seed = o.seed;
  config.threads = o.threads;
  for (const std::string& name : split_commas(o.rules_text)) {
    const auto kind = conecap::rule_kind_from_name(name);
    if (!kind) throw UsageError("unknown rule: " + name);
    conecap::LearningRule rule;
    rule.kind = *kind;
    rule.cloud_size = o.cloud_size;
    rule.n_starts = o.rule_starts;
    rule.epoch_cap = o.epoch_cap;
    config.rules.push_back(rule);
  }
  if (config.rules.empty()) throw UsageError("no rules selected");

  const conecap::ExperimentReport report = conecap::run_experiment(config);
  write_output(o.out, conecap::experiment_report_json(report));

  std::string csv_path = o.csv_path;
  if (csv_path.empty() && !o.out.empty()) {
    csv_path = o.out;
    const auto dot = csv_path.rfind('.');
    if (dot != std::string::npos && csv_path.find('/', dot) == std::string::npos)
      csv_path.resize(dot);
    csv_path += ".csv";
  }
  if (!csv_path.empty())
    write_output(csv_path, conecap::experiment_report_csv(report));
  return 0;
}

int run_verify(const Options& o) {
  const std::vector<conecap::verify::CheckResult> results =
      conecap::verify::run_all(o.seed, o.threads);
  write_output(o.out, conecap::verify::to_json(results, o.seed));
  if (conecap::verify::all_pass(results)) return 0;
  std::cerr << "verification failed:\n";
  for (const auto& r : results)
    if (!r.pass) std::cerr << "  " << r.name << ": " << r.detail << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spherical cone-cap objectives: sampling, minimization, and "
               "the halfspace-learning experiment"};
  app.require_subcommand(1);
  // Global flags stay valid after the subcommand name.
  app.fallthrough();

  Options o;
  auto* seed_opt = app.add_option("--seed", o.seed, "Master seed for every random stream");
  auto* threads_opt =
      app.add_option("--threads", o.threads, "Worker threads (results never depend on this)")
          ->check(CLI::Range(1, 1024));
  auto* out_opt = app.add_option("--out", o.out, "Write the report here instead of stdout");
  app.add_option("--config", o.config_path, "JSON file with defaults; flags win");

  const auto add_cone_flags = [&](CLI::App* cmd) {
    auto* preset = cmd->add_option("--cone", o.cone.preset,
                                   "Cone preset: quadrant, halfspace, orthant, normals");
    auto* dim = cmd->add_option("--dim", o.cone.dim, "Ambient dimension for the preset");
    auto* normals = cmd->add_option("--normals", o.normals_text,
                                    "JSON array of normal vectors (preset normals)");
    return std::tuple{preset, dim, normals};
  };

  CLI::App* sample = app.add_subcommand("sample", "Sample the cone cap and write a CSV cloud");
  auto [sample_preset, sample_dim, sample_normals] = add_cone_flags(sample);
  auto* sample_count = sample->add_option("--count", o.count, "Points to draw");
  auto* sample_attempts = sample->add_option(
      "--max-attempts", o.max_attempts, "Rejection budget per point (0 = default)");

  CLI::App* psi = app.add_subcommand("psi", "Evaluate the cap objective");
  auto [psi_preset, psi_dim, psi_normals] = add_cone_flags(psi);
  auto* psi_count = psi->add_option("--count", o.count, "Cloud size for the estimate");
  auto* psi_attempts = psi->add_option("--max-attempts", o.max_attempts,
                                       "Rejection budget per point (0 = default)");
  auto* psi_g = psi->add_option("--g", o.g, "Objective shape: identity, square, two_one_minus_cos");
  auto* psi_at = psi->add_option("--at", o.at_text, "Evaluate at these comma-separated coordinates");
  auto* psi_grid = psi->add_option("--grid", o.grid,
                                   "Evaluate at this many points along the cap arc (2-D cones)");

  CLI::App* optimize = app.add_subcommand("optimize", "Minimize the cap objective by multistart descent");
  auto [opt_preset, opt_dim, opt_normals] = add_cone_flags(optimize);
  auto* opt_count = optimize->add_option("--count", o.count, "Cloud size for the estimate");
  auto* opt_attempts = optimize->add_option("--max-attempts", o.max_attempts,
                                            "Rejection budget per point (0 = default)");
  auto* opt_g = optimize->add_option("--g", o.g, "Objective shape: identity, square, two_one_minus_cos");
  auto* opt_starts = optimize->add_option("--starts", o.starts, "Random starts")
                         ->check(CLI::Range(2, 100000));
  auto* opt_radius = optimize->add_option("--cluster-radius", o.cluster_radius,
                                          "Geodesic radius merging nearby minima");
  auto* opt_tol = optimize->add_option("--grad-tol", o.grad_tol, "Gradient norm tolerance");
  auto* opt_iters = optimize->add_option("--max-iters", o.max_iters, "Iteration cap per start");
  auto* opt_trace = optimize->add_option("--trace", o.trace_path,
                                         "Write the first start's descent trace CSV here");

  CLI::App* experiment = app.add_subcommand("experiment", "Compare learning rules on random instances");
  auto* exp_n = experiment->add_option("--n", o.n, "Ambient dimension")->check(CLI::Range(2, 64));
  auto* exp_m = experiment->add_option("--m", o.m, "Sample size per instance")
                    ->check(CLI::Range(1, 100000));
  auto* exp_trials = experiment->add_option("--trials", o.trials, "Random instances")
                         ->check(CLI::Range(1, 10000000));
  auto* exp_rules = experiment->add_option("--rules", o.rules_text, "Comma-separated rule names");
  auto* exp_cloud = experiment->add_option("--cloud-size", o.cloud_size,
                                           "Version-cone cloud size for cloud-based rules");
  auto* exp_starts = experiment->add_option("--rule-starts", o.rule_starts,
                                            "Multistart width inside the minimizing rules");
  auto* exp_epochs = experiment->add_option("--epoch-cap", o.epoch_cap,
                                            "Perceptron epoch cap");
  auto* exp_csv = experiment->add_option("--csv", o.csv_path, "Also write the per-rule CSV here");

  app.add_subcommand("verify", "Run the built-in checks and report JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!o.config_path.empty()) {
      const json cfg = load_config(o.config_path);
      config_fill(seed_opt, cfg, "seed", o.seed);
      config_fill(threads_opt, cfg, "threads", o.threads);
      config_fill(out_opt, cfg, "out", o.out);
      config_fill(sample_preset, cfg, "cone", o.cone.preset);
      config_fill(psi_preset, cfg, "cone", o.cone.preset);
      config_fill(opt_preset, cfg, "cone", o.cone.preset);
      config_fill(sample_dim, cfg, "dim", o.cone.dim);
      config_fill(psi_dim, cfg, "dim", o.cone.dim);
      config_fill(opt_dim, cfg, "dim", o.cone.dim);
      if (cfg.contains("normals") &&
          sample_normals->count() + psi_normals->count() + opt_normals->count() == 0)
        o.cone.normals = cfg.at("normals");
      config_fill(sample_count, cfg, "count", o.count);
      config_fill(psi_count, cfg, "count", o.count);
      config_fill(opt_count, cfg, "count", o.count);
      config_fill(sample_attempts, cfg, "max_attempts", o.max_attempts);
      config_fill(psi_attempts, cfg, "max_attempts", o.max_attempts);
      config_fill(opt_attempts, cfg, "max_attempts", o.max_attempts);
      config_fill(psi_g, cfg, "g", o.g);
      config_fill(opt_g, cfg, "g", o.g);
      config_fill(psi_at, cfg, "at", o.at_text);
      config_fill(psi_grid, cfg, "grid", o.grid);
      config_fill(opt_starts, cfg, "starts", o.starts);
      config_fill(opt_radius, cfg, "cluster_radius", o.cluster_radius);
      config_fill(opt_tol, cfg, "grad_tol", o.grad_tol);
      config_fill(opt_iters, cfg, "max_iters", o.max_iters);
      config_fill(opt_trace, cfg, "trace", o.trace_path);
      config_fill(exp_n, cfg, "n", o.n);
      config_fill(exp_m, cfg, "m", o.m);
      config_fill(exp_trials, cfg, "trials", o.trials);
      config_fill(exp_rules, cfg, "rules", o.rules_text);
      config_fill(exp_cloud, cfg, "cloud_size", o.cloud_size);
      config_fill(exp_starts, cfg, "rule_starts", o.rule_starts);
      config_fill(exp_epochs, cfg, "epoch_cap", o.epoch_cap);
      config_fill(exp_csv, cfg, "csv", o.csv_path);
    }
    if (!o.normals_text.empty()) {
      try {
        o.cone.normals = json::parse(o.normals_text);
      } catch (const json::parse_error& e) {
        throw UsageError(std::string("--normals is not valid JSON: ") + e.what());
      }
    }
    if (o.cone.normals.is_array() && !o.cone.normals.empty() &&
        o.cone.preset == "quadrant")
      o.cone.preset = "normals";

    if (app.got_subcommand("sample")) return run_sample(o);
    if (app.got_subcommand("psi")) return run_psi(o);
    if (app.got_subcommand("optimize")) return run_optimize(o);
    if (app.got_subcommand("experiment")) return run_experiment(o);
    if (app.got_subcommand("verify")) return run_verify(o);
    std::cerr << "no subcommand selected\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const conecap::InvalidInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const conecap::PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const conecap::Error& e) {
    ordered_json record;
    record["seed"] = o.seed;
    record["error"] = {{"type", error_kind(e)}, {"message", e.what()}};
    try {
      write_output(o.out, record.dump(2) + "\n");
    } catch (const std::exception& io) {
      std::cerr << "error: " << io.what() << "\n";
    }
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
