#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "anisograph/demo.hpp"
#include "anisograph/error.hpp"
#include "anisograph/graph.hpp"
#include "anisograph/network.hpp"
#include "anisograph/spectral.hpp"

namespace ag = anisograph;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v) { return ag::format_double(v); }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ag::Error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw ag::Error("failed writing '" + path + "'");
}

ag::Manifold parse_kind(const std::string& s) {
  if (s == "se2") return ag::Manifold::SE2;
  if (s == "so3") return ag::Manifold::SO3;
  if (s == "r2") return ag::Manifold::R2;
  if (s == "s2") return ag::Manifold::S2;
  throw UsageError("--kind must be one of se2, so3, r2, s2");
}

const char* kind_flag(ag::Manifold m) {
  switch (m) {
    case ag::Manifold::SE2: return "se2";
    case ag::Manifold::SO3: return "so3";
    case ag::Manifold::R2: return "r2";
    case ag::Manifold::S2: return "s2";
  }
  return "?";
}

bool planar(ag::Manifold m) { return m == ag::Manifold::SE2 || m == ag::Manifold::R2; }

/// The stored Laplacian if present and unrescaled, else a fresh one with an
/// estimated lambda_max.
ag::Laplacian graph_laplacian(const ag::GraphFile& file) {
  if (file.laplacian && !file.laplacian->rescaled) return *file.laplacian;
  ag::Laplacian l = ag::laplacian(file.graph);
  l.lambda_max = ag::lambda_max(l).value;
  return l;
}

// ---------------------------------------------------------------- build-graph

struct BuildArgs {
  std::string kind;
  std::optional<std::uint32_t> nx, ny, level, orient, knn;
  double epsilon = 1.0;
  std::optional<double> alpha, xi;
  std::string out = "graph.clgr";
  bool no_laplacian = false;
  bool fast_lambda = false;
};

int run_build(const BuildArgs& a) {
  const ag::Manifold kind = parse_kind(a.kind);
  ag::GridSpec spec;
  spec.kind = kind;
  if (planar(kind)) {
    if (a.level) throw UsageError("--level applies to so3/s2 only");
    if (!a.nx) throw UsageError("--nx is required for " + a.kind);
    spec.nx = *a.nx;
    spec.ny = a.ny.value_or(*a.nx);
    spec.level = 0;
  } else {
    if (a.nx || a.ny) throw UsageError("--nx/--ny apply to se2/r2 only");
    if (!a.level) throw UsageError("--level is required for " + a.kind);
    spec.nx = spec.ny = 1;
    spec.level = *a.level;
  }
  const bool lifted = ag::has_orientation_axis(kind);
  if (lifted) {
    if (!a.orient) throw UsageError("--orient is required for " + a.kind);
    spec.n_orient = *a.orient;
  } else {
    if (a.orient) throw UsageError("--orient applies to se2/so3 only");
    spec.n_orient = 1;
  }
  try {
    spec.validate();
  } catch (const ag::ArgumentError& e) {
    throw UsageError(e.what());
  }

  double epsilon = a.epsilon;
  double xi = 0.0;
  double alpha = 0.0;
  if (lifted) {
    if (a.alpha.has_value() == a.xi.has_value()) throw UsageError("exactly one of --alpha / --xi is required");
    if (a.alpha) {
      alpha = *a.alpha;
      if (!(alpha >= 0.0)) throw UsageError("--alpha must be >= 0");
      xi = ag::xi_from_alpha(alpha, spec.n_orient, spec.spatial_count());
    } else {
      xi = *a.xi;
    }
  } else {
    if (a.alpha || a.xi) throw UsageError("--alpha/--xi apply to se2/so3 only (" + a.kind + " is isotropic)");
    epsilon = 1.0;
    xi = 1.0;
  }
  const std::uint32_t knn = a.knn.value_or(ag::default_knn(kind));
  ag::Metric metric = [&] {
    try {
      return ag::Metric(epsilon, xi);
    } catch (const ag::ArgumentError& e) {
      throw UsageError(e.what());
    }
  }();
  if (knn == 0) throw UsageError("--knn must be positive");

  std::cout << "effective-config: command=build-graph kind=" << a.kind << " nx=" << spec.nx << " ny=" << spec.ny
            << " level=" << spec.level << " orient=" << spec.n_orient << " epsilon=" << num(epsilon)
            << " xi=" << num(xi) << " alpha=" << num(alpha) << " knn=" << knn << " laplacian="
            << (a.no_laplacian ? "no" : "yes") << " fast-lambda=" << (a.fast_lambda ? "yes" : "no")
            << " out=" << a.out << '\n';

  const ag::ManifoldGraph g = ag::build_graph(ag::make_vertices(spec), ag::GraphConfig{metric, alpha, knn});
  ag::Laplacian l = ag::laplacian(g);
  ag::LambdaMaxOptions lo;
  lo.fast = a.fast_lambda;
  const auto est = ag::lambda_max(l, lo);
  l.lambda_max = est.value;
  ag::save_graph(a.out, g, a.no_laplacian ? nullptr : &l);

  std::cout << "vertices: " << g.vertex_count() << '\n';
  std::cout << "edges: " << g.edge_count() << '\n';
  std::cout << "bandwidth: " << num(g.bandwidth) << '\n';
  std::cout << "lambda_max: " << num(est.value) << (est.converged ? "" : " (fallback bound)") << '\n';
  if (g.meta.knn_clamped) std::cout << "knn: clamped to " << g.meta.knn_effective << '\n';
  if (lifted) {
    const auto r = ag::neighbor_ratio(g);
    std::cout << "neighbors: in-slice " << num(r.in_slice) << " cross-slice " << num(r.cross_slice) << '\n';
  }
  std::cout << "wrote " << a.out << '\n';
  return kOk;
}

// ----------------------------------------------------------------------- info

int run_info(const std::string& path) {
  std::cout << "effective-config: command=info graph=" << path << '\n';
  const ag::GraphFile f = ag::load_graph(path);
  const auto& g = f.graph;
  const auto& s = g.vertices.spec;
  std::cout << "kind: " << kind_flag(s.kind) << '\n';
  std::cout << "grid: nx=" << s.nx << " ny=" << s.ny << " level=" << s.level << " orient=" << s.n_orient << '\n';
  std::cout << "vertices: " << g.vertex_count() << (g.vertices.complete() ? "" : " (sub-sampled)") << '\n';
  std::cout << "edges: " << g.edge_count() << '\n';
  std::cout << "metric: epsilon=" << num(g.metric.epsilon()) << " xi=" << num(g.metric.xi())
            << " alpha=" << num(g.alpha) << '\n';
  std::cout << "knn: " << g.knn << '\n';
  std::cout << "bandwidth: " << num(g.bandwidth) << '\n';
  std::size_t isolated = 0;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) isolated += g.degree(v) == 0 ? 1 : 0;
  std::cout << "isolated: " << isolated << '\n';
  if (f.laplacian) {
    std::cout << "laplacian: " << (f.laplacian->rescaled ? "rescaled" : "normalized")
              << " lambda_max=" << num(f.laplacian->lambda_max) << '\n';
  } else {
    std::cout << "laplacian: none\n";
  }
  return kOk;
}

// ------------------------------------------------------------------ eigenmaps

int run_eigenmaps(const std::string& path, std::size_t k, const std::string& out, const std::string& clsg) {
  std::cout << "effective-config: command=eigenmaps graph=" << path << " k=" << k << " out=" << out
            << " clsg=" << (clsg.empty() ? "none" : clsg) << '\n';
  const ag::GraphFile f = ag::load_graph(path);
  if (k == 0 || k > f.graph.vertex_count()) {
    throw UsageError("--k must be in [1, " + std::to_string(f.graph.vertex_count()) + "]");
  }
  const ag::EigenSystem phi = ag::eigensystem(graph_laplacian(f), k);
  write_text(out, ag::eigenmap_csv(phi));
  if (!clsg.empty()) {
    ag::save_signal(clsg + ".vectors.clsg", phi.vectors);
    ag::save_signal(clsg + ".values.clsg", phi.values);
  }
  std::cout << "lambda_0: " << num(phi.values[0]) << '\n';
  std::cout << "lambda_" << (k - 1) << ": " << num(phi.values[static_cast<Eigen::Index>(k - 1)]) << '\n';
  std::cout << "wrote " << out << '\n';
  return kOk;
}

// -------------------------------------------------------------------- diffuse

int run_diffuse(const std::string& path, std::uint64_t impulse, double tau, int order, const std::string& out) {
  std::cout << "effective-config: command=diffuse graph=" << path << " impulse=" << impulse << " tau=" << num(tau)
            << " order=" << order << " out=" << out << '\n';
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw UsageError("--tau must be >= 0");
  if (order < 1) throw UsageError("--order must be >= 1");
  const ag::GraphFile f = ag::load_graph(path);
  const auto& g = f.graph;
  if (impulse >= g.vertex_count()) {
    throw UsageError("--impulse " + std::to_string(impulse) + " out of range (|V| = " +
                     std::to_string(g.vertex_count()) + ")");
  }
  ag::Signal x = ag::Signal::Zero(static_cast<Eigen::Index>(g.vertex_count()), 1);
  x(static_cast<Eigen::Index>(impulse), 0) = 1.0;
  const ag::Signal y = ag::heat_diffuse(graph_laplacian(f), x, tau, order);

  std::ostringstream csv;
  const bool flat = planar(g.kind());
  csv << (flat ? "vertex_id,x,y,theta,value\n" : "vertex_id,alpha,beta,gamma,value\n");
  double total = 0.0;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    const auto& p = g.vertices.elements[v].params();
    const double value = y(static_cast<Eigen::Index>(v), 0);
    total += value;
    csv << v << ',' << num(p[0]) << ',' << num(p[1]) << ',' << num(p[2]) << ',' << num(value) << '\n';
  }
  write_text(out, csv.str());
  std::cout << "total: " << num(total) << '\n';
  if (flat && g.vertices.complete()) {
    const std::size_t slice = g.vertices.orient_index(impulse);
    const auto s = ag::slice_spread(g.vertices, y.col(0), slice);
    std::cout << "anisotropy: slice=" << slice << " theta=" << num(g.vertices.orientation(slice))
              << " forward_variance=" << num(s.forward_variance) << " lateral_variance=" << num(s.lateral_variance)
              << " ratio=" << num(s.ratio) << '\n';
  } else {
    std::cout << "anisotropy: n/a (needs a complete planar grid)\n";
  }
  std::cout << "wrote " << out << '\n';
  return kOk;
}

// --------------------------------------------------------- check-equivariance

int run_check(const std::string& path, int turns) {
  std::cout << "effective-config: command=check-equivariance graph=" << path << " quarter-turns=" << turns << '\n';
  const ag::GraphFile f = ag::load_graph(path);
  const auto& g = f.graph;
  if (!g.vertices.complete()) throw UsageError("check-equivariance needs a complete grid (not a sub-sampled graph)");
  ag::Permutation p;
  try {
    p = ag::rotation_permutation(g.vertices.spec, turns);
  } catch (const ag::ArgumentError& e) {
    throw UsageError(e.what());
  }
  const double err = ag::equivariance_error(ag::laplacian(g), p);
  const bool pass = err <= 1e-9;
  std::cout << "relative_frobenius_error: " << num(err) << '\n';
  std::cout << (pass ? "PASS" : "FAIL") << " (threshold 1e-9)\n";
  return pass ? kOk : kFailed;
}

// --------------------------------------------------------------------- sample

int run_sample(const std::string& path, std::optional<double> edges, std::optional<double> vertices,
               std::uint64_t seed, const std::string& out) {
  if (edges.has_value() == vertices.has_value()) throw UsageError("exactly one of --edges / --vertices is required");
  const double kappa = edges ? *edges : *vertices;
  if (!(kappa > 0.0 && kappa <= 1.0)) throw UsageError("sampling rate must be in (0, 1]");
  std::cout << "effective-config: command=sample graph=" << path << " mode=" << (edges ? "edges" : "vertices")
            << " kappa=" << num(kappa) << " seed=" << seed << " out=" << out << '\n';
  const ag::GraphFile f = ag::load_graph(path);
  const ag::ManifoldGraph s =
      edges ? ag::sample_edges(f.graph, kappa, seed) : ag::sample_vertices(f.graph, kappa, seed);
  std::optional<ag::Laplacian> lap;
  if (f.laplacian) {
    lap = ag::laplacian(s);
    lap->lambda_max = ag::lambda_max(*lap).value;
  }
  ag::save_graph(out, s, lap ? &*lap : nullptr);
  std::cout << "vertices: " << s.vertex_count() << " of " << f.graph.vertex_count() << '\n';
  std::cout << "edges: " << s.edge_count() << " of " << f.graph.edge_count() << '\n';
  std::cout << "wrote " << out << '\n';
  return kOk;
}

// ----------------------------------------------------------------- train-demo

int run_train(const ag::DemoConfig& c, const std::string& metrics, const std::string& model) {
  std::cout << "effective-config: command=train-demo epochs=" << c.epochs << " lr=" << num(c.lr) << " seed=" << c.seed
            << " grid=" << c.grid << " orient=" << c.n_orient << " epsilon=" << num(c.epsilon)
            << " alpha=" << num(c.alpha) << " knn=" << c.knn << " order=" << c.order << " channels=" << c.channels
            << " pool=" << ag::to_string(c.pool) << " train=" << c.train_size << " test=" << c.test_size
            << " batch=" << c.batch << " metrics=" << metrics << " model=" << (model.empty() ? "none" : model)
            << '\n';
  if (c.epochs < 0) throw UsageError("--epochs must be >= 0");
  if (!(c.lr > 0.0)) throw UsageError("--lr must be positive");
  const ag::DemoResult r = ag::train_demo(c);
  std::cout << "equivariance_error: " << num(r.graphs.equivariance_error) << '\n';
  for (const auto& m : r.history) {
    std::cout << "epoch " << m.epoch << " loss " << num(m.loss) << " accuracy " << num(m.accuracy)
              << " rotation_consistency " << num(m.rotation_consistency) << '\n';
  }
  write_text(metrics, ag::metrics_csv(r.history));
  if (!model.empty()) ag::save_model(model, r.model, ag::demo_cheb_levels());
  std::cout << "wrote " << metrics << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anisotropic manifold graphs: construction, spectral tools and an equivariant demo network"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");

  BuildArgs build;
  auto* b = app.add_subcommand("build-graph", "Sample a manifold, build its K-NN graph and write a CLGR file");
  b->add_option("--kind", build.kind, "se2 | so3 | r2 | s2")->required();
  b->add_option("--nx", build.nx, "Grid width (se2/r2)");
  b->add_option("--ny", build.ny, "Grid height (se2/r2, default nx)");
  b->add_option("--level", build.level, "Icosahedral subdivision level (so3/s2)");
  b->add_option("--orient", build.orient, "Orientation samples (se2/so3)");
  b->add_option("--epsilon", build.epsilon, "Sideways anisotropy epsilon (not squared; default 1)");
  auto* alpha_opt = b->add_option("--alpha", build.alpha, "Orientation weight alpha: xi^2 = alpha |V_o| / |V_s|");
  auto* xi_opt = b->add_option("--xi", build.xi, "Orientation weight xi");
  alpha_opt->excludes(xi_opt);
  b->add_option("--knn", build.knn, "Neighbors per vertex (default 16 lifted, 8 base)");
  b->add_option("--out", build.out, "Output CLGR path")->capture_default_str();
  b->add_flag("--no-laplacian", build.no_laplacian, "Omit the Laplacian section");
  b->add_flag("--fast-lambda", build.fast_lambda, "Use lambda_max = 2 instead of power iteration");

  std::string graph_path;
  auto* info = app.add_subcommand("info", "Summarize a CLGR file");
  info->add_option("--graph", graph_path, "CLGR file")->required();

  std::size_t k = 10;
  std::string eig_out = "eigenmaps.csv";
  std::string eig_clsg;
  auto* eig = app.add_subcommand("eigenmaps", "Write the k smallest Laplacian eigenpairs");
  eig->add_option("--graph", graph_path, "CLGR file")->required();
  eig->add_option("--k", k, "Number of eigenpairs")->capture_default_str();
  eig->add_option("--out", eig_out, "Output CSV")->capture_default_str();
  eig->add_option("--clsg", eig_clsg, "Also write PREFIX.vectors.clsg and PREFIX.values.clsg");

  std::uint64_t impulse = 0;
  double tau = 1.0;
  int order = 30;
  std::string diff_out = "diffuse.csv";
  auto* diff = app.add_subcommand("diffuse", "Heat diffusion of an impulse");
  diff->add_option("--graph", graph_path, "CLGR file")->required();
  diff->add_option("--impulse", impulse, "Impulse vertex id")->required();
  diff->add_option("--tau", tau, "Diffusion time")->capture_default_str();
  diff->add_option("--order", order, "Chebyshev order")->capture_default_str();
  diff->add_option("--out", diff_out, "Output CSV")->capture_default_str();

  int turns = 1;
  auto* check = app.add_subcommand("check-equivariance", "Audit P^T L P = L for a grid rotation");
  check->add_option("--graph", graph_path, "CLGR file")->required();
  check->add_option("--quarter-turns", turns, "Rotation in quarter turns")->capture_default_str();

  std::optional<double> edge_rate;
  std::optional<double> vertex_rate;
  std::uint64_t seed = 0;
  std::string sample_out = "sampled.clgr";
  auto* sample = app.add_subcommand("sample", "Randomly sub-sample edges or vertices");
  sample->add_option("--graph", graph_path, "CLGR file")->required();
  auto* e_opt = sample->add_option("--edges", edge_rate, "Expected kept edge fraction");
  auto* v_opt = sample->add_option("--vertices", vertex_rate, "Kept vertex fraction");
  e_opt->excludes(v_opt);
  sample->add_option("--seed", seed, "Random seed")->capture_default_str();
  sample->add_option("--out", sample_out, "Output CLGR path")->capture_default_str();

  ag::DemoConfig demo;
  std::string metrics = "metrics.csv";
  std::string model_out;
  std::string pool = "max";
  auto* train = app.add_subcommand("train-demo", "Train the oriented-bar demo network");
  train->add_option("--epochs", demo.epochs, "Epochs")->capture_default_str();
  train->add_option("--lr", demo.lr, "SGD learning rate")->capture_default_str();
  train->add_option("--seed", demo.seed, "Random seed")->capture_default_str();
  train->add_option("--grid", demo.grid, "Grid size")->capture_default_str();
  train->add_option("--orient", demo.n_orient, "Orientation samples")->capture_default_str();
  train->add_option("--batch", demo.batch, "Mini-batch size")->capture_default_str();
  train->add_option("--train-size", demo.train_size, "Training samples")->capture_default_str();
  train->add_option("--test-size", demo.test_size, "Test samples")->capture_default_str();
  train->add_option("--pool", pool, "max | rand")->capture_default_str();
  train->add_option("--metrics", metrics, "Metrics CSV")->capture_default_str();
  train->add_option("--model", model_out, "Write a CLMD checkpoint");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (b->parsed()) return run_build(build);
    if (info->parsed()) return run_info(graph_path);
    if (eig->parsed()) return run_eigenmaps(graph_path, k, eig_out, eig_clsg);
    if (diff->parsed()) return run_diffuse(graph_path, impulse, tau, order, diff_out);
    if (check->parsed()) return run_check(graph_path, turns);
    if (sample->parsed()) return run_sample(graph_path, edge_rate, vertex_rate, seed, sample_out);
    if (train->parsed()) {
      if (pool == "max") {
        demo.pool = ag::PoolMode::R2Max;
      } else if (pool == "rand") {
        demo.pool = ag::PoolMode::R2Rand;
      } else {
        throw UsageError("--pool must be max or rand");
      }
      return run_train(demo, metrics, model_out);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ag::FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
  return kUsage;
}
