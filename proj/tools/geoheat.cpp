// Command-line front end: compute geodesic distances on a triangle mesh,
// benchmark the solvers, and subdivide meshes for scaling studies.
//
// Exit codes: 0 success, 1 parse/IO failure, 2 invalid configuration,
// 3 solver failure.

#include "geoheat/geoheat.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#if defined(__unix__) || defined(__APPLE__)
#include <sys/resource.h>
#endif

namespace {

using namespace geoheat;

struct PipelineOptions {
  std::string mesh_path;
  std::string method = "face";
  std::vector<Index> sources;
  double m = 1.0;
  int gs_iters = 1000;
  int admm_iters = 10;
  double mu = 100.0;
  double eps = 1e-5;
  int threads = 0;  // 0 = resolve from env/hardware
  bool sequential = false;
};

int resolve_threads(const PipelineOptions& opt) {
  if (opt.sequential) return 1;
  if (opt.threads > 0) return opt.threads;
  if (const char* env = std::getenv("GEOHEAT_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void validate_options(const TriMesh& mesh, const PipelineOptions& opt) {
  if (opt.method != "face" && opt.method != "edge" && opt.method != "poisson")
    throw std::invalid_argument("unknown method '" + opt.method + "'");
  if (!(opt.m > 0.0)) throw std::invalid_argument("--m must be positive");
  if (opt.gs_iters < 0) throw std::invalid_argument("--gs-iters must be >= 0");
  if (opt.admm_iters < 0) throw std::invalid_argument("--admm-iters must be >= 0");
  if (!(opt.mu > 0.0)) throw std::invalid_argument("--mu must be positive");
  if (!(opt.eps > 0.0)) throw std::invalid_argument("--eps must be positive");
  if (opt.threads < 0) throw std::invalid_argument("--threads must be >= 1");
  if (opt.sources.empty()) throw std::invalid_argument("no source vertices given");
  for (Index s : opt.sources)
    if (s < 0 || s >= mesh.vertex_count())
      throw std::invalid_argument("source index " + std::to_string(s) + " out of range");
}

struct PipelineResult {
  VertexScalarField distances;
  RunReport report;
};

PipelineResult run_pipeline(const TriMesh& mesh, const PipelineOptions& opt) {
  PipelineResult out;
  RunReport& rep = out.report;
  rep.method = opt.method;
  rep.mesh_path = opt.mesh_path;
  rep.sources = opt.sources;
  rep.vertices = mesh.vertex_count();
  rep.edges = mesh.edge_count();
  rep.faces = mesh.face_count();
  rep.m = opt.m;
  rep.gs_sweeps = opt.gs_iters;
  rep.admm_max_iterations = opt.admm_iters;
  rep.mu = opt.mu;
  rep.eps1 = opt.eps;
  rep.eps2 = opt.eps;
  rep.threads = resolve_threads(opt);
  rep.sequential = opt.sequential;
  set_thread_count(rep.threads);

  StageTimer total;
  StageTimer stage;
  rep.quality_tau = triangulation_quality(mesh);
  rep.avg_edge_length = average_edge_length(mesh);
  rep.t = opt.m * rep.avg_edge_length * rep.avg_edge_length;
  BfsLevels levels = bfs_levels(mesh, opt.sources);
  rep.init_seconds = stage.seconds();
  if (levels.unreachable_count > 0)
    std::cerr << "warning: " << levels.unreachable_count << " unreachable vertices\n";

  if (opt.method == "poisson") {
    PoissonReport pr;
    out.distances = poisson_heat_method(mesh, opt.sources, rep.t, opt.eps, &pr);
    rep.diffusion_seconds = pr.heat_seconds;
    rep.optimization_seconds = pr.poisson_seconds;
    rep.cg_iterations = pr.heat_iterations + pr.poisson_iterations;
    rep.final_primal = pr.poisson_residual;
  } else {
    stage.restart();
    DiffusionConfig diffusion_config;
    diffusion_config.m = opt.m;
    diffusion_config.sweeps = opt.gs_iters;
    SolverReport diffusion_report;
    VertexScalarField u = gs_diffuse(mesh, levels, rep.t, diffusion_config, &diffusion_report);
    NormalizedGradients targets = normalized_target_gradients(mesh, u);
    rep.diffusion_seconds = stage.seconds();
    rep.gs_iterations = diffusion_report.iterations;
    rep.diffusion_e1 = diffusion_residual(mesh, u, rep.t, opt.sources);

    AdmmConfig admm_config;
    admm_config.max_iterations = opt.admm_iters;
    admm_config.eps1 = opt.eps;
    admm_config.eps2 = opt.eps;
    admm_config.mu = opt.mu;

    if (opt.method == "face") {
      stage.restart();
      FaceAdmmResult result = admm_face_optimize(mesh, targets.field, admm_config);
      rep.optimization_seconds = stage.seconds();
      stage.restart();
      out.distances = integrate_face_gradients(mesh, levels, result.gradients);
      rep.integration_seconds = stage.seconds();
      rep.admm_iterations = result.report.iterations;
      rep.final_primal = result.report.final_primal;
      rep.final_dual = result.report.final_dual;
      rep.solver_state_bytes = result.report.state_bytes_formula;
      rep.state_bytes_allocated = result.report.state_bytes_allocated;
    } else {
      stage.restart();
      EdgeAdmmResult result = admm_edge_optimize(mesh, targets.field, admm_config);
      rep.optimization_seconds = stage.seconds();
      stage.restart();
      out.distances = integrate_edge_differences(mesh, levels, result.differences);
      rep.integration_seconds = stage.seconds();
      rep.admm_iterations = result.report.iterations;
      rep.final_primal = result.report.final_primal;
      rep.final_dual = result.report.final_dual;
      rep.solver_state_bytes = result.report.state_bytes_formula;
      rep.state_bytes_allocated = result.report.state_bytes_allocated;
    }
  }
  if (rep.solver_state_bytes == 0)
    rep.solver_state_bytes = solver_state_bytes(
        mesh, opt.method == "edge" ? OptimizerKind::Edge : OptimizerKind::Face);
  rep.total_seconds = total.seconds();
#if defined(__unix__) || defined(__APPLE__)
  struct rusage usage;
  if (getrusage(RUSAGE_SELF, &usage) == 0)
    rep.peak_rss_bytes = static_cast<std::uint64_t>(usage.ru_maxrss) * 1024;
#endif
  return out;
}

void attach_reference_metrics(const TriMesh& mesh, const PipelineOptions& opt,
                              const std::string& reference, PipelineResult& result) {
  if (reference.empty()) return;
  VertexScalarField d_ref;
  if (reference == "euclid")
    d_ref = analytic_oracle(AnalyticSurface::PlaneEuclidean, mesh, opt.sources);
  else if (reference == "sphere")
    d_ref = analytic_oracle(AnalyticSurface::SphereGreatCircle, mesh, opt.sources);
  else if (reference == "dijkstra")
    d_ref = dijkstra_edge_distance(mesh, opt.sources);
  else
    throw std::invalid_argument("unknown reference '" + reference + "'");
  result.report.reference = reference;
  result.report.mean_rel_error =
      mean_relative_error(result.distances, d_ref, opt.sources, &result.report.mre_excluded);
  result.report.e2 = recovery_error(result.distances, d_ref);
}

std::vector<Index> parse_sources(const std::string& text) {
  std::vector<Index> out;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    try {
      out.push_back(static_cast<Index>(std::stol(token)));
    } catch (const std::exception&) {
      throw std::invalid_argument("bad source index '" + token + "'");
    }
  }
  return out;
}

void write_distance_output(const TriMesh& mesh, const VertexScalarField& d,
                           const std::string& out_path, const std::string& format) {
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::binary);
    if (!file) throw MeshError("cannot open output file '" + out_path + "'");
    os = &file;
  }
  if (format == "txt") write_distances_txt(*os, d);
  else if (format == "csv") write_distances_csv(*os, d);
  else if (format == "ply") save_ply(*os, mesh, &d);
  else throw std::invalid_argument("unknown output format '" + format + "'");
}

int cmd_distance(const PipelineOptions& opt, const std::string& out_path,
                 const std::string& out_format, const std::string& report_path,
                 const std::string& reference) {
  TriMesh mesh = load_mesh(opt.mesh_path);
  validate_options(mesh, opt);
  PipelineResult result = run_pipeline(mesh, opt);
  attach_reference_metrics(mesh, opt, reference, result);
  write_distance_output(mesh, result.distances, out_path, out_format);
  if (report_path.empty()) {
    result.report.write(std::cerr);
  } else {
    std::ofstream rf(report_path);
    if (!rf) throw MeshError("cannot open report file '" + report_path + "'");
    result.report.write(rf);
  }
  return 0;
}

int cmd_bench(PipelineOptions opt, const std::vector<std::string>& methods,
              const std::vector<int>& threads_list, int repeats) {
  if (repeats < 1) throw std::invalid_argument("--repeats must be >= 1");
  for (int n : threads_list)
    if (n < 1) throw std::invalid_argument("thread counts must be >= 1");
  TriMesh mesh = load_mesh(opt.mesh_path);
  if (opt.sources.empty()) opt.sources = {0};
  validate_options(mesh, opt);

  std::cout << "method,threads,repeat,vertices,edges,faces,init_seconds,diffusion_seconds,"
               "optimization_seconds,integration_seconds,total_seconds,solver_state_bytes,"
               "gs_iterations,admm_iterations,final_primal,final_dual,distance_hash\n";
  for (const std::string& method : methods) {
    for (int threads : threads_list) {
      for (int repeat = 0; repeat < repeats; ++repeat) {
        PipelineOptions run = opt;
        run.method = method;
        run.threads = threads;
        validate_options(mesh, run);
        PipelineResult result = run_pipeline(mesh, run);
        const RunReport& r = result.report;
        std::cout << method << "," << threads << "," << repeat << "," << r.vertices << ","
                  << r.edges << "," << r.faces << "," << format_double(r.init_seconds) << ","
                  << format_double(r.diffusion_seconds) << ","
                  << format_double(r.optimization_seconds) << ","
                  << format_double(r.integration_seconds) << ","
                  << format_double(r.total_seconds) << "," << r.solver_state_bytes << ","
                  << r.gs_iterations << "," << r.admm_iterations << ","
                  << format_double(r.final_primal) << "," << format_double(r.final_dual) << ","
                  << field_hash(result.distances) << "\n";
      }
    }
  }
  return 0;
}

int cmd_subdivide(const std::string& mesh_path, int levels, const std::string& out_path) {
  if (levels < 0) throw std::invalid_argument("--levels must be >= 0");
  TriMesh mesh = load_mesh(mesh_path);
  TriMesh fine = midpoint_subdivide(mesh, levels);
  save_mesh(out_path, fine);
  std::cerr << "vertices = " << fine.vertex_count() << "\nedges = " << fine.edge_count()
            << "\nfaces = " << fine.face_count() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geodesic distance on triangle meshes via a parallel heat-method pipeline"};
  app.require_subcommand(1);

  PipelineOptions opt;
  std::string source_list = "0";
  std::string out_path, out_format = "txt", report_path, reference;

  CLI::App* distance = app.add_subcommand("distance", "compute per-vertex geodesic distances");
  distance->add_option("--mesh", opt.mesh_path, "input mesh (.obj or .ply)")->required();
  distance->add_option("--source", source_list, "source vertex indices, comma separated");
  distance->add_option("--method", opt.method, "face | edge | poisson");
  distance->add_option("--m", opt.m, "smoothing factor, t = m*h^2");
  distance->add_option("--gs-iters", opt.gs_iters, "Gauss-Seidel sweeps");
  distance->add_option("--admm-iters", opt.admm_iters, "max ADMM iterations");
  distance->add_option("--mu", opt.mu, "ADMM penalty");
  distance->add_option("--eps", opt.eps, "residual threshold (and CG tolerance for poisson)");
  distance->add_option("--threads", opt.threads, "thread budget (default: GEOHEAT_THREADS or hardware)");
  distance->add_flag("--seq", opt.sequential, "force sequential execution");
  distance->add_option("--out", out_path, "output path (default: stdout)");
  distance->add_option("--out-format", out_format, "txt | ply | csv");
  distance->add_option("--report", report_path, "write the run report here instead of stderr");
  distance->add_option("--reference", reference, "compare against: euclid | sphere | dijkstra");

  std::vector<std::string> methods{"face"};
  std::vector<int> threads_list{1};
  int repeats = 1;
  CLI::App* bench = app.add_subcommand("bench", "benchmark methods over thread counts, CSV to stdout");
  bench->add_option("--mesh", opt.mesh_path, "input mesh (.obj or .ply)")->required();
  bench->add_option("--methods", methods, "methods to run")->delimiter(',');
  bench->add_option("--threads-list", threads_list, "thread counts to sweep")->delimiter(',');
  bench->add_option("--repeats", repeats, "repetitions per configuration");
  bench->add_option("--source", source_list, "source vertex indices, comma separated");
  bench->add_option("--m", opt.m, "smoothing factor");
  bench->add_option("--gs-iters", opt.gs_iters, "Gauss-Seidel sweeps");
  bench->add_option("--admm-iters", opt.admm_iters, "max ADMM iterations");
  bench->add_option("--mu", opt.mu, "ADMM penalty");
  bench->add_option("--eps", opt.eps, "residual threshold");

  std::string sub_mesh, sub_out;
  int sub_levels = 1;
  CLI::App* subdivide = app.add_subcommand("subdivide", "midpoint 1-to-4 subdivision");
  subdivide->add_option("--mesh", sub_mesh, "input mesh")->required();
  subdivide->add_option("--levels", sub_levels, "subdivision levels");
  subdivide->add_option("--out", sub_out, "output mesh path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    opt.sources = parse_sources(source_list);
    if (distance->parsed()) return cmd_distance(opt, out_path, out_format, report_path, reference);
    if (bench->parsed()) return cmd_bench(opt, methods, threads_list, repeats);
    if (subdivide->parsed()) return cmd_subdivide(sub_mesh, sub_levels, sub_out);
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return 2;
  } catch (const MeshError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
