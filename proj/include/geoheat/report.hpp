#pragma once

#include "geoheat/common.hpp"

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace geoheat {

/// Convergence record of one solver invocation.
struct SolverReport {
  int iterations = 0;
  bool converged = false;
  double final_primal = 0.0;
  double final_dual = 0.0;
  std::vector<double> primal_history;
  std::vector<double> dual_history;
  std::vector<double> residual_history;  // diffusion E1 per sweep when requested
  double wall_seconds = 0.0;
  std::uint64_t state_bytes_formula = 0;
  std::uint64_t state_bytes_allocated = 0;
};

class StageTimer {
 public:
  StageTimer() : start_(clock::now()) {}
  void restart() { start_ = clock::now(); }
  double seconds() const {
    return std::chrono::duration<double>(clock::now() - start_).count();
  }

 private:
  using clock = std::chrono::steady_clock;
  clock::time_point start_;
};

inline std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

/// Full record of one pipeline run; serialized as flat `key = value` lines so
/// a report alone suffices to re-run the configuration.
struct RunReport {
  std::string method;
  std::string mesh_path;
  std::vector<Index> sources;

  Index vertices = 0;
  Index edges = 0;
  Index faces = 0;
  double quality_tau = 0.0;
  double avg_edge_length = 0.0;

  double m = 1.0;
  double t = 0.0;
  int gs_sweeps = 0;
  int admm_max_iterations = 0;
  double mu = 0.0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  int threads = 1;
  bool sequential = false;

  double init_seconds = 0.0;
  double diffusion_seconds = 0.0;
  double optimization_seconds = 0.0;
  double integration_seconds = 0.0;
  double total_seconds = 0.0;

  std::uint64_t solver_state_bytes = 0;
  std::uint64_t state_bytes_allocated = 0;
  std::uint64_t peak_rss_bytes = 0;  // 0 when the platform does not expose it
  int gs_iterations = 0;
  int admm_iterations = 0;
  int cg_iterations = 0;
  double final_primal = 0.0;
  double final_dual = 0.0;
  double diffusion_e1 = -1.0;

  std::string reference;       // empty when no reference comparison was run
  double mean_rel_error = -1.0;
  Index mre_excluded = 0;
  double e2 = -1.0;

  void write(std::ostream& os) const {
    os << "method = " << method << "\n";
    os << "mesh = " << mesh_path << "\n";
    os << "sources = " << join(sources) << "\n";
    os << "vertices = " << vertices << "\n";
    os << "edges = " << edges << "\n";
    os << "faces = " << faces << "\n";
    os << "tau = " << format_double(quality_tau) << "\n";
    os << "avg_edge_length = " << format_double(avg_edge_length) << "\n";
    os << "m = " << format_double(m) << "\n";
    os << "t = " << format_double(t) << "\n";
    os << "gs_iters = " << gs_sweeps << "\n";
    os << "admm_iters = " << admm_max_iterations << "\n";
    os << "mu = " << format_double(mu) << "\n";
    os << "eps1 = " << format_double(eps1) << "\n";
    os << "eps2 = " << format_double(eps2) << "\n";
    os << "threads = " << threads << "\n";
    os << "seq = " << (sequential ? 1 : 0) << "\n";
    os << "init_seconds = " << format_double(init_seconds) << "\n";
    os << "diffusion_seconds = " << format_double(diffusion_seconds) << "\n";
    os << "optimization_seconds = " << format_double(optimization_seconds) << "\n";
    os << "integration_seconds = " << format_double(integration_seconds) << "\n";
    os << "total_seconds = " << format_double(total_seconds) << "\n";
    os << "solver_state_bytes = " << solver_state_bytes << "\n";
    os << "state_bytes_allocated = " << state_bytes_allocated << "\n";
    if (peak_rss_bytes > 0) os << "peak_rss_bytes = " << peak_rss_bytes << "\n";
    os << "gs_iterations = " << gs_iterations << "\n";
    os << "admm_iterations = " << admm_iterations << "\n";
    os << "cg_iterations = " << cg_iterations << "\n";
    os << "final_primal = " << format_double(final_primal) << "\n";
    os << "final_dual = " << format_double(final_dual) << "\n";
    os << "diffusion_e1 = " << format_double(diffusion_e1) << "\n";
    if (!reference.empty()) {
      os << "reference = " << reference << "\n";
      os << "mean_rel_error = " << format_double(mean_rel_error) << "\n";
      os << "mean_rel_error_excluded = " << mre_excluded << "\n";
      os << "e2 = " << format_double(e2) << "\n";
    }
  }

 private:
  static std::string join(const std::vector<Index>& values) {
    std::ostringstream os;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) os << ",";
      os << values[i];
    }
    return os.str();
  }
};

/// FNV-1a over the raw bytes of a scalar field; used to compare runs for
/// bitwise-identical output.
inline std::uint64_t field_hash(const VertexScalarField& values) {
  std::uint64_t h = 1469598103934665603ull;
  const unsigned char* bytes = reinterpret_cast<const unsigned char*>(values.data());
  for (std::size_t i = 0; i < values.size() * sizeof(double); ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace geoheat
