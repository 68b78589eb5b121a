// Exact layered dynamic programming for walks killed on leaving a cone.
//
// Layer n holds p_n(y) = P(x + S(n) = y, tau_x > n) on a dense box covering
// every point reachable in N steps. Layer n+1 is gathered from layer n through
// the step atoms and zeroed outside the cone. Only two layers are kept unless
// full history is requested.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "conegreen/cone.hpp"
#include "conegreen/step_models.hpp"

namespace conegreen {

inline constexpr std::size_t kDefaultMemoryCap = std::size_t{4} << 30;

/// 4 GiB unless CONE_GREEN_MEMCAP_BYTES is set.
std::size_t default_memory_cap();

class MemoryCapExceeded : public std::runtime_error {
 public:
  MemoryCapExceeded(std::size_t required, std::size_t cap);
  std::size_t required() const noexcept { return required_; }
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t required_;
  std::size_t cap_;
};

struct DpOptions {
  std::size_t memory_cap = default_memory_cap();
  bool keep_history = false;
  /// Points whose p_n is recorded for every n.
  std::vector<Point> probes;
  int threads = 1;
};

/// Dense box of lattice cells, last coordinate contiguous.
struct Window {
  int dim = 0;
  std::vector<std::int64_t> lo;     ///< first cell of the allocated box (includes padding)
  std::vector<std::int64_t> size;   ///< extent per coordinate
  std::vector<std::int64_t> stride;
  std::size_t cells = 0;

  bool inside(const Point& y) const;
  std::size_t index(const Point& y) const;
  Point point(std::size_t index) const;
};

class KilledKernel {
 public:
  const Point& start() const noexcept { return start_; }
  std::int64_t horizon() const noexcept { return horizon_; }
  const Window& window() const noexcept { return window_; }
  /// survival()[n] = P(tau_x > n), n = 0..N.
  const std::vector<double>& survival() const noexcept { return survival_; }
  /// killed()[n] = P(tau_x = n); killed()[0] = 0.
  const std::vector<double>& killed() const noexcept { return killed_; }
  bool has_history() const noexcept { return !history_.empty(); }

  /// p_n(y); needs history unless n == N.
  double at(std::int64_t n, const Point& y) const;
  const std::vector<Point>& probes() const noexcept { return probes_; }
  const std::vector<double>& probe_series(std::size_t i) const { return probe_series_.at(i); }

  /// Calls f(y, p_n(y)) for every nonzero cell of layer n.
  template <class F>
  void for_each_cell(std::int64_t n, F&& f) const {
    const auto& layer = layer_ref(n);
    for (std::size_t i = 0; i < layer.size(); ++i)
      if (layer[i] != 0.0) f(window_.point(i), layer[i]);
  }

 private:
  friend KilledKernel killed_kernel(const StepDistribution&, const Cone&, const Point&, std::int64_t,
                                    const DpOptions&);
  const std::vector<double>& layer_ref(std::int64_t n) const;

  Point start_;
  std::int64_t horizon_ = 0;
  Window window_;
  std::vector<double> survival_;
  std::vector<double> killed_;
  std::vector<double> final_layer_;
  std::vector<std::vector<double>> history_;
  std::vector<Point> probes_;
  std::vector<std::vector<double>> probe_series_;
};

/// Bytes killed_kernel would allocate.
std::size_t killed_kernel_bytes(const StepDistribution& dist, const Cone& cone, const Point& x,
                                std::int64_t horizon, bool keep_history);

KilledKernel killed_kernel(const StepDistribution& dist, const Cone& cone, const Point& x,
                           std::int64_t horizon, const DpOptions& options = {});

enum class GreenMethod { dp, mc, tilted, auto_select };
std::string to_string(GreenMethod m);

struct GreenEstimate {
  double value = 0.0;
  double stat_error = 0.0;
  std::int64_t horizon = 0;
  /// Estimated contribution of times beyond the horizon (0 when not estimated).
  double tail_estimate = 0.0;
  GreenMethod method = GreenMethod::dp;

  double total() const noexcept { return value + tail_estimate; }
};

/// sum_{n=0}^{N} p_n(y), with an LLT tail surrogate fitted on the last period of layers.
GreenEstimate green_truncated(const StepDistribution& dist, const Cone& cone, const Point& x, const Point& y,
                              std::int64_t horizon, const DpOptions& options = {});
/// Unkilled counterpart sum_{n=0}^{N} P(x + S(n) = y).
GreenEstimate green_free_truncated(const StepDistribution& dist, const Point& x, const Point& y,
                                   std::int64_t horizon, const DpOptions& options = {});
std::vector<double> survival(const StepDistribution& dist, const Cone& cone, const Point& x,
                             std::int64_t horizon, const DpOptions& options = {});
/// E[tau_x; tau_x < T] = sum_{n<T} n P(tau_x = n).
double expected_tau_truncated(const StepDistribution& dist, const Cone& cone, const Point& x, std::int64_t T,
                              const DpOptions& options = {});

/// constant * V_x * u_y * |y|^{-2p-d+2} * int_{N/|y|^2}^inf z^{-p-d/2} e^{-1/(2z)} dz.
double llt_tail(double p, int d, double v_x, double u_y, double modulus, std::int64_t horizon,
                double constant = 1.0);

/// y^T Sigma^{-1} y for the walk's covariance Sigma.
double mahalanobis_sq(const StepDistribution& dist, const Point& y);

/// Tail of the Green sum past the last layer of `series`, from the local-limit shape
/// p_n ~ A n^{-p-d/2} exp(-q/(2n)) with A fitted on the final `period` layers.
double fitted_green_tail(const std::vector<double>& series, std::int64_t period, double p, int d, double q);

}  // namespace conegreen
