#include "conegreen/exact_dp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <thread>

#include "conegreen/profile_integral.hpp"

namespace conegreen {

std::size_t default_memory_cap() {
  if (const char* env = std::getenv("CONE_GREEN_MEMCAP_BYTES")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return kDefaultMemoryCap;
}

MemoryCapExceeded::MemoryCapExceeded(std::size_t required, std::size_t cap)
    : std::runtime_error("exact DP needs " + std::to_string(required) + " bytes, cap is " + std::to_string(cap) +
                         " bytes (set CONE_GREEN_MEMCAP_BYTES to raise it)"),
      required_(required),
      cap_(cap) {}

std::string to_string(GreenMethod m) {
  switch (m) {
    case GreenMethod::dp:
      return "dp";
    case GreenMethod::mc:
      return "mc";
    case GreenMethod::tilted:
      return "tilted";
    case GreenMethod::auto_select:
      return "auto";
  }
  return "?";
}

bool Window::inside(const Point& y) const {
  for (int k = 0; k < dim; ++k)
    if (y[k] < lo[k] || y[k] >= lo[k] + size[k]) return false;
  return true;
}

std::size_t Window::index(const Point& y) const {
  std::size_t i = 0;
  for (int k = 0; k < dim; ++k) i += static_cast<std::size_t>(y[k] - lo[k]) * static_cast<std::size_t>(stride[k]);
  return i;
}

Point Window::point(std::size_t index) const {
  Point y(dim);
  for (int k = 0; k < dim; ++k) {
    y[k] = lo[k] + static_cast<std::int64_t>(index / static_cast<std::size_t>(stride[k]));
    index %= static_cast<std::size_t>(stride[k]);
  }
  return y;
}

namespace {

struct Plan {
  Window window;
  std::vector<std::int64_t> reach_lo, reach_hi;  // unpadded window
  std::vector<std::int64_t> neg, pos;           // per-step extent below / above
  double cells = 0.0;
};

Plan make_plan(const StepDistribution& dist, const Cone& cone, const Point& x, std::int64_t horizon) {
  const int d = dist.dim();
  Plan plan;
  plan.neg.assign(d, 0);
  plan.pos.assign(d, 0);
  std::vector<std::int64_t> pad(d, 0);
  for (const auto& a : dist.atoms())
    for (int k = 0; k < d; ++k) {
      plan.neg[k] = std::max(plan.neg[k], -a.step[k]);
      plan.pos[k] = std::max(plan.pos[k], a.step[k]);
      pad[k] = std::max<std::int64_t>(pad[k], std::llabs(a.step[k]));
    }

  std::vector<double> lo_f(d), hi_f(d);
  for (int k = 0; k < d; ++k) {
    lo_f[k] = static_cast<double>(x[k]) - static_cast<double>(horizon) * static_cast<double>(plan.neg[k]);
    hi_f[k] = static_cast<double>(x[k]) + static_cast<double>(horizon) * static_cast<double>(plan.pos[k]);
  }
  // Clip to a box known to contain the cone.
  switch (cone.kind()) {
    case Cone::Kind::half_space:
      lo_f[d - 1] = std::max(lo_f[d - 1], 1.0);
      break;
    case Cone::Kind::orthant:
      for (int k = 0; k < d; ++k) lo_f[k] = std::max(lo_f[k], 1.0);
      break;
    case Cone::Kind::wedge:
      if (cone.opening() <= std::numbers::pi + 1e-9) lo_f[1] = std::max(lo_f[1], 1.0);
      if (cone.opening() <= std::numbers::pi / 2 + 1e-9) lo_f[0] = std::max(lo_f[0], 1.0);
      break;
    case Cone::Kind::full_space:
      break;
  }

  plan.cells = 1.0;
  for (int k = 0; k < d; ++k) plan.cells *= hi_f[k] - lo_f[k] + 1.0 + 2.0 * static_cast<double>(pad[k]);
  if (plan.cells > 1e15) return plan;  // caller rejects through the memory check

  auto& w = plan.window;
  w.dim = d;
  w.lo.resize(d);
  w.size.resize(d);
  w.stride.resize(d);
  plan.reach_lo.resize(d);
  plan.reach_hi.resize(d);
  for (int k = 0; k < d; ++k) {
    plan.reach_lo[k] = static_cast<std::int64_t>(lo_f[k]);
    plan.reach_hi[k] = static_cast<std::int64_t>(hi_f[k]);
    w.lo[k] = plan.reach_lo[k] - pad[k];
    w.size[k] = plan.reach_hi[k] - plan.reach_lo[k] + 1 + 2 * pad[k];
  }
  std::int64_t s = 1;
  for (int k = d - 1; k >= 0; --k) {
    w.stride[k] = s;
    s *= w.size[k];
  }
  w.cells = static_cast<std::size_t>(s);
  return plan;
}

double plan_bytes(const Plan& plan, std::int64_t horizon, bool keep_history) {
  // two layers + kill probabilities (double) + membership mask (byte)
  double per_cell = 3.0 * sizeof(double) + 1.0;
  if (keep_history) per_cell += static_cast<double>(horizon + 1) * sizeof(double);
  return plan.cells * per_cell;
}

/// Visits every row of the box [lo, hi] (all coordinates but the last), in order.
template <class F>
void for_each_row(const std::vector<std::int64_t>& lo, const std::vector<std::int64_t>& hi, F&& f) {
  const int d = static_cast<int>(lo.size());
  Point c(d);
  for (int k = 0; k < d; ++k) c[k] = lo[k];
  for (;;) {
    f(c);
    int k = d - 2;
    while (k >= 0) {
      if (++c[k] <= hi[k]) break;
      c[k] = lo[k];
      --k;
    }
    if (k < 0) return;
  }
}

}  // namespace

std::size_t killed_kernel_bytes(const StepDistribution& dist, const Cone& cone, const Point& x,
                                std::int64_t horizon, bool keep_history) {
  const Plan plan = make_plan(dist, cone, x, horizon);
  const double b = plan_bytes(plan, horizon, keep_history);
  return b > 1.8e19 ? std::numeric_limits<std::size_t>::max() : static_cast<std::size_t>(b);
}

const std::vector<double>& KilledKernel::layer_ref(std::int64_t n) const {
  if (n == horizon_) return final_layer_;
  if (n < 0 || n > horizon_) throw std::out_of_range("layer index out of range");
  if (history_.empty()) throw std::logic_error("layer " + std::to_string(n) + " requested without history");
  return history_[static_cast<std::size_t>(n)];
}

double KilledKernel::at(std::int64_t n, const Point& y) const {
  const auto& layer = layer_ref(n);
  if (y.dim() != window_.dim || !window_.inside(y)) return 0.0;
  return layer[window_.index(y)];
}

KilledKernel killed_kernel(const StepDistribution& dist, const Cone& cone, const Point& x, std::int64_t horizon,
                           const DpOptions& options) {
  const int d = dist.dim();
  if (cone.dim() != d || x.dim() != d) throw std::invalid_argument("killed_kernel: dimension mismatch");
  if (horizon < 0) throw std::invalid_argument("killed_kernel: horizon must be >= 0");
  if (!cone.contains(x)) throw std::invalid_argument("killed_kernel: start " + x.to_string() + " is outside the cone");

  Plan plan = make_plan(dist, cone, x, horizon);
  const double bytes = plan_bytes(plan, horizon, options.keep_history) +
                       static_cast<double>(options.probes.size()) * static_cast<double>(horizon + 1) * 8.0;
  if (bytes > static_cast<double>(options.memory_cap))
    throw MemoryCapExceeded(bytes > 1.8e19 ? std::numeric_limits<std::size_t>::max() : static_cast<std::size_t>(bytes),
                            options.memory_cap);

  const Window& w = plan.window;
  const std::size_t cells = w.cells;

  std::vector<std::uint8_t> alive(cells, 0);
  for_each_row(plan.reach_lo, plan.reach_hi, [&](Point c) {
    for (std::int64_t j = plan.reach_lo[d - 1]; j <= plan.reach_hi[d - 1]; ++j) {
      c[d - 1] = j;
      alive[w.index(c)] = cone.contains(c) ? 1 : 0;
    }
  });

  struct Offset {
    std::ptrdiff_t off;
    double prob;
  };
  std::vector<Offset> offsets;
  for (const auto& a : dist.atoms()) {
    std::ptrdiff_t off = 0;
    for (int k = 0; k < d; ++k) off += static_cast<std::ptrdiff_t>(a.step[k] * w.stride[k]);
    offsets.push_back({off, a.prob});
  }

  // P(next step leaves K) for every cell of the reach box; the killed-mass route.
  std::vector<double> kill_prob(cells, 0.0);
  for_each_row(plan.reach_lo, plan.reach_hi, [&](Point c) {
    c[d - 1] = plan.reach_lo[d - 1];
    const std::size_t base = w.index(c);
    const std::size_t len = static_cast<std::size_t>(plan.reach_hi[d - 1] - plan.reach_lo[d - 1] + 1);
    for (std::size_t j = 0; j < len; ++j) {
      double q = 0.0;
      for (const auto& o : offsets)
        if (!alive[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(base + j) + o.off)]) q += o.prob;
      kill_prob[base + j] = q;
    }
  });

  KilledKernel kk;
  kk.start_ = x;
  kk.horizon_ = horizon;
  kk.window_ = w;
  kk.survival_.assign(static_cast<std::size_t>(horizon + 1), 0.0);
  kk.killed_.assign(static_cast<std::size_t>(horizon + 1), 0.0);
  kk.probes_ = options.probes;
  kk.probe_series_.assign(options.probes.size(), std::vector<double>(static_cast<std::size_t>(horizon + 1), 0.0));
  std::vector<std::ptrdiff_t> probe_index;
  for (const auto& y : options.probes) {
    if (y.dim() == d && w.inside(y))
      probe_index.push_back(static_cast<std::ptrdiff_t>(w.index(y)));
    else
      probe_index.push_back(-1);
  }

  std::vector<double> cur(cells, 0.0), next(cells, 0.0);
  cur[w.index(x)] = 1.0;
  kk.survival_[0] = 1.0;
  auto record = [&](std::int64_t n, const std::vector<double>& layer) {
    for (std::size_t i = 0; i < probe_index.size(); ++i)
      if (probe_index[i] >= 0) kk.probe_series_[i][static_cast<std::size_t>(n)] = layer[static_cast<std::size_t>(probe_index[i])];
    if (options.keep_history) kk.history_.push_back(layer);
  };
  record(0, cur);

  std::vector<std::int64_t> act_lo(d), act_hi(d), prev_lo(d), prev_hi(d);
  for (int k = 0; k < d; ++k) prev_lo[k] = prev_hi[k] = x[k];
  const int threads = std::max(1, options.threads);

  for (std::int64_t n = 1; n <= horizon; ++n) {
    for (int k = 0; k < d; ++k) {
      act_lo[k] = std::max(plan.reach_lo[k], x[k] - n * plan.neg[k]);
      act_hi[k] = std::min(plan.reach_hi[k], x[k] + n * plan.pos[k]);
    }
    // Collect rows of both boxes so per-row partial sums can be reduced in a fixed order.
    std::vector<Point> rows;
    for_each_row(act_lo, act_hi, [&](const Point& c) { rows.push_back(c); });
    std::vector<Point> prev_rows;
    for_each_row(prev_lo, prev_hi, [&](const Point& c) { prev_rows.push_back(c); });
    std::vector<double> row_mass(rows.size(), 0.0), row_killed(prev_rows.size(), 0.0);

    auto gather = [&](std::size_t r0, std::size_t r1) {
      for (std::size_t r = r0; r < r1; ++r) {
        Point c = rows[r];
        c[d - 1] = act_lo[d - 1];
        const std::size_t base = w.index(c);
        const std::size_t len = static_cast<std::size_t>(act_hi[d - 1] - act_lo[d - 1] + 1);
        const double* src = cur.data() + base;
        double* dst = next.data() + base;
        const std::uint8_t* m = alive.data() + base;
        double mass = 0.0;
        for (std::size_t j = 0; j < len; ++j) {
          double acc = 0.0;
          for (const auto& o : offsets) acc += o.prob * src[static_cast<std::ptrdiff_t>(j) - o.off];
          acc = m[j] ? acc : 0.0;
          dst[j] = acc;
          mass += acc;
        }
        row_mass[r] = mass;
      }
    };
    auto kill = [&](std::size_t r0, std::size_t r1) {
      for (std::size_t r = r0; r < r1; ++r) {
        Point c = prev_rows[r];
        c[d - 1] = prev_lo[d - 1];
        const std::size_t base = w.index(c);
        const std::size_t len = static_cast<std::size_t>(prev_hi[d - 1] - prev_lo[d - 1] + 1);
        double q = 0.0;
        for (std::size_t j = 0; j < len; ++j) q += cur[base + j] * kill_prob[base + j];
        row_killed[r] = q;
      }
    };

    if (threads == 1 || rows.size() < 64) {
      gather(0, rows.size());
      kill(0, prev_rows.size());
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
          gather(rows.size() * t / threads, rows.size() * (t + 1) / threads);
          kill(prev_rows.size() * t / threads, prev_rows.size() * (t + 1) / threads);
        });
      }
      for (auto& th : pool) th.join();
    }

    double mass = 0.0;
    for (double v : row_mass) mass += v;
    double lost = 0.0;
    for (double v : row_killed) lost += v;
    kk.survival_[static_cast<std::size_t>(n)] = mass;
    kk.killed_[static_cast<std::size_t>(n)] = lost;
    std::swap(cur, next);
    record(n, cur);
    prev_lo = act_lo;
    prev_hi = act_hi;
  }
  if (options.keep_history) {
    kk.final_layer_ = kk.history_.back();
  } else {
    kk.final_layer_ = std::move(cur);
  }
  return kk;
}

double mahalanobis_sq(const StepDistribution& dist, const Point& y) {
  const int d = dist.dim();
  // Solve Sigma z = y by Gaussian elimination with partial pivoting.
  std::vector<double> a = dist.covariance();
  std::vector<double> b(d);
  for (int k = 0; k < d; ++k) b[k] = static_cast<double>(y[k]);
  std::vector<double> rhs = b;
  for (int c = 0; c < d; ++c) {
    int piv = c;
    for (int r = c + 1; r < d; ++r)
      if (std::abs(a[r * d + c]) > std::abs(a[piv * d + c])) piv = r;
    if (piv != c) {
      for (int j = 0; j < d; ++j) std::swap(a[c * d + j], a[piv * d + j]);
      std::swap(rhs[c], rhs[piv]);
    }
    for (int r = c + 1; r < d; ++r) {
      const double f = a[r * d + c] / a[c * d + c];
      for (int j = c; j < d; ++j) a[r * d + j] -= f * a[c * d + j];
      rhs[r] -= f * rhs[c];
    }
  }
  std::vector<double> z(d);
  for (int r = d - 1; r >= 0; --r) {
    double s = rhs[r];
    for (int j = r + 1; j < d; ++j) s -= a[r * d + j] * z[j];
    z[r] = s / a[r * d + r];
  }
  double q = 0.0;
  for (int k = 0; k < d; ++k) q += b[k] * z[k];
  return q;
}

double llt_tail(double p, int d, double v_x, double u_y, double modulus, std::int64_t horizon, double constant) {
  if (horizon < 1) throw std::invalid_argument("llt_tail: horizon must be >= 1");
  const double a = p + d / 2.0;
  const double m2 = modulus * modulus;
  return constant * v_x * u_y * std::pow(modulus, 2.0 - 2.0 * a) *
         profile_integral(p, d, static_cast<double>(horizon) / m2);
}

double fitted_green_tail(const std::vector<double>& series, std::int64_t period, double p, int d, double q) {
  const std::int64_t last = static_cast<std::int64_t>(series.size()) - 1;
  const double a = p + d / 2.0;
  if (last < 1) return 0.0;
  if (!(a > 1.0)) return std::numeric_limits<double>::infinity();
  const std::int64_t span = std::clamp<std::int64_t>(period, 1, last);
  double amp = 0.0;
  for (std::int64_t n = last - span + 1; n <= last; ++n) {
    const double nn = static_cast<double>(n);
    amp += series[static_cast<std::size_t>(n)] * std::pow(nn, a) * std::exp(q / (2.0 * nn));
  }
  amp /= static_cast<double>(span);
  if (amp == 0.0) return 0.0;
  // Midpoint correction: the sum over n > N is the integral from N + 1/2.
  const double horizon = static_cast<double>(last) + 0.5;
  if (q <= 0.0) return amp * std::pow(horizon, 1.0 - a) / (a - 1.0);
  return amp * std::pow(q, 1.0 - a) * profile_integral(p, d, horizon / q);
}

namespace {

GreenEstimate green_from_series(const std::vector<double>& series, const StepDistribution& dist, const Cone& cone,
                                const Point& y, std::int64_t horizon) {
  GreenEstimate g;
  g.method = GreenMethod::dp;
  g.horizon = horizon;
  for (double v : series) g.value += v;
  const std::int64_t period = std::max<std::int64_t>(1, dist.period().period);
  g.tail_estimate = fitted_green_tail(series, period, cone.p(), dist.dim(), mahalanobis_sq(dist, y));
  return g;
}

}  // namespace

GreenEstimate green_truncated(const StepDistribution& dist, const Cone& cone, const Point& x, const Point& y,
                              std::int64_t horizon, const DpOptions& options) {
  if (!cone.contains(y)) {
    GreenEstimate g;
    g.horizon = horizon;
    return g;
  }
  DpOptions opts = options;
  opts.probes = {y};
  const auto kk = killed_kernel(dist, cone, x, horizon, opts);
  return green_from_series(kk.probe_series(0), dist, cone, y, horizon);
}

GreenEstimate green_free_truncated(const StepDistribution& dist, const Point& x, const Point& y,
                                   std::int64_t horizon, const DpOptions& options) {
  return green_truncated(dist, Cone::full_space(dist.dim()), x, y, horizon, options);
}

std::vector<double> survival(const StepDistribution& dist, const Cone& cone, const Point& x, std::int64_t horizon,
                             const DpOptions& options) {
  return killed_kernel(dist, cone, x, horizon, options).survival();
}

double expected_tau_truncated(const StepDistribution& dist, const Cone& cone, const Point& x, std::int64_t T,
                              const DpOptions& options) {
  if (T <= 1) return 0.0;
  const auto s = survival(dist, cone, x, T - 1, options);
  double e = 0.0;
  for (std::int64_t n = 1; n < T; ++n)
    e += static_cast<double>(n) * (s[static_cast<std::size_t>(n - 1)] - s[static_cast<std::size_t>(n)]);
  return e;
}

}  // namespace conegreen
