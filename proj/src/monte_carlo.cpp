#include "conegreen/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace conegreen {

void Moments::add(double v) noexcept {
  ++count;
  const double delta = v - mean;
  mean += delta / static_cast<double>(count);
  m2 += delta * (v - mean);
}

Moments Moments::merge(const Moments& a, const Moments& b) noexcept {
  if (a.count == 0) return b;
  if (b.count == 0) return a;
  Moments m;
  m.count = a.count + b.count;
  const double na = static_cast<double>(a.count), nb = static_cast<double>(b.count);
  const double delta = b.mean - a.mean;
  m.mean = a.mean + delta * nb / (na + nb);
  m.m2 = a.m2 + b.m2 + delta * delta * na * nb / (na + nb);
  return m;
}

double Moments::stderr_of_mean() const noexcept {
  return count > 1 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
}

namespace {

std::vector<Moments> tree_merge(std::vector<std::vector<Moments>> blocks, std::size_t width) {
  if (blocks.empty()) return std::vector<Moments>(width);
  while (blocks.size() > 1) {
    std::vector<std::vector<Moments>> next;
    for (std::size_t i = 0; i + 1 < blocks.size(); i += 2) {
      std::vector<Moments> m(width);
      for (std::size_t k = 0; k < width; ++k) m[k] = Moments::merge(blocks[i][k], blocks[i + 1][k]);
      next.push_back(std::move(m));
    }
    if (blocks.size() % 2) next.push_back(std::move(blocks.back()));
    blocks = std::move(next);
  }
  return blocks.front();
}

McEstimate to_estimate(const Moments& m, std::int64_t horizon, std::uint64_t seed, std::string method) {
  McEstimate e;
  e.mean = m.mean;
  e.stderr_ = m.stderr_of_mean();
  e.replicas = m.count;
  e.horizon = horizon;
  e.seed = seed;
  e.method = std::move(method);
  return e;
}

void check_replicas(std::int64_t replicas) {
  if (replicas < 2) throw std::invalid_argument("Monte Carlo needs at least 2 replicas");
}

}  // namespace

std::vector<Moments> replicate(std::int64_t replicas, std::uint64_t seed, int threads, std::size_t width,
                               const std::function<void(RandomStream&, double*)>& sample) {
  const std::int64_t nblocks = (replicas + kReplicaBlock - 1) / kReplicaBlock;
  std::vector<std::vector<Moments>> blocks(static_cast<std::size_t>(nblocks), std::vector<Moments>(width));
  auto run_block = [&](std::int64_t b) {
    std::vector<double> out(width);
    const std::int64_t end = std::min(replicas, (b + 1) * kReplicaBlock);
    for (std::int64_t r = b * kReplicaBlock; r < end; ++r) {
      RandomStream rng(seed, static_cast<std::uint64_t>(r));
      sample(rng, out.data());
      for (std::size_t k = 0; k < width; ++k) blocks[static_cast<std::size_t>(b)][k].add(out[k]);
    }
  };
  const int workers = static_cast<int>(std::clamp<std::int64_t>(threads, 1, std::max<std::int64_t>(1, nblocks)));
  if (workers == 1) {
    for (std::int64_t b = 0; b < nblocks; ++b) run_block(b);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t)
      pool.emplace_back([&, t] {
        for (std::int64_t b = t; b < nblocks; b += workers) run_block(b);
      });
    for (auto& th : pool) th.join();
  }
  return tree_merge(std::move(blocks), width);
}

McEstimate mc_survival(const StepDistribution& dist, const Cone& cone, const Point& x, std::int64_t n,
                       std::int64_t replicas, std::uint64_t seed, int threads) {
  check_replicas(replicas);
  if (!cone.contains(x)) throw std::invalid_argument("mc_survival: start outside the cone");
  const auto m = replicate(replicas, seed, threads, 1, [&](RandomStream& rng, double* out) {
    Point z = x;
    for (std::int64_t k = 0; k < n; ++k) {
      z += dist.sample(rng);
      if (!cone.contains(z)) {
        out[0] = 0.0;
        return;
      }
    }
    out[0] = 1.0;
  });
  return to_estimate(m[0], n, seed, "plain");
}

McEstimate mc_green(const StepDistribution& dist, const Cone& cone, const Point& x, const Point& y,
                    std::int64_t horizon, std::int64_t replicas, std::uint64_t seed, int threads) {
  check_replicas(replicas);
  if (!cone.contains(x)) throw std::invalid_argument("mc_green: start outside the cone");
  if (!cone.contains(y)) {
    McEstimate e;
    e.replicas = replicas;
    e.horizon = horizon;
    e.seed = seed;
    return e;
  }
  const double at_start = (x == y) ? 1.0 : 0.0;
  const auto m = replicate(replicas, seed, threads, 1, [&](RandomStream& rng, double* out) {
    Point z = x;
    double visits = 0.0;
    for (std::int64_t k = 0; k < horizon; ++k) {
      z += dist.sample(rng);
      if (!cone.contains(z)) break;
      if (z == y) visits += 1.0;
    }
    out[0] = visits;
  });
  McEstimate e = to_estimate(m[0], horizon, seed, "plain");
  e.mean += at_start;
  return e;
}

namespace {

struct Truncated {
  std::vector<std::pair<double, double>> axis_prob;  // (signed axis value, prob) of kept atoms
  double kept = 0.0, first = 0.0, second = 0.0;
};

Truncated truncate(const StepDistribution& dist, double level, int axis, int sign) {
  if (axis < 0 || axis >= dist.dim()) throw std::invalid_argument("tilt axis out of range");
  if (sign != 1 && sign != -1) throw std::invalid_argument("tilt sign must be +1 or -1");
  Truncated t;
  for (const auto& a : dist.atoms()) {
    const double v = static_cast<double>(sign * a.step[axis]);
    if (std::abs(v) <= level) {
      t.axis_prob.emplace_back(v, a.prob);
      t.kept += a.prob;
      t.first += a.prob * v;
      t.second += a.prob * v * v;
    }
  }
  if (t.kept <= 0.0 || t.second <= 0.0)
    throw std::domain_error("degenerate tilt: truncation at " + std::to_string(level) +
                            " leaves no mass with a nonzero axis coordinate");
  return t;
}

TiltSpec fill(const Truncated& t, double y1, double gamma, double h, int axis, int sign) {
  TiltSpec s;
  s.axis = axis;
  s.sign = sign;
  s.y1 = y1;
  s.gamma = gamma;
  s.truncation = gamma * y1;
  s.h = h;
  s.kept_mass = t.kept;
  s.trunc_first = t.first;
  s.trunc_second = t.second;
  double phi = 0.0, m1 = 0.0, m2 = 0.0;
  for (auto [v, p] : t.axis_prob) {
    const double w = p * std::exp(h * v);
    phi += w;
    m1 += w * v;
    m2 += w * v * v;
  }
  s.phi = phi;
  s.tilted_mean = m1 / phi;
  s.tilted_variance = m2 / phi - s.tilted_mean * s.tilted_mean;
  return s;
}

void check_tilt_inputs(double y1, double gamma) {
  if (!(y1 > 0.0)) throw std::invalid_argument("tilt: y1 must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("tilt: gamma must lie in (0, 1)");
}

}  // namespace

TiltSpec tilt_parameters(const StepDistribution& dist, double y1, double gamma, std::int64_t n, int axis, int sign) {
  check_tilt_inputs(y1, gamma);
  if (n < 1) throw std::invalid_argument("tilt: n must be >= 1");
  const Truncated t = truncate(dist, gamma * y1, axis, sign);
  const double h = std::log1p(gamma * y1 * y1 / (static_cast<double>(n) * t.second)) / (gamma * y1);
  TiltSpec s = fill(t, y1, gamma, h, axis, sign);
  s.n = n;
  return s;
}

TiltSpec tilt_with_h(const StepDistribution& dist, double y1, double gamma, double h, int axis, int sign) {
  check_tilt_inputs(y1, gamma);
  if (!(h >= 0.0) || !std::isfinite(h)) throw std::invalid_argument("tilt: h must be finite and >= 0");
  return fill(truncate(dist, gamma * y1, axis, sign), y1, gamma, h, axis, sign);
}

double fuk_nagaev_bound(const StepDistribution& dist, double y1, double gamma, std::int64_t n, double h, int axis,
                        int sign) {
  check_tilt_inputs(y1, gamma);
  const Truncated t = truncate(dist, gamma * y1, axis, sign);
  const double gy = gamma * y1;
  const double nn = static_cast<double>(n);
  return std::exp(-h * y1 + h * nn * t.first + (std::expm1(h * gy) - h * gy) / (gy * gy) * nn * t.second);
}

double tilted_weight_bound(const TiltSpec& tilt, std::int64_t n) {
  return std::exp(-tilt.h * tilt.y1 + static_cast<double>(n) * std::log(tilt.phi));
}

TiltedEstimate mc_green_tilted(const StepDistribution& dist, const Cone& cone, const Point& x, const Point& y,
                               std::int64_t horizon, double gamma, std::int64_t replicas, std::uint64_t seed,
                               const TiltOptions& options) {
  check_replicas(replicas);
  if (!cone.contains(x)) throw std::invalid_argument("mc_green_tilted: start outside the cone");
  const int d = dist.dim();
  const Point delta = y - x;
  int axis = 0;
  if (options.axis) {
    axis = *options.axis;
  } else {
    for (int k = 1; k < d; ++k)
      if (std::llabs(delta[k]) > std::llabs(delta[axis])) axis = k;
  }
  if (axis < 0 || axis >= d) throw std::invalid_argument("mc_green_tilted: axis out of range");
  const int sign = delta[axis] < 0 ? -1 : 1;
  const double y1 = std::max(1.0, static_cast<double>(std::llabs(delta[axis])));
  const std::int64_t n_tilt =
      options.tilt_time.value_or(std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(delta.norm2() / 2.0))));

  TiltedEstimate out;
  out.tilt = options.forced_h ? tilt_with_h(dist, y1, gamma, *options.forced_h, axis, sign)
                              : tilt_parameters(dist, y1, gamma, n_tilt, axis, sign);
  out.tilt.n = n_tilt;
  const TiltSpec& tilt = out.tilt;
  const double q = std::max(0.0, 1.0 - tilt.kept_mass);
  out.remainder_bound = q * static_cast<double>(horizon) * static_cast<double>(horizon + 1) / 2.0;

  // Tilted, truncated step law.
  std::vector<Point> steps;
  std::vector<double> cdf, log_lr;
  double acc = 0.0;
  const double log_phi = std::log(tilt.phi);
  for (const auto& a : dist.atoms()) {
    const double v = static_cast<double>(sign * a.step[axis]);
    if (std::abs(v) > tilt.truncation) continue;
    steps.push_back(a.step);
    acc += a.prob * std::exp(tilt.h * v) / tilt.phi;
    cdf.push_back(acc);
    log_lr.push_back(log_phi - tilt.h * v);
  }
  cdf.back() = 1.0;
  // |log weight| grows at most linearly; keep it far from overflow.
  double max_lr = 0.0;
  for (double l : log_lr) max_lr = std::max(max_lr, std::abs(l));
  if (max_lr * static_cast<double>(horizon) > 700.0 && horizon > 1000000)
    throw std::domain_error("mc_green_tilted: log-weights may overflow at this horizon");

  McEstimate est;
  if (!cone.contains(y)) {
    est.replicas = replicas;
    est.horizon = horizon;
    est.seed = seed;
    est.method = "tilted";
    out.estimate = est;
    return out;
  }
  const double at_start = (x == y) ? 1.0 : 0.0;
  const auto m = replicate(replicas, seed, options.threads, 1, [&](RandomStream& rng, double* res) {
    Point z = x;
    double log_w = 0.0;
    double total = 0.0;
    for (std::int64_t k = 0; k < horizon; ++k) {
      const double u = rng.uniform();
      std::size_t i = 0;
      while (i + 1 < cdf.size() && u >= cdf[i]) ++i;
      z += steps[i];
      log_w += log_lr[i];
      if (!cone.contains(z)) break;
      if (z == y) total += std::exp(log_w);
    }
    res[0] = total;
  });
  est = to_estimate(m[0], horizon, seed, "tilted");
  est.mean += at_start;
  out.estimate = est;
  return out;
}

VEstimate estimate_V(const StepDistribution& dist, const Cone& cone, const Point& x,
                     std::vector<std::int64_t> schedule, std::int64_t replicas, std::uint64_t seed, int threads) {
  check_replicas(replicas);
  if (!cone.contains(x)) throw std::invalid_argument("estimate_V: start outside the cone");
  if (schedule.empty()) throw std::invalid_argument("estimate_V: empty schedule");
  std::sort(schedule.begin(), schedule.end());
  if (schedule.front() < 0) throw std::invalid_argument("estimate_V: negative time in schedule");
  const std::size_t width = schedule.size();
  const auto m = replicate(replicas, seed, threads, width, [&](RandomStream& rng, double* out) {
    Point z = x;
    std::int64_t t = 0;
    bool alive = true;
    for (std::size_t i = 0; i < width; ++i) {
      while (alive && t < schedule[i]) {
        z += dist.sample(rng);
        ++t;
        alive = cone.contains(z);
      }
      out[i] = alive ? cone.harmonic_u(z) : 0.0;
    }
  });
  VEstimate v;
  v.schedule = schedule;
  for (const auto& mm : m) {
    v.values.push_back(mm.mean);
    v.stderrs.push_back(mm.stderr_of_mean());
  }
  v.value = v.values.back();
  v.stderr_ = v.stderrs.back();
  if (width >= 2) {
    const double a = v.values[width - 2], b = v.values[width - 1];
    v.plateau = b > 0.0 && std::abs(b - a) / b < 0.05;
  }
  return v;
}

}  // namespace conegreen
