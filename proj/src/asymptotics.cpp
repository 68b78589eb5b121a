#include "conegreen/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "conegreen/monte_carlo.hpp"
#include "conegreen/one_dim.hpp"

namespace conegreen {

std::int64_t HorizonPolicy::horizon_for(double modulus) const {
  if (!scaled) return fixed;
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(factor * modulus * modulus)));
}

GreenEvaluator::GreenEvaluator(StepDistribution dist, Cone cone, EvaluatorOptions options)
    : dist_(std::move(dist)), cone_(std::move(cone)), options_(std::move(options)) {
  if (dist_.dim() != cone_.dim()) throw std::invalid_argument("GreenEvaluator: dimension mismatch");
}

namespace {

std::int64_t max_horizon(const HorizonPolicy& policy, const std::vector<Point>& targets) {
  std::int64_t n = 1;
  for (const auto& y : targets) n = std::max(n, policy.horizon_for(y.norm()));
  return n;
}

}  // namespace

GreenMethod GreenEvaluator::resolve(const Point& x, const std::vector<Point>& targets) const {
  if (options_.method != GreenMethod::auto_select) return options_.method;
  const std::int64_t n = max_horizon(options_.horizon, targets);
  const std::size_t bytes = killed_kernel_bytes(dist_, cone_, x, n, false);
  if (bytes > options_.memory_cap) return GreenMethod::tilted;
  const double cells = static_cast<double>(bytes) / 25.0;
  const double work = cells * static_cast<double>(n) * static_cast<double>(dist_.atoms().size()) / 3.0;
  return work <= options_.dp_work_limit ? GreenMethod::dp : GreenMethod::tilted;
}

std::vector<GreenEstimate> GreenEvaluator::evaluate(const Point& x, const std::vector<Point>& targets) const {
  const GreenMethod method = resolve(x, targets);
  std::vector<GreenEstimate> out(targets.size());
  if (method == GreenMethod::dp) {
    const std::int64_t n = max_horizon(options_.horizon, targets);
    DpOptions dp;
    dp.memory_cap = options_.memory_cap;
    dp.threads = options_.threads;
    dp.probes = targets;
    const auto kk = killed_kernel(dist_, cone_, x, n, dp);
    const std::int64_t period = std::max<std::int64_t>(1, dist_.period().period);
    for (std::size_t i = 0; i < targets.size(); ++i) {
      auto& g = out[i];
      g.method = GreenMethod::dp;
      g.horizon = n;
      if (!cone_.contains(targets[i])) continue;
      const auto& series = kk.probe_series(i);
      for (double v : series) g.value += v;
      if (options_.add_tail)
        g.tail_estimate = fitted_green_tail(series, period, cone_.p(), dist_.dim(), mahalanobis_sq(dist_, targets[i]));
    }
    return out;
  }
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const std::int64_t n = options_.horizon.horizon_for(targets[i].norm());
    const std::uint64_t seed = mix_seed(options_.seed, i);
    McEstimate e;
    if (method == GreenMethod::mc) {
      e = mc_green(dist_, cone_, x, targets[i], n, options_.replicas, seed, options_.threads);
    } else {
      TiltOptions t;
      t.threads = options_.threads;
      e = mc_green_tilted(dist_, cone_, x, targets[i], n, options_.gamma, options_.replicas, seed, t).estimate;
    }
    out[i].value = e.mean;
    out[i].stat_error = e.stderr_;
    out[i].horizon = n;
    out[i].method = method;
  }
  return out;
}

GreenEstimate GreenEvaluator::evaluate(const Point& x, const Point& y) const { return evaluate(x, std::vector{y}).front(); }

std::optional<Point> snap_to_reachable(const StepDistribution& dist, const Cone& cone, const Point& x,
                                       const std::vector<double>& target, const Point* along) {
  const int d = dist.dim();
  if (static_cast<int>(target.size()) != d) throw std::invalid_argument("snap_to_reachable: dimension mismatch");
  Point centre(d);
  for (int k = 0; k < d; ++k) centre[k] = std::llround(target[k]);
  const std::int64_t radius = dist.max_step() + 2;
  auto dist2 = [&](const Point& z) {
    double s = 0.0;
    for (int k = 0; k < d; ++k) s += (static_cast<double>(z[k]) - target[k]) * (static_cast<double>(z[k]) - target[k]);
    return s;
  };
  std::optional<Point> best;
  double best_d = 0.0;
  auto consider = [&](const Point& z) {
    if (!cone.contains(z) || !dist.reachable(x, z)) return;
    const double dz = dist2(z);
    if (!best || dz < best_d - 1e-12 || (std::abs(dz - best_d) <= 1e-12 && z < *best)) {
      best = z;
      best_d = dz;
    }
  };
  if (along) {
    for (std::int64_t j = -radius; j <= radius; ++j) consider(centre + j * *along);
    return best;
  }
  const std::int64_t r = d <= 4 ? radius : 1;
  Point off(d);
  for (int k = 0; k < d; ++k) off[k] = -r;
  for (;;) {
    consider(centre + off);
    int k = d - 1;
    while (k >= 0 && ++off[k] > r) off[k--] = -r;
    if (k < 0) break;
  }
  return best;
}

double harmonic_V(const StepDistribution& dist, const Cone& cone, const Point& x, const HarmonicOptions& options) {
  switch (cone.kind()) {
    case Cone::Kind::full_space:
      return 1.0;
    case Cone::Kind::half_space: {
      const std::int64_t level = x[cone.dim() - 1];
      const HalfLineHarmonic v(dist.marginal(cone.dim() - 1), kDefaultLadderHorizon,
                               std::max<std::int64_t>(kDefaultRenewalSize, level));
      return v(level);
    }
    default:
      return estimate_V(dist, cone, x, options.schedule, options.replicas, options.seed, options.threads).value;
  }
}

double reversed_harmonic_V(const StepDistribution& dist, const Cone& cone, const Point& y) {
  if (cone.kind() != Cone::Kind::half_space) throw std::invalid_argument("reversed_harmonic_V: half-spaces only");
  return reversed_harmonic(dist.marginal(cone.dim() - 1), y[cone.dim() - 1]);
}

PlateauResult plateau_check(const RatioScan& scan, double tolerance) {
  PlateauResult r;
  std::vector<double> vals;
  for (const auto& row : scan.rows)
    if (row.usable && row.ratio > 0.0) vals.push_back(row.ratio);
  if (vals.size() < 2) return r;
  for (std::size_t i = 1; i < vals.size(); ++i) r.max_change = std::max(r.max_change, std::abs(vals[i] / vals[i - 1] - 1.0));
  r.pass = r.max_change <= tolerance;
  return r;
}

ExponentFit fit_exponent(const std::vector<double>& moduli, const std::vector<double>& values, double target,
                         double tolerance) {
  if (moduli.size() != values.size()) throw std::invalid_argument("fit_exponent: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < moduli.size(); ++i)
    if (moduli[i] > 0.0 && values[i] > 0.0) {
      lx.push_back(std::log(moduli[i]));
      ly.push_back(std::log(values[i]));
    }
  if (lx.size() < 3) throw std::invalid_argument("exponent fit needs at least 3 usable rows");
  const double n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx < 1e-12) throw std::invalid_argument("exponent fit: moduli do not vary");
  ExponentFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - f.intercept - f.slope * lx[i];
    ssr += e * e;
  }
  f.stderr_ = lx.size() > 2 ? std::sqrt(ssr / (n - 2) / sxx) : 0.0;
  f.target = target;
  f.tolerance = tolerance;
  f.points = lx.size();
  f.pass = std::abs(f.slope - target) <= tolerance;
  return f;
}

namespace {

double green_of(const GreenEstimate& g) { return g.total(); }

std::string describe(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v[i]);
    s += buf;
  }
  return s;
}

std::vector<double> unit(const std::vector<double>& dir) {
  double n = 0;
  for (double v : dir) n += v * v;
  n = std::sqrt(n);
  if (!(n > 0)) throw std::invalid_argument("direction must be nonzero");
  std::vector<double> u(dir);
  for (double& v : u) v /= n;
  return u;
}

// Fills targets for rows; unreachable requests become unusable rows.
std::vector<ScanRow> make_rows(const std::vector<double>& requested, const std::vector<std::optional<Point>>& snapped) {
  std::vector<ScanRow> rows(requested.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].requested = requested[i];
    if (snapped[i]) {
      rows[i].target = *snapped[i];
      rows[i].modulus = snapped[i]->norm();
    } else {
      rows[i].usable = false;
      rows[i].note = "no reachable target nearby";
    }
  }
  return rows;
}

std::vector<Point> usable_targets(const std::vector<ScanRow>& rows) {
  std::vector<Point> t;
  for (const auto& r : rows)
    if (r.usable) t.push_back(r.target);
  return t;
}

void fill_green(std::vector<ScanRow>& rows, const std::vector<GreenEstimate>& g) {
  std::size_t j = 0;
  for (auto& r : rows) {
    if (!r.usable) continue;
    r.green = green_of(g[j]);
    r.stat_error = g[j].stat_error;
    r.tail = g[j].tail_estimate;
    ++j;
  }
}

std::vector<std::optional<Point>> ray_targets(const GreenEvaluator& eval, const Point& x, const std::vector<double>& u,
                                              const std::vector<double>& moduli) {
  std::vector<std::optional<Point>> out;
  for (double m : moduli) {
    std::vector<double> t(u);
    for (double& v : t) v *= m;
    out.push_back(snap_to_reachable(eval.dist(), eval.cone(), x, t));
  }
  return out;
}

std::vector<std::optional<Point>> wall_targets(const GreenEvaluator& eval, const Point& x, std::int64_t height,
                                               const std::vector<double>& along_values) {
  const Cone& cone = eval.cone();
  const Point e = cone.wall_direction();
  const Point nrm = cone.wall_normal();
  std::vector<std::optional<Point>> out;
  for (double m : along_values) {
    std::vector<double> t(cone.dim());
    for (int k = 0; k < cone.dim(); ++k) t[k] = m * static_cast<double>(e[k]) + static_cast<double>(height * nrm[k]);
    out.push_back(snap_to_reachable(eval.dist(), cone, x, t, &e));
  }
  return out;
}

}  // namespace

RatioScan interior_ratio_scan(const GreenEvaluator& eval, const Point& x, const std::vector<double>& direction,
                              const std::vector<double>& moduli, double v_x) {
  const Cone& cone = eval.cone();
  const auto u = unit(direction);
  {
    Point far(cone.dim());
    for (int k = 0; k < cone.dim(); ++k) far[k] = std::llround(u[k] * 1e6);
    if (!cone.contains(far) || cone.dist_boundary(far) < 0.05 * far.norm())
      throw std::invalid_argument("interior scan: direction is not bounded away from the boundary");
  }
  RatioScan scan;
  scan.tag = "interior";
  scan.direction = describe(u);
  scan.rows = make_rows(moduli, ray_targets(eval, x, u, moduli));
  const auto targets = usable_targets(scan.rows);
  scan.method = eval.resolve(x, targets);
  fill_green(scan.rows, eval.evaluate(x, targets));
  const double expo = 2.0 * cone.p() + cone.dim() - 2.0;
  for (auto& r : scan.rows) {
    if (!r.usable) continue;
    r.scale = std::pow(r.modulus, expo) / (v_x * cone.harmonic_u(r.target));
    r.ratio = r.green * r.scale;
    r.ratio_error = r.stat_error * r.scale;
  }
  return scan;
}

ExponentFit interior_exponent_fit(const RatioScan& scan, const Cone& cone, double tolerance) {
  std::vector<double> m, v;
  for (const auto& r : scan.rows)
    if (r.usable) {
      m.push_back(r.modulus);
      v.push_back(r.green / cone.harmonic_u(r.target));
    }
  return fit_exponent(m, v, -(2.0 * cone.p() + cone.dim() - 2.0), tolerance);
}

ExponentFit raw_exponent_fit(const RatioScan& scan, double target, double tolerance) {
  std::vector<double> m, v;
  for (const auto& r : scan.rows)
    if (r.usable) {
      m.push_back(r.modulus);
      v.push_back(r.green);
    }
  return fit_exponent(m, v, target, tolerance);
}

RatioScan martin_ratio_scan(const GreenEvaluator& eval, const Point& x, const Point& x_prime,
                            const std::vector<double>& direction, const std::vector<double>& moduli,
                            const HarmonicOptions& harmonic) {
  const Cone& cone = eval.cone();
  if (!cone.contains(x) || !cone.contains(x_prime)) throw std::invalid_argument("martin scan: start outside the cone");
  const auto u = unit(direction);
  RatioScan scan;
  scan.tag = "martin";
  scan.direction = describe(u);
  if (x == x_prime) {
    scan.reference = 1.0;
  } else {
    HarmonicOptions h2 = harmonic;
    h2.seed = mix_seed(harmonic.seed, 1);
    scan.reference = harmonic_V(eval.dist(), cone, x, harmonic) / harmonic_V(eval.dist(), cone, x_prime, h2);
  }
  // Targets must be reachable from both starts.
  std::vector<std::optional<Point>> snapped = ray_targets(eval, x, u, moduli);
  for (auto& s : snapped)
    if (s && !eval.dist().reachable(x_prime, *s)) s.reset();
  scan.rows = make_rows(moduli, snapped);
  const auto targets = usable_targets(scan.rows);
  scan.method = eval.resolve(x, targets);
  const auto g1 = eval.evaluate(x, targets);
  EvaluatorOptions o2 = eval.options();
  o2.seed = mix_seed(o2.seed, 0x9e37);
  const auto g2 = x == x_prime ? g1 : GreenEvaluator(eval.dist(), cone, o2).evaluate(x_prime, targets);
  std::size_t j = 0;
  for (auto& r : scan.rows) {
    if (!r.usable) continue;
    const double a = green_of(g1[j]), b = green_of(g2[j]);
    r.green = a;
    r.stat_error = g1[j].stat_error;
    r.tail = g1[j].tail_estimate;
    if (b <= 0.0) {
      r.usable = false;
      r.note = "zero denominator";
    } else if (x == x_prime) {
      r.scale = 1.0 / b;
      r.ratio = 1.0;
    } else {
      r.scale = 1.0 / b;
      r.ratio = a / b;
      const double ea = a > 0 ? g1[j].stat_error / a : 0.0, eb = g2[j].stat_error / b;
      r.ratio_error = r.ratio * std::sqrt(ea * ea + eb * eb);
    }
    ++j;
  }
  return scan;
}

bool martin_pass(const RatioScan& scan, double tolerance) {
  for (auto it = scan.rows.rbegin(); it != scan.rows.rend(); ++it)
    if (it->usable) return std::abs(it->ratio / scan.reference - 1.0) <= tolerance;
  return false;
}

RatioScan halfspace_ratio_scan(const GreenEvaluator& eval, const Point& x, std::int64_t height,
                               const std::vector<double>& along_values) {
  const Cone& cone = eval.cone();
  if (cone.kind() != Cone::Kind::half_space) throw std::invalid_argument("halfspace scan: cone must be a half-space");
  RatioScan scan;
  scan.tag = "halfspace";
  scan.direction = "wall e1, height " + std::to_string(height);
  scan.rows = make_rows(along_values, wall_targets(eval, x, height, along_values));
  const auto targets = usable_targets(scan.rows);
  scan.method = eval.resolve(x, targets);
  fill_green(scan.rows, eval.evaluate(x, targets));
  const double v_x = harmonic_V(eval.dist(), cone, x);
  for (auto& r : scan.rows) {
    if (!r.usable) continue;
    r.scale = std::pow(r.modulus, cone.dim()) / (v_x * reversed_harmonic_V(eval.dist(), cone, r.target));
    r.ratio = r.green * r.scale;
    r.ratio_error = r.stat_error * r.scale;
  }
  return scan;
}

RatioScan boundary_path_scan(const GreenEvaluator& eval, const Point& x, std::int64_t height,
                             const std::vector<double>& along_values) {
  const Cone& cone = eval.cone();
  RatioScan scan;
  scan.tag = "boundary";
  scan.direction = "wall e1, height " + std::to_string(height);
  scan.rows = make_rows(along_values, wall_targets(eval, x, height, along_values));
  const auto targets = usable_targets(scan.rows);
  scan.method = eval.resolve(x, targets);
  fill_green(scan.rows, eval.evaluate(x, targets));
  const double expo = cone.p() + cone.dim() - 1.0;
  for (auto& r : scan.rows) {
    if (!r.usable) continue;
    r.scale = std::pow(r.modulus, expo);
    r.ratio = r.green * r.scale;
    r.ratio_error = r.stat_error * r.scale;
  }
  return scan;
}

ExponentFit boundary_exponent_fit(const RatioScan& scan, const Cone& cone, double tolerance) {
  return raw_exponent_fit(scan, -(cone.p() + cone.dim() - 1.0), tolerance);
}

VsigmaTable vsigma_linearity(const GreenEvaluator& eval, const Point& x, double modulus,
                             const std::vector<std::int64_t>& distances, double v_x) {
  const Cone& cone = eval.cone();
  VsigmaTable t;
  std::vector<Point> targets;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    const auto s = wall_targets(eval, x, distances[i], {modulus}).front();
    if (!s) continue;
    t.distances.push_back(distances[i]);
    targets.push_back(*s);
  }
  t.targets = targets;
  const auto g = eval.evaluate(x, targets);
  const double scale = std::pow(modulus, cone.p() + cone.dim() - 1.0) / v_x;
  for (const auto& e : g) {
    t.green.push_back(green_of(e));
    t.profile.push_back(green_of(e) * scale);
  }
  const std::size_t n = t.profile.size();
  if (n >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += static_cast<double>(t.distances[i]);
      my += t.profile[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = static_cast<double>(t.distances[i]) - mx, dy = t.profile[i] - my;
      sxx += dx * dx;
      sxy += dx * dy;
      syy += dy * dy;
    }
    if (sxx > 0) {
      t.slope = sxy / sxx;
      t.intercept = my - t.slope * mx;
      t.r_squared = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
    }
    t.increasing = true;
    for (std::size_t i = 1; i < n; ++i) t.increasing &= t.profile[i] > t.profile[i - 1];
  }
  return t;
}

double llt_profile(const StepDistribution& dist, const Cone& cone, const Point& y, std::int64_t n) {
  const double nn = static_cast<double>(n);
  return cone.harmonic_u(y) * std::pow(nn, -cone.p() / 2.0) * std::exp(-mahalanobis_sq(dist, y) / (2.0 * nn));
}

LltShape llt_shape_check(const StepDistribution& dist, const Cone& cone, const Point& x, std::int64_t n,
                         double threshold, const DpOptions& options) {
  if (n < 1) throw std::invalid_argument("llt_shape_check: n must be >= 1");
  DpOptions opts = options;
  opts.keep_history = false;
  const auto kk = killed_kernel(dist, cone, x, n, opts);
  if (!(kk.survival().back() > 0.0)) throw std::domain_error("llt_shape_check: no surviving mass at n");
  const Window& w = kk.window();
  struct Cell {
    Point y;
    double p, f;
  };
  std::vector<Cell> cells;
  double fmax = 0.0, pmax = -1.0;
  LltShape r;
  r.n = n;
  for (std::size_t i = 0; i < w.cells; ++i) {
    const Point y = w.point(i);
    if (!cone.contains(y) || !dist.reachable_at(x, y, n)) continue;
    const double f = llt_profile(dist, cone, y, n);
    const double p = kk.at(n, y);
    cells.push_back({y, p, f});
    fmax = std::max(fmax, f);
    if (p > pmax) {
      pmax = p;
      r.argmax = y;
    }
  }
  double num = 0.0, den = 0.0;
  std::vector<const Cell*> region;
  for (const auto& c : cells)
    if (c.f >= threshold * fmax) {
      region.push_back(&c);
      num += c.p * c.f;
      den += c.f * c.f;
    }
  if (region.empty() || den <= 0.0) throw std::domain_error("llt_shape_check: empty region");
  const double fit = num / den;
  for (const Cell* c : region) r.max_residual = std::max(r.max_residual, std::abs(c->p / (fit * c->f) - 1.0));
  r.cells = region.size();
  r.constant = fit * std::pow(static_cast<double>(n), cone.p() / 2.0 + cone.dim() / 2.0);
  r.argmax_profile_ratio = llt_profile(dist, cone, r.argmax, n) / fmax;
  r.argmax_ok = r.argmax_profile_ratio >= 0.95;
  return r;
}

}  // namespace conegreen
