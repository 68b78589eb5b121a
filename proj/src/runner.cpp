#include "conegreen/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "conegreen/asymptotics.hpp"
#include "conegreen/monte_carlo.hpp"
#include "conegreen/one_dim.hpp"
#include "conegreen/profile_integral.hpp"

namespace conegreen {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

class Csv {
 public:
  Csv(const std::string& command, const std::string& method, const std::string& units, bool deterministic) {
    text_ << "# cone_green " << command << "; method=" << method << "; units=" << units;
    if (!deterministic) {
      const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
      char buf[32];
      std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
      text_ << "; generated=" << buf;
    }
    text_ << '\n';
  }
  void note(const std::string& s) { text_ << "# " << s << '\n'; }
  template <class... T>
  void row(const T&... cells) {
    bool first = true;
    ((text_ << (first ? "" : ",") << cells, first = false), ...);
    text_ << '\n';
  }
  std::string str() const { return text_.str(); }

 private:
  std::ostringstream text_;
};

struct Context {
  const ExperimentConfig& cfg;
  const RunOptions& opts;
  std::ostream& out;
  std::ostream& err;

  void emit(const Csv& csv) const {
    if (opts.out_path.empty())
      out << csv.str();
    else
      write_atomic(opts.out_path, csv.str());
  }
  const Point& require_start() const {
    if (!cfg.start) throw std::invalid_argument("start is required");
    return *cfg.start;
  }
  const Point& require_target() const {
    if (!cfg.target) throw std::invalid_argument("target is required");
    return *cfg.target;
  }
  std::uint64_t require_seed() const {
    if (!cfg.seed) throw std::invalid_argument("missing seed: this command needs seed");
    return *cfg.seed;
  }
  std::vector<double> require_moduli() const {
    if (cfg.moduli.empty()) throw std::invalid_argument("target.moduli is required");
    return cfg.moduli;
  }
  DpOptions dp_options() const {
    DpOptions o;
    o.memory_cap = cfg.memory_cap;
    o.threads = cfg.threads;
    return o;
  }
  EvaluatorOptions evaluator_options() const {
    EvaluatorOptions o;
    o.method = cfg.method;
    if (cfg.horizon) {
      o.horizon.scaled = false;
      o.horizon.fixed = *cfg.horizon;
    } else {
      o.horizon.factor = cfg.horizon_factor;
    }
    o.replicas = cfg.replicas;
    o.seed = cfg.seed.value_or(1);
    o.gamma = cfg.gamma;
    o.threads = cfg.threads;
    o.memory_cap = cfg.memory_cap;
    return o;
  }
  HarmonicOptions harmonic_options() const {
    HarmonicOptions h;
    h.replicas = cfg.v_replicas;
    h.seed = mix_seed(cfg.seed.value_or(1), 0x5eed);
    h.schedule = cfg.schedule;
    h.threads = cfg.threads;
    return h;
  }
  std::int64_t horizon_for(const Point& y) const {
    return cfg.horizon ? *cfg.horizon
                       : std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(cfg.horizon_factor * y.norm2())));
  }
};

int verdict(const Context& c, const std::string& command, bool pass, const std::string& detail) {
  c.out << (pass ? "PASS " : "FAIL ") << command << ' ' << detail << '\n';
  return pass ? kExitOk : kExitFail;
}

std::vector<double> default_direction(const Cone& cone) {
  std::vector<double> d(cone.dim(), 0.0);
  switch (cone.kind()) {
    case Cone::Kind::half_space:
      d.back() = 1.0;
      break;
    case Cone::Kind::wedge:
      d[0] = std::cos(cone.opening() / 2);
      d[1] = std::sin(cone.opening() / 2);
      break;
    default:
      std::fill(d.begin(), d.end(), 1.0);
  }
  return d;
}

void scan_rows(Csv& csv, const RatioScan& scan) {
  csv.row("requested", "target", "modulus", "green", "stat_error", "tail", "scale", "ratio", "ratio_error", "usable");
  for (const auto& r : scan.rows)
    csv.row(num(r.requested), r.usable ? r.target.to_string(' ') : std::string("-"), num(r.modulus), num(r.green),
            num(r.stat_error), num(r.tail), num(r.scale), num(r.ratio), num(r.ratio_error), r.usable ? 1 : 0);
}

int green_exact(const Context& c) {
  const auto dist = build_distribution(c.cfg);
  const auto cone = build_cone(c.cfg);
  const Point& x = c.require_start();
  const Point& y = c.require_target();
  const std::int64_t n = c.horizon_for(y);
  DpOptions o = c.dp_options();
  o.probes = {y};
  const auto kk = killed_kernel(dist, cone, x, n, o);
  const auto& series = kk.probe_series(0);
  Csv csv("green-exact", "dp", "probability; partial_green in expected visits", c.opts.deterministic);
  csv.note("start=" + x.to_string(' ') + " target=" + y.to_string(' ') + " horizon=" + std::to_string(n));
  csv.row("n", "survival", "p_n_at_y", "partial_green");
  double partial = 0.0;
  for (std::int64_t k = 0; k <= n; ++k) {
    partial += series[static_cast<std::size_t>(k)];
    csv.row(k, num(kk.survival()[static_cast<std::size_t>(k)]), num(series[static_cast<std::size_t>(k)]), num(partial));
  }
  c.emit(csv);
  double tail = 0.0;
  if (cone.contains(y))
    tail = fitted_green_tail(series, std::max<std::int64_t>(1, dist.period().period), cone.p(), dist.dim(),
                             mahalanobis_sq(dist, y));
  c.out << "OK green-exact G_N=" << num(partial) << " tail_estimate=" << num(tail) << " horizon=" << n << '\n';
  return kExitOk;
}

int green_mc(const Context& c, bool tilted) {
  const auto dist = build_distribution(c.cfg);
  const auto cone = build_cone(c.cfg);
  const Point& x = c.require_start();
  const Point& y = c.require_target();
  const std::uint64_t seed = c.require_seed();
  const std::int64_t n = c.horizon_for(y);
  McEstimate e;
  Csv csv(tilted ? "green-tilted" : "green-mc", tilted ? "tilted" : "plain", "expected visits", c.opts.deterministic);
  if (tilted) {
    TiltOptions t;
    t.threads = c.cfg.threads;
    const auto r = mc_green_tilted(dist, cone, x, y, n, c.cfg.gamma, c.cfg.replicas, seed, t);
    e = r.estimate;
    csv.note("axis=" + std::to_string(r.tilt.axis) + " sign=" + std::to_string(r.tilt.sign) + " h=" + num(r.tilt.h) +
             " phi=" + num(r.tilt.phi) + " gamma=" + num(r.tilt.gamma) + " remainder_bound=" + num(r.remainder_bound));
  } else {
    e = mc_green(dist, cone, x, y, n, c.cfg.replicas, seed, c.cfg.threads);
  }
  csv.row("estimate", "stderr", "replicas", "horizon", "seed", "method");
  csv.row(num(e.mean), num(e.stderr_), e.replicas, e.horizon, e.seed, e.method);
  c.emit(csv);
  c.out << "OK " << (tilted ? "green-tilted" : "green-mc") << " estimate=" << num(e.mean) << " stderr=" << num(e.stderr_)
        << '\n';
  return kExitOk;
}

int estimate_v(const Context& c) {
  const auto dist = build_distribution(c.cfg);
  const auto cone = build_cone(c.cfg);
  const Point& x = c.require_start();
  const std::uint64_t seed = c.require_seed();
  const auto v = estimate_V(dist, cone, x, c.cfg.schedule, c.cfg.replicas, seed, c.cfg.threads);
  Csv csv("estimate-v", "plain", "E[u(x+S(n)); tau>n], horizon = n", c.opts.deterministic);
  csv.row("estimate", "stderr", "replicas", "horizon", "seed", "method");
  for (std::size_t i = 0; i < v.schedule.size(); ++i)
    csv.row(num(v.values[i]), num(v.stderrs[i]), c.cfg.replicas, v.schedule[i], seed, "plain");
  c.emit(csv);
  c.out << "OK estimate-v V=" << num(v.value) << " stderr=" << num(v.stderr_) << " plateau=" << (v.plateau ? 1 : 0)
        << '\n';
  return kExitOk;
}

int ladder(const Context& c) {
  const Pmf1D pmf = c.cfg.ladder_pmf ? *c.cfg.ladder_pmf : build_distribution(c.cfg).marginal(c.cfg.dim - 1);
  const auto law = ladder_height_pmf(pmf, c.cfg.ladder_horizon, c.cfg.ladder_kmax);
  Csv csv("ladder", "dp", "probability; renewal count", c.opts.deterministic);
  csv.note("unfinished_mass=" + num(law.unfinished_mass) + " residual=" + num(law.residual));
  csv.row("k", "ladder_pmf", "U(k)");
  for (std::int64_t k = 0; k <= law.k_max(); ++k) {
    const double h = static_cast<std::size_t>(k) < law.height_pmf.size() ? law.height_pmf[static_cast<std::size_t>(k)] : 0.0;
    csv.row(k, num(h), num(law.renewal[static_cast<std::size_t>(k)]));
  }
  c.emit(csv);
  for (const auto& w : law.warnings) c.err << "warning: " << w << '\n';
  c.out << "OK ladder mean_height=" << num(law.mean_height()) << " residual=" << num(law.residual) << '\n';
  return kExitOk;
}

int integral(const Context& c) {
  const double v = profile_integral(c.cfg.integral_p, c.cfg.integral_d, c.cfg.integral_eps);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10f", v);
  if (!c.opts.out_path.empty()) {
    Csv csv("integral", "quadrature", "dimensionless", c.opts.deterministic);
    csv.row("p", "d", "eps", "value");
    csv.row(num(c.cfg.integral_p), num(c.cfg.integral_d), num(c.cfg.integral_eps), buf);
    c.emit(csv);
  }
  c.out << buf << '\n';
  return kExitOk;
}

int verify_interior(const Context& c) {
  const GreenEvaluator ev(build_distribution(c.cfg), build_cone(c.cfg), c.evaluator_options());
  const Point& x = c.require_start();
  const auto dir = c.cfg.direction.empty() ? default_direction(ev.cone()) : c.cfg.direction;
  const double v_x = harmonic_V(ev.dist(), ev.cone(), x, c.harmonic_options());
  const auto scan = interior_ratio_scan(ev, x, dir, c.require_moduli(), v_x);
  const auto plateau = plateau_check(scan, c.cfg.plateau_tolerance);
  const auto fit = interior_exponent_fit(scan, ev.cone(), c.cfg.interior_tolerance);
  Csv csv("verify-interior", to_string(scan.method), "ratio = G |y|^(2p+d-2) / (V(x) u(y))", c.opts.deterministic);
  csv.note("V(x)=" + num(v_x) + " direction=" + scan.direction);
  scan_rows(csv, scan);
  c.emit(csv);
  return verdict(c, "verify-interior", plateau.pass && fit.pass,
                 "max_change=" + num(plateau.max_change) + " slope(G/u)=" + num(fit.slope) + " target=" + num(fit.target) +
                     " criterion=consecutive ratios within " + num(c.cfg.plateau_tolerance) + " and |slope-target|<=" +
                     num(fit.tolerance));
}

int verify_boundary(const Context& c) {
  const GreenEvaluator ev(build_distribution(c.cfg), build_cone(c.cfg), c.evaluator_options());
  const Point& x = c.require_start();
  const auto along = c.cfg.along.empty() ? c.require_moduli() : c.cfg.along;
  const auto scan = boundary_path_scan(ev, x, c.cfg.height, along);
  const auto fit = boundary_exponent_fit(scan, ev.cone(), c.cfg.boundary_tolerance);
  Csv csv("verify-boundary", to_string(scan.method), "ratio = G |y|^(p+d-1)", c.opts.deterministic);
  scan_rows(csv, scan);
  c.emit(csv);
  return verdict(c, "verify-boundary", fit.pass,
                 "slope=" + num(fit.slope) + " target=" + num(fit.target) + " criterion=|slope-target|<=" +
                     num(fit.tolerance));
}

int verify_halfspace(const Context& c) {
  const GreenEvaluator ev(build_distribution(c.cfg), build_cone(c.cfg), c.evaluator_options());
  const Point& x = c.require_start();
  const auto along = c.cfg.along.empty() ? c.require_moduli() : c.cfg.along;
  const auto scan = halfspace_ratio_scan(ev, x, c.cfg.height, along);
  const auto plateau = plateau_check(scan, c.cfg.plateau_tolerance);
  Csv csv("verify-halfspace", to_string(scan.method), "ratio = G |y|^d / (V(x) V'(y))", c.opts.deterministic);
  scan_rows(csv, scan);
  c.emit(csv);
  return verdict(c, "verify-halfspace", plateau.pass,
                 "max_change=" + num(plateau.max_change) + " criterion=consecutive ratios within " +
                     num(c.cfg.plateau_tolerance));
}

int verify_martin(const Context& c) {
  const GreenEvaluator ev(build_distribution(c.cfg), build_cone(c.cfg), c.evaluator_options());
  const Point& x = c.require_start();
  if (!c.cfg.start2) throw std::invalid_argument("start2 is required");
  const auto dir = c.cfg.direction.empty() ? default_direction(ev.cone()) : c.cfg.direction;
  const auto scan = martin_ratio_scan(ev, x, *c.cfg.start2, dir, c.require_moduli(), c.harmonic_options());
  const bool pass = martin_pass(scan, c.cfg.martin_tolerance);
  Csv csv("verify-martin", to_string(scan.method), "ratio = G(x,y) / G(x',y)", c.opts.deterministic);
  csv.note("reference V(x)/V(x')=" + num(scan.reference));
  scan_rows(csv, scan);
  c.emit(csv);
  double last = 0.0;
  for (const auto& r : scan.rows)
    if (r.usable) last = r.ratio;
  return verdict(c, "verify-martin", pass,
                 "ratio=" + num(last) + " target=" + num(scan.reference) + " criterion=|ratio/target-1|<=" +
                     num(c.cfg.martin_tolerance));
}

int verify_llt(const Context& c) {
  const auto dist = build_distribution(c.cfg);
  const auto cone = build_cone(c.cfg);
  const Point& x = c.require_start();
  const auto a = llt_shape_check(dist, cone, x, c.cfg.llt_n, 0.1, c.dp_options());
  const auto b = llt_shape_check(dist, cone, x, 4 * c.cfg.llt_n, 0.1, c.dp_options());
  Csv csv("verify-llt", "dp", "constant in n^(p/2+d/2) scale; residual relative", c.opts.deterministic);
  csv.row("n", "constant", "max_residual", "cells", "argmax", "argmax_profile_ratio");
  for (const auto& r : {a, b})
    csv.row(r.n, num(r.constant), num(r.max_residual), r.cells, r.argmax.to_string(' '), num(r.argmax_profile_ratio));
  c.emit(csv);
  const bool pass = a.max_residual < c.cfg.llt_tolerance && b.max_residual < a.max_residual;
  return verdict(c, "verify-llt", pass,
                 "residual(" + std::to_string(a.n) + ")=" + num(a.max_residual) + " residual(" + std::to_string(b.n) +
                     ")=" + num(b.max_residual) + " criterion=first<" + num(c.cfg.llt_tolerance) + " and decreasing");
}

int validate(const Context& c) {
  const auto dist = build_distribution(c.cfg);
  const auto cone = build_cone(c.cfg);
  const auto r = validate_assumptions(dist, cone);
  Csv csv("validate", "exact", "mixed", c.opts.deterministic);
  csv.row("item", "value");
  csv.row("cone", cone.name());
  csv.row("p", num(cone.p()));
  csv.row("mean_ok", r.mean_ok ? 1 : 0);
  csv.row("covariance_identity_ok", r.covariance_identity_ok ? 1 : 0);
  csv.row("moment_alpha", num(r.moment_alpha));
  csv.row("moment_ok", r.moment_ok ? 1 : 0);
  csv.row("r1_threshold", num(r.r1_threshold));
  csv.row("r1_ok", r.r1_ok ? 1 : 0);
  csv.row("r1_plus_one_ok", r.r1_plus_one_ok ? 1 : 0);
  csv.row("lattice_full_rank", r.lattice_full_rank ? 1 : 0);
  csv.row("period", r.period);
  csv.row("sublattice_index", r.sublattice_index);
  csv.row("cone_convex", r.cone_convex ? 1 : 0);
  csv.row("cone_smooth", r.cone_smooth ? 1 : 0);
  for (const auto& [alpha, v] : r.moment_values) csv.row("E|X|^" + num(alpha), num(v));
  for (const auto& n : r.notes) csv.note(n);
  c.emit(csv);
  return verdict(c, "validate", r.all_ok(), "criterion=all assumption checks hold");
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"green-exact",     "green-mc",         "green-tilted",     "estimate-v",
                                              "ladder",          "integral",         "verify-interior",  "verify-boundary",
                                              "verify-halfspace", "verify-martin",   "verify-llt",       "validate"};
  return names;
}

std::vector<std::string> command_errors(const std::string& command, const ExperimentConfig& c) {
  std::vector<std::string> e;
  const bool random = command == "green-mc" || command == "green-tilted" || command == "estimate-v";
  if (random && !c.seed) e.push_back("missing seed: " + command + " needs seed");
  const bool needs_start = command != "ladder" && command != "integral" && command != "validate";
  if (needs_start && !c.start) e.push_back("start is required for " + command);
  if (command.rfind("green-", 0) == 0 && !c.target) e.push_back("target is required for " + command);
  if ((command == "verify-interior" || command == "verify-martin") && c.moduli.empty())
    e.push_back("target.moduli is required for " + command);
  if ((command == "verify-boundary" || command == "verify-halfspace") && c.moduli.empty() && c.along.empty())
    e.push_back("target.along (or target.moduli) is required for " + command);
  if (command == "verify-martin" && !c.start2) e.push_back("start2 is required for verify-martin");
  if (command == "verify-halfspace" && c.cone_kind != "half-space")
    e.push_back("verify-halfspace needs cone.kind = half-space");
  return e;
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f << content;
    f.flush();
    if (!f) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename " + tmp.string() + " to " + target.string() + ": " + ec.message());
  }
}

int run_command(const std::string& command, const ExperimentConfig& config, const RunOptions& options,
                std::ostream& out, std::ostream& err) {
  const Context c{config, options, out, err};
  try {
    if (command == "green-exact") return green_exact(c);
    if (command == "green-mc") return green_mc(c, false);
    if (command == "green-tilted") return green_mc(c, true);
    if (command == "estimate-v") return estimate_v(c);
    if (command == "ladder") return ladder(c);
    if (command == "integral") return integral(c);
    if (command == "verify-interior") return verify_interior(c);
    if (command == "verify-boundary") return verify_boundary(c);
    if (command == "verify-halfspace") return verify_halfspace(c);
    if (command == "verify-martin") return verify_martin(c);
    if (command == "verify-llt") return verify_llt(c);
    if (command == "validate") return validate(c);
    err << "error: unknown command '" << command << "'\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitError;
}

}  // namespace conegreen
