#include "conegreen/step_models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "conegreen/cone.hpp"

namespace conegreen {

namespace {

constexpr double kProbTolerance = 1e-12;
constexpr double kMomentTolerance = 1e-10;

PeriodDescriptor describe_period(int dim, const std::vector<Atom>& atoms) {
  PeriodDescriptor pd;
  std::vector<Point> support;
  support.reserve(atoms.size());
  for (const auto& a : atoms) support.push_back(a.step);
  pd.reach = IntLattice(dim, support);
  pd.shift = support.front();
  std::vector<Point> diffs;
  for (std::size_t i = 1; i < support.size(); ++i) diffs.push_back(support[i] - support.front());
  pd.sublattice = IntLattice(dim, diffs);
  pd.full_rank = pd.reach.full_rank();
  pd.period = 0;
  if (pd.sublattice.full_rank()) {
    const std::int64_t bound = pd.sublattice.index();
    Point acc = Point::zero(dim);
    for (std::int64_t n = 1; n <= bound; ++n) {
      acc += pd.shift;
      if (pd.sublattice.contains(acc)) {
        pd.period = n;
        break;
      }
    }
  }
  return pd;
}

}  // namespace

double Pmf1D::mean() const {
  double m = 0.0;
  for (auto [v, p] : atoms) m += static_cast<double>(v) * p;
  return m;
}

double Pmf1D::second_moment() const {
  double m = 0.0;
  for (auto [v, p] : atoms) m += static_cast<double>(v) * static_cast<double>(v) * p;
  return m;
}

std::int64_t Pmf1D::max_up() const {
  std::int64_t m = 0;
  for (auto [v, p] : atoms) m = std::max(m, v);
  return m;
}

std::int64_t Pmf1D::max_down() const {
  std::int64_t m = 0;
  for (auto [v, p] : atoms) m = std::max(m, -v);
  return m;
}

Pmf1D Pmf1D::flipped() const {
  Pmf1D out;
  for (auto it = atoms.rbegin(); it != atoms.rend(); ++it) out.atoms.emplace_back(-it->first, it->second);
  return out;
}

std::int64_t Pmf1D::period() const {
  if (atoms.empty()) return 0;
  std::int64_t g = 0;
  for (auto [v, p] : atoms) g = std::gcd(g, v - atoms.front().first);
  if (g == 0) return 0;
  const std::int64_t a = ((atoms.front().first % g) + g) % g;
  return g / std::gcd(a, g);
}

StepDistribution::StepDistribution(int dim, std::vector<Atom> atoms, Kind kind, std::string label)
    : dim_(dim), kind_(kind), label_(std::move(label)) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("step distribution dimension out of range");
  if (atoms.empty()) throw std::invalid_argument("step distribution needs at least one atom");
  // Merge duplicate atoms and fix a canonical order so sampling is reproducible.
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.step < b.step; });
  for (auto& a : atoms) {
    if (a.step.dim() != dim) throw std::invalid_argument("atom dimension mismatch");
    if (!(a.prob > 0.0) || !std::isfinite(a.prob))
      throw std::invalid_argument("atom probabilities must be strictly positive");
    if (!atoms_.empty() && atoms_.back().step == a.step)
      atoms_.back().prob += a.prob;
    else
      atoms_.push_back(a);
  }
  double total = 0.0;
  for (const auto& a : atoms_) total += a.prob;
  if (std::abs(total - 1.0) > kProbTolerance)
    throw std::invalid_argument("atom probabilities sum to " + std::to_string(total) + ", not 1");

  cdf_.reserve(atoms_.size());
  double run = 0.0;
  for (const auto& a : atoms_) {
    run += a.prob;
    cdf_.push_back(run);
  }
  cdf_.back() = 1.0;

  mean_.assign(dim_, 0.0);
  cov_.assign(dim_ * dim_, 0.0);
  for (const auto& a : atoms_) {
    for (int i = 0; i < dim_; ++i) mean_[i] += a.prob * static_cast<double>(a.step[i]);
    max_step_ = std::max(max_step_, a.step.max_abs());
  }
  for (const auto& a : atoms_)
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        cov_[i * dim_ + j] += a.prob * (static_cast<double>(a.step[i]) - mean_[i]) *
                              (static_cast<double>(a.step[j]) - mean_[j]);

  period_ = describe_period(dim_, atoms_);
  if (!period_.full_rank) throw std::invalid_argument("step support does not span a full-rank lattice");
}

std::int64_t StepDistribution::max_step(int axis) const noexcept {
  std::int64_t m = 0;
  for (const auto& a : atoms_) m = std::max<std::int64_t>(m, std::llabs(a.step[axis]));
  return m;
}

StepDistribution StepDistribution::reversed() const {
  std::vector<Atom> flipped;
  flipped.reserve(atoms_.size());
  for (const auto& a : atoms_) flipped.push_back({-a.step, a.prob});
  StepDistribution out(dim_, std::move(flipped), kind_ == Kind::custom ? Kind::custom : Kind::derived,
                       label_ + "-reversed");
  out.tail_exponent_ = tail_exponent_;
  return out;
}

Pmf1D StepDistribution::marginal(int axis) const {
  if (axis < 0 || axis >= dim_) throw std::out_of_range("marginal axis out of range");
  std::map<std::int64_t, double> acc;
  for (const auto& a : atoms_) acc[a.step[axis]] += a.prob;
  Pmf1D out;
  for (auto [v, p] : acc) out.atoms.emplace_back(v, p);
  return out;
}

bool StepDistribution::reachable(const Point& from, const Point& to) const {
  return period_.reach.contains(to - from);
}

bool StepDistribution::reachable_at(const Point& from, const Point& to, std::int64_t n) const {
  return period_.sublattice.contains(to - from - n * period_.shift);
}

const Point& StepDistribution::sample(RandomStream& rng) const {
  const double u = rng.uniform();
  if (atoms_.size() <= 8) {
    std::size_t i = 0;
    while (i + 1 < cdf_.size() && u >= cdf_[i]) ++i;
    return atoms_[i].step;
  }
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return atoms_[static_cast<std::size_t>(it - cdf_.begin())].step;
}

std::pair<Point, RandomStream> sample_step(const StepDistribution& dist, RandomStream rng) {
  Point step = dist.sample(rng);
  return {step, rng};
}

StepDistribution make_simple_walk(int d) {
  if (d < 1) throw std::invalid_argument("simple walk needs d >= 1");
  std::vector<Atom> atoms;
  for (int k = 0; k < d; ++k) {
    atoms.push_back({Point::unit(d, k, +1), 1.0 / (2.0 * d)});
    atoms.push_back({Point::unit(d, k, -1), 1.0 / (2.0 * d)});
  }
  return StepDistribution(d, std::move(atoms), StepDistribution::Kind::simple, "simple");
}

Pmf1D rademacher_pmf() { return Pmf1D{{{-1, 0.5}, {1, 0.5}}}; }

Pmf1D lazy_pmf() {
  return Pmf1D{{{-2, 1.0 / 16}, {-1, 4.0 / 16}, {0, 6.0 / 16}, {1, 4.0 / 16}, {2, 1.0 / 16}}};
}

StepDistribution make_product_walk(const Pmf1D& pmf_1d, int d) {
  if (d < 1) throw std::invalid_argument("product walk needs d >= 1");
  if (pmf_1d.atoms.empty()) throw std::invalid_argument("empty 1D pmf");
  const double mean = pmf_1d.mean();
  const double var = pmf_1d.second_moment() - mean * mean;
  if (std::abs(mean) > kMomentTolerance)
    throw std::invalid_argument("product walk: 1D pmf has nonzero mean " + std::to_string(mean));
  if (std::abs(var - 1.0) > kMomentTolerance)
    throw std::invalid_argument("product walk: 1D pmf has variance " + std::to_string(var) + ", expected 1");

  std::vector<Atom> atoms{{Point::zero(d), 1.0}};
  for (int k = 0; k < d; ++k) {
    std::vector<Atom> next;
    next.reserve(atoms.size() * pmf_1d.atoms.size());
    for (const auto& a : atoms)
      for (auto [v, p] : pmf_1d.atoms) {
        Atom b = a;
        b.step[k] = v;
        b.prob *= p;
        next.push_back(b);
      }
    atoms = std::move(next);
  }
  return StepDistribution(d, std::move(atoms), StepDistribution::Kind::product, "product");
}

StepDistribution make_product_rademacher(int d) {
  auto dist = make_product_walk(rademacher_pmf(), d);
  return StepDistribution(d, dist.atoms(), StepDistribution::Kind::product, "product-rademacher");
}

StepDistribution make_product_lazy(int d) {
  auto dist = make_product_walk(lazy_pmf(), d);
  return StepDistribution(d, dist.atoms(), StepDistribution::Kind::product, "product-lazy");
}

std::vector<double> williamson_weights(double tail_exponent, int n_max) {
  std::vector<double> w(n_max);
  for (int n = 1; n <= n_max; ++n) w[n - 1] = std::log(n + 1.0) * std::exp2(-n * tail_exponent);
  return w;
}

StepDistribution make_williamson(int d, double tail_exponent, int n_max) {
  if (d < 1) throw std::invalid_argument("williamson: d must be positive");
  if (!(tail_exponent > 0.0)) throw std::invalid_argument("williamson: tail exponent must be > 0");
  if (n_max < 2) throw std::invalid_argument("williamson: n_max must be >= 2");
  if (n_max > 61) throw std::invalid_argument("williamson: n_max must be <= 61 (2^n overflows)");
  const auto w = williamson_weights(tail_exponent, n_max);
  const double norm = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<Atom> atoms;
  for (int n = 1; n <= n_max; ++n) {
    const double q = w[n - 1] / norm;
    const std::int64_t len = std::int64_t{1} << n;
    for (int k = 0; k < d; ++k) {
      atoms.push_back({len * Point::unit(d, k, +1), q / (2.0 * d)});
      atoms.push_back({len * Point::unit(d, k, -1), q / (2.0 * d)});
    }
  }
  StepDistribution dist(d, std::move(atoms), StepDistribution::Kind::williamson, "williamson");
  dist.set_tail_exponent(tail_exponent);
  return dist;
}

double moment(const StepDistribution& dist, double alpha) {
  if (alpha < 0.0) throw std::invalid_argument("moment order must be >= 0");
  double m = 0.0;
  for (const auto& a : dist.atoms()) m += a.prob * (alpha == 0.0 ? 1.0 : std::pow(a.step.norm(), alpha));
  return m;
}

double log_corrected_moment(const StepDistribution& dist, double alpha, double eps) {
  double m = 0.0;
  for (const auto& a : dist.atoms()) {
    const double r = a.step.norm();
    if (r <= 1.0) continue;
    m += a.prob * std::pow(r, alpha) / std::pow(std::log(r), 1.0 + eps);
  }
  return m;
}

double r1_threshold(double p, int d) { return p + d - 2.0 + std::max(0.0, 2.0 - p); }

bool AssumptionReport::all_ok() const {
  return mean_ok && covariance_identity_ok && r1_ok && moment_ok && lattice_full_rank;
}

AssumptionReport validate_assumptions(const StepDistribution& dist, const Cone& cone) {
  if (dist.dim() != cone.dim()) throw std::invalid_argument("validate_assumptions: dimension mismatch");
  AssumptionReport rep;
  const int d = dist.dim();
  rep.mean_ok = std::all_of(dist.mean().begin(), dist.mean().end(),
                            [](double m) { return std::abs(m) <= kMomentTolerance; });
  rep.covariance = dist.covariance();
  rep.covariance_identity_ok = true;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (std::abs(dist.covariance(i, j) - (i == j ? 1.0 : 0.0)) > kMomentTolerance)
        rep.covariance_identity_ok = false;

  const double p = cone.p();
  if (cone.kind() == Cone::Kind::full_space) {
    // Whole-space Green function: the optimal moment is E|X|^{d-2}.
    rep.r1_threshold = d - 2.0;
    rep.notes.push_back("full space: moment threshold d-2");
  } else {
    rep.r1_threshold = r1_threshold(p, d);
  }
  rep.moment_alpha = p > 2.0 ? p : 2.0;

  const auto tail = dist.tail_exponent();
  // For the untruncated Williamson family E|X|^a < infinity iff a < beta.
  auto finite = [&](double a) { return !tail || a < *tail; };
  rep.r1_ok = finite(rep.r1_threshold);
  rep.r1_plus_one_ok = finite(rep.r1_threshold + 1.0);
  // "some alpha > 2" when p <= 2: satisfiable iff beta > 2.
  rep.moment_ok = tail ? (p > 2.0 ? p < *tail : *tail > 2.0) : true;
  if (tail) rep.notes.push_back("heavy-tailed family: moments finite only below " + std::to_string(*tail));

  for (double a : {2.0, rep.moment_alpha, rep.r1_threshold, rep.r1_threshold + 1.0})
    rep.moment_values[a] = moment(dist, a);

  rep.lattice_full_rank = dist.period().full_rank;
  rep.period = dist.period().period;
  rep.sublattice_index = dist.period().sublattice.index();
  rep.cone_convex = cone.convex();
  rep.cone_smooth = cone.smooth();
  if (!rep.cone_smooth) rep.notes.push_back("cone boundary is not C^2");
  if (!rep.covariance_identity_ok) rep.notes.push_back("covariance differs from identity");
  return rep;
}

}  // namespace conegreen
